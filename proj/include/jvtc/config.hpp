#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "jvtc/types.hpp"

namespace jvtc {

/// Plain-text `key = value` configuration. Lines starting with '#' and blank
/// lines are ignored. Values keep everything after the first '=' (trimmed),
/// so list-valued keys are space-separated in one line.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig parse_file(const std::string& path);
  static KeyValueConfig parse_string(const std::string& text);

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;

  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  /// Canonical serialization (sorted keys), used for config hashing.
  std::string canonical() const;

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// FNV-1a 64-bit over a byte string; stable content fingerprint for manifests.
std::uint64_t fnv1a64(const std::string& bytes);

std::string to_hex(std::uint64_t v);

}  // namespace jvtc
