#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "jvtc/types.hpp"

namespace jvtc {

/// Reproducibility record written next to every command's outputs: the
/// config fingerprint, the seed, and a checksum per produced artifact.
struct Manifest {
  std::string command;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::uint64_t>> artifacts;

  void add_file(const std::string& name, const std::string& path);
  void write(const std::string& path) const;
};

std::uint64_t file_checksum(const std::string& path);

}  // namespace jvtc
