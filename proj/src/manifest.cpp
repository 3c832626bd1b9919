#include "jvtc/manifest.hpp"

#include <fstream>
#include <sstream>

#include "jvtc/config.hpp"

namespace jvtc {

std::uint64_t file_checksum(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("checksum: cannot open " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return fnv1a64(ss.str());
}

void Manifest::add_file(const std::string& name, const std::string& path) {
  artifacts.emplace_back(name, file_checksum(path));
}

void Manifest::write(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw ValidationError("cannot open for write: " + path);
  os << "command = " << command << "\n";
  os << "config_hash = " << to_hex(config_hash) << "\n";
  os << "seed = " << seed << "\n";
  for (const auto& [name, sum] : artifacts) os << "artifact " << name << " " << to_hex(sum) << "\n";
  if (!os) throw ValidationError("write failed: " + path);
}

}  // namespace jvtc
