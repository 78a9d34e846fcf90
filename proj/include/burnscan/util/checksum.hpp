#pragma once

#include <zlib.h>

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "burnscan/util/error.hpp"

namespace burnscan {

inline std::uint32_t crc32_update(std::uint32_t crc, const void* data, std::size_t len) {
  return std::uint32_t(::crc32(crc, static_cast<const Bytef*>(data), uInt(len)));
}

inline std::uint32_t crc32_bytes(const void* data, std::size_t len) {
  return crc32_update(std::uint32_t(::crc32(0L, Z_NULL, 0)), data, len);
}

inline std::uint32_t crc32_bytes(const std::string& s) {
  return crc32_bytes(s.data(), s.size());
}

inline std::uint32_t crc32_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::read_failure, "cannot open " + path);
  std::uint32_t crc = std::uint32_t(::crc32(0L, Z_NULL, 0));
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
    crc = crc32_update(crc, buf, std::size_t(in.gcount()));
  return crc;
}

// FNV-1a, used for config hashes in run records.
inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace burnscan
