#pragma once

// 8-bit RGB PNG writer for quicklook plots. Output is deterministic:
// fixed zlib level, filter 0 on every scanline, no ancillary chunks.

#include <zlib.h>

#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "burnscan/util/error.hpp"

namespace burnscan::io {

namespace detail {

inline void png_put32(std::vector<std::uint8_t>& v, std::uint32_t x) {
  v.push_back(std::uint8_t(x >> 24));
  v.push_back(std::uint8_t(x >> 16));
  v.push_back(std::uint8_t(x >> 8));
  v.push_back(std::uint8_t(x));
}

inline void png_chunk(std::vector<std::uint8_t>& out, const char type[4],
                      std::span<const std::uint8_t> payload) {
  png_put32(out, std::uint32_t(payload.size()));
  const std::size_t crc_start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), payload.begin(), payload.end());
  const auto crc = ::crc32(0, out.data() + crc_start, uInt(out.size() - crc_start));
  png_put32(out, std::uint32_t(crc));
}

}  // namespace detail

// rgb: row-major interleaved, 3 bytes per pixel.
inline void write_png_rgb(const std::string& path, int width, int height,
                          std::span<const std::uint8_t> rgb) {
  if (width <= 0 || height <= 0 ||
      rgb.size() != std::size_t(width) * height * 3)
    throw Error(Errc::write_failure, "PNG dimensions do not match pixel buffer");

  std::vector<std::uint8_t> raw;
  raw.reserve(std::size_t(height) * (std::size_t(width) * 3 + 1));
  for (int y = 0; y < height; ++y) {
    raw.push_back(0);  // filter type none
    const auto* row = rgb.data() + std::size_t(y) * width * 3;
    raw.insert(raw.end(), row, row + std::size_t(width) * 3);
  }
  uLongf zlen = compressBound(uLong(raw.size()));
  std::vector<std::uint8_t> zdata(zlen);
  if (::compress2(zdata.data(), &zlen, raw.data(), uLong(raw.size()), 6) != Z_OK)
    throw Error(Errc::write_failure, path + ": deflate failed");
  zdata.resize(zlen);

  std::vector<std::uint8_t> out;
  static const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  out.insert(out.end(), sig, sig + 8);

  std::vector<std::uint8_t> ihdr;
  detail::png_put32(ihdr, std::uint32_t(width));
  detail::png_put32(ihdr, std::uint32_t(height));
  ihdr.push_back(8);   // bit depth
  ihdr.push_back(2);   // color type: truecolor
  ihdr.push_back(0);   // compression
  ihdr.push_back(0);   // filter
  ihdr.push_back(0);   // interlace
  detail::png_chunk(out, "IHDR", ihdr);
  detail::png_chunk(out, "IDAT", zdata);
  detail::png_chunk(out, "IEND", {});

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(Errc::write_failure, "cannot open " + path + " for writing");
  f.write(reinterpret_cast<const char*>(out.data()), std::streamsize(out.size()));
  if (!f) throw Error(Errc::write_failure, "short write to " + path);
}

}  // namespace burnscan::io
