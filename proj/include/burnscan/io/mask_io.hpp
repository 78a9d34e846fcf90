#pragma once

// Binary masks travel as single-band 8-bit GeoTIFFs: 1 burned, 0 unburned,
// 255 nodata (outside valid data).

#include <optional>
#include <string>

#include "burnscan/geo/mask.hpp"
#include "burnscan/io/geotiff.hpp"

namespace burnscan::io {

constexpr std::uint8_t kMaskNodata = 255;

struct MaskWithValidity {
  geo::BinaryMask mask;    // 1 where burned
  geo::BinaryMask valid;   // 1 where the pixel carries data
};

inline void write_mask(const std::string& path, const geo::BinaryMask& mask,
                       const geo::BinaryMask* valid = nullptr,
                       TiffCompression comp = TiffCompression::deflate) {
  std::vector<std::uint8_t> data(mask.data);
  if (valid) {
    if (!(valid->grid == mask.grid))
      throw Error(Errc::grid_mismatch, "validity mask grid differs from mask grid");
    for (std::size_t i = 0; i < data.size(); ++i)
      if (!valid->data[i]) data[i] = kMaskNodata;
  }
  write_geotiff<std::uint8_t>(path, mask.grid, 1, data, double(kMaskNodata), comp);
}

inline MaskWithValidity read_mask(const std::string& path) {
  const auto img = read_geotiff<std::uint8_t>(path);
  if (img.info.samples != 1)
    throw Error(Errc::read_failure, path + ": mask must be single-band");
  const std::uint8_t nodata =
      img.info.nodata ? std::uint8_t(*img.info.nodata) : kMaskNodata;
  MaskWithValidity out;
  out.mask.grid = img.info.grid;
  out.valid.grid = img.info.grid;
  out.mask.data.resize(img.data.size());
  out.valid.data.resize(img.data.size());
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    const bool is_nodata = img.data[i] == nodata;
    out.valid.data[i] = is_nodata ? 0 : 1;
    out.mask.data[i] = (!is_nodata && img.data[i] != 0) ? 1 : 0;
  }
  return out;
}

}  // namespace burnscan::io
