#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

#include "burnscan/geo/grid.hpp"
#include "burnscan/util/error.hpp"

namespace burnscan::geo {

// Georeferenced {0,1} raster, row-major.
struct BinaryMask {
  RasterGrid grid;
  std::vector<std::uint8_t> data;

  BinaryMask() = default;
  explicit BinaryMask(RasterGrid g)
      : grid(std::move(g)), data(std::size_t(grid.width) * std::size_t(grid.height), 0) {}
  BinaryMask(RasterGrid g, std::vector<std::uint8_t> d)
      : grid(std::move(g)), data(std::move(d)) {}

  std::uint8_t& at(long row, long col) { return data[std::size_t(row) * grid.width + col]; }
  std::uint8_t at(long row, long col) const { return data[std::size_t(row) * grid.width + col]; }

  std::size_t size() const { return data.size(); }

  long count() const { return std::accumulate(data.begin(), data.end(), 0L); }

  void validate() const {
    grid.validate();
    if (data.size() != std::size_t(grid.width) * std::size_t(grid.height))
      throw Error(Errc::invalid_grid, "mask data shape does not match grid dimensions");
    for (std::uint8_t v : data)
      if (v > 1) throw Error(Errc::invalid_grid, "mask values must be 0 or 1");
  }
};

inline BinaryMask mask_or(const BinaryMask& a, const BinaryMask& b) {
  if (a.grid != b.grid || a.data.size() != b.data.size())
    throw Error(Errc::shape_mismatch, "mask_or requires identical grids");
  BinaryMask out(a.grid);
  for (std::size_t i = 0; i < a.data.size(); ++i) out.data[i] = a.data[i] | b.data[i];
  return out;
}

}  // namespace burnscan::geo
