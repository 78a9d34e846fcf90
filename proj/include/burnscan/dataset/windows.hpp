#pragma once

// Patch window tiling: fixed 128x128 windows on a regular stride from the
// raster origin; windows that would cross the edge are dropped, not padded.

#include <string>
#include <vector>

#include "burnscan/geo/grid.hpp"
#include "burnscan/ingest/composite.hpp"
#include "burnscan/util/error.hpp"

namespace burnscan::dataset {

constexpr long kPatchSize = 128;

struct PatchWindow {
  std::string scene_id;
  long row_off = 0;
  long col_off = 0;
  geo::RasterGrid grid;  // georeferenced 128x128 sub-grid

  bool operator==(const PatchWindow&) const = default;
};

inline std::vector<PatchWindow> extract_windows(const geo::RasterGrid& grid,
                                                const std::string& scene_id,
                                                long stride = kPatchSize) {
  if (stride < 1)
    throw Error(Errc::invalid_argument, "window stride must be >= 1");
  std::vector<PatchWindow> out;
  if (grid.height < kPatchSize || grid.width < kPatchSize) return out;
  const long rows = (grid.height - kPatchSize) / stride + 1;
  const long cols = (grid.width - kPatchSize) / stride + 1;
  out.reserve(std::size_t(rows) * cols);
  for (long r = 0; r < rows; ++r)
    for (long c = 0; c < cols; ++c)
      out.push_back({scene_id, r * stride, c * stride,
                     grid.window(r * stride, c * stride, kPatchSize, kPatchSize)});
  return out;
}

inline std::vector<PatchWindow> extract_windows(const ingest::CompositeRaster& c,
                                                long stride = kPatchSize) {
  return extract_windows(c.grid, c.scene_id, stride);
}

}  // namespace burnscan::dataset
