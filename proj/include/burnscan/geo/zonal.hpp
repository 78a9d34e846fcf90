#pragma once

#include <vector>

#include "burnscan/geo/rasterize.hpp"

namespace burnscan::geo {

struct ZonalResult {
  double fraction = 0.0;
  long n_zone_pixels = 0;    // pixel centers inside the zone
  long n_positive = 0;       // of those, mask == 1
  bool zero_zone = false;    // no pixel center fell inside the zone
};

// Fraction of mask==1 pixels among the pixels whose centers fall in the
// zone. Sub-pixel zones are legitimate at 20 m, so an empty zone yields
// fraction 0 with the zero_zone flag set rather than an error.
inline ZonalResult zonal_fraction(const BinaryMask& mask, const Polygon& zone) {
  if (!zone.crs_id.empty() && !mask.grid.crs_id.empty() && zone.crs_id != mask.grid.crs_id)
    throw Error(Errc::crs_mismatch,
                "zone CRS " + zone.crs_id + " differs from mask CRS " + mask.grid.crs_id);
  const BinaryMask zone_mask = rasterize_polygons(std::span<const Polygon>(&zone, 1), mask.grid);
  ZonalResult res;
  for (std::size_t i = 0; i < zone_mask.data.size(); ++i) {
    if (!zone_mask.data[i]) continue;
    ++res.n_zone_pixels;
    res.n_positive += mask.data[i];
  }
  if (res.n_zone_pixels == 0) {
    res.zero_zone = true;
    return res;
  }
  res.fraction = double(res.n_positive) / double(res.n_zone_pixels);
  return res;
}

// Same statistic restricted to pixels flagged valid (used for mosaics where
// parts of the grid were never covered by a scene).
inline ZonalResult zonal_fraction(const BinaryMask& mask, const BinaryMask& valid,
                                  const Polygon& zone) {
  if (valid.grid != mask.grid)
    throw Error(Errc::grid_mismatch, "validity mask grid differs from value mask grid");
  if (!zone.crs_id.empty() && !mask.grid.crs_id.empty() && zone.crs_id != mask.grid.crs_id)
    throw Error(Errc::crs_mismatch,
                "zone CRS " + zone.crs_id + " differs from mask CRS " + mask.grid.crs_id);
  const BinaryMask zone_mask = rasterize_polygons(std::span<const Polygon>(&zone, 1), mask.grid);
  ZonalResult res;
  for (std::size_t i = 0; i < zone_mask.data.size(); ++i) {
    if (!zone_mask.data[i] || !valid.data[i]) continue;
    ++res.n_zone_pixels;
    res.n_positive += mask.data[i];
  }
  if (res.n_zone_pixels == 0) {
    res.zero_zone = true;
    return res;
  }
  res.fraction = double(res.n_positive) / double(res.n_zone_pixels);
  return res;
}

}  // namespace burnscan::geo
