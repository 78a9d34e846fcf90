#pragma once

#include <cmath>
#include <span>
#include <string>

#include <json.hpp>

#include "burnscan/geo/mask.hpp"
#include "burnscan/transfer/mosaic.hpp"
#include "burnscan/transfer/series.hpp"
#include "burnscan/util/error.hpp"

namespace burnscan::transfer {

// Coarse burned-area product on its own grid. Validity is separate from the
// burn flag so water/no-data cells drop out of the comparison.
struct ReferenceMask {
  geo::BinaryMask burned;
  geo::BinaryMask valid;
};

// Burn-date convention: positive = burned (day of year), zero = unburned,
// negative or non-finite = unmappable.
inline ReferenceMask reference_from_values(const geo::RasterGrid& grid,
                                           std::span<const float> values) {
  if (values.size() != std::size_t(grid.width) * std::size_t(grid.height))
    throw Error(Errc::shape_mismatch, "reference values do not match grid shape");
  ReferenceMask ref{geo::BinaryMask(grid), geo::BinaryMask(grid)};
  for (std::size_t i = 0; i < values.size(); ++i) {
    const float v = values[i];
    if (!std::isfinite(v) || v < 0.0f) continue;
    ref.valid.data[i] = 1;
    ref.burned.data[i] = v > 0.0f ? 1 : 0;
  }
  return ref;
}

struct ComparisonReport {
  std::string period;
  long agree_burned = 0;
  long ours_only = 0;
  long reference_only = 0;
  long agree_unburned = 0;
  long n_compared = 0;  // always the sum of the four counts
  double pixel_area_km2 = 0.0;

  double area_km2(long count) const { return double(count) * pixel_area_km2; }
};

// Nearest-neighbor lookup of the coarse reference under each fine mosaic
// pixel center; pixels outside the reference or invalid on either side are
// not compared.
inline ComparisonReport compare_reference(const RegionMosaic& mosaic,
                                          const ReferenceMask& reference) {
  if (reference.burned.grid != reference.valid.grid)
    throw Error(Errc::grid_mismatch, "reference masks disagree on their grid");
  const auto& rg = reference.burned.grid;
  if (!mosaic.grid.crs_id.empty() && !rg.crs_id.empty() &&
      mosaic.grid.crs_id != rg.crs_id)
    throw Error(Errc::crs_mismatch, "reference CRS " + rg.crs_id +
                                        " differs from mosaic CRS " +
                                        mosaic.grid.crs_id);

  ComparisonReport rep;
  rep.period = period_label(mosaic.period);
  rep.pixel_area_km2 = pixel_area_km2(mosaic.grid);
  for (long r = 0; r < mosaic.grid.height; ++r)
    for (long c = 0; c < mosaic.grid.width; ++c) {
      const std::size_t i = std::size_t(r) * mosaic.grid.width + c;
      if (!mosaic.valid.data[i]) continue;
      const geo::Point w = mosaic.grid.pixel_to_world(r, c);
      const auto p = rg.world_to_pixel(w.x, w.y);
      if (!rg.contains(p.row, p.col)) continue;
      if (!reference.valid.at(p.row, p.col)) continue;
      const bool ours = mosaic.burned.data[i] != 0;
      const bool ref = reference.burned.at(p.row, p.col) != 0;
      if (ours && ref) ++rep.agree_burned;
      else if (ours) ++rep.ours_only;
      else if (ref) ++rep.reference_only;
      else ++rep.agree_unburned;
    }
  rep.n_compared =
      rep.agree_burned + rep.ours_only + rep.reference_only + rep.agree_unburned;
  if (rep.n_compared == 0)
    throw Error(Errc::no_overlap, "mosaic and reference share no valid pixels");
  return rep;
}

inline nlohmann::json to_json(const ComparisonReport& r) {
  return {{"period", r.period},
          {"agree_burned", r.agree_burned},
          {"ours_only", r.ours_only},
          {"reference_only", r.reference_only},
          {"agree_unburned", r.agree_unburned},
          {"n_compared", r.n_compared},
          {"pixel_area_km2", r.pixel_area_km2},
          {"agree_burned_km2", r.area_km2(r.agree_burned)},
          {"ours_only_km2", r.area_km2(r.ours_only)},
          {"reference_only_km2", r.area_km2(r.reference_only)},
          {"agree_unburned_km2", r.area_km2(r.agree_unburned)}};
}

}  // namespace burnscan::transfer
