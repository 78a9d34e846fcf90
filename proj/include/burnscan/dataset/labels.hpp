#pragma once

// Temporal label matching: a burn polygon labels a window only when its fire
// date falls in the N days up to and including the sensing date (burns after
// sensing are invisible, so the window is one-sided). Default N = 90.

#include <span>
#include <string>
#include <vector>

#include "burnscan/dataset/windows.hpp"
#include "burnscan/geo/mask.hpp"
#include "burnscan/geo/polygon.hpp"
#include "burnscan/geo/rasterize.hpp"
#include "burnscan/ingest/composite.hpp"
#include "burnscan/util/date.hpp"
#include "burnscan/util/error.hpp"

namespace burnscan::dataset {

constexpr int kDefaultLabelWindowDays = 90;

inline std::vector<geo::Polygon> filter_by_fire_date(
    std::span<const geo::Polygon> polygons, Date sensing_date,
    int window_days = kDefaultLabelWindowDays) {
  std::vector<geo::Polygon> kept;
  for (const auto& poly : polygons) {
    const auto fire = poly.fire_date();
    if (!fire)
      throw Error(Errc::missing_fire_date,
                  "polygon lacks the fire_date attribute");
    const long age = days_between(sensing_date, *fire);
    if (age >= 0 && age <= window_days) kept.push_back(poly);
  }
  return kept;
}

inline geo::BinaryMask match_labels(const geo::RasterGrid& window_grid,
                                    std::span<const geo::Polygon> polygons,
                                    Date sensing_date,
                                    int window_days = kDefaultLabelWindowDays) {
  const auto kept = filter_by_fire_date(polygons, sensing_date, window_days);
  return geo::rasterize_polygons(std::span<const geo::Polygon>(kept), window_grid);
}

enum class SplitTag { unassigned, train, test };

inline const char* split_tag_name(SplitTag t) {
  switch (t) {
    case SplitTag::train: return "train";
    case SplitTag::test: return "test";
    case SplitTag::unassigned: return "unassigned";
  }
  return "?";
}

inline SplitTag parse_split_tag(const std::string& s) {
  if (s == "train") return SplitTag::train;
  if (s == "test") return SplitTag::test;
  if (s == "unassigned") return SplitTag::unassigned;
  throw Error(Errc::parse_error, "unknown split tag \"" + s + "\"");
}

struct LabeledPatch {
  std::string patch_id;
  PatchWindow window;
  std::vector<float> channels;  // planar 3 x 128 x 128
  geo::BinaryMask label;
  Date sensing_date{};
  double burned_fraction = 0.0;
  SplitTag split_tag = SplitTag::unassigned;
};

inline std::string make_patch_id(const std::string& scene_id, long row_off,
                                 long col_off) {
  return scene_id + "_r" + std::to_string(row_off) + "_c" + std::to_string(col_off);
}

// Cuts one labeled patch out of a composite. Patches containing any invalid
// pixel are rejected (signalled by nullopt) rather than imputed.
inline std::optional<LabeledPatch> make_patch(
    const ingest::CompositeRaster& comp, const PatchWindow& window,
    std::span<const geo::Polygon> polygons,
    int window_days = kDefaultLabelWindowDays) {
  const std::size_t plane = comp.plane_size();
  const std::size_t patch_plane = std::size_t(kPatchSize) * kPatchSize;

  for (long r = 0; r < kPatchSize; ++r)
    for (long c = 0; c < kPatchSize; ++c)
      if (!comp.valid.at(window.row_off + r, window.col_off + c))
        return std::nullopt;

  LabeledPatch p;
  p.patch_id = make_patch_id(window.scene_id, window.row_off, window.col_off);
  p.window = window;
  p.sensing_date = comp.sensing_date;
  p.channels.resize(patch_plane * ingest::kCompositeChannels);
  for (int ch = 0; ch < ingest::kCompositeChannels; ++ch)
    for (long r = 0; r < kPatchSize; ++r) {
      const auto* src = comp.channels.data() + std::size_t(ch) * plane +
                        std::size_t(window.row_off + r) * comp.grid.width +
                        window.col_off;
      std::copy(src, src + kPatchSize,
                p.channels.data() + std::size_t(ch) * patch_plane +
                    std::size_t(r) * kPatchSize);
    }
  p.label = match_labels(window.grid, polygons, comp.sensing_date, window_days);
  p.burned_fraction = double(p.label.count()) / double(patch_plane);
  return p;
}

struct ExtractionResult {
  std::vector<LabeledPatch> patches;
  long windows_total = 0;
  long dropped_invalid = 0;
};

inline ExtractionResult extract_patches(const ingest::CompositeRaster& comp,
                                        std::span<const geo::Polygon> polygons,
                                        long stride = kPatchSize,
                                        int window_days = kDefaultLabelWindowDays) {
  ExtractionResult out;
  const auto windows = extract_windows(comp, stride);
  out.windows_total = long(windows.size());
  for (const auto& w : windows) {
    auto p = make_patch(comp, w, polygons, window_days);
    if (p) out.patches.push_back(std::move(*p));
    else ++out.dropped_invalid;
  }
  return out;
}

// Keeps patches whose burned fraction exceeds the threshold; the default
// keeps anything with at least one burned pixel.
inline std::vector<LabeledPatch> filter_burned(std::vector<LabeledPatch> patches,
                                               double min_burned_fraction = 0.0) {
  std::vector<LabeledPatch> kept;
  kept.reserve(patches.size());
  for (auto& p : patches)
    if (p.burned_fraction > min_burned_fraction) kept.push_back(std::move(p));
  return kept;
}

}  // namespace burnscan::dataset
