#pragma once

// Synthetic scene generator for tests and smoke runs. Scenes carry a known
// burn signature (raised shortwave infrared, lowered near infrared) over
// star-convex polygons on a noisy background, so a segmentation model has a
// real boundary to learn and every label pixel has ground truth. Output is
// fully determined by the spec, including the seed.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "burnscan/dataset/labels.hpp"
#include "burnscan/geo/polygon.hpp"
#include "burnscan/geo/rasterize.hpp"
#include "burnscan/ingest/composite.hpp"
#include "burnscan/util/date.hpp"
#include "burnscan/util/rng.hpp"

namespace burnscan::dataset {

struct SyntheticSpec {
  long size = 256;  // square scene edge in pixels, >= patch size
  int n_burns = 3;
  int n_stale_burns = 0;  // recovered burns: polygon present, signature absent
  std::uint64_t seed = 0;
  std::string scene_id = "SYNTH";
  Date sensing_date = parse_date("2017-08-15");
  int window_days = kDefaultLabelWindowDays;
  double noise_sigma = 0.05;
  double min_radius_frac = 0.06;  // burn radius bounds as fraction of scene edge
  double max_radius_frac = 0.16;
  bool full_extent_burn = false;  // one burn covering the whole scene

  // Background reflectance means, channel order NIR / green / SWIR.
  static constexpr float kBackground[3] = {0.30f, 0.12f, 0.15f};
  // Additive burn signature on the means.
  static constexpr float kBurnDelta[3] = {-0.20f, 0.0f, 0.30f};
};

struct SyntheticScene {
  ingest::CompositeRaster composite;
  std::vector<geo::Polygon> burns;  // fresh and stale, all with fire_date set
  geo::BinaryMask truth;            // pixels carrying the signature
};

namespace detail {

// Star-convex ring: vertices at fixed angular steps around a random center,
// radius jittered per vertex, so edges never self-intersect.
inline geo::Polygon random_burn(Rng& rng, const geo::RasterGrid& grid,
                                const SyntheticSpec& spec) {
  constexpr int kVerts = 12;
  const double margin = 0.1 * double(spec.size);
  const double cx = rng.uniform(margin, double(spec.size) - margin);
  const double cy = rng.uniform(margin, double(spec.size) - margin);
  const double base =
      rng.uniform(spec.min_radius_frac, spec.max_radius_frac) * double(spec.size);
  geo::Polygon poly;
  poly.crs_id = grid.crs_id;
  poly.exterior.pts.reserve(kVerts + 1);
  for (int k = 0; k < kVerts; ++k) {
    const double angle = 2.0 * std::numbers::pi * k / kVerts;
    const double radius = base * rng.uniform(0.6, 1.4);
    const auto p = grid.transform.apply(cx + radius * std::cos(angle),
                                        cy + radius * std::sin(angle));
    poly.exterior.pts.push_back(p);
  }
  poly.exterior.pts.push_back(poly.exterior.pts.front());
  return poly;
}

}  // namespace detail

inline SyntheticScene generate_synthetic_scene(const SyntheticSpec& spec) {
  if (spec.size < kPatchSize)
    throw Error(Errc::invalid_argument, "synthetic scene edge must be >= 128 pixels");
  if (spec.n_burns < 0 || spec.n_stale_burns < 0)
    throw Error(Errc::invalid_argument, "burn counts must be non-negative");
  if (spec.noise_sigma < 0.0)
    throw Error(Errc::invalid_argument, "noise sigma must be non-negative");
  if (!(spec.min_radius_frac > 0.0) || spec.max_radius_frac < spec.min_radius_frac)
    throw Error(Errc::invalid_argument, "burn radius bounds are inverted or zero");

  geo::RasterGrid grid;
  grid.crs_id = "EPSG:32636";
  grid.width = spec.size;
  grid.height = spec.size;
  grid.transform = {600000.0, 20.0, 0.0, 4400000.0, 0.0, -20.0};

  SyntheticScene scene;
  Rng rng(spec.seed);

  // Burn geometry first, then fire dates, then noise: the draw order is part
  // of the determinism contract.
  std::vector<geo::Polygon> fresh;
  if (spec.full_extent_burn) {
    fresh.push_back(geo::grid_extent_polygon(grid));
  } else {
    for (int i = 0; i < spec.n_burns; ++i)
      fresh.push_back(detail::random_burn(rng, grid, spec));
  }
  std::vector<geo::Polygon> stale;
  for (int i = 0; i < spec.n_stale_burns; ++i)
    stale.push_back(detail::random_burn(rng, grid, spec));

  for (auto& p : fresh) {
    const long age = rng.uniform_int(0, spec.window_days);
    p.attributes[geo::Polygon::kFireDateKey] =
        format_date(spec.sensing_date - std::chrono::days(age));
  }
  for (auto& p : stale) {
    const long age = spec.window_days + 1 + rng.uniform_int(0, 275);
    p.attributes[geo::Polygon::kFireDateKey] =
        format_date(spec.sensing_date - std::chrono::days(age));
  }

  scene.truth = geo::rasterize_polygons(std::span<const geo::Polygon>(fresh), grid);

  auto& comp = scene.composite;
  comp.grid = grid;
  comp.scene_id = spec.scene_id;
  comp.sensing_date = spec.sensing_date;
  const std::size_t plane = std::size_t(spec.size) * spec.size;
  comp.channels.resize(plane * ingest::kCompositeChannels);
  comp.valid = geo::BinaryMask(grid);
  std::fill(comp.valid.data.begin(), comp.valid.data.end(), std::uint8_t(1));
  for (int ch = 0; ch < ingest::kCompositeChannels; ++ch) {
    float* out = comp.channels.data() + std::size_t(ch) * plane;
    for (std::size_t i = 0; i < plane; ++i) {
      const float mean = SyntheticSpec::kBackground[ch] +
                         (scene.truth.data[i] ? SyntheticSpec::kBurnDelta[ch] : 0.0f);
      const double v = double(mean) + rng.normal(0.0, spec.noise_sigma);
      out[i] = float(std::clamp(v, 0.0, 1.0));
    }
  }

  scene.burns = std::move(fresh);
  scene.burns.insert(scene.burns.end(), std::make_move_iterator(stale.begin()),
                     std::make_move_iterator(stale.end()));
  return scene;
}

}  // namespace burnscan::dataset
