#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "burnscan/geo/grid.hpp"
#include "burnscan/geo/mask.hpp"
#include "burnscan/ingest/composite.hpp"
#include "burnscan/seg/network.hpp"
#include "burnscan/seg/predictor.hpp"
#include "burnscan/util/date.hpp"
#include "burnscan/util/error.hpp"

namespace burnscan::transfer {

struct Period {
  Date start{};
  Date end{};
};

// Calendar years print as "2017"; anything else keeps both endpoints.
inline std::string period_label(const Period& p) {
  const std::chrono::year_month_day s(p.start), e(p.end);
  if (s.year() == e.year() && s.month() == std::chrono::January &&
      s.day() == std::chrono::day(1) && e.month() == std::chrono::December &&
      e.day() == std::chrono::day(31))
    return std::to_string(int(s.year()));
  return format_date(p.start) + ".." + format_date(p.end);
}

inline Period calendar_year(int year) {
  using namespace std::chrono;
  return {sys_days(year_month_day(std::chrono::year(year), January, day(1))),
          sys_days(year_month_day(std::chrono::year(year), December, day(31)))};
}

// How overlapping windows and scenes merge per pixel. Max keeps a burn seen
// by any contribution; mean trades that for smoother seams.
enum class Combine { max, mean };

struct InferOptions {
  double threshold = 0.5;
  Combine combine = Combine::max;
  int batch_size = 16;
};

struct RegionMosaic {
  geo::RasterGrid grid;
  std::vector<float> prob;  // in [0,1]; 0 where valid is 0
  geo::BinaryMask valid;    // pixel received at least one prediction
  geo::BinaryMask burned;   // prob >= threshold over valid pixels
  Period period;
  std::vector<std::string> provenance;  // contributing scene ids, input order
};

namespace detail {

// Stride-128 offsets plus one window aligned to the far edge, so the
// remainder strip is predicted instead of dropped.
inline std::vector<long> window_offsets(long extent) {
  std::vector<long> offs;
  for (long o = 0; o + seg::kPatchEdge <= extent; o += seg::kPatchEdge)
    offs.push_back(o);
  if (offs.back() + seg::kPatchEdge < extent)
    offs.push_back(extent - seg::kPatchEdge);
  return offs;
}

}  // namespace detail

// Tiles every composite, predicts each 128x128 window, and merges the
// probabilities onto the union grid. Composite pixels flagged invalid never
// contribute; union-grid pixels no composite covers stay invalid.
inline RegionMosaic infer_region(seg::Network<float>& model,
                                 std::span<const ingest::CompositeRaster> composites,
                                 Period period, const InferOptions& opt = {}) {
  if (composites.empty())
    throw Error(Errc::no_coverage, "no composites cover the requested region");
  if (!(opt.threshold >= 0.0 && opt.threshold <= 1.0))
    throw Error(Errc::invalid_argument, "threshold must lie in [0, 1]");
  if (opt.batch_size < 1)
    throw Error(Errc::invalid_argument, "batch_size must be >= 1");

  const auto& first = composites.front().grid;
  for (const auto& c : composites) {
    if (c.grid.crs_id != first.crs_id)
      throw Error(Errc::crs_mismatch, "composite " + c.scene_id + " is in " +
                                          c.grid.crs_id + ", expected " +
                                          first.crs_id);
    if (!geo::same_lattice(c.grid, first))
      throw Error(Errc::grid_mismatch,
                  "composite " + c.scene_id + " is not on the shared 20 m lattice");
    if (c.grid.height < seg::kPatchEdge || c.grid.width < seg::kPatchEdge)
      throw Error(Errc::shape_error,
                  "composite " + c.scene_id + " is smaller than one 128x128 window");
  }

  // Union extent in pixel offsets relative to the first composite.
  long min_r = 0, min_c = 0, max_r = first.height, max_c = first.width;
  const auto offset_of = [&](const geo::RasterGrid& g) {
    const double dc = (g.transform.origin_x - first.transform.origin_x) /
                      first.transform.pixel_width;
    const double dr = (g.transform.origin_y - first.transform.origin_y) /
                      first.transform.pixel_height;
    return std::pair<long, long>{llround(dr), llround(dc)};
  };
  for (const auto& c : composites) {
    const auto [dr, dc] = offset_of(c.grid);
    min_r = std::min(min_r, dr);
    min_c = std::min(min_c, dc);
    max_r = std::max(max_r, dr + c.grid.height);
    max_c = std::max(max_c, dc + c.grid.width);
  }

  RegionMosaic mosaic;
  mosaic.grid = first;
  const geo::Point origin =
      first.transform.apply(double(min_c), double(min_r));
  mosaic.grid.transform.origin_x = origin.x;
  mosaic.grid.transform.origin_y = origin.y;
  mosaic.grid.width = int(max_c - min_c);
  mosaic.grid.height = int(max_r - min_r);
  mosaic.period = period;

  const std::size_t total =
      std::size_t(mosaic.grid.width) * std::size_t(mosaic.grid.height);
  mosaic.prob.assign(total, 0.0f);
  mosaic.valid = geo::BinaryMask(mosaic.grid);
  std::vector<float> weight;  // mean combination accumulates counts here
  if (opt.combine == Combine::mean) weight.assign(total, 0.0f);

  const long edge = seg::kPatchEdge;
  const long plane = edge * edge;
  for (const auto& comp : composites) {
    mosaic.provenance.push_back(comp.scene_id);
    const auto [dr, dc] = offset_of(comp.grid);
    const long H = comp.grid.height, W = comp.grid.width;
    const auto rows = detail::window_offsets(H);
    const auto cols = detail::window_offsets(W);

    std::vector<std::pair<long, long>> windows;
    windows.reserve(rows.size() * cols.size());
    for (long r : rows)
      for (long c : cols) windows.emplace_back(r, c);

    std::vector<float> batch(std::size_t(opt.batch_size) * 3 * plane);
    for (std::size_t start = 0; start < windows.size();
         start += std::size_t(opt.batch_size)) {
      const long b =
          long(std::min(windows.size() - start, std::size_t(opt.batch_size)));
      for (long i = 0; i < b; ++i) {
        const auto [r0, c0] = windows[start + std::size_t(i)];
        float* dst = batch.data() + i * 3 * plane;
        for (int ch = 0; ch < 3; ++ch)
          for (long r = 0; r < edge; ++r) {
            const float* src = comp.channels.data() +
                               (std::size_t(ch) * H + std::size_t(r0 + r)) * W + c0;
            std::copy(src, src + edge, dst + (ch * edge + r) * edge);
          }
      }
      const auto probs = seg::predict_batch(
          model, std::span<const float>(batch.data(), std::size_t(b) * 3 * plane),
          b);
      for (long i = 0; i < b; ++i) {
        const auto [r0, c0] = windows[start + std::size_t(i)];
        const float* p = probs.data() + i * plane;
        for (long r = 0; r < edge; ++r)
          for (long c = 0; c < edge; ++c) {
            if (!comp.valid.at(r0 + r, c0 + c)) continue;
            const std::size_t g =
                std::size_t(dr - min_r + r0 + r) * mosaic.grid.width +
                std::size_t(dc - min_c + c0 + c);
            const float v = p[r * edge + c];
            if (opt.combine == Combine::max) {
              mosaic.prob[g] = mosaic.valid.data[g] ? std::max(mosaic.prob[g], v) : v;
            } else {
              mosaic.prob[g] += v;
              weight[g] += 1.0f;
            }
            mosaic.valid.data[g] = 1;
          }
      }
    }
  }

  if (opt.combine == Combine::mean)
    for (std::size_t i = 0; i < total; ++i)
      if (weight[i] > 0.0f) mosaic.prob[i] /= weight[i];

  mosaic.burned = geo::BinaryMask(mosaic.grid);
  for (std::size_t i = 0; i < total; ++i)
    mosaic.burned.data[i] =
        mosaic.valid.data[i] && double(mosaic.prob[i]) >= opt.threshold ? 1 : 0;
  return mosaic;
}

}  // namespace burnscan::transfer
