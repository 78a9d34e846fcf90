#pragma once

// Brute-force reference implementations the production code is checked
// against. These are deliberately written from the textbook definitions and
// must never call into the library paths they verify.

#include <cstdint>
#include <span>
#include <vector>

#include "burnscan/geo/mask.hpp"
#include "burnscan/geo/polygon.hpp"

namespace oracle {

// Classic ray-cast point-in-polygon (PNPOLY form), even-odd over all rings.
inline bool point_in_ring(const std::vector<burnscan::geo::Point>& pts, double px,
                          double py) {
  bool c = false;
  for (std::size_t i = 0, j = pts.size() - 1; i < pts.size(); j = i++) {
    const double xi = pts[i].x, yi = pts[i].y;
    const double xj = pts[j].x, yj = pts[j].y;
    if (((yi > py) != (yj > py)) && (px < (xj - xi) * (py - yi) / (yj - yi) + xi))
      c = !c;
  }
  return c;
}

inline bool point_in_polygon(const burnscan::geo::Polygon& poly, double px, double py) {
  bool inside = point_in_ring(poly.exterior.pts, px, py);
  for (const auto& h : poly.holes)
    if (point_in_ring(h.pts, px, py)) inside = !inside;
  return inside;
}

// Tests every pixel center against every polygon, no scanline, no bbox.
inline burnscan::geo::BinaryMask rasterize(std::span<const burnscan::geo::Polygon> polys,
                                           const burnscan::geo::RasterGrid& grid) {
  burnscan::geo::BinaryMask mask((grid));
  for (long r = 0; r < grid.height; ++r) {
    for (long c = 0; c < grid.width; ++c) {
      const auto center = grid.pixel_to_world(r, c);
      for (const auto& p : polys) {
        if (point_in_polygon(p, center.x, center.y)) {
          mask.at(r, c) = 1;
          break;
        }
      }
    }
  }
  return mask;
}

struct Counts {
  long pred = 0, gt = 0, inter = 0, uni = 0;
};

// Double-loop pixel counter over a (height, width) pair of masks.
inline Counts count_masks(const std::vector<std::uint8_t>& pred,
                          const std::vector<std::uint8_t>& gt, long height, long width) {
  Counts k;
  for (long r = 0; r < height; ++r) {
    for (long c = 0; c < width; ++c) {
      const bool p = pred[std::size_t(r) * width + c] != 0;
      const bool g = gt[std::size_t(r) * width + c] != 0;
      if (p) ++k.pred;
      if (g) ++k.gt;
      if (p && g) ++k.inter;
      if (p || g) ++k.uni;
    }
  }
  return k;
}

inline double iou_from_counts(const Counts& k) {
  return k.uni == 0 ? 1.0 : double(k.inter) / double(k.uni);
}

inline double dice_from_counts(const Counts& k) {
  return (k.pred + k.gt) == 0 ? 1.0 : 2.0 * double(k.inter) / double(k.pred + k.gt);
}

}  // namespace oracle
