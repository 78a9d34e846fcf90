#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "burnscan/geo/mask.hpp"
#include "burnscan/geo/polygon.hpp"

namespace burnscan::geo {

namespace detail {

// x-coordinates where ring edges cross the horizontal line at y, using the
// half-open edge convention (p.y <= y) != (q.y <= y). Appends to out.
inline void ring_crossings(const Ring& ring, double y, std::vector<double>& out) {
  for (std::size_t i = 0; i + 1 < ring.pts.size(); ++i) {
    const Point& p = ring.pts[i];
    const Point& q = ring.pts[i + 1];
    if ((p.y <= y) != (q.y <= y))
      out.push_back(p.x + (y - p.y) * (q.x - p.x) / (q.y - p.y));
  }
}

// Paint pixels whose CENTER has an odd crossing parity. Scanline over the
// polygon's bounding rows; per center, parity = count of crossings strictly
// right of the center, which is exactly the ray-cast rule in
// Polygon::contains.
inline void paint_polygon(BinaryMask& mask, const Polygon& poly) {
  const RasterGrid& g = mask.grid;
  const Affine& t = g.transform;
  const Bounds b = poly.bounds();

  const double r_at_min_y = (b.min_y - t.origin_y) / t.pixel_height - 0.5;
  const double r_at_max_y = (b.max_y - t.origin_y) / t.pixel_height - 0.5;
  long row_lo = long(std::floor(std::min(r_at_min_y, r_at_max_y))) - 1;
  long row_hi = long(std::ceil(std::max(r_at_min_y, r_at_max_y))) + 1;
  row_lo = std::max(row_lo, 0L);
  row_hi = std::min(row_hi, long(g.height) - 1);

  const double c_at_min_x = (b.min_x - t.origin_x) / t.pixel_width - 0.5;
  const double c_at_max_x = (b.max_x - t.origin_x) / t.pixel_width - 0.5;
  long col_lo = long(std::floor(std::min(c_at_min_x, c_at_max_x))) - 1;
  long col_hi = long(std::ceil(std::max(c_at_min_x, c_at_max_x))) + 1;
  col_lo = std::max(col_lo, 0L);
  col_hi = std::min(col_hi, long(g.width) - 1);

  std::vector<double> xs;
  for (long r = row_lo; r <= row_hi; ++r) {
    const double y = t.origin_y + t.pixel_height * (double(r) + 0.5);
    xs.clear();
    ring_crossings(poly.exterior, y, xs);
    for (const Ring& h : poly.holes) ring_crossings(h, y, xs);
    if (xs.empty()) continue;
    std::sort(xs.begin(), xs.end());
    for (long c = col_lo; c <= col_hi; ++c) {
      const double x = t.origin_x + t.pixel_width * (double(c) + 0.5);
      const auto greater = xs.end() - std::upper_bound(xs.begin(), xs.end(), x);
      if (greater & 1) mask.at(r, c) = 1;
    }
  }
}

}  // namespace detail

// Pixel = 1 iff the pixel center lies inside any polygon (exterior minus
// holes, even-odd rule). Polygons must already be in the grid's CRS; an
// empty polygon CRS tag is treated as "untagged" and accepted.
inline BinaryMask rasterize_polygons(std::span<const Polygon> polygons,
                                     const RasterGrid& grid) {
  grid.validate();
  BinaryMask mask(grid);
  for (const Polygon& p : polygons) {
    if (!p.crs_id.empty() && !grid.crs_id.empty() && p.crs_id != grid.crs_id)
      throw Error(Errc::crs_mismatch,
                  "polygon CRS " + p.crs_id + " differs from grid CRS " + grid.crs_id);
    detail::paint_polygon(mask, p);
  }
  return mask;
}

inline BinaryMask rasterize_polygons(const std::vector<Polygon>& polygons,
                                     const RasterGrid& grid) {
  return rasterize_polygons(std::span<const Polygon>(polygons), grid);
}

}  // namespace burnscan::geo
