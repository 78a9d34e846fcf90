#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "burnscan/geo/grid.hpp"
#include "burnscan/util/date.hpp"
#include "burnscan/util/error.hpp"

namespace burnscan::geo {

struct Bounds {
  double min_x = 0, min_y = 0, max_x = 0, max_y = 0;

  void expand(const Bounds& o) {
    min_x = std::min(min_x, o.min_x);
    min_y = std::min(min_y, o.min_y);
    max_x = std::max(max_x, o.max_x);
    max_y = std::max(max_y, o.max_y);
  }
};

// Closed ring: first vertex repeated last, at least 4 entries.
struct Ring {
  std::vector<Point> pts;

  bool closed() const {
    return pts.size() >= 4 && pts.front().x == pts.back().x &&
           pts.front().y == pts.back().y;
  }

  // Shoelace; positive for counter-clockwise in a y-up coordinate system.
  double signed_area() const {
    double a = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
      a += pts[i].x * pts[i + 1].y - pts[i + 1].x * pts[i].y;
    return a / 2.0;
  }

  Bounds bounds() const {
    Bounds b{pts[0].x, pts[0].y, pts[0].x, pts[0].y};
    for (const Point& p : pts) {
      b.min_x = std::min(b.min_x, p.x);
      b.min_y = std::min(b.min_y, p.y);
      b.max_x = std::max(b.max_x, p.x);
      b.max_y = std::max(b.max_y, p.y);
    }
    return b;
  }
};

// Crossing-number parity for a single ring with half-open edge treatment,
// so a ray through a vertex is counted once.
inline bool ring_crossings_odd(const Ring& ring, double x, double y) {
  bool inside = false;
  for (std::size_t i = 0; i + 1 < ring.pts.size(); ++i) {
    const Point& p = ring.pts[i];
    const Point& q = ring.pts[i + 1];
    if ((p.y <= y) != (q.y <= y)) {
      const double x_int = p.x + (y - p.y) * (q.x - p.x) / (q.y - p.y);
      if (x < x_int) inside = !inside;
    }
  }
  return inside;
}

struct Polygon {
  Ring exterior;
  std::vector<Ring> holes;
  std::map<std::string, std::string> attributes;
  std::string crs_id;

  static constexpr const char* kFireDateKey = "fire_date";

  // Even-odd rule over all rings: holes flip parity back to outside.
  bool contains(double x, double y) const {
    bool inside = ring_crossings_odd(exterior, x, y);
    for (const Ring& h : holes)
      if (ring_crossings_odd(h, x, y)) inside = !inside;
    return inside;
  }

  bool contains(const Point& p) const { return contains(p.x, p.y); }

  Bounds bounds() const { return exterior.bounds(); }

  std::optional<Date> fire_date() const {
    auto it = attributes.find(kFireDateKey);
    if (it == attributes.end()) return std::nullopt;
    return parse_date(it->second);
  }

  // Ring structure checks plus a vertex-based hole containment test. The
  // vertex test is a necessary condition, not full ring containment.
  void validate() const {
    if (!exterior.closed())
      throw Error(Errc::invalid_polygon,
                  "exterior ring must have >= 4 vertices with first == last");
    for (const Ring& h : holes) {
      if (!h.closed())
        throw Error(Errc::invalid_polygon,
                    "hole ring must have >= 4 vertices with first == last");
      for (std::size_t i = 0; i + 1 < h.pts.size(); ++i)
        if (!ring_crossings_odd(exterior, h.pts[i].x, h.pts[i].y))
          throw Error(Errc::invalid_polygon, "hole vertex lies outside the exterior ring");
    }
  }
};

// Rectangle ring over a grid's full extent, in grid world coordinates.
inline Polygon grid_extent_polygon(const RasterGrid& grid) {
  const Point a = grid.transform.apply(0, 0);
  const Point b = grid.transform.apply(grid.width, 0);
  const Point c = grid.transform.apply(grid.width, grid.height);
  const Point d = grid.transform.apply(0, grid.height);
  Polygon poly;
  poly.exterior.pts = {a, b, c, d, a};
  poly.crs_id = grid.crs_id;
  return poly;
}

}  // namespace burnscan::geo
