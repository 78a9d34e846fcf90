#pragma once

#include <cmath>
#include <string>

#include "burnscan/util/error.hpp"

namespace burnscan::geo {

struct Point {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point&) const = default;
};

// Pixel -> world affine map. Coefficient order follows the usual GDAL-style
// convention: x = origin_x + pixel_width*col + row_rotation*row,
//             y = origin_y + col_rotation*col + pixel_height*row,
// with pixel_height negative for north-up rasters.
struct Affine {
  double origin_x = 0.0;
  double pixel_width = 1.0;
  double row_rotation = 0.0;
  double origin_y = 0.0;
  double col_rotation = 0.0;
  double pixel_height = -1.0;

  Point apply(double col, double row) const {
    return {origin_x + pixel_width * col + row_rotation * row,
            origin_y + col_rotation * col + pixel_height * row};
  }

  bool rotated() const { return row_rotation != 0.0 || col_rotation != 0.0; }

  bool operator==(const Affine&) const = default;
};

struct PixelIndex {
  long row = 0;
  long col = 0;
  bool operator==(const PixelIndex&) const = default;
};

// Georeferenced pixel grid. The pixel model is half-open: a pixel (r, c)
// owns the world rectangle [x, x+w) horizontally and (y-|h|, y] vertically,
// so every world point maps to exactly one pixel on a north-up grid.
struct RasterGrid {
  std::string crs_id;  // e.g. "EPSG:32636"
  Affine transform;
  int width = 0;
  int height = 0;

  void validate() const {
    if (width <= 0 || height <= 0)
      throw Error(Errc::invalid_grid, "grid dimensions must be positive");
    if (transform.pixel_width == 0.0 || transform.pixel_height == 0.0)
      throw Error(Errc::invalid_grid, "pixel size must be nonzero");
  }

  // World coordinates of the pixel CENTER. Out-of-bounds indices are fine;
  // the map is affine.
  Point pixel_to_world(long row, long col) const {
    return transform.apply(double(col) + 0.5, double(row) + 0.5);
  }

  // Inverse affine, floored to the containing pixel. Rotated grids are
  // rejected: Sentinel-2 granules are north-up and rotation would make the
  // inversion ambiguous for no benefit.
  PixelIndex world_to_pixel(double x, double y) const {
    if (transform.rotated())
      throw Error(Errc::rotated_grid_unsupported,
                  "world_to_pixel requires zero rotation coefficients");
    const double col = (x - transform.origin_x) / transform.pixel_width;
    const double row = (y - transform.origin_y) / transform.pixel_height;
    return {long(std::floor(row)), long(std::floor(col))};
  }

  bool contains(long row, long col) const {
    return row >= 0 && col >= 0 && row < height && col < width;
  }

  // Sub-window grid sharing this grid's lattice.
  RasterGrid window(int row_off, int col_off, int win_height, int win_width) const {
    RasterGrid g = *this;
    const Point o = transform.apply(double(col_off), double(row_off));
    g.transform.origin_x = o.x;
    g.transform.origin_y = o.y;
    g.width = win_width;
    g.height = win_height;
    return g;
  }

  bool operator==(const RasterGrid&) const = default;
};

// True when two grids share pixel size and their origins differ by a whole
// number of pixels, i.e. they sample the same lattice.
inline bool same_lattice(const RasterGrid& a, const RasterGrid& b, double rel_tol = 1e-6) {
  if (a.crs_id != b.crs_id) return false;
  if (a.transform.rotated() || b.transform.rotated()) return false;
  const double pw = a.transform.pixel_width, ph = a.transform.pixel_height;
  if (std::abs(pw - b.transform.pixel_width) > std::abs(pw) * rel_tol) return false;
  if (std::abs(ph - b.transform.pixel_height) > std::abs(ph) * rel_tol) return false;
  const double dx = (b.transform.origin_x - a.transform.origin_x) / pw;
  const double dy = (b.transform.origin_y - a.transform.origin_y) / ph;
  return std::abs(dx - std::round(dx)) < rel_tol && std::abs(dy - std::round(dy)) < rel_tol;
}

}  // namespace burnscan::geo
