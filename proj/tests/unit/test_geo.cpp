#include <catch2/catch_amalgamated.hpp>

#include "burnscan/geo/grid.hpp"
#include "burnscan/geo/mask.hpp"
#include "burnscan/geo/polygon.hpp"
#include "burnscan/geo/rasterize.hpp"
#include "burnscan/geo/zonal.hpp"
#include "burnscan/util/rng.hpp"
#include "support/geo_fixtures.hpp"
#include "support/oracles.hpp"

using namespace burnscan;
using namespace burnscan::geo;

TEST_CASE("pixel_to_world maps pixel centers") {
  RasterGrid g = fixtures::north_up_grid(4, 4, 20.0);
  auto p = g.pixel_to_world(0, 0);
  CHECK(p.x == 10.0);
  CHECK(p.y == -10.0);

  RasterGrid utm = fixtures::north_up_grid(100, 100, 20.0, 600000.0, 4400000.0);
  auto q = utm.pixel_to_world(1, 2);
  CHECK(q.x == 600050.0);
  CHECK(q.y == 4399970.0);
}

TEST_CASE("world_to_pixel floors fractional pixel coordinates") {
  RasterGrid g = fixtures::north_up_grid(4, 4, 20.0);
  CHECK(g.world_to_pixel(10.0, -10.0) == PixelIndex{0, 0});
  CHECK(g.world_to_pixel(39.99, -0.01) == PixelIndex{0, 1});
  // boundary point belongs to the pixel that contains it (half-open model)
  CHECK(g.world_to_pixel(0.0, 0.0) == PixelIndex{0, 0});
  CHECK(g.world_to_pixel(0.0, -20.0) == PixelIndex{1, 0});
}

TEST_CASE("world_to_pixel rejects rotated grids") {
  RasterGrid g = fixtures::north_up_grid(4, 4, 20.0);
  g.transform.row_rotation = 0.5;
  CHECK_THROWS_MATCHES(g.world_to_pixel(1.0, 1.0), Error,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::StartsWith("RotatedGridUnsupported")));
}

TEST_CASE("affine round-trip holds for random in-bounds pixels") {
  Rng rng(1234);
  for (int trial = 0; trial < 5; ++trial) {
    const double pixel = rng.uniform(0.5, 60.0);
    RasterGrid g = fixtures::north_up_grid(int(rng.uniform_int(1, 3000)),
                                           int(rng.uniform_int(1, 3000)), pixel,
                                           rng.uniform(-1e6, 1e6), rng.uniform(-1e6, 1e6));
    for (int i = 0; i < 1000; ++i) {
      const long r = rng.uniform_int(0, g.height - 1);
      const long c = rng.uniform_int(0, g.width - 1);
      const auto w = g.pixel_to_world(r, c);
      REQUIRE(g.world_to_pixel(w.x, w.y) == PixelIndex{r, c});
    }
  }
}

TEST_CASE("grid validation rejects degenerate grids") {
  RasterGrid g = fixtures::north_up_grid(0, 4);
  CHECK_THROWS_AS(g.validate(), Error);
  g = fixtures::north_up_grid(4, 4);
  g.transform.pixel_width = 0.0;
  CHECK_THROWS_AS(g.validate(), Error);
}

TEST_CASE("polygon validation") {
  auto poly = fixtures::rect_polygon(0, -40, 40, 0);
  CHECK_NOTHROW(poly.validate());

  SECTION("open exterior ring") {
    poly.exterior.pts.pop_back();
    CHECK_THROWS_AS(poly.validate(), Error);
  }
  SECTION("hole outside exterior is a load error") {
    auto hole = fixtures::rect_polygon(100, 100, 120, 120);
    poly.holes.push_back(hole.exterior);
    CHECK_THROWS_MATCHES(poly.validate(), Error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::StartsWith("InvalidPolygon")));
  }
  SECTION("hole inside exterior is fine") {
    auto hole = fixtures::rect_polygon(10, -30, 20, -20);
    poly.holes.push_back(hole.exterior);
    CHECK_NOTHROW(poly.validate());
  }
}

TEST_CASE("rasterize: empty polygon list gives an all-zero mask") {
  RasterGrid g = fixtures::north_up_grid(8, 6);
  auto mask = rasterize_polygons(std::vector<Polygon>{}, g);
  CHECK(mask.count() == 0);
}

TEST_CASE("rasterize: full-extent polygon gives an all-one mask") {
  RasterGrid g = fixtures::north_up_grid(7, 5);
  std::vector<Polygon> polys{grid_extent_polygon(g)};
  auto mask = rasterize_polygons(polys, g);
  CHECK(mask.count() == long(g.width) * g.height);
}

TEST_CASE("rasterize: unit-aligned square covers exactly its 2x2 pixel block") {
  RasterGrid g = fixtures::north_up_grid(4, 4, 20.0);
  std::vector<Polygon> polys{fixtures::rect_polygon(0, -40, 40, 0)};
  auto mask = rasterize_polygons(polys, g);

  // Frozen from the brute-force point-in-polygon oracle over all 16 centers.
  auto expect = oracle::rasterize(polys, g);
  REQUIRE(expect.count() == 4);
  REQUIRE(expect.at(0, 0) == 1);
  REQUIRE(expect.at(0, 1) == 1);
  REQUIRE(expect.at(1, 0) == 1);
  REQUIRE(expect.at(1, 1) == 1);
  CHECK(mask.data == expect.data);
}

TEST_CASE("rasterize rejects CRS mismatch") {
  RasterGrid g = fixtures::north_up_grid(4, 4);
  std::vector<Polygon> polys{fixtures::rect_polygon(0, -40, 40, 0, "EPSG:32636")};
  CHECK_THROWS_MATCHES(
      rasterize_polygons(polys, g), Error,
      Catch::Matchers::MessageMatches(Catch::Matchers::StartsWith("CRSMismatch")));
}

TEST_CASE("rasterize matches the point-in-polygon oracle on random polygons") {
  Rng rng(99);
  for (int trial = 0; trial < 60; ++trial) {
    const int w = int(rng.uniform_int(4, 64));
    const int h = int(rng.uniform_int(4, 64));
    RasterGrid g = fixtures::north_up_grid(w, h, 20.0, rng.uniform(-1000, 1000),
                                           rng.uniform(-1000, 1000));
    std::vector<Polygon> polys;
    const int n_polys = int(rng.uniform_int(1, 3));
    for (int i = 0; i < n_polys; ++i) {
      const double cx = g.transform.origin_x + rng.uniform(-200, 20.0 * w + 200);
      const double cy = g.transform.origin_y - rng.uniform(-200, 20.0 * h + 200);
      polys.push_back(fixtures::random_blob(rng, cx, cy, rng.uniform(30, 500)));
    }
    auto fast = rasterize_polygons(polys, g);
    auto brute = oracle::rasterize(polys, g);
    REQUIRE(fast.data == brute.data);
  }
}

TEST_CASE("rasterize handles holes by even-odd parity") {
  RasterGrid g = fixtures::north_up_grid(8, 8, 10.0);
  auto poly = fixtures::rect_polygon(0, -80, 80, 0);
  poly.holes.push_back(fixtures::rect_polygon(20, -60, 60, -20).exterior);
  std::vector<Polygon> polys{poly};
  auto mask = rasterize_polygons(polys, g);
  auto brute = oracle::rasterize(polys, g);
  CHECK(mask.data == brute.data);
  CHECK(mask.at(3, 3) == 0);  // inside the hole
  CHECK(mask.at(0, 0) == 1);
}

TEST_CASE("mask algebra: rasterize of a set equals OR of singletons") {
  Rng rng(7);
  RasterGrid g = fixtures::north_up_grid(48, 48, 20.0);
  std::vector<Polygon> polys;
  for (int i = 0; i < 3; ++i)
    polys.push_back(fixtures::random_blob(rng, rng.uniform(0, 960), -rng.uniform(0, 960),
                                          rng.uniform(50, 400)));
  auto all = rasterize_polygons(polys, g);
  BinaryMask merged(g);
  for (const auto& p : polys)
    merged = mask_or(merged, rasterize_polygons(std::span<const Polygon>(&p, 1), g));
  CHECK(all.data == merged.data);
}

TEST_CASE("zonal_fraction basics") {
  RasterGrid g = fixtures::north_up_grid(4, 4, 20.0);
  auto zone = grid_extent_polygon(g);

  BinaryMask ones(g);
  std::fill(ones.data.begin(), ones.data.end(), std::uint8_t(1));
  CHECK(zonal_fraction(ones, zone).fraction == 1.0);

  BinaryMask zeros(g);
  CHECK(zonal_fraction(zeros, zone).fraction == 0.0);

  std::vector<Polygon> polys{fixtures::rect_polygon(0, -40, 40, 0)};
  auto mask = rasterize_polygons(polys, g);
  auto res = zonal_fraction(mask, zone);
  CHECK(res.fraction == Catch::Approx(0.25));
  CHECK(res.n_zone_pixels == 16);
  CHECK_FALSE(res.zero_zone);
}

TEST_CASE("zonal_fraction flags zones with no interior pixel centers") {
  RasterGrid g = fixtures::north_up_grid(4, 4, 20.0);
  BinaryMask ones(g);
  std::fill(ones.data.begin(), ones.data.end(), std::uint8_t(1));
  // sliver far smaller than a pixel, away from any center
  auto zone = fixtures::rect_polygon(0.0, -2.0, 1.0, 0.0);
  auto res = zonal_fraction(ones, zone);
  CHECK(res.zero_zone);
  CHECK(res.fraction == 0.0);
}

TEST_CASE("rasterize/zonal agree with per-pixel counting on random polygons") {
  Rng rng(555);
  for (int trial = 0; trial < 10; ++trial) {
    const int w = int(rng.uniform_int(8, 64));
    const int h = int(rng.uniform_int(8, 64));
    RasterGrid g = fixtures::north_up_grid(w, h, 20.0);
    auto poly =
        fixtures::random_blob(rng, rng.uniform(0, 20.0 * w), -rng.uniform(0, 20.0 * h),
                              rng.uniform(40, 600));
    std::vector<Polygon> polys{poly};
    auto mask = rasterize_polygons(polys, g);
    auto res = zonal_fraction(mask, grid_extent_polygon(g));

    long brute_inside = 0;
    for (long r = 0; r < h; ++r)
      for (long c = 0; c < w; ++c) {
        auto p = g.pixel_to_world(r, c);
        brute_inside += oracle::point_in_polygon(poly, p.x, p.y);
      }
    CHECK(res.fraction == Catch::Approx(double(brute_inside) / (double(w) * h)));
  }
}
