#include <catch2/catch_amalgamated.hpp>

#include <cstring>
#include <random>

#include "burnscan/geo/rasterize.hpp"
#include "burnscan/io/geojson.hpp"
#include "burnscan/io/geotiff.hpp"
#include "burnscan/io/jp2.hpp"
#include "burnscan/io/mask_io.hpp"
#include "burnscan/io/png.hpp"
#include "burnscan/io/shapefile.hpp"
#include "burnscan/util/rng.hpp"
#include "support/geo_fixtures.hpp"
#include "support/io_fixtures.hpp"
#include "support/tempdir.hpp"

using namespace burnscan;
using testsupport::TempDir;

namespace {

std::vector<double> random_samples(std::size_t n, double lo, double hi,
                                   std::uint64_t seed, bool integral) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) {
    x = rng.uniform(lo, hi);
    if (integral) x = std::floor(x);
  }
  return v;
}

}  // namespace

TEST_CASE("geotiff round trip preserves pixels, grid, and nodata") {
  TempDir dir;
  const auto grid = fixtures::north_up_grid(37, 21);

  SECTION("three-band float32 with nodata") {
    std::vector<float> data(37 * 21 * 3);
    Rng rng(7);
    for (auto& v : data) v = float(rng.uniform(-1.0, 1.0));
    const auto path = dir.file("composite.tif");
    io::write_geotiff<float>(path, grid, 3, data, -1.0);

    const auto img = io::read_geotiff<float>(path);
    REQUIRE(img.info.grid == grid);
    REQUIRE(img.info.samples == 3);
    REQUIRE(img.info.type == io::PixelType::f32);
    REQUIRE(img.info.nodata.has_value());
    CHECK(*img.info.nodata == -1.0);
    REQUIRE(img.data.size() == data.size());
    for (std::size_t i = 0; i < data.size(); ++i) REQUIRE(img.data[i] == data[i]);
  }

  SECTION("uint16 band, uncompressed") {
    std::vector<std::uint16_t> data(37 * 21);
    Rng rng(8);
    for (auto& v : data) v = std::uint16_t(rng.uniform_int(0, 12000));
    const auto path = dir.file("band.tif");
    io::write_geotiff<std::uint16_t>(path, grid, 1, data, {},
                                     io::TiffCompression::none);
    const auto img = io::read_geotiff<std::uint16_t>(path);
    CHECK(img.info.type == io::PixelType::u16);
    CHECK_FALSE(img.info.nodata.has_value());
    REQUIRE(img.data == data);
  }

  SECTION("rewriting identical content is byte-identical") {
    std::vector<std::uint8_t> data(37 * 21, 3);
    io::write_geotiff<std::uint8_t>(dir.file("a.tif"), grid, 1, data, 255.0);
    io::write_geotiff<std::uint8_t>(dir.file("b.tif"), grid, 1, data, 255.0);
    CHECK(testsupport::read_file(dir.file("a.tif")) ==
          testsupport::read_file(dir.file("b.tif")));
  }

  SECTION("geographic CRS round-trips through the geokeys") {
    auto g = grid;
    g.crs_id = "EPSG:4326";
    g.transform = {30.0, 0.001, 0.0, 4.0, 0.0, -0.001};
    std::vector<std::uint8_t> data(37 * 21, 0);
    io::write_geotiff<std::uint8_t>(dir.file("geo.tif"), g, 1, data);
    CHECK(io::read_geotiff_info(dir.file("geo.tif")).grid == g);
  }
}

TEST_CASE("geotiff reader accepts foreign layouts") {
  TempDir dir;

  auto roundtrip = [&](const testsupport::TiffSpec& spec, std::uint64_t seed) {
    const double hi = spec.sample_format == 3 ? 1.0 : double(1u << (spec.bits - 1));
    const auto data =
        random_samples(std::size_t(spec.width) * spec.height * spec.samples, 0.0,
                       hi, seed, spec.sample_format != 3);
    const auto path = dir.file("foreign.tif");
    testsupport::write_file(path, testsupport::build_tiff(spec, data));
    const auto img = io::read_geotiff<double>(path);
    REQUIRE(img.info.grid.width == spec.width);
    REQUIRE(img.info.grid.height == spec.height);
    REQUIRE(img.info.samples == spec.samples);
    REQUIRE(img.data.size() == data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (spec.sample_format == 3) {
        REQUIRE(img.data[i] == Catch::Approx(data[i]).margin(1e-7));
      } else {
        REQUIRE(img.data[i] == data[i]);
      }
    }
  };

  SECTION("big-endian uncompressed uint16") {
    roundtrip({.width = 23, .height = 9, .bits = 16, .big_endian = true}, 1);
  }
  SECTION("chunky interleaved three-band uint8") {
    roundtrip({.width = 17, .height = 11, .samples = 3, .bits = 8}, 2);
  }
  SECTION("LZW with horizontal predictor, chunky uint16") {
    roundtrip({.width = 64,
               .height = 48,
               .samples = 3,
               .bits = 16,
               .compression = 5,
               .predictor2 = true,
               .rows_per_strip = 7},
              3);
  }
  SECTION("big-endian LZW with predictor") {
    roundtrip({.width = 33,
               .height = 14,
               .bits = 16,
               .big_endian = true,
               .compression = 5,
               .predictor2 = true},
              4);
  }
  SECTION("PackBits uint8 strips") {
    roundtrip({.width = 50, .height = 20, .bits = 8, .compression = 32773,
               .rows_per_strip = 3},
              5);
  }
  SECTION("deflate with predictor, planar int16-range data") {
    roundtrip({.width = 31,
               .height = 22,
               .samples = 2,
               .bits = 16,
               .compression = 8,
               .predictor2 = true,
               .planar = true,
               .rows_per_strip = 5},
              6);
  }
  SECTION("tiled uint16 with partial edge tiles") {
    roundtrip({.width = 37, .height = 29, .bits = 16, .tile_w = 16, .tile_h = 16}, 7);
  }
  SECTION("tiled planar float32") {
    roundtrip({.width = 20,
               .height = 20,
               .samples = 3,
               .bits = 32,
               .sample_format = 3,
               .compression = 8,
               .planar = true,
               .tile_w = 16,
               .tile_h = 16},
              8);
  }
  SECTION("strips larger than the LZW dictionary reset threshold") {
    roundtrip({.width = 300, .height = 40, .bits = 8, .compression = 5}, 9);
  }
}

TEST_CASE("PackBits decodes the reference byte sequence") {
  // worked example from the format documentation
  const std::vector<std::uint8_t> encoded = {0xfe, 0xaa, 0x02, 0x80, 0x00,
                                             0x2a, 0xfd, 0xaa, 0x03, 0x80,
                                             0x00, 0x2a, 0x22, 0xf7, 0xaa};
  const std::vector<std::uint8_t> expected = {
      0xaa, 0xaa, 0xaa, 0x80, 0x00, 0x2a, 0xaa, 0xaa, 0xaa, 0xaa, 0x80, 0x00,
      0x2a, 0x22, 0xaa, 0xaa, 0xaa, 0xaa, 0xaa, 0xaa, 0xaa, 0xaa, 0xaa, 0xaa};
  std::vector<std::uint8_t> out(expected.size());
  io::tiff::unpackbits_into({encoded.data(), encoded.size()}, out.data(), out.size(),
                            "fixture");
  CHECK(out == expected);
}

TEST_CASE("LZW survives low-entropy data across dictionary resets") {
  Rng rng(99);
  std::vector<std::uint8_t> data(40000);
  for (auto& b : data) b = std::uint8_t(rng.uniform_int(0, 3));  // forces deep dict
  const auto enc = testsupport::lzw_encode(data);
  std::vector<std::uint8_t> out(data.size());
  io::tiff::unlzw_into({enc.data(), enc.size()}, out.data(), out.size(), "fixture");
  CHECK(out == data);
}

TEST_CASE("malformed rasters raise ReadFailure") {
  TempDir dir;
  const auto grid = fixtures::north_up_grid(8, 8);
  std::vector<std::uint8_t> data(64, 1);
  const auto good = dir.file("good.tif");
  io::write_geotiff<std::uint8_t>(good, grid, 1, data);

  SECTION("missing file") {
    CHECK_THROWS_MATCHES(io::read_geotiff<std::uint8_t>(dir.file("absent.tif")),
                         Error, Catch::Matchers::MessageMatches(
                                    Catch::Matchers::StartsWith("ReadFailure")));
  }
  SECTION("truncated header") {
    auto bytes = testsupport::read_file(good);
    bytes.resize(6);
    testsupport::write_file(dir.file("trunc.tif"), bytes);
    CHECK_THROWS_AS(io::read_geotiff<std::uint8_t>(dir.file("trunc.tif")), Error);
  }
  SECTION("bad magic") {
    auto bytes = testsupport::read_file(good);
    bytes[0] = 'X';
    testsupport::write_file(dir.file("bad.tif"), bytes);
    CHECK_THROWS_AS(io::read_geotiff<std::uint8_t>(dir.file("bad.tif")), Error);
  }
  SECTION("unsupported compression code") {
    testsupport::TiffSpec spec{.width = 4, .height = 4, .bits = 8};
    spec.compression = 7;  // "new-style" JPEG, unsupported on purpose
    const auto bytes = testsupport::build_tiff(spec, std::vector<double>(16, 0.0));
    testsupport::write_file(dir.file("jpeg.tif"), bytes);
    CHECK_THROWS_MATCHES(io::read_geotiff<std::uint8_t>(dir.file("jpeg.tif")), Error,
                         Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring(
                             "unsupported TIFF compression")));
  }
}

TEST_CASE("geojson feature collections round trip") {
  TempDir dir;

  SECTION("parse fixture with legacy crs, hole, and multipolygon") {
    const std::string text = R"({
      "type": "FeatureCollection",
      "crs": {"type": "name", "properties": {"name": "urn:ogc:def:crs:EPSG::32636"}},
      "features": [
        {"type": "Feature",
         "properties": {"fire_date": "2017-01-15", "source": "manual", "refs": 231395,
                        "flag": true, "skip": null},
         "geometry": {"type": "Polygon", "coordinates": [
            [[0,0],[100,0],[100,100],[0,100],[0,0]],
            [[40,40],[60,40],[60,60],[40,60],[40,40]]
         ]}},
        {"type": "Feature",
         "properties": {"fire_date": "2017-02-01"},
         "geometry": {"type": "MultiPolygon", "coordinates": [
            [[[200,0],[300,0],[300,100],[200,0]]],
            [[[400,0],[500,0],[500,100],[400,0]]]
         ]}}
      ]})";
    const auto path = dir.file("labels.geojson");
    {
      std::ofstream f(path);
      f << text;
    }
    const auto polys = io::read_geojson(path);
    REQUIRE(polys.size() == 3);  // multipolygon flattened
    CHECK(polys[0].crs_id == "EPSG:32636");
    CHECK(polys[0].holes.size() == 1);
    CHECK(polys[0].attributes.at("fire_date") == "2017-01-15");
    CHECK(polys[0].attributes.at("refs") == "231395");
    CHECK(polys[0].attributes.at("flag") == "true");
    CHECK_FALSE(polys[0].attributes.contains("skip"));
    REQUIRE(polys[0].fire_date().has_value());
    CHECK(format_date(*polys[0].fire_date()) == "2017-01-15");
    CHECK(polys[1].attributes.at("fire_date") == "2017-02-01");
    CHECK(polys[2].exterior.pts.front().x == 400);
  }

  SECTION("unclosed rings are closed on read") {
    const std::string text = R"({"type":"FeatureCollection","features":[
      {"type":"Feature","properties":{},
       "geometry":{"type":"Polygon","coordinates":[[[0,0],[10,0],[10,10]]]}}]})";
    const auto path = dir.file("open.geojson");
    {
      std::ofstream f(path);
      f << text;
    }
    const auto polys = io::read_geojson(path, "EPSG:32636");
    REQUIRE(polys.size() == 1);
    CHECK(polys[0].exterior.closed());
    CHECK(polys[0].crs_id == "EPSG:32636");  // fallback applied
  }

  SECTION("write and re-read") {
    std::vector<geo::Polygon> polys;
    auto p = fixtures::rect_polygon(0, 0, 80, 60, "EPSG:32636");
    p.attributes["fire_date"] = "2019-12-31";
    p.attributes["district"] = "Arua";
    polys.push_back(p);
    const auto path = dir.file("out.geojson");
    io::write_geojson(path, polys, "EPSG:32636");
    const auto back = io::read_geojson(path);
    REQUIRE(back.size() == 1);
    CHECK(back[0].crs_id == "EPSG:32636");
    CHECK(back[0].attributes.at("district") == "Arua");
    CHECK(back[0].exterior.pts.size() == p.exterior.pts.size());
    CHECK(back[0].exterior.pts[2].x == 80);

    // identical content serializes identically
    io::write_geojson(dir.file("out2.geojson"), polys, "EPSG:32636");
    CHECK(testsupport::read_file(path) == testsupport::read_file(dir.file("out2.geojson")));
  }

  SECTION("parse errors carry ParseError") {
    const auto path = dir.file("bad.geojson");
    {
      std::ofstream f(path);
      f << "{not json";
    }
    CHECK_THROWS_MATCHES(io::read_geojson(path), Error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::StartsWith("ParseError")));
    {
      std::ofstream f(path, std::ios::trunc);
      f << R"({"type": "Feature"})";
    }
    CHECK_THROWS_AS(io::read_geojson(path), Error);
  }
}

TEST_CASE("shapefile reader recovers polygons, holes, and attributes") {
  TempDir dir;
  const auto shp = dir.file("labels.shp");

  // record 1: square with a hole (shapefile winding: CW outer, CCW inner)
  testsupport::ShpRecord rec1;
  rec1.rings.push_back({{{0, 0}, {0, 100}, {100, 100}, {100, 0}, {0, 0}}});     // CW
  rec1.rings.push_back({{{40, 40}, {60, 40}, {60, 60}, {40, 60}, {40, 40}}});   // CCW
  // record 2: triangle
  testsupport::ShpRecord rec2;
  rec2.rings.push_back({{{200, 0}, {250, 100}, {300, 0}, {200, 0}}});  // CW

  const std::vector<testsupport::DbfColumn> cols = {
      {"NAME", 'C', 16}, {"REFS", 'N', 8}, {"FIREDATE", 'D', 8}, {"OK", 'L', 1}};
  const std::vector<std::vector<std::string>> rows = {
      {"Bidi Bidi", "231395", "20160815", "T"},
      {"Imvepi", "64486", "20170201", "F"},
  };
  const std::string wkt =
      R"(PROJCS["WGS 84 / UTM zone 36N",GEOGCS["WGS 84",DATUM["WGS_1984",)"
      R"(SPHEROID["WGS 84",6378137,298.257223563]],AUTHORITY["EPSG","4326"]],)"
      R"(PROJECTION["Transverse_Mercator"],AUTHORITY["EPSG","32636"]])";
  testsupport::write_shapefile(shp, {rec1, rec2}, cols, rows, wkt);

  const auto polys = io::read_shapefile(shp);
  REQUIRE(polys.size() == 2);
  CHECK(polys[0].crs_id == "EPSG:32636");
  REQUIRE(polys[0].holes.size() == 1);
  CHECK(polys[0].attributes.at("NAME") == "Bidi Bidi");
  CHECK(polys[0].attributes.at("REFS") == "231395");
  CHECK(polys[0].attributes.at("FIREDATE") == "2016-08-15");  // D field to ISO
  CHECK(polys[0].attributes.at("OK") == "true");
  CHECK(polys[1].attributes.at("NAME") == "Imvepi");
  CHECK(polys[1].holes.empty());

  // hole actually punches out: center excluded, corner included
  CHECK_FALSE(polys[0].contains(50, 50));
  CHECK(polys[0].contains(10, 10));

  SECTION("point shapefiles are rejected") {
    auto bytes = testsupport::read_file(shp);
    // shape type lives at byte 32 of the header and byte 8 of each record
    bytes[32] = 1;
    bytes[100 + 8] = 1;
    testsupport::write_file(dir.file("points.shp"), bytes);
    CHECK_THROWS_MATCHES(io::read_shapefile(dir.file("points.shp")), Error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("unsupported shape type")));
  }
}

TEST_CASE("mask io applies the nodata convention") {
  TempDir dir;
  const auto grid = fixtures::north_up_grid(10, 6);
  geo::BinaryMask mask{grid, std::vector<std::uint8_t>(60, 0)};
  geo::BinaryMask valid{grid, std::vector<std::uint8_t>(60, 1)};
  mask.data[5] = 1;
  mask.data[33] = 1;
  valid.data[33] = 0;  // burned pixel with no data: must come back invalid, unburned
  valid.data[40] = 0;

  const auto path = dir.file("mask.tif");
  io::write_mask(path, mask, &valid);
  const auto rt = io::read_mask(path);
  CHECK(rt.mask.grid == grid);
  CHECK(rt.mask.data[5] == 1);
  CHECK(rt.mask.data[33] == 0);
  CHECK(rt.valid.data[33] == 0);
  CHECK(rt.valid.data[40] == 0);
  CHECK(rt.valid.data[5] == 1);
  CHECK(rt.mask.count() == 1);

  // raw bytes carry 255 for nodata
  const auto img = io::read_geotiff<std::uint8_t>(path);
  CHECK(img.data[33] == 255);
  REQUIRE(img.info.nodata.has_value());
  CHECK(*img.info.nodata == 255.0);
}

TEST_CASE("png writer emits a well-formed deterministic file") {
  TempDir dir;
  const int w = 19, h = 7;
  std::vector<std::uint8_t> rgb(std::size_t(w) * h * 3);
  Rng rng(5);
  for (auto& v : rgb) v = std::uint8_t(rng.uniform_int(0, 255));

  const auto path = dir.file("plot.png");
  io::write_png_rgb(path, w, h, rgb);
  const auto bytes = testsupport::read_file(path);
  REQUIRE(bytes.size() > 45);
  const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  CHECK(std::memcmp(bytes.data(), sig, 8) == 0);
  // IHDR payload: width and height as big-endian u32
  auto be32 = [&](std::size_t off) {
    return (std::uint32_t(bytes[off]) << 24) | (std::uint32_t(bytes[off + 1]) << 16) |
           (std::uint32_t(bytes[off + 2]) << 8) | std::uint32_t(bytes[off + 3]);
  };
  CHECK(be32(16) == std::uint32_t(w));
  CHECK(be32(20) == std::uint32_t(h));

  io::write_png_rgb(dir.file("plot2.png"), w, h, rgb);
  CHECK(testsupport::read_file(dir.file("plot2.png")) == bytes);

#ifdef BURNSCAN_HAS_OPENCV
  cv::Mat m = cv::imread(path, cv::IMREAD_COLOR);  // BGR order
  REQUIRE(m.cols == w);
  REQUIRE(m.rows == h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const auto px = m.at<cv::Vec3b>(y, x);
      const std::size_t o = (std::size_t(y) * w + x) * 3;
      REQUIRE(px[2] == rgb[o]);
      REQUIRE(px[1] == rgb[o + 1]);
      REQUIRE(px[0] == rgb[o + 2]);
    }
#endif
}


TEST_CASE("geojp2 uuid box yields the grid") {
  TempDir dir;
  geo::RasterGrid grid;
  grid.crs_id = "EPSG:32636";
  grid.transform = {600000.0, 20.0, 0.0, 4400000.0, 0.0, -20.0};
  grid.width = 1;
  grid.height = 1;
  const auto mini = dir.file("mini.tif");
  io::write_geotiff<std::uint8_t>(mini, grid, 1, std::vector<std::uint8_t>{0}, {},
                                  io::TiffCompression::none);
  const auto tiff_bytes = testsupport::read_file(mini);

  // fabricate a jp2 shell: signature box + ftyp box + uuid box
  std::vector<std::uint8_t> shell = {
      0x00, 0x00, 0x00, 0x0c, 'j', 'P', ' ', ' ', 0x0d, 0x0a, 0x87, 0x0a,
      0x00, 0x00, 0x00, 0x14, 'f', 't', 'y', 'p', 'j',  'p',  '2',  ' ',
      0x00, 0x00, 0x00, 0x00, 'j', 'p', '2', ' '};
  const auto spliced = testsupport::splice_geojp2_box(shell, tiff_bytes);
  REQUIRE_FALSE(spliced.empty());
  const auto info = io::parse_geojp2_info(spliced.data(), spliced.size(), "shell.jp2");
  REQUIRE(info.has_value());
  CHECK(info->grid.crs_id == "EPSG:32636");
  CHECK(info->grid.transform == grid.transform);

  CHECK_FALSE(io::parse_geojp2_info(shell.data(), shell.size(), "bare.jp2").has_value());
}

#ifdef BURNSCAN_HAS_OPENCV
TEST_CASE("jp2 band decode recovers pixels and georeferencing") {
  TempDir dir;
  const int w = 64, h = 48;
  cv::Mat m(h, w, CV_16UC1);
  // smooth field: compresses under the encoder's rate target, so the
  // reversible wavelet path stays exactly lossless
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      m.at<std::uint16_t>(y, x) = std::uint16_t(200 + 3 * x + 5 * y + ((x / 16) % 2) * 40);
  const auto raw = dir.file("band_raw.jp2");
  REQUIRE(cv::imwrite(raw, m,
                      {cv::IMWRITE_JPEG2000_COMPRESSION_X1000, 1000}));

  geo::RasterGrid grid;
  grid.crs_id = "EPSG:32636";
  grid.transform = {609000.0, 20.0, 0.0, 4391000.0, 0.0, -20.0};
  grid.width = 1;
  grid.height = 1;
  const auto mini = dir.file("mini.tif");
  io::write_geotiff<std::uint8_t>(mini, grid, 1, std::vector<std::uint8_t>{0}, {},
                                  io::TiffCompression::none);
  const auto spliced =
      testsupport::splice_geojp2_box(testsupport::read_file(raw), testsupport::read_file(mini));
  const auto path = dir.file("band.jp2");
  testsupport::write_file(path, spliced);

  const auto img = io::read_jp2(path);
  REQUIRE(img.info.grid.width == w);
  REQUIRE(img.info.grid.height == h);
  CHECK(img.info.grid.crs_id == "EPSG:32636");
  CHECK(img.info.grid.transform.origin_x == 609000.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      REQUIRE(img.data[std::size_t(y) * w + x] == m.at<std::uint16_t>(y, x));

  SECTION("jp2 without georeferencing is rejected") {
    CHECK_THROWS_MATCHES(io::read_jp2(raw), Error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("GeoJP2")));
  }
}
#endif
