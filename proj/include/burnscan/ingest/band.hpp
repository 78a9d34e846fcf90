#pragma once

// Single-band L1C raster handling. Digital numbers are kept as integers
// (top-of-atmosphere reflectance x 10000); DN 0 is the distribution's
// nodata marker.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "burnscan/geo/grid.hpp"
#include "burnscan/io/geotiff.hpp"
#include "burnscan/io/jp2.hpp"
#include "burnscan/util/error.hpp"

namespace burnscan::ingest {

enum class BandId { b8a, b03, b12 };

inline const char* band_name(BandId b) {
  switch (b) {
    case BandId::b8a: return "B8A";
    case BandId::b03: return "B03";
    case BandId::b12: return "B12";
  }
  return "?";
}

// native ground sampling distance in metres
inline double band_native_resolution(BandId b) {
  return b == BandId::b03 ? 10.0 : 20.0;
}

struct BandRaster {
  BandId id = BandId::b8a;
  geo::RasterGrid grid;
  std::vector<std::uint16_t> dn;
  std::uint16_t nodata = 0;

  std::uint16_t at(long row, long col) const {
    return dn[std::size_t(row) * grid.width + col];
  }
  bool valid_at(long row, long col) const { return at(row, col) != nodata; }
};

namespace detail {

inline bool has_suffix(const std::string& s, const std::string& suffix) {
  if (s.size() < suffix.size()) return false;
  std::string tail = s.substr(s.size() - suffix.size());
  std::transform(tail.begin(), tail.end(), tail.begin(),
                 [](unsigned char c) { return char(std::tolower(c)); });
  return tail == suffix;
}

}  // namespace detail

inline BandRaster load_band(const std::string& path, BandId id) {
  BandRaster out;
  out.id = id;
  if (detail::has_suffix(path, ".jp2")) {
    auto img = io::read_jp2(path);
    out.grid = img.info.grid;
    out.dn = std::move(img.data);
  } else {
    const auto info = io::read_geotiff_info(path);
    if (info.samples != 1)
      throw Error(Errc::read_failure, path + ": band file must be single-band");
    if (!io::pixel_type_integral(info.type))
      throw Error(Errc::read_failure,
                  path + ": band digital numbers must be integers");
    if (info.type == io::PixelType::u8 || info.type == io::PixelType::u16) {
      auto img = io::read_geotiff<std::uint16_t>(path);
      out.grid = img.info.grid;
      out.dn = std::move(img.data);
    } else {
      // wider or signed storage: clamp into the DN range
      auto img = io::read_geotiff<std::int64_t>(path);
      out.grid = img.info.grid;
      out.dn.resize(img.data.size());
      for (std::size_t i = 0; i < img.data.size(); ++i)
        out.dn[i] = std::uint16_t(std::clamp<std::int64_t>(img.data[i], 0, 65535));
    }
  }
  out.grid.validate();

  const double res = band_native_resolution(id);
  if (std::abs(out.grid.transform.pixel_width - res) > 1e-6 ||
      std::abs(std::abs(out.grid.transform.pixel_height) - res) > 1e-6)
    throw Error(Errc::wrong_band,
                std::string(band_name(id)) + " expects " + std::to_string(int(res)) +
                    " m pixels, got " + std::to_string(out.grid.transform.pixel_width) +
                    " m in " + path);
  return out;
}

// 2x2 block mean of valid pixels, rounded to nearest DN. An output pixel is
// nodata only when all four inputs are nodata. Same origin, double the pixel.
inline BandRaster resample_b03_to_20m(const BandRaster& band) {
  if (band.id != BandId::b03)
    throw Error(Errc::wrong_band, std::string("resample expects B03, got ") +
                                      band_name(band.id));
  if (band.grid.width % 2 != 0 || band.grid.height % 2 != 0)
    throw Error(Errc::odd_dimensions,
                "B03 resampling needs even dimensions, got " +
                    std::to_string(band.grid.width) + "x" +
                    std::to_string(band.grid.height));

  BandRaster out;
  out.id = BandId::b03;
  out.nodata = band.nodata;
  out.grid = band.grid;
  out.grid.width = band.grid.width / 2;
  out.grid.height = band.grid.height / 2;
  out.grid.transform.pixel_width *= 2.0;
  out.grid.transform.pixel_height *= 2.0;
  out.dn.resize(std::size_t(out.grid.width) * out.grid.height);

  for (long r = 0; r < out.grid.height; ++r) {
    for (long c = 0; c < out.grid.width; ++c) {
      long sum = 0;
      int n = 0;
      for (int dr = 0; dr < 2; ++dr)
        for (int dc = 0; dc < 2; ++dc) {
          const std::uint16_t v = band.at(2 * r + dr, 2 * c + dc);
          if (v != band.nodata) {
            sum += v;
            ++n;
          }
        }
      out.dn[std::size_t(r) * out.grid.width + c] =
          n == 0 ? band.nodata
                 : std::uint16_t(std::llround(double(sum) / double(n)));
    }
  }
  return out;
}

}  // namespace burnscan::ingest
