#pragma once

// False-color composite assembly: three DN bands on one 20 m grid become a
// 3-channel reflectance stack in [0,1], channel order [B8A, B03, B12], with
// a validity mask where all three bands carried data.

#include <nlohmann/json.hpp>

#include <fstream>
#include <string>
#include <vector>

#include "burnscan/geo/mask.hpp"
#include "burnscan/ingest/band.hpp"
#include "burnscan/ingest/catalog.hpp"
#include "burnscan/io/geotiff.hpp"
#include "burnscan/util/date.hpp"

namespace burnscan::ingest {

constexpr int kCompositeChannels = 3;
constexpr float kCompositeNodata = -1.0f;

struct CompositeRaster {
  geo::RasterGrid grid;
  std::vector<float> channels;  // planar, [B8A, B03, B12]
  geo::BinaryMask valid;
  Date sensing_date{};
  std::string scene_id;

  float at(int channel, long row, long col) const {
    return channels[(std::size_t(channel) * grid.height + row) * grid.width + col];
  }
  std::size_t plane_size() const {
    return std::size_t(grid.width) * grid.height;
  }
};

inline CompositeRaster make_composite(const BandRaster& b8a, const BandRaster& b03,
                                      const BandRaster& b12,
                                      const std::string& scene_id,
                                      Date sensing_date) {
  const BandRaster* b03_20m = &b03;
  BandRaster resampled;
  if (std::abs(b03.grid.transform.pixel_width - 10.0) < 1e-6) {
    resampled = resample_b03_to_20m(b03);
    b03_20m = &resampled;
  }
  if (!(b8a.grid == b12.grid))
    throw Error(Errc::grid_mismatch, scene_id + ": B8A and B12 grids differ");
  if (!(b8a.grid == b03_20m->grid))
    throw Error(Errc::grid_mismatch,
                scene_id + ": resampled B03 grid does not match B8A");

  CompositeRaster out;
  out.grid = b8a.grid;
  out.sensing_date = sensing_date;
  out.scene_id = scene_id;
  out.valid = geo::BinaryMask(out.grid);
  const std::size_t plane = out.plane_size();
  out.channels.resize(plane * kCompositeChannels);

  const BandRaster* bands[3] = {&b8a, b03_20m, &b12};
  for (int ch = 0; ch < 3; ++ch) {
    const auto& band = *bands[ch];
    for (std::size_t i = 0; i < plane; ++i) {
      const float refl = float(band.dn[i]) / 10000.0f;
      out.channels[std::size_t(ch) * plane + i] = std::min(refl, 1.0f);
    }
  }
  for (std::size_t i = 0; i < plane; ++i)
    out.valid.data[i] = (b8a.dn[i] != b8a.nodata && b03_20m->dn[i] != b03_20m->nodata &&
                         b12.dn[i] != b12.nodata)
                            ? 1
                            : 0;
  return out;
}

inline CompositeRaster composite_scene(const SceneRef& scene) {
  const auto b8a = load_band(scene.band_paths.at("B8A"), BandId::b8a);
  const auto b03 = load_band(scene.band_paths.at("B03"), BandId::b03);
  const auto b12 = load_band(scene.band_paths.at("B12"), BandId::b12);
  return make_composite(b8a, b03, b12, scene.scene_id, scene.sensing_date);
}

namespace detail {

inline std::string sidecar_path(const std::string& tif_path) {
  const auto dot = tif_path.rfind('.');
  return (dot == std::string::npos ? tif_path : tif_path.substr(0, dot)) + ".json";
}

}  // namespace detail

// Persists as 3-band float32 GeoTIFF (invalid pixels -1 in every channel)
// plus a sidecar JSON naming scene, date, and band order.
inline void write_composite(const std::string& tif_path, const CompositeRaster& c) {
  const std::size_t plane = c.plane_size();
  std::vector<float> data(c.channels);
  for (std::size_t i = 0; i < plane; ++i)
    if (!c.valid.data[i])
      for (int ch = 0; ch < kCompositeChannels; ++ch)
        data[std::size_t(ch) * plane + i] = kCompositeNodata;
  io::write_geotiff<float>(tif_path, c.grid, kCompositeChannels, data,
                           double(kCompositeNodata));

  nlohmann::json meta;
  meta["scene_id"] = c.scene_id;
  meta["sensing_date"] = format_date(c.sensing_date);
  meta["band_order"] = {"B8A", "B03", "B12"};
  std::ofstream out(detail::sidecar_path(tif_path), std::ios::trunc);
  if (!out)
    throw Error(Errc::write_failure, "cannot write sidecar for " + tif_path);
  out << meta.dump(2) << '\n';
}

inline CompositeRaster read_composite(const std::string& tif_path) {
  const auto img = io::read_geotiff<float>(tif_path);
  if (img.info.samples != kCompositeChannels)
    throw Error(Errc::read_failure,
                tif_path + ": composite must have exactly 3 bands");

  CompositeRaster c;
  c.grid = img.info.grid;
  c.valid = geo::BinaryMask(c.grid);
  c.channels = img.data;
  const float nodata =
      img.info.nodata ? float(*img.info.nodata) : kCompositeNodata;
  const std::size_t plane = c.plane_size();
  for (std::size_t i = 0; i < plane; ++i) {
    const bool invalid = c.channels[i] == nodata;
    c.valid.data[i] = invalid ? 0 : 1;
    if (invalid)
      for (int ch = 0; ch < kCompositeChannels; ++ch)
        c.channels[std::size_t(ch) * plane + i] = 0.0f;
  }

  std::ifstream in(detail::sidecar_path(tif_path));
  if (!in)
    throw Error(Errc::read_failure, tif_path + ": missing sidecar JSON");
  try {
    nlohmann::json meta;
    in >> meta;
    c.scene_id = meta.at("scene_id").get<std::string>();
    c.sensing_date = parse_date(meta.at("sensing_date").get<std::string>());
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(Errc::parse_error,
                detail::sidecar_path(tif_path) + ": " + e.what());
  }
  return c;
}

}  // namespace burnscan::ingest
