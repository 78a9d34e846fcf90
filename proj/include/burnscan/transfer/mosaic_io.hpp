#pragma once

// Mosaic persistence: a directory holding prob.tif (float32, nodata -1),
// burned.tif (uint8 mask with nodata validity) and mosaic.json metadata.

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <string>

#include "burnscan/io/geotiff.hpp"
#include "burnscan/io/mask_io.hpp"
#include "burnscan/transfer/mosaic.hpp"
#include "burnscan/util/date.hpp"

namespace burnscan::transfer {

constexpr float kMosaicNodata = -1.0f;

inline std::filesystem::path mosaic_prob_path(const std::filesystem::path& dir) {
  return dir / "prob.tif";
}
inline std::filesystem::path mosaic_mask_path(const std::filesystem::path& dir) {
  return dir / "burned.tif";
}
inline std::filesystem::path mosaic_meta_path(const std::filesystem::path& dir) {
  return dir / "mosaic.json";
}

inline void write_mosaic(const RegionMosaic& mosaic,
                         const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);

  std::vector<float> prob(mosaic.prob);
  for (std::size_t i = 0; i < prob.size(); ++i)
    if (!mosaic.valid.data[i]) prob[i] = kMosaicNodata;
  io::write_geotiff<float>(mosaic_prob_path(dir).string(), mosaic.grid, 1, prob,
                           double(kMosaicNodata));
  io::write_mask(mosaic_mask_path(dir).string(), mosaic.burned, &mosaic.valid);

  nlohmann::json meta;
  meta["period"] = {{"start", format_date(mosaic.period.start)},
                    {"end", format_date(mosaic.period.end)}};
  meta["provenance"] = mosaic.provenance;
  std::ofstream out(mosaic_meta_path(dir), std::ios::binary);
  out << meta.dump(2) << "\n";
  if (!out) throw Error(Errc::write_failure, "short write to " + mosaic_meta_path(dir).string());
}

inline RegionMosaic read_mosaic(const std::filesystem::path& dir) {
  const std::string meta_path = mosaic_meta_path(dir).string();
  std::ifstream in(meta_path, std::ios::binary);
  if (!in) throw Error(Errc::read_failure, "cannot open " + meta_path);
  nlohmann::json meta;
  try {
    in >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse_error, meta_path + ": " + e.what());
  }

  RegionMosaic mosaic;
  mosaic.period.start = parse_date(meta.at("period").at("start").get<std::string>());
  mosaic.period.end = parse_date(meta.at("period").at("end").get<std::string>());
  for (const auto& s : meta.value("provenance", nlohmann::json::array()))
    mosaic.provenance.push_back(s.get<std::string>());

  const auto img = io::read_geotiff<float>(mosaic_prob_path(dir).string());
  if (img.info.samples != 1)
    throw Error(Errc::read_failure, "mosaic probability raster must be single-band");
  auto mask = io::read_mask(mosaic_mask_path(dir).string());
  if (!(mask.mask.grid == img.info.grid))
    throw Error(Errc::grid_mismatch, "mosaic mask grid differs from probability grid");

  mosaic.grid = img.info.grid;
  mosaic.prob = img.data;
  mosaic.valid = std::move(mask.valid);
  mosaic.burned = std::move(mask.mask);
  for (std::size_t i = 0; i < mosaic.prob.size(); ++i)
    if (!mosaic.valid.data[i]) mosaic.prob[i] = 0.0f;
  return mosaic;
}

}  // namespace burnscan::transfer
