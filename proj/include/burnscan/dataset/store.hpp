#pragma once

// Patch store on disk: one directory holding per-patch image and label
// rasters plus manifest.json. Every artifact is written deterministically,
// each raster's CRC lives in its manifest record, and a manifest-level
// checksum covers the records themselves, so any byte flip surfaces as
// CorruptStore on read.

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "burnscan/dataset/labels.hpp"
#include "burnscan/dataset/split.hpp"
#include "burnscan/io/geotiff.hpp"
#include "burnscan/util/checksum.hpp"

namespace burnscan::dataset {

struct Store {
  DatasetManifest manifest;
  std::vector<LabeledPatch> patches;  // in manifest record order
};

namespace detail {

inline std::string img_name(const std::string& patch_id) { return patch_id + "_img.tif"; }
inline std::string lbl_name(const std::string& patch_id) { return patch_id + "_lbl.tif"; }

inline std::string crc_hex(std::uint32_t crc) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%08x", crc);
  return buf;
}

inline nlohmann::json record_json(const PatchRecord& r, const std::string& img_crc,
                                  const std::string& lbl_crc) {
  return {{"patch_id", r.patch_id},
          {"scene_id", r.scene_id},
          {"row_off", r.row_off},
          {"col_off", r.col_off},
          {"sensing_date", format_date(r.sensing_date)},
          {"burned_fraction", r.burned_fraction},
          {"split_tag", split_tag_name(r.split_tag)},
          {"img_crc32", img_crc},
          {"lbl_crc32", lbl_crc}};
}

}  // namespace detail

inline void write_store(const std::string& dir, const Store& store) {
  namespace fs = std::filesystem;
  if (store.manifest.records.size() != store.patches.size())
    throw Error(Errc::invalid_argument,
                "manifest record count does not match patch count");
  fs::create_directories(dir);

  nlohmann::json records = nlohmann::json::array();
  for (std::size_t i = 0; i < store.patches.size(); ++i) {
    const auto& p = store.patches[i];
    const auto& r = store.manifest.records[i];
    if (p.patch_id != r.patch_id)
      throw Error(Errc::invalid_argument,
                  "manifest order does not match patches at " + r.patch_id);

    const auto img_path = (fs::path(dir) / detail::img_name(p.patch_id)).string();
    const auto lbl_path = (fs::path(dir) / detail::lbl_name(p.patch_id)).string();
    io::write_geotiff<float>(img_path, p.window.grid, ingest::kCompositeChannels,
                             p.channels);
    io::write_geotiff<std::uint8_t>(lbl_path, p.window.grid, 1, p.label.data);
    records.push_back(detail::record_json(r, detail::crc_hex(crc32_file(img_path)),
                                          detail::crc_hex(crc32_file(lbl_path))));
  }

  nlohmann::json m;
  m["records"] = records;
  m["split_seed"] = store.manifest.split_seed;
  m["split_mode"] = split_mode_name(store.manifest.split_mode);
  m["stride"] = store.manifest.stride;
  m["window_days"] = store.manifest.window_days;
  m["counts"] = {{"train", store.manifest.count(SplitTag::train)},
                 {"test", store.manifest.count(SplitTag::test)},
                 {"unassigned", store.manifest.count(SplitTag::unassigned)}};
  m["checksum"] = detail::crc_hex(crc32_bytes(records.dump()));

  std::ofstream out(fs::path(dir) / "manifest.json", std::ios::trunc);
  if (!out) throw Error(Errc::write_failure, "cannot write manifest in " + dir);
  out << m.dump(2) << '\n';
}

inline Store read_store(const std::string& dir) {
  namespace fs = std::filesystem;
  const auto manifest_path = fs::path(dir) / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in)
    throw Error(Errc::corrupt_store, "missing manifest.json in " + dir);
  nlohmann::json m;
  try {
    in >> m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::corrupt_store, manifest_path.string() + ": " + e.what());
  }

  Store store;
  try {
    const auto& records = m.at("records");
    if (m.at("checksum").get<std::string>() !=
        detail::crc_hex(crc32_bytes(records.dump())))
      throw Error(Errc::corrupt_store, "manifest checksum mismatch in " + dir);

    store.manifest.split_seed = m.at("split_seed").get<std::uint64_t>();
    store.manifest.split_mode = m.value("split_mode", "patch") == std::string("scene")
                                    ? SplitMode::by_scene
                                    : SplitMode::by_patch;
    store.manifest.stride = m.value("stride", kPatchSize);
    store.manifest.window_days = m.value("window_days", kDefaultLabelWindowDays);

    std::set<std::string> seen_ids;
    for (const auto& rj : records) {
      PatchRecord r;
      r.patch_id = rj.at("patch_id").get<std::string>();
      r.scene_id = rj.at("scene_id").get<std::string>();
      r.row_off = rj.at("row_off").get<long>();
      r.col_off = rj.at("col_off").get<long>();
      r.sensing_date = parse_date(rj.at("sensing_date").get<std::string>());
      r.burned_fraction = rj.at("burned_fraction").get<double>();
      r.split_tag = parse_split_tag(rj.at("split_tag").get<std::string>());
      if (!seen_ids.insert(r.patch_id).second)
        throw Error(Errc::corrupt_store, "duplicate patch id " + r.patch_id);

      const auto img_path = (fs::path(dir) / detail::img_name(r.patch_id)).string();
      const auto lbl_path = (fs::path(dir) / detail::lbl_name(r.patch_id)).string();
      if (!fs::exists(img_path) || !fs::exists(lbl_path))
        throw Error(Errc::corrupt_store, "missing raster files for " + r.patch_id);
      if (detail::crc_hex(crc32_file(img_path)) !=
          rj.at("img_crc32").get<std::string>())
        throw Error(Errc::corrupt_store, "checksum mismatch on " + img_path);
      if (detail::crc_hex(crc32_file(lbl_path)) !=
          rj.at("lbl_crc32").get<std::string>())
        throw Error(Errc::corrupt_store, "checksum mismatch on " + lbl_path);

      const auto img = io::read_geotiff<float>(img_path);
      const auto lbl = io::read_geotiff<std::uint8_t>(lbl_path);
      if (img.info.samples != ingest::kCompositeChannels ||
          img.info.grid.width != kPatchSize || img.info.grid.height != kPatchSize ||
          !(lbl.info.grid == img.info.grid))
        throw Error(Errc::corrupt_store, "malformed rasters for " + r.patch_id);

      LabeledPatch p;
      p.patch_id = r.patch_id;
      p.window = {r.scene_id, r.row_off, r.col_off, img.info.grid};
      p.channels = img.data;
      p.label = geo::BinaryMask(img.info.grid, lbl.data);
      p.sensing_date = r.sensing_date;
      p.burned_fraction = r.burned_fraction;
      p.split_tag = r.split_tag;

      store.manifest.records.push_back(std::move(r));
      store.patches.push_back(std::move(p));
    }

    const auto& counts = m.at("counts");
    if (counts.at("train").get<long>() != store.manifest.count(SplitTag::train) ||
        counts.at("test").get<long>() != store.manifest.count(SplitTag::test) ||
        counts.at("unassigned").get<long>() !=
            store.manifest.count(SplitTag::unassigned))
      throw Error(Errc::corrupt_store, "manifest counts disagree with records in " + dir);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(Errc::corrupt_store, manifest_path.string() + ": " + e.what());
  }
  return store;
}

}  // namespace burnscan::dataset
