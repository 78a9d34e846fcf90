#pragma once

// Scene discovery: one granule per directory, bands recognized by the B8A /
// B03 / B12 tokens in their filenames. The sensing date comes from a
// scene.json sidecar when present, otherwise from the first date-like token
// in the directory name (granule ids carry sensing start first).

#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "burnscan/geo/polygon.hpp"
#include "burnscan/io/geotiff.hpp"
#include "burnscan/io/jp2.hpp"
#include "burnscan/ingest/band.hpp"
#include "burnscan/util/date.hpp"
#include "burnscan/util/error.hpp"

namespace burnscan::ingest {

struct SceneRef {
  std::string scene_id;
  Date sensing_date{};
  std::map<std::string, std::string> band_paths;  // "B8A"/"B03"/"B12" -> file
  std::string crs_id;
  geo::Polygon footprint;
};

struct Catalog {
  std::vector<SceneRef> scenes;
  std::vector<std::string> skipped;  // one human-readable reason per skipped granule
};

// earliest plausible sensing date for the mission
inline Date default_catalog_floor() { return parse_date("2015-01-01"); }

namespace detail {

inline std::optional<Date> date_from_name(const std::string& name) {
  static const std::regex digits("(\\d{8})");
  for (auto it = std::sregex_iterator(name.begin(), name.end(), digits);
       it != std::sregex_iterator(); ++it) {
    const std::string tok = (*it)[1];
    const std::string iso =
        tok.substr(0, 4) + "-" + tok.substr(4, 2) + "-" + tok.substr(6, 2);
    try {
      return parse_date(iso);
    } catch (const Error&) {
      continue;  // eight digits that are not a date (tile numbers etc.)
    }
  }
  return std::nullopt;
}

inline std::optional<Date> scene_sidecar_date(const std::filesystem::path& dir) {
  const auto sidecar = dir / "scene.json";
  std::ifstream in(sidecar);
  if (!in) return std::nullopt;
  try {
    nlohmann::json doc;
    in >> doc;
    if (doc.contains("sensing_date"))
      return parse_date(doc["sensing_date"].get<std::string>());
  } catch (...) {
    // fall through to name-derived date
  }
  return std::nullopt;
}

inline std::optional<geo::RasterGrid> probe_grid(const std::string& path) {
  try {
    if (has_suffix(path, ".jp2")) {
      const auto bytes = io::detail::read_file_bytes(path);
      const auto info = io::parse_geojp2_info(bytes.data(), bytes.size(), path);
      if (!info) return std::nullopt;
      return info->grid;
    }
    return io::read_geotiff_info(path).grid;
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace detail

inline Catalog build_catalog(const std::string& root,
                             Date min_date = default_catalog_floor()) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root))
    throw Error(Errc::read_failure, root + " is not a directory");

  Catalog cat;
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory()) dirs.push_back(entry.path());
  std::sort(dirs.begin(), dirs.end());

  for (const auto& dir : dirs) {
    const std::string scene_id = dir.filename().string();
    auto skip = [&](const std::string& why) {
      cat.skipped.push_back(scene_id + ": " + why);
    };

    std::map<std::string, std::string> bands;
    std::vector<fs::path> files;
    for (const auto& f : fs::directory_iterator(dir))
      if (f.is_regular_file()) files.push_back(f.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      const std::string name = f.filename().string();
      if (!detail::has_suffix(name, ".jp2") && !detail::has_suffix(name, ".tif") &&
          !detail::has_suffix(name, ".tiff"))
        continue;
      for (const char* b : {"B8A", "B03", "B12"})
        if (name.find(b) != std::string::npos && !bands.contains(b))
          bands[b] = f.string();
    }

    std::vector<std::string> missing;
    for (const char* b : {"B8A", "B03", "B12"})
      if (!bands.contains(b)) missing.push_back(b);
    if (!missing.empty()) {
      std::string why = "missing band";
      if (missing.size() > 1) why += "s";
      for (const auto& b : missing) why += " " + b;
      skip(why);
      continue;
    }

    auto date = detail::scene_sidecar_date(dir);
    if (!date) date = detail::date_from_name(scene_id);
    if (!date) {
      skip("no sensing date in scene.json or directory name");
      continue;
    }
    if (*date < min_date) {
      skip("sensing date " + format_date(*date) + " precedes catalog floor " +
           format_date(min_date));
      continue;
    }

    const auto grid = detail::probe_grid(bands.at("B8A"));
    if (!grid) {
      skip("cannot read georeferencing from " + bands.at("B8A"));
      continue;
    }

    SceneRef ref;
    ref.scene_id = scene_id;
    ref.sensing_date = *date;
    ref.band_paths = std::move(bands);
    ref.crs_id = grid->crs_id;
    ref.footprint = geo::grid_extent_polygon(*grid);
    cat.scenes.push_back(std::move(ref));
  }

  std::sort(cat.scenes.begin(), cat.scenes.end(),
            [](const SceneRef& a, const SceneRef& b) {
              if (a.sensing_date != b.sensing_date) return a.sensing_date < b.sensing_date;
              return a.scene_id < b.scene_id;
            });
  if (cat.scenes.empty())
    throw Error(Errc::empty_catalog, "no usable scenes under " + root +
                                         " (" + std::to_string(cat.skipped.size()) +
                                         " skipped)");
  return cat;
}

}  // namespace burnscan::ingest
