#pragma once

// GeoJSON FeatureCollection <-> polygon lists. MultiPolygon features are
// flattened to one polygon per part, all parts sharing the feature's
// properties. CRS comes from the legacy "crs" member when present,
// otherwise from the caller's fallback (GeoJSON itself defaults to WGS84,
// but files produced alongside projected rasters here carry the raster CRS).

#include <nlohmann/json.hpp>

#include <fstream>
#include <string>
#include <vector>

#include "burnscan/geo/polygon.hpp"
#include "burnscan/util/error.hpp"

namespace burnscan::io {

namespace detail {

inline std::string crs_from_name(const std::string& name) {
  // accepted spellings: "EPSG:32636", "urn:ogc:def:crs:EPSG::32636",
  // "urn:ogc:def:crs:OGC:1.3:CRS84"
  if (name.starts_with("EPSG:")) return name;
  if (name.find("OGC") != std::string::npos && name.find("CRS84") != std::string::npos)
    return "EPSG:4326";
  const auto pos = name.rfind(':');
  if (name.find("EPSG") != std::string::npos && pos != std::string::npos)
    return "EPSG:" + name.substr(pos + 1);
  return name;
}

inline geo::Ring parse_ring(const nlohmann::json& arr, const std::string& path) {
  geo::Ring ring;
  for (const auto& pt : arr) {
    if (!pt.is_array() || pt.size() < 2)
      throw Error(Errc::parse_error, path + ": ring coordinate is not an [x, y] pair");
    ring.pts.push_back({pt[0].get<double>(), pt[1].get<double>()});
  }
  if (ring.pts.size() >= 3 &&
      (ring.pts.front().x != ring.pts.back().x ||
       ring.pts.front().y != ring.pts.back().y))
    ring.pts.push_back(ring.pts.front());
  return ring;
}

inline std::string property_to_string(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  return v.dump();
}

inline geo::Polygon polygon_from_rings(const nlohmann::json& rings,
                                       const std::string& path) {
  if (!rings.is_array() || rings.empty())
    throw Error(Errc::parse_error, path + ": polygon has no rings");
  geo::Polygon poly;
  poly.exterior = parse_ring(rings[0], path);
  for (std::size_t i = 1; i < rings.size(); ++i)
    poly.holes.push_back(parse_ring(rings[i], path));
  return poly;
}

}  // namespace detail

inline std::vector<geo::Polygon> parse_geojson(const nlohmann::json& doc,
                                               const std::string& path,
                                               const std::string& fallback_crs = "") {
  std::string crs = fallback_crs;
  if (doc.contains("crs")) {
    const auto& c = doc["crs"];
    if (c.is_string()) crs = detail::crs_from_name(c.get<std::string>());
    else if (c.is_object() && c.contains("properties") &&
             c["properties"].contains("name"))
      crs = detail::crs_from_name(c["properties"]["name"].get<std::string>());
  }

  if (!doc.contains("type") || doc["type"] != "FeatureCollection")
    throw Error(Errc::parse_error, path + ": expected a FeatureCollection");

  std::vector<geo::Polygon> out;
  for (const auto& feature : doc.value("features", nlohmann::json::array())) {
    if (!feature.contains("geometry") || feature["geometry"].is_null()) continue;
    const auto& geom = feature["geometry"];
    const std::string type = geom.value("type", "");

    std::map<std::string, std::string> attrs;
    if (feature.contains("properties") && feature["properties"].is_object())
      for (const auto& [k, v] : feature["properties"].items())
        if (!v.is_null()) attrs[k] = detail::property_to_string(v);

    auto emit = [&](const nlohmann::json& rings) {
      auto poly = detail::polygon_from_rings(rings, path);
      poly.attributes = attrs;
      poly.crs_id = crs;
      out.push_back(std::move(poly));
    };
    if (type == "Polygon") {
      emit(geom["coordinates"]);
    } else if (type == "MultiPolygon") {
      for (const auto& rings : geom["coordinates"]) emit(rings);
    } else if (!type.empty()) {
      throw Error(Errc::parse_error,
                  path + ": unsupported geometry type \"" + type + "\"");
    }
  }
  return out;
}

inline std::vector<geo::Polygon> read_geojson(const std::string& path,
                                              const std::string& fallback_crs = "") {
  std::ifstream in(path);
  if (!in) throw Error(Errc::read_failure, "cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse_error, path + ": " + e.what());
  }
  return parse_geojson(doc, path, fallback_crs);
}

inline nlohmann::json to_geojson(std::span<const geo::Polygon> polys,
                                 const std::string& crs_id) {
  nlohmann::json doc;
  doc["type"] = "FeatureCollection";
  if (!crs_id.empty() && crs_id.starts_with("EPSG:")) {
    doc["crs"] = {{"type", "name"},
                  {"properties",
                   {{"name", "urn:ogc:def:crs:EPSG::" + crs_id.substr(5)}}}};
  }
  auto ring_json = [](const geo::Ring& r) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : r.pts) arr.push_back({p.x, p.y});
    return arr;
  };
  doc["features"] = nlohmann::json::array();
  for (const auto& poly : polys) {
    nlohmann::json rings = nlohmann::json::array();
    rings.push_back(ring_json(poly.exterior));
    for (const auto& h : poly.holes) rings.push_back(ring_json(h));
    nlohmann::json props = nlohmann::json::object();
    for (const auto& [k, v] : poly.attributes) props[k] = v;
    doc["features"].push_back({{"type", "Feature"},
                               {"properties", props},
                               {"geometry",
                                {{"type", "Polygon"}, {"coordinates", rings}}}});
  }
  return doc;
}

inline void write_geojson(const std::string& path, std::span<const geo::Polygon> polys,
                          const std::string& crs_id) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(Errc::write_failure, "cannot open " + path + " for writing");
  out << to_geojson(polys, crs_id).dump(2) << '\n';
  if (!out) throw Error(Errc::write_failure, "short write to " + path);
}

}  // namespace burnscan::io
