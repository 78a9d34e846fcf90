#pragma once

#include <charconv>
#include <span>
#include <string>
#include <vector>

#include "burnscan/geo/polygon.hpp"
#include "burnscan/io/geojson.hpp"
#include "burnscan/util/error.hpp"

namespace burnscan::transfer {

// Settlement establishment, parsed from "YYYY", "MM/YYYY" or "YYYY-YYYY".
// month is 0 when the source gives only years.
struct Established {
  int year_start = 0;
  int year_end = 0;
  int month = 0;
};

namespace detail {

inline bool parse_int(const std::string& s, int& out) {
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

}  // namespace detail

inline Established parse_established(const std::string& s) {
  const auto fail = [&]() -> Established {
    throw Error(Errc::parse_error,
                "establishment date \"" + s +
                    "\" is not of the form YYYY, MM/YYYY or YYYY-YYYY");
  };
  Established e;
  if (const auto slash = s.find('/'); slash != std::string::npos) {
    if (!detail::parse_int(s.substr(0, slash), e.month) ||
        !detail::parse_int(s.substr(slash + 1), e.year_start))
      return fail();
    if (e.month < 1 || e.month > 12) return fail();
    e.year_end = e.year_start;
  } else if (const auto dash = s.find('-'); dash != std::string::npos) {
    if (!detail::parse_int(s.substr(0, dash), e.year_start) ||
        !detail::parse_int(s.substr(dash + 1), e.year_end))
      return fail();
    if (e.year_end < e.year_start) return fail();
  } else {
    if (!detail::parse_int(s, e.year_start)) return fail();
    e.year_end = e.year_start;
  }
  if (e.year_start < 1900 || e.year_end > 2100) return fail();
  return e;
}

struct DistrictConfig {
  std::string district_name;
  std::string settlement_name;
  std::string established;  // original form; parse_established validates it
  long total_refugees = 0;
  geo::Polygon boundary;
};

// Features need the properties district, settlement, established and
// total_refugees; the geometry becomes the zone boundary.
inline std::vector<DistrictConfig> districts_from_polygons(
    std::span<const geo::Polygon> polys) {
  std::vector<DistrictConfig> out;
  out.reserve(polys.size());
  for (const auto& p : polys) {
    DistrictConfig d;
    const auto need = [&](const char* key) {
      const auto it = p.attributes.find(key);
      if (it == p.attributes.end())
        throw Error(Errc::parse_error,
                    std::string("district feature is missing property \"") +
                        key + "\"");
      return it->second;
    };
    d.district_name = need("district");
    d.settlement_name = need("settlement");
    d.established = need("established");
    parse_established(d.established);
    const std::string refugees = need("total_refugees");
    int n = 0;
    if (!detail::parse_int(refugees, n) || n < 0)
      throw Error(Errc::parse_error,
                  "total_refugees \"" + refugees + "\" is not a count");
    d.total_refugees = n;
    d.boundary = p;
    d.boundary.validate();
    out.push_back(std::move(d));
  }
  return out;
}

inline std::vector<DistrictConfig> read_districts(const std::string& path) {
  return districts_from_polygons(io::read_geojson(path));
}

}  // namespace burnscan::transfer
