#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "burnscan/geo/zonal.hpp"
#include "burnscan/transfer/districts.hpp"
#include "burnscan/transfer/mosaic.hpp"
#include "burnscan/util/error.hpp"

namespace burnscan::transfer {

inline constexpr const char* kRegionControlName = "REGION_CONTROL";

struct SeriesRow {
  std::string zone_name;
  std::string period;
  double burned_fraction = 0.0;
  double burned_area_km2 = 0.0;
  long n_valid_pixels = 0;
};

struct DistrictSeries {
  std::vector<SeriesRow> rows;
};

inline double pixel_area_km2(const geo::RasterGrid& grid) {
  return std::abs(grid.transform.pixel_width * grid.transform.pixel_height) / 1e6;
}

// One row per settlement zone per period plus the whole-region control row.
// Rows come out sorted by period then zone name, control last, so the result
// does not depend on the order of mosaics or districts.
inline DistrictSeries build_series(std::span<const RegionMosaic> mosaics,
                                   std::span<const DistrictConfig> districts,
                                   const geo::Polygon& region_boundary) {
  std::vector<const RegionMosaic*> by_period;
  by_period.reserve(mosaics.size());
  for (const auto& m : mosaics) by_period.push_back(&m);
  std::sort(by_period.begin(), by_period.end(),
            [](const RegionMosaic* a, const RegionMosaic* b) {
              return a->period.start < b->period.start;
            });

  std::vector<const DistrictConfig*> zones;
  zones.reserve(districts.size());
  for (const auto& d : districts) zones.push_back(&d);
  std::sort(zones.begin(), zones.end(),
            [](const DistrictConfig* a, const DistrictConfig* b) {
              return a->settlement_name < b->settlement_name;
            });

  DistrictSeries series;
  for (const RegionMosaic* m : by_period) {
    const std::string label = period_label(m->period);
    const double area = pixel_area_km2(m->grid);
    const auto emit = [&](const std::string& zone, const geo::Polygon& boundary) {
      const auto z = geo::zonal_fraction(m->burned, m->valid, boundary);
      SeriesRow row;
      row.zone_name = zone;
      row.period = label;
      row.burned_fraction = z.fraction;
      row.n_valid_pixels = z.n_zone_pixels;
      row.burned_area_km2 = z.fraction * double(z.n_zone_pixels) * area;
      series.rows.push_back(std::move(row));
    };
    for (const DistrictConfig* d : zones) emit(d->settlement_name, d->boundary);
    emit(kRegionControlName, region_boundary);
  }
  return series;
}

inline void write_series_csv(const DistrictSeries& series, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::write_failure, "cannot open " + path);
  out << "zone_name,period,burned_fraction,burned_area_km2,n_valid_pixels\n";
  char buf[128];
  for (const auto& r : series.rows) {
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%ld", r.burned_fraction,
                  r.burned_area_km2, r.n_valid_pixels);
    out << r.zone_name << ',' << r.period << ',' << buf << '\n';
  }
  if (!out) throw Error(Errc::write_failure, "failed writing " + path);
}

}  // namespace burnscan::transfer
