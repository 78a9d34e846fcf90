#pragma once

#include <chrono>
#include <cstdio>
#include <string>

#include "burnscan/util/error.hpp"

namespace burnscan {

using Date = std::chrono::sys_days;

// Strict "YYYY-MM-DD" parser; rejects impossible calendar dates.
inline Date parse_date(const std::string& s) {
  int y = 0, m = 0, d = 0;
  char tail = 0;
  if (std::sscanf(s.c_str(), "%4d-%2d-%2d%c", &y, &m, &d, &tail) != 3 ||
      s.size() != 10) {
    throw Error(Errc::parse_error, "expected YYYY-MM-DD date, got '" + s + "'");
  }
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{unsigned(m)},
                                  std::chrono::day{unsigned(d)}};
  if (!ymd.ok()) throw Error(Errc::parse_error, "invalid calendar date '" + s + "'");
  return std::chrono::sys_days{ymd};
}

inline std::string format_date(Date date) {
  std::chrono::year_month_day ymd{date};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", int(ymd.year()),
                unsigned(ymd.month()), unsigned(ymd.day()));
  return buf;
}

// a - b in whole days.
inline long days_between(Date a, Date b) { return (a - b).count(); }

}  // namespace burnscan
