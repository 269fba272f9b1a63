#pragma once

#include <compare>
#include <cstdio>
#include <string>

#include "macroforest/errors.hpp"

namespace macroforest {

// Calendar month, the panel's native time unit.
struct YearMonth {
  int year = 0;
  int month = 1;  // 1..12

  auto operator<=>(const YearMonth&) const = default;

  // months since 0000-01; convenient for distance arithmetic
  int index() const { return year * 12 + (month - 1); }

  static YearMonth from_index(int idx) {
    YearMonth ym;
    ym.year = idx / 12;
    ym.month = idx % 12 + 1;
    return ym;
  }

  YearMonth plus_months(int n) const { return from_index(index() + n); }

  std::string str() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
    return buf;
  }
};

inline YearMonth parse_year_month(const std::string& s) {
  if (s.size() != 7 || s[4] != '-') {
    throw CsvFormatError("bad date '" + s + "', expected YYYY-MM");
  }
  for (int i : {0, 1, 2, 3, 5, 6}) {
    if (s[i] < '0' || s[i] > '9') {
      throw CsvFormatError("bad date '" + s + "', expected YYYY-MM");
    }
  }
  YearMonth ym;
  ym.year = std::stoi(s.substr(0, 4));
  ym.month = std::stoi(s.substr(5, 2));
  if (ym.month < 1 || ym.month > 12) {
    throw CsvFormatError("bad month in date '" + s + "'");
  }
  return ym;
}

}  // namespace macroforest
