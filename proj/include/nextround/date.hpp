/*
 * Copyright 2026 The nextround authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <compare>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace nextround {

// Calendar date with day precision. Month-valued quantities elsewhere in the
// pipeline are month-index differences (year*12 + month), ignoring the day.
struct Date {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;    // 1..valid day count

  auto operator<=>(const Date&) const = default;

  int month_index() const { return year * 12 + (month - 1); }
};

inline bool is_leap_year(int y) {
  return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

inline int days_in_month(int y, int m) {
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m == 2 && is_leap_year(y)) return 29;
  return kDays[m - 1];
}

inline bool is_valid_date(int y, int m, int d) {
  return y >= 1 && y <= 9999 && m >= 1 && m <= 12 && d >= 1 && d <= days_in_month(y, m);
}

// Strict ISO 8601 (YYYY-MM-DD). Anything else is a parse failure.
inline std::optional<Date> parse_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  int v[3] = {0, 0, 0};
  const int spans[3][2] = {{0, 4}, {5, 2}, {8, 2}};
  for (int k = 0; k < 3; ++k) {
    for (int i = 0; i < spans[k][1]; ++i) {
      char c = s[spans[k][0] + i];
      if (c < '0' || c > '9') return std::nullopt;
      v[k] = v[k] * 10 + (c - '0');
    }
  }
  if (!is_valid_date(v[0], v[1], v[2])) return std::nullopt;
  return Date{v[0], v[1], v[2]};
}

inline std::string to_string(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
  return buf;
}

inline int months_between(const Date& later, const Date& earlier) {
  return later.month_index() - earlier.month_index();
}

// Proleptic Gregorian epoch-day conversions (days since 1970-01-01).
inline int64_t days_from_civil(const Date& dt) {
  int y = dt.year;
  const int m = dt.month;
  const int d = dt.day;
  y -= m <= 2;
  const int64_t era = (y >= 0 ? y : y - 399) / 400;
  const int yoe = static_cast<int>(y - era * 400);
  const int doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const int doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + doe - 719468;
}

inline Date civil_from_days(int64_t z) {
  z += 719468;
  const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const int doe = static_cast<int>(z - era * 146097);
  const int yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const int64_t y = yoe + era * 400;
  const int doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const int mp = (5 * doy + 2) / 153;
  const int d = doy - (153 * mp + 2) / 5 + 1;
  const int m = mp + (mp < 10 ? 3 : -9);
  return Date{static_cast<int>(y + (m <= 2)), m, d};
}

inline Date next_day(const Date& d) { return civil_from_days(days_from_civil(d) + 1); }

// Last day of the month that lies `months_ahead` calendar months after d's month.
inline Date end_of_month_after(const Date& d, int months_ahead) {
  const int mi = d.month_index() + months_ahead;
  const int y = mi / 12;
  const int m = mi % 12 + 1;
  return Date{y, m, days_in_month(y, m)};
}

}  // namespace nextround
