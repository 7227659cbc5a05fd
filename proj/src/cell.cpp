/* Copyright 2026 The LFP Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "lfp/cell.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace lfp {

std::string_view dtype_name(Dtype t) {
  switch (t.tag) {
    case TypeTag::Int64: return "int64";
    case TypeTag::Float64: return "float64";
    case TypeTag::Bool: return "bool";
    case TypeTag::Text: return "text";
    case TypeTag::Date: return "date";
    case TypeTag::Category: return "category";
  }
  return "text";
}

std::optional<Dtype> parse_dtype(std::string_view name) {
  if (name == "int64" || name == "int") return Dtype::int64();
  if (name == "float64" || name == "float") return Dtype::float64();
  if (name == "bool") return Dtype::boolean();
  if (name == "text" || name == "str" || name == "object") return Dtype::text();
  if (name == "date" || name == "datetime64") return Dtype::date();
  if (name == "category") return Dtype::category();
  return std::nullopt;
}

std::optional<double> as_number(const Cell& c) {
  if (auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
  if (auto* d = std::get_if<double>(&c)) return *d;
  return std::nullopt;
}

namespace {

int kind_rank(const Cell& c) {
  switch (c.index()) {
    case 1:
    case 2: return 0;  // numbers
    case 3: return 1;
    case 4: return 2;
    case 5: return 3;
    default: return 4;  // null last
  }
}

template <typename T>
int three_way(const T& a, const T& b) {
  return a < b ? -1 : (b < a ? 1 : 0);
}

int compare_numbers(const Cell& a, const Cell& b) {
  if (a.index() == 1 && b.index() == 1) {
    return three_way(std::get<std::int64_t>(a), std::get<std::int64_t>(b));
  }
  long double x = a.index() == 1 ? static_cast<long double>(std::get<std::int64_t>(a))
                                 : static_cast<long double>(std::get<double>(a));
  long double y = b.index() == 1 ? static_cast<long double>(std::get<std::int64_t>(b))
                                 : static_cast<long double>(std::get<double>(b));
  bool xn = std::isnan(x), yn = std::isnan(y);
  if (xn || yn) return three_way(xn, yn);  // NaN after numbers
  return three_way(x, y);
}

}  // namespace

int compare_cells(const Cell& a, const Cell& b) {
  int ka = kind_rank(a), kb = kind_rank(b);
  if (ka != kb) return three_way(ka, kb);
  switch (ka) {
    case 0: return compare_numbers(a, b);
    case 1: return three_way(std::get<bool>(a), std::get<bool>(b));
    case 2: return std::get<std::string>(a).compare(std::get<std::string>(b)) < 0
                       ? -1
                       : (std::get<std::string>(a) == std::get<std::string>(b) ? 0 : 1);
    case 3: return three_way(std::get<Date>(a), std::get<Date>(b));
    default: return 0;
  }
}

bool cells_equal(const Cell& a, const Cell& b) { return compare_cells(a, b) == 0; }

std::string format_double(double v) {
  if (std::isnan(v)) return "NaN";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  std::string s(buf.data(), res.ptr);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

namespace {

// Howard Hinnant's civil calendar conversions.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

struct Civil {
  std::int64_t year;
  unsigned month;
  unsigned day;
};

Civil civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  return {y + (m <= 2), m, d};
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

bool parse_fixed(std::string_view s, std::size_t pos, std::size_t len, unsigned& out) {
  if (pos + len > s.size()) return false;
  unsigned v = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
    v = v * 10 + static_cast<unsigned>(s[i] - '0');
  }
  out = v;
  return true;
}

}  // namespace

std::string format_date(Date d) {
  std::int64_t days = floor_div(d.seconds, 86400);
  std::int64_t secs = d.seconds - days * 86400;
  Civil c = civil_from_days(days);
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02u %02lld:%02lld:%02lld",
                static_cast<long long>(c.year), c.month, c.day,
                static_cast<long long>(secs / 3600), static_cast<long long>((secs / 60) % 60),
                static_cast<long long>(secs % 60));
  return buf;
}

std::string format_cell(const Cell& c) {
  switch (c.index()) {
    case 1: return std::to_string(std::get<std::int64_t>(c));
    case 2: return format_double(std::get<double>(c));
    case 3: return std::get<bool>(c) ? "True" : "False";
    case 4: return std::get<std::string>(c);
    case 5: return format_date(std::get<Date>(c));
    default: return "NaN";
  }
}

std::optional<std::int64_t> parse_int64(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::int64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<double> parse_float(std::string_view s) {
  if (s.empty()) return std::nullopt;
  // from_chars also accepts "nan", "inf" and "infinity"; CSV cells spelled that way stay text.
  for (char ch : s) {
    if ((ch >= 'a' && ch <= 'z' && ch != 'e') || (ch >= 'A' && ch <= 'Z' && ch != 'E')) {
      return std::nullopt;
    }
  }
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<bool> parse_bool(std::string_view s) {
  if (s == "true" || s == "True") return true;
  if (s == "false" || s == "False") return false;
  return std::nullopt;
}

std::optional<Date> parse_date(std::string_view s) {
  unsigned y = 0, m = 0, d = 0, hh = 0, mm = 0, ss = 0;
  if (s.size() < 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  if (!parse_fixed(s, 0, 4, y) || !parse_fixed(s, 5, 2, m) || !parse_fixed(s, 8, 2, d)) {
    return std::nullopt;
  }
  if (m < 1 || m > 12 || d < 1 || d > 31) return std::nullopt;
  if (s.size() > 10) {
    if (s.size() != 19 || (s[10] != 'T' && s[10] != ' ') || s[13] != ':' || s[16] != ':') {
      return std::nullopt;
    }
    if (!parse_fixed(s, 11, 2, hh) || !parse_fixed(s, 14, 2, mm) || !parse_fixed(s, 17, 2, ss)) {
      return std::nullopt;
    }
    if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;
  }
  std::int64_t days = days_from_civil(y, m, d);
  return Date{days * 86400 + hh * 3600 + mm * 60 + ss};
}

int day_of_week(Date d) {
  std::int64_t days = floor_div(d.seconds, 86400);
  // 1970-01-01 was a Thursday (Monday = 0 -> Thursday = 3).
  std::int64_t w = (days + 3) % 7;
  if (w < 0) w += 7;
  return static_cast<int>(w);
}

int date_part(Date d, std::string_view part) {
  std::int64_t days = floor_div(d.seconds, 86400);
  std::int64_t secs = d.seconds - days * 86400;
  if (part == "dayofweek" || part == "weekday") return day_of_week(d);
  if (part == "hour") return static_cast<int>(secs / 3600);
  if (part == "minute") return static_cast<int>((secs / 60) % 60);
  Civil c = civil_from_days(days);
  if (part == "year") return static_cast<int>(c.year);
  if (part == "month") return static_cast<int>(c.month);
  if (part == "day") return static_cast<int>(c.day);
  return 0;
}

void ExactSum::add(double x) {
  if (!std::isfinite(x)) {
    special_ += x;
    has_special_ = true;
    return;
  }
  std::size_t i = 0;
  for (double y : partials_) {
    if (std::fabs(x) < std::fabs(y)) std::swap(x, y);
    double hi = x + y;
    double lo = y - (hi - x);
    if (lo != 0.0) partials_[i++] = lo;
    x = hi;
  }
  partials_.resize(i);
  partials_.push_back(x);
}

void ExactSum::merge(const ExactSum& other) {
  for (double p : other.partials_) add(p);
  if (other.has_special_) {
    special_ += other.special_;
    has_special_ = true;
  }
}

double ExactSum::value() const {
  if (has_special_) return special_;
  std::size_t n = partials_.size();
  if (n == 0) return 0.0;
  double hi = partials_[--n];
  double lo = 0.0;
  while (n > 0) {
    double x = hi;
    double y = partials_[--n];
    hi = x + y;
    double yr = hi - x;
    lo = y - yr;
    if (lo != 0.0) break;
  }
  if (n > 0 && ((lo < 0 && partials_[n - 1] < 0) || (lo > 0 && partials_[n - 1] > 0))) {
    double y = lo * 2;
    double x = hi + y;
    double yr = x - hi;
    if (y == yr) hi = x;
  }
  return hi;
}

void Fnv1a::update(std::string_view bytes) {
  for (unsigned char c : bytes) {
    state_ ^= c;
    state_ *= 1099511628211ULL;
  }
}

std::uint64_t fnv1a(std::string_view bytes) {
  Fnv1a h;
  h.update(bytes);
  return h.digest();
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace lfp
