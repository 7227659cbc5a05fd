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

#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace lfp {

/// Seconds since the Unix epoch, UTC, no leap seconds.
struct Date {
  std::int64_t seconds = 0;
  auto operator<=>(const Date&) const = default;
};

enum class TypeTag { Int64, Float64, Bool, Text, Date, Category };

/// Column type. Category carries a sorted dictionary of distinct text values;
/// the dictionary is only meaningful on a concrete column.
struct Dtype {
  TypeTag tag = TypeTag::Text;

  static Dtype int64() { return {TypeTag::Int64}; }
  static Dtype float64() { return {TypeTag::Float64}; }
  static Dtype boolean() { return {TypeTag::Bool}; }
  static Dtype text() { return {TypeTag::Text}; }
  static Dtype date() { return {TypeTag::Date}; }
  static Dtype category() { return {TypeTag::Category}; }

  bool numeric() const { return tag == TypeTag::Int64 || tag == TypeTag::Float64; }
  bool textual() const { return tag == TypeTag::Text || tag == TypeTag::Category; }

  bool operator==(const Dtype&) const = default;
};

std::string_view dtype_name(Dtype t);
std::optional<Dtype> parse_dtype(std::string_view name);

/// A single nullable value. Category cells surface as their text value.
using Cell = std::variant<std::monostate, std::int64_t, double, bool, std::string, Date>;

inline bool is_null(const Cell& c) { return std::holds_alternative<std::monostate>(c); }
std::optional<double> as_number(const Cell& c);

/// Total order used by sort, groupby and merge keys: numbers compare by value
/// across int/float, other kinds compare within kind; nulls sort last.
int compare_cells(const Cell& a, const Cell& b);
bool cells_equal(const Cell& a, const Cell& b);

/// Python-like display text ("12.5", "6.0", "True", "NaN").
std::string format_cell(const Cell& c);
std::string format_double(double v);
std::string format_date(Date d);

std::optional<std::int64_t> parse_int64(std::string_view s);
std::optional<double> parse_float(std::string_view s);
std::optional<bool> parse_bool(std::string_view s);
std::optional<Date> parse_date(std::string_view s);

/// Monday = 0.
int day_of_week(Date d);
int date_part(Date d, std::string_view part);

/// Exactly rounded floating point summation (Shewchuk partials). The result is
/// independent of the order in which values are added, so chunked partial
/// aggregation reproduces the whole-frame sum bit for bit.
class ExactSum {
 public:
  void add(double x);
  void merge(const ExactSum& other);
  double value() const;

 private:
  std::vector<double> partials_;
  double special_ = 0.0;  // accumulates inf/nan
  bool has_special_ = false;
};

/// 64-bit FNV-1a.
class Fnv1a {
 public:
  void update(std::string_view bytes);
  std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = 14695981039346656037ULL;
};

std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t v);

}  // namespace lfp
