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

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lfp/cell.hpp"

namespace lfp {

using Dictionary = std::vector<std::string>;
using DictionaryPtr = std::shared_ptr<const Dictionary>;

/// A named, typed column. Exactly one storage vector is populated, selected by
/// dtype: `ints` for int64 and date, `floats`, `bools`, `texts`, or `codes`
/// plus `dict` for category. `valid` is empty when the column has no nulls.
struct Column {
  std::string name;
  Dtype dtype;
  std::vector<std::int64_t> ints;
  std::vector<double> floats;
  std::vector<std::uint8_t> bools;
  std::vector<std::string> texts;
  std::vector<std::int32_t> codes;
  DictionaryPtr dict;
  std::vector<std::uint8_t> valid;

  Column() = default;
  Column(std::string n, Dtype t) : name(std::move(n)), dtype(t) {}

  std::size_t size() const;
  bool null_at(std::size_t i) const { return !valid.empty() && valid[i] == 0; }
  std::size_t null_count() const;
  Cell at(std::size_t i) const;
  /// Text of a text or category cell. Undefined for other dtypes.
  const std::string& text_at(std::size_t i) const {
    return dtype.tag == TypeTag::Category ? (*dict)[static_cast<std::size_t>(codes[i])] : texts[i];
  }
  double number_at(std::size_t i) const {
    return dtype.tag == TypeTag::Float64 ? floats[i] : static_cast<double>(ints[i]);
  }
  std::size_t resident_bytes() const;
};

using ColumnPtr = std::shared_ptr<const Column>;

/// Appends cells of a fixed dtype. Category columns are built from text and
/// dictionary-encoded by finish().
class ColumnBuilder {
 public:
  ColumnBuilder(std::string name, Dtype dtype, std::size_t reserve = 0);

  void append_null();
  void append_int(std::int64_t v);
  void append_float(double v);
  void append_bool(bool v);
  void append_text(std::string v);
  void append_date(Date v);
  /// Appends a cell, converting numbers between int and float when needed.
  /// Throws TypeMismatch for other conversions.
  void append(const Cell& c);
  /// Copies row i of src. src must have the same dtype (category and text mix freely).
  void append_from(const Column& src, std::size_t i);
  std::size_t size() const { return size_; }
  Column finish();

 private:
  void mark_valid();
  Column col_;
  std::size_t size_ = 0;
  bool has_null_ = false;
};

class Frame {
 public:
  Frame() = default;
  Frame(std::vector<ColumnPtr> cols, std::size_t rows);

  std::size_t rows() const { return rows_; }
  std::size_t width() const { return cols_.size(); }
  const std::vector<ColumnPtr>& columns() const { return cols_; }
  std::optional<std::size_t> find(std::string_view name) const;
  bool has(std::string_view name) const { return find(name).has_value(); }
  /// Throws UnknownColumn.
  const Column& column(std::string_view name) const;
  ColumnPtr column_ptr(std::string_view name) const;
  std::vector<std::string> names() const;
  std::size_t resident_bytes() const;

 private:
  std::vector<ColumnPtr> cols_;
  std::size_t rows_ = 0;
};

using FramePtr = std::shared_ptr<const Frame>;

ColumnPtr make_column(Column c);
Column renamed(const Column& c, std::string name);
Column take(const Column& c, const std::vector<std::size_t>& rows);
Frame take(const Frame& f, const std::vector<std::size_t>& rows);
Frame slice(const Frame& f, std::size_t begin, std::size_t end);
/// Concatenates frames with identical schemas. Category dictionaries are unified.
Frame concat(const std::vector<Frame>& parts);
/// Frame with the same columns but a different row count; used for empty projections.
Frame with_rows(std::size_t rows);

Column encode_category(const Column& text);
Column decode_category(const Column& cat);
/// astype conversion. Throws TypeCoercionError or TypeMismatch.
Column cast_column(const Column& c, Dtype to);

}  // namespace lfp
