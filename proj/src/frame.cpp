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

#include "lfp/frame.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "lfp/errors.hpp"

namespace lfp {

std::size_t Column::size() const {
  switch (dtype.tag) {
    case TypeTag::Int64:
    case TypeTag::Date: return ints.size();
    case TypeTag::Float64: return floats.size();
    case TypeTag::Bool: return bools.size();
    case TypeTag::Text: return texts.size();
    case TypeTag::Category: return codes.size();
  }
  return 0;
}

std::size_t Column::null_count() const {
  if (valid.empty()) return 0;
  return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), 0));
}

Cell Column::at(std::size_t i) const {
  if (null_at(i)) return std::monostate{};
  switch (dtype.tag) {
    case TypeTag::Int64: return ints[i];
    case TypeTag::Date: return Date{ints[i]};
    case TypeTag::Float64: return floats[i];
    case TypeTag::Bool: return bools[i] != 0;
    case TypeTag::Text: return texts[i];
    case TypeTag::Category: return (*dict)[static_cast<std::size_t>(codes[i])];
  }
  return std::monostate{};
}

std::size_t Column::resident_bytes() const {
  std::size_t n = size();
  std::size_t bytes = valid.empty() ? 0 : n;
  switch (dtype.tag) {
    case TypeTag::Int64:
    case TypeTag::Date:
    case TypeTag::Float64: return bytes + 8 * n;
    case TypeTag::Bool: return bytes + n;
    case TypeTag::Text:
      for (const auto& s : texts) bytes += s.size() + 32;
      return bytes;
    case TypeTag::Category:
      bytes += 4 * n;
      if (dict) {
        for (const auto& s : *dict) bytes += s.size() + 32;
      }
      return bytes;
  }
  return bytes;
}

ColumnBuilder::ColumnBuilder(std::string name, Dtype dtype, std::size_t reserve)
    : col_(std::move(name), dtype) {
  switch (dtype.tag) {
    case TypeTag::Int64:
    case TypeTag::Date: col_.ints.reserve(reserve); break;
    case TypeTag::Float64: col_.floats.reserve(reserve); break;
    case TypeTag::Bool: col_.bools.reserve(reserve); break;
    case TypeTag::Text:
    case TypeTag::Category: col_.texts.reserve(reserve); break;
  }
}

void ColumnBuilder::mark_valid() {
  if (has_null_) col_.valid.push_back(1);
  ++size_;
}

void ColumnBuilder::append_null() {
  if (!has_null_) {
    has_null_ = true;
    col_.valid.assign(size_, 1);
  }
  col_.valid.push_back(0);
  ++size_;
  switch (col_.dtype.tag) {
    case TypeTag::Int64:
    case TypeTag::Date: col_.ints.push_back(0); break;
    case TypeTag::Float64: col_.floats.push_back(0.0); break;
    case TypeTag::Bool: col_.bools.push_back(0); break;
    case TypeTag::Text:
    case TypeTag::Category: col_.texts.emplace_back(); break;
  }
}

void ColumnBuilder::append_int(std::int64_t v) {
  col_.ints.push_back(v);
  mark_valid();
}

void ColumnBuilder::append_float(double v) {
  col_.floats.push_back(v);
  mark_valid();
}

void ColumnBuilder::append_bool(bool v) {
  col_.bools.push_back(v ? 1 : 0);
  mark_valid();
}

void ColumnBuilder::append_text(std::string v) {
  col_.texts.push_back(std::move(v));
  mark_valid();
}

void ColumnBuilder::append_date(Date v) {
  col_.ints.push_back(v.seconds);
  mark_valid();
}

void ColumnBuilder::append(const Cell& c) {
  if (is_null(c)) {
    append_null();
    return;
  }
  switch (col_.dtype.tag) {
    case TypeTag::Int64:
      if (auto* i = std::get_if<std::int64_t>(&c)) return append_int(*i);
      if (auto* b = std::get_if<bool>(&c)) return append_int(*b ? 1 : 0);
      break;
    case TypeTag::Float64:
      if (auto n = as_number(c)) return append_float(*n);
      break;
    case TypeTag::Bool:
      if (auto* b = std::get_if<bool>(&c)) return append_bool(*b);
      break;
    case TypeTag::Text:
    case TypeTag::Category:
      if (auto* s = std::get_if<std::string>(&c)) return append_text(*s);
      break;
    case TypeTag::Date:
      if (auto* d = std::get_if<Date>(&c)) return append_date(*d);
      break;
  }
  throw TypeMismatch("cannot store " + format_cell(c) + " in " +
                     std::string(dtype_name(col_.dtype)) + " column " + col_.name);
}

void ColumnBuilder::append_from(const Column& src, std::size_t i) {
  if (src.null_at(i)) {
    append_null();
    return;
  }
  switch (col_.dtype.tag) {
    case TypeTag::Int64:
    case TypeTag::Date: return append_int(src.ints[i]);
    case TypeTag::Float64: return append_float(src.floats[i]);
    case TypeTag::Bool: return append_bool(src.bools[i] != 0);
    case TypeTag::Text:
    case TypeTag::Category: return append_text(src.text_at(i));
  }
}

Column ColumnBuilder::finish() {
  Column out = std::move(col_);
  if (out.dtype.tag == TypeTag::Category) {
    out.dtype = Dtype::text();
    out = encode_category(out);
  }
  size_ = 0;
  has_null_ = false;
  return out;
}

Frame::Frame(std::vector<ColumnPtr> cols, std::size_t rows) : cols_(std::move(cols)), rows_(rows) {
  for (std::size_t i = 0; i < cols_.size(); ++i) {
    if (cols_[i]->size() != rows_) {
      throw InternalError("column " + cols_[i]->name + " has " + std::to_string(cols_[i]->size()) +
                          " cells, frame has " + std::to_string(rows_) + " rows");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (cols_[j]->name == cols_[i]->name) {
        throw InternalError("duplicate column " + cols_[i]->name);
      }
    }
  }
}

std::optional<std::size_t> Frame::find(std::string_view name) const {
  for (std::size_t i = 0; i < cols_.size(); ++i) {
    if (cols_[i]->name == name) return i;
  }
  return std::nullopt;
}

const Column& Frame::column(std::string_view name) const { return *column_ptr(name); }

ColumnPtr Frame::column_ptr(std::string_view name) const {
  auto i = find(name);
  if (!i) throw UnknownColumn(std::string(name));
  return cols_[*i];
}

std::vector<std::string> Frame::names() const {
  std::vector<std::string> out;
  out.reserve(cols_.size());
  for (const auto& c : cols_) out.push_back(c->name);
  return out;
}

std::size_t Frame::resident_bytes() const {
  std::size_t total = 0;
  for (const auto& c : cols_) total += c->resident_bytes();
  return total;
}

ColumnPtr make_column(Column c) { return std::make_shared<const Column>(std::move(c)); }

Column renamed(const Column& c, std::string name) {
  Column out = c;
  out.name = std::move(name);
  return out;
}

namespace {

template <typename T>
std::vector<T> gather(const std::vector<T>& v, const std::vector<std::size_t>& rows) {
  std::vector<T> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(v[r]);
  return out;
}

}  // namespace

Column take(const Column& c, const std::vector<std::size_t>& rows) {
  Column out(c.name, c.dtype);
  switch (c.dtype.tag) {
    case TypeTag::Int64:
    case TypeTag::Date: out.ints = gather(c.ints, rows); break;
    case TypeTag::Float64: out.floats = gather(c.floats, rows); break;
    case TypeTag::Bool: out.bools = gather(c.bools, rows); break;
    case TypeTag::Text: out.texts = gather(c.texts, rows); break;
    case TypeTag::Category:
      out.codes = gather(c.codes, rows);
      out.dict = c.dict;
      break;
  }
  if (!c.valid.empty()) {
    out.valid = gather(c.valid, rows);
    if (std::find(out.valid.begin(), out.valid.end(), 0) == out.valid.end()) out.valid.clear();
  }
  return out;
}

Frame take(const Frame& f, const std::vector<std::size_t>& rows) {
  std::vector<ColumnPtr> cols;
  cols.reserve(f.width());
  for (const auto& c : f.columns()) cols.push_back(make_column(take(*c, rows)));
  return Frame(std::move(cols), rows.size());
}

Frame slice(const Frame& f, std::size_t begin, std::size_t end) {
  end = std::min(end, f.rows());
  begin = std::min(begin, end);
  if (begin == 0 && end == f.rows()) return f;
  std::vector<std::size_t> rows(end - begin);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = begin + i;
  return take(f, rows);
}

Frame with_rows(std::size_t rows) { return Frame({}, rows); }

namespace {

Column concat_columns(const std::vector<const Column*>& parts) {
  const Column& first = *parts.front();
  Column out(first.name, first.dtype);
  bool any_null = false;
  std::size_t total = 0;
  for (const Column* p : parts) {
    any_null = any_null || !p->valid.empty();
    total += p->size();
  }
  if (first.dtype.tag == TypeTag::Category) {
    bool same = true;
    for (const Column* p : parts) same = same && p->dict == first.dict;
    if (same) {
      out.dict = first.dict;
      out.codes.reserve(total);
      for (const Column* p : parts) out.codes.insert(out.codes.end(), p->codes.begin(), p->codes.end());
    } else {
      std::map<std::string, std::int32_t> merged;
      for (const Column* p : parts) {
        for (const auto& s : *p->dict) merged.emplace(s, 0);
      }
      auto dict = std::make_shared<Dictionary>();
      dict->reserve(merged.size());
      for (auto& [s, code] : merged) {
        code = static_cast<std::int32_t>(dict->size());
        dict->push_back(s);
      }
      out.codes.reserve(total);
      for (const Column* p : parts) {
        std::vector<std::int32_t> remap(p->dict->size());
        for (std::size_t k = 0; k < remap.size(); ++k) remap[k] = merged.at((*p->dict)[k]);
        for (std::int32_t code : p->codes) out.codes.push_back(remap[static_cast<std::size_t>(code)]);
      }
      out.dict = std::move(dict);
    }
  } else {
    for (const Column* p : parts) {
      switch (first.dtype.tag) {
        case TypeTag::Int64:
        case TypeTag::Date: out.ints.insert(out.ints.end(), p->ints.begin(), p->ints.end()); break;
        case TypeTag::Float64:
          out.floats.insert(out.floats.end(), p->floats.begin(), p->floats.end());
          break;
        case TypeTag::Bool: out.bools.insert(out.bools.end(), p->bools.begin(), p->bools.end()); break;
        case TypeTag::Text: out.texts.insert(out.texts.end(), p->texts.begin(), p->texts.end()); break;
        case TypeTag::Category: break;
      }
    }
  }
  if (any_null) {
    out.valid.reserve(total);
    for (const Column* p : parts) {
      if (p->valid.empty()) {
        out.valid.insert(out.valid.end(), p->size(), 1);
      } else {
        out.valid.insert(out.valid.end(), p->valid.begin(), p->valid.end());
      }
    }
  }
  return out;
}

}  // namespace

Frame concat(const std::vector<Frame>& parts) {
  if (parts.empty()) return Frame();
  if (parts.size() == 1) return parts.front();
  const Frame& first = parts.front();
  std::size_t rows = 0;
  for (const auto& p : parts) {
    if (p.width() != first.width()) throw InternalError("concat of frames with different widths");
    rows += p.rows();
  }
  std::vector<ColumnPtr> cols;
  for (std::size_t c = 0; c < first.width(); ++c) {
    std::vector<const Column*> pieces;
    bool mixed = false;
    for (const auto& p : parts) {
      pieces.push_back(p.columns()[c].get());
      mixed = mixed || p.columns()[c]->dtype != first.columns()[c]->dtype;
    }
    if (mixed) {
      // Chunks may disagree on category vs text; fall back to text.
      std::vector<Column> decoded;
      decoded.reserve(pieces.size());
      for (const Column* p : pieces) {
        if (p->dtype.tag == TypeTag::Category) {
          decoded.push_back(decode_category(*p));
        } else if (p->dtype.tag == TypeTag::Text) {
          decoded.push_back(*p);
        } else {
          throw InternalError("concat of columns with different dtypes: " + p->name);
        }
      }
      pieces.clear();
      for (const auto& d : decoded) pieces.push_back(&d);
      cols.push_back(make_column(concat_columns(pieces)));
    } else {
      cols.push_back(make_column(concat_columns(pieces)));
    }
  }
  return Frame(std::move(cols), rows);
}

Column encode_category(const Column& text) {
  if (text.dtype.tag == TypeTag::Category) return text;
  std::map<std::string_view, std::int32_t> distinct;
  for (std::size_t i = 0; i < text.texts.size(); ++i) {
    if (!text.null_at(i)) distinct.emplace(text.texts[i], 0);
  }
  auto dict = std::make_shared<Dictionary>();
  dict->reserve(distinct.size());
  for (auto& [s, code] : distinct) {
    code = static_cast<std::int32_t>(dict->size());
    dict->emplace_back(s);
  }
  Column out(text.name, Dtype::category());
  out.codes.resize(text.texts.size(), 0);
  for (std::size_t i = 0; i < text.texts.size(); ++i) {
    if (!text.null_at(i)) out.codes[i] = distinct.at(text.texts[i]);
  }
  out.valid = text.valid;
  out.dict = std::move(dict);
  return out;
}

Column decode_category(const Column& cat) {
  if (cat.dtype.tag != TypeTag::Category) return cat;
  Column out(cat.name, Dtype::text());
  out.texts.reserve(cat.codes.size());
  for (std::size_t i = 0; i < cat.codes.size(); ++i) {
    out.texts.push_back(cat.null_at(i) ? std::string() : (*cat.dict)[static_cast<std::size_t>(cat.codes[i])]);
  }
  out.valid = cat.valid;
  return out;
}

namespace {

[[noreturn]] void coercion_failure(const Column& c, std::size_t row) {
  throw TypeCoercionError(static_cast<std::int64_t>(row), c.name, format_cell(c.at(row)));
}

}  // namespace

Column cast_column(const Column& c, Dtype to) {
  TypeTag from = c.dtype.tag;
  if (from == to.tag) return c;
  if (to.tag == TypeTag::Category) {
    if (from == TypeTag::Text) return encode_category(c);
    return encode_category(cast_column(c, Dtype::text()));
  }
  if (from == TypeTag::Category) return cast_column(decode_category(c), to);
  ColumnBuilder b(c.name, to, c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c.null_at(i)) {
      b.append_null();
      continue;
    }
    switch (to.tag) {
      case TypeTag::Int64:
        if (from == TypeTag::Float64) {
          double v = c.floats[i];
          if (!std::isfinite(v)) coercion_failure(c, i);
          b.append_int(static_cast<std::int64_t>(std::trunc(v)));
        } else if (from == TypeTag::Bool) {
          b.append_int(c.bools[i]);
        } else if (from == TypeTag::Date) {
          b.append_int(c.ints[i]);
        } else {
          auto v = parse_int64(c.texts[i]);
          if (!v) coercion_failure(c, i);
          b.append_int(*v);
        }
        break;
      case TypeTag::Float64:
        if (from == TypeTag::Int64) {
          b.append_float(static_cast<double>(c.ints[i]));
        } else if (from == TypeTag::Bool) {
          b.append_float(c.bools[i]);
        } else if (from == TypeTag::Text) {
          auto v = parse_float(c.texts[i]);
          if (!v) coercion_failure(c, i);
          b.append_float(*v);
        } else {
          throw TypeMismatch("cannot cast date column " + c.name + " to float64");
        }
        break;
      case TypeTag::Bool:
        if (from == TypeTag::Int64) {
          b.append_bool(c.ints[i] != 0);
        } else if (from == TypeTag::Float64) {
          b.append_bool(c.floats[i] != 0.0);
        } else if (from == TypeTag::Text) {
          auto v = parse_bool(c.texts[i]);
          if (!v) coercion_failure(c, i);
          b.append_bool(*v);
        } else {
          throw TypeMismatch("cannot cast date column " + c.name + " to bool");
        }
        break;
      case TypeTag::Text: b.append_text(format_cell(c.at(i))); break;
      case TypeTag::Date:
        if (from == TypeTag::Text) {
          auto v = parse_date(c.texts[i]);
          if (!v) coercion_failure(c, i);
          b.append_date(*v);
        } else if (from == TypeTag::Int64) {
          b.append_date(Date{c.ints[i]});
        } else {
          throw TypeMismatch("cannot cast " + std::string(dtype_name(c.dtype)) + " column " +
                             c.name + " to date");
        }
        break;
      case TypeTag::Category: break;
    }
  }
  return b.finish();
}

}  // namespace lfp
