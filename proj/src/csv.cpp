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

#include "lfp/csv.hpp"

#include <algorithm>
#include <fstream>

#include "lfp/errors.hpp"

namespace lfp {

namespace {
constexpr std::size_t kBufferSize = 1 << 20;
}  // namespace

CsvRecordReader::CsvRecordReader(const std::string& path) : path_(path), buf_(kBufferSize) {
  file_ = std::fopen(path.c_str(), "rb");
  if (!file_) throw MissingFile(path);
  if (peek() == 0xEF) {
    // UTF-8 byte order mark.
    if (len_ >= 3 && static_cast<unsigned char>(buf_[1]) == 0xBB &&
        static_cast<unsigned char>(buf_[2]) == 0xBF) {
      pos_ = 3;
    }
  }
}

CsvRecordReader::~CsvRecordReader() {
  if (file_) std::fclose(file_);
}

int CsvRecordReader::peek() {
  if (pos_ == len_) {
    len_ = std::fread(buf_.data(), 1, buf_.size(), file_);
    pos_ = 0;
    if (len_ == 0) return -1;
  }
  return static_cast<unsigned char>(buf_[pos_]);
}

int CsvRecordReader::get() {
  int c = peek();
  if (c >= 0) {
    ++pos_;
    ++consumed_;
  }
  return c;
}

bool CsvRecordReader::next(std::vector<std::string>& fields) {
  fields.clear();
  // Skip blank lines.
  while (true) {
    int c = peek();
    if (c < 0) return false;
    if (c == '\n') {
      get();
      ++line_;
      continue;
    }
    if (c == '\r') {
      get();
      if (peek() == '\n') get();
      ++line_;
      continue;
    }
    break;
  }
  record_line_ = line_;
  std::string field;
  while (true) {
    int c = get();
    if (c == '"' && field.empty()) {
      // Quoted field.
      while (true) {
        int q = get();
        if (q < 0) throw MalformedCsv(path_, record_line_, "unterminated quoted field");
        if (q == '"') {
          if (peek() == '"') {
            get();
            field += '"';
            continue;
          }
          break;
        }
        if (q == '\n') ++line_;
        field += static_cast<char>(q);
      }
      int after = peek();
      if (after != ',' && after != '\n' && after != '\r' && after >= 0) {
        throw MalformedCsv(path_, line_, "unexpected character after closing quote");
      }
      continue;
    }
    if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      continue;
    }
    if (c < 0 || c == '\n' || c == '\r') {
      if (c == '\r' && peek() == '\n') get();
      if (c >= 0) ++line_;
      fields.push_back(std::move(field));
      return true;
    }
    if (c == '"') throw MalformedCsv(path_, line_, "unexpected quote inside unquoted field");
    field += static_cast<char>(c);
  }
}

std::vector<std::string> read_header(const std::string& path) {
  CsvRecordReader r(path);
  std::vector<std::string> header;
  if (!r.next(header)) throw MalformedCsv(path, 1, "missing header row");
  for (std::size_t i = 0; i < header.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (header[i] == header[j]) throw MalformedCsv(path, 1, "duplicate column " + header[i]);
    }
  }
  return header;
}

namespace {

struct Inference {
  bool can_int = true;
  bool can_float = true;
  bool can_bool = true;

  void observe(const std::string& s) {
    if (s.empty()) return;
    if (can_int && !parse_int64(s)) can_int = false;
    if (!can_int && can_float && !parse_float(s)) can_float = false;
    if (can_bool && !parse_bool(s)) can_bool = false;
  }
  Dtype result() const {
    if (can_int) return Dtype::int64();
    if (can_float) return Dtype::float64();
    if (can_bool) return Dtype::boolean();
    return Dtype::text();
  }
};

void check_width(const CsvRecordReader& r, const std::vector<std::string>& fields, std::size_t width) {
  if (fields.size() != width) {
    throw MalformedCsv(r.path(), r.line(),
                       "expected " + std::to_string(width) + " fields, found " + std::to_string(fields.size()));
  }
}

}  // namespace

std::vector<Dtype> infer_types(const std::string& path, const std::vector<bool>& wanted) {
  CsvRecordReader r(path);
  std::vector<std::string> fields;
  if (!r.next(fields)) throw MalformedCsv(path, 1, "missing header row");
  std::size_t width = fields.size();
  std::vector<Inference> inf(width);
  bool any = std::find(wanted.begin(), wanted.end(), true) != wanted.end();
  while (r.next(fields)) {
    check_width(r, fields, width);
    if (!any) continue;
    for (std::size_t i = 0; i < width; ++i) {
      if (wanted[i]) inf[i].observe(fields[i]);
    }
  }
  std::vector<Dtype> out;
  for (std::size_t i = 0; i < width; ++i) out.push_back(wanted[i] ? inf[i].result() : Dtype::text());
  return out;
}

CsvPlan plan_read(const std::string& path, const CsvOptions& options,
                  const std::optional<std::vector<Dtype>>& known_types) {
  CsvPlan plan;
  plan.header = read_header(path);
  auto position = [&plan](const std::string& name) -> std::size_t {
    auto it = std::find(plan.header.begin(), plan.header.end(), name);
    if (it == plan.header.end()) throw UnknownColumn(name);
    return static_cast<std::size_t>(it - plan.header.begin());
  };
  std::vector<bool> selected(plan.header.size(), !options.usecols.has_value());
  if (options.usecols) {
    for (const auto& n : *options.usecols) selected[position(n)] = true;
  }
  std::vector<std::optional<Dtype>> forced(plan.header.size());
  for (const auto& [n, t] : options.dtypes) forced[position(n)] = t;
  for (const auto& n : options.parse_dates) forced[position(n)] = Dtype::date();
  std::vector<bool> wanted(plan.header.size(), false);
  bool need_scan = false;
  for (std::size_t i = 0; i < plan.header.size(); ++i) {
    wanted[i] = selected[i] && !forced[i];
    need_scan = need_scan || wanted[i];
  }
  std::vector<Dtype> inferred;
  if (known_types && known_types->size() == plan.header.size()) {
    inferred = *known_types;
  } else if (need_scan) {
    inferred = infer_types(path, wanted);
  } else {
    inferred.assign(plan.header.size(), Dtype::text());
  }
  for (std::size_t i = 0; i < plan.header.size(); ++i) {
    if (!selected[i]) continue;
    plan.selected.push_back(i);
    plan.types.push_back(forced[i] ? *forced[i] : inferred[i]);
  }
  return plan;
}

CsvChunkReader::CsvChunkReader(const std::string& path, CsvPlan plan, std::set<std::string> category_columns)
    : plan_(std::move(plan)), category_(std::move(category_columns)) {
  reader_ = std::make_unique<CsvRecordReader>(path);
  if (!reader_->next(fields_)) throw MalformedCsv(path, 1, "missing header row");
}

std::optional<Frame> CsvChunkReader::next(std::size_t max_rows) {
  if (done_ && emitted_) return std::nullopt;
  std::size_t width = plan_.header.size();
  std::vector<ColumnBuilder> builders;
  builders.reserve(plan_.selected.size());
  for (std::size_t k = 0; k < plan_.selected.size(); ++k) {
    Dtype t = plan_.types[k];
    const std::string& name = plan_.header[plan_.selected[k]];
    if (t.tag == TypeTag::Text && category_.count(name)) t = Dtype::category();
    builders.emplace_back(name, t, std::min<std::size_t>(max_rows, 1 << 16));
  }
  std::size_t n = 0;
  while (n < max_rows && !done_) {
    if (!reader_->next(fields_)) {
      done_ = true;
      break;
    }
    check_width(*reader_, fields_, width);
    for (std::size_t k = 0; k < plan_.selected.size(); ++k) {
      std::string& cell = fields_[plan_.selected[k]];
      ColumnBuilder& b = builders[k];
      if (cell.empty() && plan_.types[k].tag != TypeTag::Text) {
        b.append_null();
        continue;
      }
      if (cell.empty()) {
        b.append_null();
        continue;
      }
      auto fail = [&]() {
        throw TypeCoercionError(static_cast<std::int64_t>(rows_), plan_.header[plan_.selected[k]], cell);
      };
      switch (plan_.types[k].tag) {
        case TypeTag::Int64: {
          auto v = parse_int64(cell);
          if (!v) fail();
          b.append_int(*v);
          break;
        }
        case TypeTag::Float64: {
          auto v = parse_float(cell);
          if (!v) fail();
          b.append_float(*v);
          break;
        }
        case TypeTag::Bool: {
          auto v = parse_bool(cell);
          if (!v) fail();
          b.append_bool(*v);
          break;
        }
        case TypeTag::Date: {
          auto v = parse_date(cell);
          if (!v) fail();
          b.append_date(*v);
          break;
        }
        case TypeTag::Text:
        case TypeTag::Category: b.append_text(std::move(cell)); break;
      }
    }
    ++n;
    ++rows_;
  }
  if (n == 0 && emitted_) return std::nullopt;
  emitted_ = true;
  std::vector<ColumnPtr> cols;
  for (auto& b : builders) cols.push_back(make_column(b.finish()));
  return Frame(std::move(cols), n);
}

Frame read_csv(const std::string& path, const CsvOptions& options, ReadStats* stats,
               const std::optional<std::vector<Dtype>>& known_types) {
  CsvPlan plan = plan_read(path, options, known_types);
  CsvChunkReader reader(path, plan, options.category_columns);
  std::vector<Frame> parts;
  while (auto chunk = reader.next(1 << 20)) parts.push_back(std::move(*chunk));
  Frame out = parts.size() == 1 ? parts.front() : concat(parts);
  if (out.width() == 0) out = with_rows(reader.rows_read());
  if (stats) {
    stats->columns_parsed = plan.selected.size();
    stats->rows = out.rows();
  }
  return out;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_csv(const std::string& path, const Frame& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MissingFile(path);
  for (std::size_t c = 0; c < f.width(); ++c) {
    if (c) out << ',';
    out << csv_escape(f.columns()[c]->name);
  }
  out << '\n';
  for (std::size_t r = 0; r < f.rows(); ++r) {
    for (std::size_t c = 0; c < f.width(); ++c) {
      if (c) out << ',';
      const Column& col = *f.columns()[c];
      if (col.null_at(r)) continue;
      Cell v = col.at(r);
      if (auto* b = std::get_if<bool>(&v)) {
        out << (*b ? "true" : "false");
      } else {
        out << csv_escape(format_cell(v));
      }
    }
    out << '\n';
  }
}

}  // namespace lfp
