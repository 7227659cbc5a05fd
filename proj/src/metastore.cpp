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

#include "lfp/metastore.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "lfp/csv.hpp"
#include "lfp/errors.hpp"

namespace lfp {

namespace fs = std::filesystem;

std::vector<std::string> DatasetMeta::names() const {
  std::vector<std::string> out;
  for (const auto& c : columns) out.push_back(c.name);
  return out;
}

std::vector<Dtype> DatasetMeta::types() const {
  std::vector<Dtype> out;
  for (const auto& c : columns) out.push_back(c.dtype);
  return out;
}

std::string sidecar_path(const std::string& path) { return path + ".lfpmeta"; }

std::int64_t file_mtime(const std::string& path) {
  std::error_code ec;
  auto t = fs::last_write_time(path, ec);
  if (ec) throw MissingFile(path);
  return std::chrono::duration_cast<std::chrono::nanoseconds>(t.time_since_epoch()).count();
}

DatasetMeta compute_meta(const std::string& path) {
  if (!fs::exists(path)) throw MissingFile(path);
  DatasetMeta m;
  m.path = path;
  m.modified_time = file_mtime(path);
  std::vector<std::string> header = read_header(path);
  std::vector<Dtype> types = infer_types(path, std::vector<bool>(header.size(), true));
  std::vector<std::unordered_set<std::string>> seen(header.size());
  std::vector<bool> many(header.size(), false);
  std::vector<std::size_t> nulls(header.size(), 0);
  CsvRecordReader r(path);
  std::vector<std::string> fields;
  r.next(fields);
  std::uint64_t header_bytes = r.bytes_read();
  while (r.next(fields)) {
    ++m.row_count;
    for (std::size_t i = 0; i < header.size() && i < fields.size(); ++i) {
      if (fields[i].empty()) {
        ++nulls[i];
        continue;
      }
      if (many[i]) continue;
      seen[i].insert(fields[i]);
      if (seen[i].size() > kDistinctCap) {
        many[i] = true;
        seen[i].clear();
      }
    }
  }
  if (m.row_count) m.approx_row_bytes = static_cast<std::size_t>((r.bytes_read() - header_bytes) / m.row_count);
  for (std::size_t i = 0; i < header.size(); ++i) {
    ColumnMeta c{header[i], types[i], std::nullopt, nulls[i]};
    if (!many[i]) c.distinct = seen[i].size();
    m.columns.push_back(std::move(c));
  }
  return m;
}

namespace {

std::string encode_field(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '%' || c == '|' || c == '\n' || c == '\r') {
      char buf[4];
      std::snprintf(buf, sizeof buf, "%%%02X", static_cast<unsigned char>(c));
      out += buf;
    } else {
      out += c;
    }
  }
  return out;
}

std::string decode_field(const std::string& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size()) {
      out += static_cast<char>(std::stoi(s.substr(i + 1, 2), nullptr, 16));
      i += 2;
    } else {
      out += s[i];
    }
  }
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::size_t parse_size(const std::string& s, const std::string& key) {
  auto v = parse_int64(s);
  if (!v || *v < 0) throw Error("metadata: bad value for " + key + ": " + s);
  return static_cast<std::size_t>(*v);
}

}  // namespace

std::string meta_to_text(const DatasetMeta& m) {
  std::ostringstream out;
  out << "lfpmeta=1\n";
  out << "path=" << encode_field(m.path) << '\n';
  out << "modified_time=" << m.modified_time << '\n';
  out << "row_count=" << m.row_count << '\n';
  out << "approx_row_bytes=" << m.approx_row_bytes << '\n';
  for (const auto& c : m.columns) {
    out << "col=" << encode_field(c.name) << '|' << dtype_name(c.dtype) << '|'
        << (c.distinct ? std::to_string(*c.distinct) : "many") << '|' << c.nulls << '\n';
  }
  return out.str();
}

DatasetMeta meta_from_text(const std::string& text) {
  DatasetMeta m;
  std::istringstream in(text);
  std::string line;
  bool versioned = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw Error("metadata: malformed line: " + line);
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    if (key == "lfpmeta") {
      if (value != "1") throw Error("metadata: unsupported version " + value);
      versioned = true;
    } else if (key == "path") {
      m.path = decode_field(value);
    } else if (key == "modified_time") {
      auto v = parse_int64(value);
      if (!v) throw Error("metadata: bad modified_time");
      m.modified_time = *v;
    } else if (key == "row_count") {
      m.row_count = parse_size(value, key);
    } else if (key == "approx_row_bytes") {
      m.approx_row_bytes = parse_size(value, key);
    } else if (key == "col") {
      auto parts = split(value, '|');
      if (parts.size() != 4) throw Error("metadata: malformed column line: " + line);
      auto t = parse_dtype(parts[1]);
      if (!t) throw Error("metadata: unknown dtype " + parts[1]);
      ColumnMeta c{decode_field(parts[0]), *t, std::nullopt, parse_size(parts[3], "nulls")};
      if (parts[2] != "many") c.distinct = parse_size(parts[2], "distinct");
      m.columns.push_back(std::move(c));
    } else {
      throw Error("metadata: unknown key " + key);
    }
  }
  if (!versioned) throw Error("metadata: missing version line");
  return m;
}

void write_sidecar(const DatasetMeta& m) {
  std::string target = sidecar_path(m.path);
  std::string tmp = target + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp);
    out << meta_to_text(m);
    if (!out) throw Error("cannot write " + tmp);
  }
  fs::rename(tmp, target);
}

DatasetMeta scan(const std::string& path) {
  DatasetMeta m = compute_meta(path);
  write_sidecar(m);
  return m;
}

std::optional<DatasetMeta> lookup(const std::string& path) {
  std::ifstream in(sidecar_path(path), std::ios::binary);
  if (!in || !fs::exists(path)) return std::nullopt;
  std::stringstream buf;
  buf << in.rdbuf();
  DatasetMeta m;
  try {
    m = meta_from_text(buf.str());
  } catch (const Error&) {
    return std::nullopt;
  }
  if (m.modified_time != file_mtime(path)) return std::nullopt;
  return m;
}

std::size_t category_threshold(std::size_t row_count) { return std::min<std::size_t>(1024, row_count / 10); }

std::set<std::string> category_candidates(const DatasetMeta& m, const std::set<std::string>& readonly_columns) {
  std::set<std::string> out;
  std::size_t limit = category_threshold(m.row_count);
  for (const auto& c : m.columns) {
    if (c.dtype.tag != TypeTag::Text || !c.distinct || *c.distinct > limit) continue;
    if (readonly_columns.count(c.name)) out.insert(c.name);
  }
  return out;
}

}  // namespace lfp
