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

#include <cstdio>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lfp/frame.hpp"

namespace lfp {

/// Streaming tokenizer for the RFC-4180 subset: comma separator, double-quote
/// escaping, \n or \r\n line endings, blank lines skipped.
class CsvRecordReader {
 public:
  explicit CsvRecordReader(const std::string& path);
  ~CsvRecordReader();
  CsvRecordReader(const CsvRecordReader&) = delete;
  CsvRecordReader& operator=(const CsvRecordReader&) = delete;

  /// Reads the next record into `fields`; false at end of file.
  bool next(std::vector<std::string>& fields);
  /// Physical line on which the last returned record started (1-based).
  std::int64_t line() const { return record_line_; }
  std::uint64_t bytes_read() const { return consumed_; }
  const std::string& path() const { return path_; }

 private:
  int get();
  int peek();
  std::string path_;
  std::FILE* file_ = nullptr;
  std::vector<char> buf_;
  std::size_t pos_ = 0;
  std::size_t len_ = 0;
  std::int64_t line_ = 1;
  std::int64_t record_line_ = 0;
  std::uint64_t consumed_ = 0;
};

struct CsvOptions {
  std::optional<std::vector<std::string>> usecols;
  std::vector<std::pair<std::string, Dtype>> dtypes;
  std::vector<std::string> parse_dates;
  /// Text columns to dictionary-encode at read time.
  std::set<std::string> category_columns;
};

struct ReadStats {
  std::size_t columns_parsed = 0;
  std::size_t rows = 0;
};

std::vector<std::string> read_header(const std::string& path);

/// Whole-file type inference: int64 if every non-empty cell parses as a signed
/// 64-bit integer, else float64 if every cell parses numerically, else bool for
/// true/false, else text. Only columns flagged in `wanted` are inferred; the
/// others are reported as text.
std::vector<Dtype> infer_types(const std::string& path, const std::vector<bool>& wanted);

/// Header columns selected by the options, with their final dtypes.
struct CsvPlan {
  std::vector<std::string> header;
  std::vector<std::size_t> selected;  // header positions, in header order
  std::vector<Dtype> types;           // per selected column
};

/// Validates options against the header and resolves dtypes. `known_types`
/// (from metadata) skips the inference scan when present.
CsvPlan plan_read(const std::string& path, const CsvOptions& options,
                  const std::optional<std::vector<Dtype>>& known_types = std::nullopt);

/// Parses a CSV file chunk by chunk according to a plan.
class CsvChunkReader {
 public:
  CsvChunkReader(const std::string& path, CsvPlan plan, std::set<std::string> category_columns = {});
  /// Next chunk of at most max_rows rows; nullopt once the file is exhausted.
  std::optional<Frame> next(std::size_t max_rows);
  const CsvPlan& plan() const { return plan_; }
  std::size_t rows_read() const { return rows_; }

 private:
  CsvPlan plan_;
  std::set<std::string> category_;
  std::unique_ptr<CsvRecordReader> reader_;
  std::vector<std::string> fields_;
  std::size_t rows_ = 0;
  bool done_ = false;
  bool emitted_ = false;
};

Frame read_csv(const std::string& path, const CsvOptions& options, ReadStats* stats = nullptr,
               const std::optional<std::vector<Dtype>>& known_types = std::nullopt);

/// Writes a frame as CSV (used by fixtures and tools).
void write_csv(const std::string& path, const Frame& f);
std::string csv_escape(const std::string& s);

}  // namespace lfp
