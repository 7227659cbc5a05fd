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

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lfp/cell.hpp"

namespace lfp {

inline constexpr std::size_t kDistinctCap = 4096;

struct ColumnMeta {
  std::string name;
  Dtype dtype;
  std::optional<std::size_t> distinct;  // nullopt once the cap is exceeded
  std::size_t nulls = 0;

  bool operator==(const ColumnMeta&) const = default;
};

struct DatasetMeta {
  std::string path;
  std::int64_t modified_time = 0;  // nanoseconds since the filesystem epoch
  std::size_t row_count = 0;
  std::size_t approx_row_bytes = 0;
  std::vector<ColumnMeta> columns;

  bool operator==(const DatasetMeta&) const = default;
  std::vector<std::string> names() const;
  std::vector<Dtype> types() const;
};

std::string sidecar_path(const std::string& path);
std::int64_t file_mtime(const std::string& path);

/// Full pass over the file. Does not touch the sidecar.
DatasetMeta compute_meta(const std::string& path);
/// compute_meta plus an atomic sidecar write.
DatasetMeta scan(const std::string& path);
/// Stored metadata, only while the file is unchanged since the scan.
std::optional<DatasetMeta> lookup(const std::string& path);

std::string meta_to_text(const DatasetMeta& m);
/// Throws Error on malformed input.
DatasetMeta meta_from_text(const std::string& text);
void write_sidecar(const DatasetMeta& m);

std::size_t category_threshold(std::size_t row_count);
/// Text columns with few distinct values that the program never writes.
std::set<std::string> category_candidates(const DatasetMeta& m, const std::set<std::string>& readonly_columns);

}  // namespace lfp
