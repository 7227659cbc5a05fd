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

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lfp/expr.hpp"
#include "lfp/frame.hpp"

namespace lfp {

enum class JoinKind { Inner, Left, Right, Outer };
std::string_view join_name(JoinKind k);
std::optional<JoinKind> parse_join(std::string_view name);

struct AggSpec {
  std::string column;
  AggFunc func = AggFunc::Sum;
  std::string output;
};

using RenameMap = std::vector<std::pair<std::string, std::string>>;

Frame filter_rows(const Frame& f, const Expr& pred);
Frame project(const Frame& f, const std::vector<std::string>& names);
Frame set_column(const Frame& f, const std::string& name, const Expr& e);
/// Names absent from the frame are ignored.
Frame drop_columns(const Frame& f, const std::vector<std::string>& names);
Frame rename(const Frame& f, const RenameMap& mapping);
Frame astype(const Frame& f, const std::vector<std::pair<std::string, Dtype>>& types);
/// With `all` set, fills every column whose dtype accepts the value; then
/// applies the per-column values, which must fit their columns.
Frame fillna(const Frame& f, const std::optional<Cell>& all,
             const std::vector<std::pair<std::string, Cell>>& per_column);
/// Rounds float64 columns; other columns pass through.
Frame round_frame(const Frame& f, int digits);
/// Absolute value of int64 and float64 columns; other columns pass through.
Frame abs_frame(const Frame& f);
/// Keeps the first row of each distinct subset tuple (all columns if empty).
Frame drop_duplicates(const Frame& f, const std::vector<std::string>& subset);
/// Stable sort; nulls last in either direction.
Frame sort_values(const Frame& f, const std::vector<std::string>& by, const std::vector<bool>& ascending);
Frame head(const Frame& f, std::size_t n);
/// Splits the text cells of `column` on '|' and emits one row per piece.
Frame explode(const Frame& f, const std::string& column);
Frame merge(const Frame& left, const Frame& right, const std::vector<std::string>& on, JoinKind how);
/// One row per distinct non-null key tuple, sorted by key.
Frame groupby_agg(const Frame& f, const std::vector<std::string>& keys, const std::vector<AggSpec>& aggs);

/// Appends a canonical, type-tagged encoding of a cell to `out`. Equal keys
/// (including int 1 and float 1.0) encode identically.
void encode_key(const Column& c, std::size_t row, std::string& out);
/// Returns false when any key cell is null.
bool encode_row_key(const std::vector<const Column*>& cols, std::size_t row, std::string& out);
int compare_rows(const std::vector<const Column*>& cols, std::size_t a, std::size_t b,
                 const std::vector<bool>& ascending);
/// Compares row a of `left` with row b of `right`; the column lists must have matching dtypes.
int compare_rows(const std::vector<const Column*>& left, std::size_t a, const std::vector<const Column*>& right,
                 std::size_t b, const std::vector<bool>& ascending);

/// Incremental hash aggregation. Chunks may be fed one at a time.
class GroupAggregator {
 public:
  GroupAggregator(std::vector<std::string> keys, std::vector<AggSpec> aggs);
  void consume(const Frame& chunk);
  Frame finish();
  std::size_t state_bytes() const { return state_bytes_; }
  std::size_t groups() const { return groups_.size(); }

 private:
  struct Group {
    std::vector<Cell> key;
    std::vector<AggState> states;
  };
  std::vector<std::string> keys_;
  std::vector<AggSpec> aggs_;
  std::vector<Dtype> key_types_;
  std::vector<Dtype> agg_types_;
  bool typed_ = false;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<Group> groups_;
  std::size_t state_bytes_ = 0;
};

/// Keeps first occurrences across chunks.
class Deduplicator {
 public:
  explicit Deduplicator(std::vector<std::string> subset) : subset_(std::move(subset)) {}
  Frame filter(const Frame& chunk);
  std::size_t state_bytes() const { return state_bytes_; }

 private:
  std::vector<std::string> subset_;
  std::unordered_map<std::string, bool> seen_;
  std::size_t state_bytes_ = 0;
};

/// Hash join with a fully built side and a streamed probe side. Inner, left and
/// outer joins build the right input; right joins build the left input, so the
/// probe side always dictates output order.
class HashJoin {
 public:
  HashJoin(std::vector<std::string> on, JoinKind how);
  static bool builds_left(JoinKind how) { return how == JoinKind::Right; }
  void build(Frame side);
  Frame probe(const Frame& chunk);
  /// Unmatched build rows (outer join only), then resets nothing.
  Frame finish();
  std::size_t state_bytes() const { return state_bytes_; }

 private:
  Frame assemble(const Frame& left, const std::vector<std::optional<std::size_t>>& lrows,
                 const Frame& right, const std::vector<std::optional<std::size_t>>& rrows) const;
  std::vector<std::string> on_;
  JoinKind how_;
  Frame build_;
  std::unordered_map<std::string, std::vector<std::size_t>> table_;
  std::vector<std::uint8_t> matched_;
  std::optional<Frame> probe_schema_;
  std::size_t state_bytes_ = 0;
};

/// Output schema of a merge: left columns then right non-key columns, with
/// _x/_y suffixes on collisions.
struct MergeNames {
  std::vector<std::string> left_out;
  std::vector<std::string> right_out;  // empty string for right key columns
};
MergeNames merge_names(const std::vector<std::string>& left, const std::vector<std::string>& right,
                       const std::vector<std::string>& on);

}  // namespace lfp
