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
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lfp/taskgraph.hpp"

namespace lfp {

struct PushdownReport {
  std::vector<std::pair<std::int64_t, std::int64_t>> swaps;  // (filter, bypassed)
  std::vector<std::pair<std::int64_t, std::int64_t>> compounds_formed;
  std::vector<std::vector<std::int64_t>> filters_merged;
  std::vector<std::int64_t> disjunctions;  // uids of pushed disjunctive filters

  bool empty() const {
    return swaps.empty() && compounds_formed.empty() && filters_merged.empty() && disjunctions.empty();
  }
  void append(const PushdownReport& o);
  std::string to_string() const;
};

struct SafePointRule {
  std::set<ActionKind> swappable_actions;
  std::set<ActionKind> blocking_actions;
};
const SafePointRule& safe_points();

/// Mutable state shared by the passes of one optimization run.
struct OptContext {
  std::int64_t* next_uid = nullptr;
  /// Nodes whose value must stay available under their own uid; they are
  /// never moved or bypassed.
  std::set<std::int64_t> pinned;
  std::int64_t fresh_uid() { return (*next_uid)++; }
};

/// A filter whose predicate is built only from comparisons, & and |.
bool is_row_selection(const Node& n);
bool has_swap_conflict(const Node& u, const Node& f);

PushdownReport pushdown(const std::vector<NodePtr>& roots, OptContext& ctx);
/// Moves (updater, filter) pairs below further filters and independent
/// updaters, then merges adjacent filters and reruns plain pushdown.
PushdownReport pushdown_extended(const std::vector<NodePtr>& roots, OptContext& ctx);

struct RedundancyReport {
  std::vector<std::int64_t> removed;   // reachable from the graph but not needed
  std::vector<std::int64_t> bypassed;  // updaters spliced out
};
/// Strong-liveness pruning. `graph` lists every sink of the graph under
/// consideration; only `requested` values are kept.
RedundancyReport eliminate_redundant(const std::vector<NodePtr>& graph, const std::vector<NodePtr>& requested,
                                     const std::set<std::int64_t>& pinned = {});

/// Nodes shared by at least two targets, or by the targets and the hints.
std::set<std::int64_t> mark_persist(const std::vector<NodePtr>& targets, const std::vector<NodePtr>& live_hints);
/// Marked nodes that are hinted themselves or have an unmarked consumer; these
/// are retained across computes.
std::set<std::int64_t> persist_frontier(const std::vector<NodePtr>& targets, const std::set<std::int64_t>& marked,
                                       const std::vector<NodePtr>& live_hints = {});

}  // namespace lfp
