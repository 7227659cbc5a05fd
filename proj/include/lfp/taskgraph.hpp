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
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lfp/csv.hpp"
#include "lfp/errors.hpp"
#include "lfp/expr.hpp"
#include "lfp/kernels.hpp"
#include "lfp/value.hpp"

namespace lfp {

enum class ActionKind {
  ReadCsv,
  Source,
  Filter,
  Project,
  SetColumn,
  Drop,
  Rename,
  AsType,
  FillNa,
  Round,
  Abs,
  DropDuplicates,
  SortValues,
  Head,
  Explode,
  Merge,
  GroupByAgg,
  Reduce,
  ScalarExpr,
  Print,
  Opaque,
  Identity,
};

std::string_view action_name(ActionKind k);

/// Operation tag plus captured arguments. Only the fields relevant to `kind`
/// are meaningful.
struct Action {
  ActionKind kind = ActionKind::Identity;
  std::string path;                   // ReadCsv
  CsvOptions csv;                     // ReadCsv
  Value value;                        // Source
  ExprPtr expr;                       // Filter, SetColumn, Reduce, ScalarExpr
  std::string column;                 // SetColumn target, Explode column
  std::vector<std::string> names;     // Project, Drop, DropDuplicates, SortValues, Merge, GroupByAgg
  std::vector<bool> ascending;        // SortValues
  RenameMap mapping;                  // Rename
  std::vector<std::pair<std::string, Dtype>> types;  // AsType
  std::optional<Cell> fill_all;       // FillNa
  std::vector<std::pair<std::string, Cell>> fill_columns;  // FillNa
  int digits = 0;                     // Round
  std::size_t count = 0;              // Head
  JoinKind how = JoinKind::Inner;     // Merge
  std::vector<AggSpec> aggs;          // GroupByAgg
  std::string text;                   // Print (with $_#uid$_# escapes), Opaque label
};

/// Column-name set with an "every column" marker.
struct AttrSet {
  bool all = false;
  std::set<std::string> names;

  static AttrSet everything() { return {true, {}}; }
  static AttrSet of(std::set<std::string> n) { return {false, std::move(n)}; }
  bool empty() const { return !all && names.empty(); }
  bool contains(const std::string& n) const { return all || names.count(n) > 0; }
  bool intersects(const AttrSet& o) const;
  void add(const AttrSet& o);
  void add(const std::string& n) {
    if (!all) names.insert(n);
  }
  bool operator==(const AttrSet&) const = default;
  std::string to_string() const;
};

/// Statically known output columns, in order. Types are recorded when known.
struct Schema {
  std::vector<std::string> names;
  std::map<std::string, Dtype> types;
};

struct Node;
using NodePtr = std::shared_ptr<Node>;

struct Node {
  std::int64_t uid = 0;
  Action action;
  std::vector<NodePtr> sources;
  std::optional<Schema> all_attributes;
  AttrSet used_attributes;
  AttrSet mod_attributes;
  bool useful = true;
  std::optional<Value> result;
  int pending_consumers = 0;
  /// Set once a disjunctive filter has been pushed beneath this node.
  bool disjunction_below = false;
  /// Script position of the statement that created the node.
  SourceSpan span;
};

/// Derives used/mod/all attributes for an action over the given sources.
void derive_attributes(Node& n);

/// Owns uid allocation and the print chain for one session.
class TaskGraph {
 public:
  NodePtr lazy_op(Action action, std::vector<NodePtr> inputs);
  /// Adds a print node. `text` carries $_#uid$_# escapes for every lazy value
  /// in `values`.
  NodePtr lazy_print(std::string text, std::vector<NodePtr> values);
  NodePtr source(Value v);
  std::int64_t next_uid() { return next_uid_++; }
  std::int64_t peek_uid() const { return next_uid_; }
  /// Span stamped on nodes created from now on.
  void set_span(SourceSpan span) { span_ = span; }

  const NodePtr& last_print() const { return last_print_; }
  /// Print nodes not yet emitted, oldest first.
  const std::vector<NodePtr>& pending_prints() const { return pending_prints_; }
  void clear_pending_prints() { pending_prints_.clear(); }
  /// Every node created in this session, in creation order.
  const std::vector<std::weak_ptr<Node>>& created() const { return created_; }

 private:
  std::int64_t next_uid_ = 1;
  SourceSpan span_;
  NodePtr last_print_;
  std::vector<NodePtr> pending_prints_;
  std::vector<std::weak_ptr<Node>> created_;
};

/// Escape marking a lazy value inside print text.
std::string print_escape(std::int64_t uid);

/// Nodes reachable from roots (following sources), sorted by uid.
std::vector<NodePtr> reachable(const std::vector<NodePtr>& roots);
/// Producers before consumers; ties broken by uid.
std::vector<NodePtr> topological_order(const std::vector<NodePtr>& roots);
/// consumer lists keyed by node.
std::map<const Node*, std::vector<Node*>> consumers_of(const std::vector<NodePtr>& nodes);

std::string node_label(const Node& n);
std::string to_dot(const std::vector<NodePtr>& roots);
/// One line per node: uid, action, source uids, used and mod sets.
std::string dump_graph(const std::vector<NodePtr>& roots);

/// Deep copy of the subgraph reachable from roots. Nodes present in `cached`
/// become Source leaves holding the cached value. The returned map sends
/// original nodes to their copies.
struct ClonedGraph {
  std::vector<NodePtr> roots;
  std::map<const Node*, NodePtr> copies;
};
ClonedGraph clone_graph(const std::vector<NodePtr>& roots, const std::map<std::int64_t, Value>& cached);

}  // namespace lfp
