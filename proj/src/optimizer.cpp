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

#include "lfp/optimizer.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "lfp/errors.hpp"

namespace lfp {

void PushdownReport::append(const PushdownReport& o) {
  swaps.insert(swaps.end(), o.swaps.begin(), o.swaps.end());
  compounds_formed.insert(compounds_formed.end(), o.compounds_formed.begin(), o.compounds_formed.end());
  filters_merged.insert(filters_merged.end(), o.filters_merged.begin(), o.filters_merged.end());
  disjunctions.insert(disjunctions.end(), o.disjunctions.begin(), o.disjunctions.end());
}

std::string PushdownReport::to_string() const {
  std::ostringstream out;
  for (const auto& [f, u] : swaps) out << "swap filter=" << f << " past=" << u << '\n';
  for (const auto& [u, v] : compounds_formed) out << "compound updater=" << u << " filter=" << v << '\n';
  for (const auto& group : filters_merged) {
    out << "merge";
    for (auto uid : group) out << ' ' << uid;
    out << '\n';
  }
  for (auto uid : disjunctions) out << "disjunction " << uid << '\n';
  return out.str();
}

const SafePointRule& safe_points() {
  static const SafePointRule rule{
      {ActionKind::Project, ActionKind::SetColumn, ActionKind::Drop, ActionKind::Rename, ActionKind::AsType,
       ActionKind::FillNa, ActionKind::Round, ActionKind::Abs, ActionKind::DropDuplicates, ActionKind::SortValues,
       ActionKind::Identity},
      {ActionKind::ReadCsv, ActionKind::Source, ActionKind::Filter, ActionKind::Head, ActionKind::Explode,
       ActionKind::Merge, ActionKind::GroupByAgg, ActionKind::Reduce, ActionKind::ScalarExpr, ActionKind::Print,
       ActionKind::Opaque},
  };
  return rule;
}

namespace {

bool strict_predicate(const Expr& e) {
  if (e.kind != ExprKind::Binary) return false;
  if (is_comparison(e.bop)) return true;
  if (e.bop == BinOp::And || e.bop == BinOp::Or) return strict_predicate(*e.args[0]) && strict_predicate(*e.args[1]);
  return false;
}

bool filter_has_aggregate(const Node& f) { return f.action.expr && has_aggregate(*f.action.expr); }

std::map<std::string, std::string> inverse_rename(const RenameMap& m) {
  std::map<std::string, std::string> inv;
  for (const auto& [from, to] : m) inv[to] = from;
  return inv;
}

bool row_local_updater(const Node& n) {
  switch (n.action.kind) {
    case ActionKind::SetColumn: return !has_aggregate(*n.action.expr);
    case ActionKind::AsType:
    case ActionKind::FillNa:
    case ActionKind::Round:
    case ActionKind::Abs: return true;
    default: return false;
  }
}

/// A SetColumn that may append a column rather than overwrite one.
bool may_append(const Node& n) {
  if (n.action.kind != ActionKind::SetColumn) return false;
  const auto& schema = n.sources[0]->all_attributes;
  if (!schema) return true;
  return std::find(schema->names.begin(), schema->names.end(), n.action.column) == schema->names.end();
}

bool mergeable_filter(const Node& n) { return is_row_selection(n) && !filter_has_aggregate(n); }

struct GraphView {
  std::vector<NodePtr> order;
  std::map<const Node*, std::vector<Node*>> consumers;
  std::set<const Node*> roots;

  explicit GraphView(const std::vector<NodePtr>& r) : order(topological_order(r)), consumers(consumers_of(order)) {
    for (const auto& n : r) roots.insert(n.get());
  }
  const std::vector<Node*>& parents(const Node* n) const { return consumers.at(n); }
};

bool fixed(const Node& n, const GraphView& g, const OptContext& ctx) {
  return g.roots.count(&n) || ctx.pinned.count(n.uid);
}

std::size_t iteration_cap(std::size_t nodes) { return std::max<std::size_t>(64, (nodes + 8) * (nodes + 8)); }

NodePtr new_node(OptContext& ctx, Action a, std::vector<NodePtr> sources) {
  auto n = std::make_shared<Node>();
  n->uid = ctx.fresh_uid();
  n->action = std::move(a);
  n->sources = std::move(sources);
  derive_attributes(*n);
  return n;
}

/// The filter action to place below u, with column references rewritten.
Action pushed_filter(const Node& u, const Node& f) {
  Action a = f.action;
  if (u.action.kind == ActionKind::Rename) a.expr = rename_columns(a.expr, inverse_rename(u.action.mapping));
  return a;
}

void swap_single(Node& f, const NodePtr& u, OptContext& ctx) {
  NodePtr below = new_node(ctx, pushed_filter(*u, f), u->sources);
  below->span = f.span;
  f.span = u->span;
  f.action = u->action;
  f.sources = {below};
  derive_attributes(f);
}

NodePtr shared_ptr_of(const GraphView& g, const Node* n) {
  for (const auto& p : g.order) {
    if (p.get() == n) return p;
  }
  throw InternalError("node missing from graph view");
}

bool try_multi_parent(const NodePtr& u, const GraphView& g, OptContext& ctx, PushdownReport& report) {
  const auto& parents = g.parents(u.get());
  for (Node* p : parents) {
    if (!is_row_selection(*p) || p->sources.size() != 1 || has_swap_conflict(*u, *p)) return false;
  }
  bool identical = true;
  for (Node* p : parents) identical = identical && exprs_equal(*p->action.expr, *parents[0]->action.expr);
  if (identical) {
    Node* first = parents[0];
    swap_single(*first, u, ctx);
    report.swaps.emplace_back(first->uid, u->uid);
    NodePtr first_ptr = shared_ptr_of(g, first);
    for (std::size_t i = 1; i < parents.size(); ++i) {
      parents[i]->action = Action{};
      parents[i]->action.kind = ActionKind::Identity;
      parents[i]->sources = {first_ptr};
      derive_attributes(*parents[i]);
      report.swaps.emplace_back(parents[i]->uid, u->uid);
    }
    return true;
  }
  if (u->disjunction_below) return false;
  for (Node* p : parents) {
    if (filter_has_aggregate(*p)) return false;
  }
  Action d = pushed_filter(*u, *parents[0]);
  for (std::size_t i = 1; i < parents.size(); ++i) {
    d.expr = binary(BinOp::Or, d.expr, pushed_filter(*u, *parents[i]).expr);
  }
  NodePtr below = new_node(ctx, std::move(d), u->sources);
  below->span = parents[0]->span;
  NodePtr copy = new_node(ctx, u->action, {below});
  copy->span = u->span;
  copy->disjunction_below = true;
  for (Node* p : parents) {
    p->sources = {copy};
    derive_attributes(*p);
  }
  report.disjunctions.push_back(below->uid);
  return true;
}

}  // namespace

bool is_row_selection(const Node& n) {
  return n.action.kind == ActionKind::Filter && n.action.expr && n.sources.size() == 1 &&
         strict_predicate(*n.action.expr);
}

bool has_swap_conflict(const Node& u, const Node& f) {
  const Action& a = u.action;
  if (!safe_points().swappable_actions.count(a.kind)) return true;
  if (u.sources.size() != 1) return true;
  const AttrSet& used = f.used_attributes;
  if (used.all) return true;
  switch (a.kind) {
    case ActionKind::SetColumn:
      if (has_aggregate(*a.expr)) return true;
      break;
    case ActionKind::DropDuplicates:
      if (filter_has_aggregate(f)) return true;
      if (!a.names.empty()) {
        for (const auto& c : used.names) {
          if (std::find(a.names.begin(), a.names.end(), c) == a.names.end()) return true;
        }
      }
      return false;
    case ActionKind::Project:
      for (const auto& c : used.names) {
        if (std::find(a.names.begin(), a.names.end(), c) == a.names.end()) return true;
      }
      return false;
    case ActionKind::Drop:
      for (const auto& c : a.names) {
        if (used.names.count(c)) return true;
      }
      return false;
    case ActionKind::Rename: {
      auto inv = inverse_rename(a.mapping);
      for (const auto& [from, to] : a.mapping) {
        if (used.names.count(from) && !inv.count(from)) return true;
      }
      return false;
    }
    default: break;
  }
  return u.mod_attributes.intersects(used);
}

PushdownReport pushdown(const std::vector<NodePtr>& roots, OptContext& ctx) {
  PushdownReport report;
  std::size_t cap = iteration_cap(topological_order(roots).size());
  for (std::size_t iter = 0; iter < cap; ++iter) {
    GraphView g(roots);
    bool changed = false;
    for (const auto& f : g.order) {
      if (!is_row_selection(*f)) continue;
      const NodePtr& u = f->sources[0];
      if (is_row_selection(*u) || fixed(*u, g, ctx) || has_swap_conflict(*u, *f)) continue;
      if (g.parents(u.get()).size() == 1) {
        NodePtr keep = u;
        swap_single(*f, keep, ctx);
        report.swaps.emplace_back(f->uid, keep->uid);
        changed = true;
      } else {
        changed = try_multi_parent(u, g, ctx, report);
      }
      if (changed) break;
    }
    if (!changed) return report;
  }
  throw InternalError("predicate pushdown did not reach a fixpoint");
}

PushdownReport pushdown_extended(const std::vector<NodePtr>& roots, OptContext& ctx) {
  PushdownReport report = pushdown(roots, ctx);
  std::set<std::pair<std::int64_t, std::int64_t>> formed;
  std::size_t cap = iteration_cap(topological_order(roots).size());
  bool settled = false;
  for (std::size_t iter = 0; iter < cap && !settled; ++iter) {
    GraphView g(roots);
    bool changed = false;
    for (const auto& v : g.order) {
      if (!mergeable_filter(*v)) continue;
      NodePtr u = v->sources[0];
      if (!row_local_updater(*u) || fixed(*u, g, ctx) || g.parents(u.get()).size() != 1) continue;
      if (!has_swap_conflict(*u, *v)) continue;
      const auto& above = g.parents(v.get());
      if (above.size() == 1 && mergeable_filter(*above[0])) continue;
      if (u->sources.size() != 1) continue;
      NodePtr y = u->sources[0];
      if (fixed(*y, g, ctx) || g.parents(y.get()).size() != 1 || y->sources.size() != 1) continue;
      bool movable = false;
      if (mergeable_filter(*y)) {
        movable = !y->used_attributes.intersects(u->mod_attributes);
      } else if (row_local_updater(*y)) {
        movable = !y->mod_attributes.intersects(u->used_attributes) &&
                  !y->mod_attributes.intersects(u->mod_attributes) &&
                  !y->mod_attributes.intersects(v->used_attributes) &&
                  !y->used_attributes.intersects(u->mod_attributes) && !(may_append(*y) && may_append(*u));
      }
      if (!movable) continue;
      if (formed.insert({u->uid, v->uid}).second) report.compounds_formed.emplace_back(u->uid, v->uid);
      report.swaps.emplace_back(v->uid, y->uid);
      NodePtr below = y->sources[0];
      Action y_action = y->action;
      u->sources = {below};
      derive_attributes(*u);
      y->action = v->action;
      y->sources = {u};
      derive_attributes(*y);
      v->action = std::move(y_action);
      v->sources = {y};
      derive_attributes(*v);
      changed = true;
      break;
    }
    settled = !changed;
  }
  if (!settled) throw InternalError("extended pushdown did not reach a fixpoint");

  for (std::size_t iter = 0; iter < cap; ++iter) {
    GraphView g(roots);
    bool changed = false;
    for (const auto& top : g.order) {
      if (!mergeable_filter(*top)) continue;
      NodePtr low = top->sources[0];
      if (!mergeable_filter(*low) || fixed(*low, g, ctx) || g.parents(low.get()).size() != 1) continue;
      report.filters_merged.push_back({low->uid, top->uid});
      top->action.expr = binary(BinOp::And, low->action.expr, top->action.expr);
      top->sources = low->sources;
      derive_attributes(*top);
      changed = true;
      break;
    }
    if (!changed) {
      report.append(pushdown(roots, ctx));
      return report;
    }
  }
  throw InternalError("filter merging did not reach a fixpoint");
}

namespace {

struct Demand {
  bool needed = false;
  AttrSet live;
};

AttrSet names_set(const std::vector<std::string>& v) {
  std::set<std::string> s;
  for (const auto& c : v) {
    if (!c.empty()) s.insert(c);
  }
  return AttrSet::of(std::move(s));
}

AttrSet without(const AttrSet& live, const std::vector<std::string>& names) {
  if (live.all) return live;
  AttrSet out = live;
  for (const auto& c : names) out.names.erase(c);
  return out;
}

/// True when the node only rewrites columns and none of them is live.
bool can_bypass(const Node& n, const AttrSet& live) {
  switch (n.action.kind) {
    case ActionKind::SetColumn:
    case ActionKind::AsType: return !n.mod_attributes.all && !n.mod_attributes.intersects(live);
    case ActionKind::FillNa: return !n.action.fill_all && !n.mod_attributes.intersects(live);
    default: return false;
  }
}

AttrSet merge_side_live(const Node& n, const AttrSet& live, std::size_t side) {
  const Action& a = n.action;
  auto left = n.sources[0]->all_attributes;
  auto right = n.sources[1]->all_attributes;
  if (live.all || !left || !right) return AttrSet::everything();
  MergeNames mn = merge_names(left->names, right->names, a.names);
  AttrSet out = names_set(a.names);
  const auto& in_names = side == 0 ? left->names : right->names;
  const auto& out_names = side == 0 ? mn.left_out : mn.right_out;
  for (std::size_t i = 0; i < in_names.size(); ++i) {
    if (!out_names[i].empty() && live.contains(out_names[i])) out.add(in_names[i]);
  }
  return out;
}

/// Columns each source must provide, given the columns live at n's output.
std::vector<AttrSet> source_demand(const Node& n, const AttrSet& live) {
  const Action& a = n.action;
  std::vector<AttrSet> out(n.sources.size(), AttrSet::everything());
  if (n.sources.empty()) return out;
  AttrSet s = live;
  switch (a.kind) {
    case ActionKind::Filter:
    case ActionKind::SetColumn:
      if (a.kind == ActionKind::SetColumn) s = without(live, {a.column});
      s.add(n.used_attributes);
      break;
    case ActionKind::Project: s = names_set(a.names); break;
    case ActionKind::Drop: s = without(live, a.names); break;
    case ActionKind::Rename:
      if (!live.all) {
        std::map<std::string, std::string> inv = inverse_rename(a.mapping);
        std::set<std::string> from;
        for (const auto& [f, t] : a.mapping) from.insert(f);
        s = AttrSet{};
        for (const auto& c : live.names) {
          auto it = inv.find(c);
          if (it != inv.end()) {
            s.add(it->second);
          } else if (!from.count(c)) {
            s.add(c);
          }
        }
      }
      break;
    case ActionKind::AsType:
    case ActionKind::FillNa:
    case ActionKind::DropDuplicates:
    case ActionKind::SortValues:
    case ActionKind::Explode:
    case ActionKind::Round:
    case ActionKind::Abs: s.add(n.used_attributes); break;
    case ActionKind::Head:
    case ActionKind::Identity: break;
    case ActionKind::Merge:
      out[0] = merge_side_live(n, live, 0);
      out[1] = merge_side_live(n, live, 1);
      return out;
    case ActionKind::GroupByAgg:
    case ActionKind::Reduce: s = n.used_attributes; break;
    default: return out;
  }
  out[0] = s;
  return out;
}

}  // namespace

RedundancyReport eliminate_redundant(const std::vector<NodePtr>& graph, const std::vector<NodePtr>& requested,
                                     const std::set<std::int64_t>& pinned) {
  RedundancyReport report;
  std::vector<NodePtr> all_roots = graph;
  all_roots.insert(all_roots.end(), requested.begin(), requested.end());
  std::vector<NodePtr> order = topological_order(all_roots);
  std::map<const Node*, Demand> demand;
  for (const auto& r : requested) demand[r.get()] = {true, AttrSet::everything()};
  for (const auto& n : order) {
    if (pinned.count(n->uid)) demand[n.get()] = {true, AttrSet::everything()};
  }
  std::set<const Node*> bypassed;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node& n = **it;
    Demand& d = demand[&n];
    if (!d.needed) continue;
    if (d.live.all && n.all_attributes) d.live = names_set(n.all_attributes->names);
    std::vector<AttrSet> per_source;
    if (can_bypass(n, d.live)) {
      bypassed.insert(&n);
      per_source.assign(1, d.live);
    } else {
      per_source = source_demand(n, d.live);
    }
    for (std::size_t i = 0; i < n.sources.size(); ++i) {
      Demand& sd = demand[n.sources[i].get()];
      sd.needed = true;
      sd.live.add(per_source[i]);
    }
  }
  auto resolve = [&](NodePtr p) {
    while (bypassed.count(p.get())) p = p->sources[0];
    return p;
  };
  for (const auto& n : order) {
    bool needed = demand[n.get()].needed;
    if (bypassed.count(n.get())) {
      n->useful = false;
      report.bypassed.push_back(n->uid);
      continue;
    }
    n->useful = needed;
    if (!needed) {
      report.removed.push_back(n->uid);
      continue;
    }
    for (auto& s : n->sources) s = resolve(s);
  }
  std::sort(report.removed.begin(), report.removed.end());
  std::sort(report.bypassed.begin(), report.bypassed.end());
  return report;
}

std::set<std::int64_t> mark_persist(const std::vector<NodePtr>& targets, const std::vector<NodePtr>& live_hints) {
  std::map<std::int64_t, int> reach_count;
  std::set<const Node*> seen_targets;
  for (const auto& t : targets) {
    if (!seen_targets.insert(t.get()).second) continue;
    for (const auto& n : reachable({t})) ++reach_count[n->uid];
  }
  std::set<std::int64_t> marked;
  for (const auto& [uid, count] : reach_count) {
    if (count >= 2) marked.insert(uid);
  }
  for (const auto& n : reachable(live_hints)) {
    if (reach_count.count(n->uid)) marked.insert(n->uid);
  }
  return marked;
}

std::set<std::int64_t> persist_frontier(const std::vector<NodePtr>& targets, const std::set<std::int64_t>& marked,
                                       const std::vector<NodePtr>& live_hints) {
  std::set<std::int64_t> hinted;
  for (const auto& h : live_hints) hinted.insert(h->uid);
  std::vector<NodePtr> nodes = reachable(targets);
  auto consumers = consumers_of(nodes);
  std::set<std::int64_t> out;
  for (const auto& n : nodes) {
    if (!marked.count(n->uid)) continue;
    bool covered = !consumers[n.get()].empty() && !hinted.count(n->uid);
    for (Node* c : consumers[n.get()]) covered = covered && marked.count(c->uid);
    if (!covered) out.insert(n->uid);
  }
  return out;
}

}  // namespace lfp
