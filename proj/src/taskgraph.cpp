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

#include "lfp/taskgraph.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "lfp/errors.hpp"

namespace lfp {

std::string_view action_name(ActionKind k) {
  switch (k) {
    case ActionKind::ReadCsv: return "read_csv";
    case ActionKind::Source: return "source";
    case ActionKind::Filter: return "filter";
    case ActionKind::Project: return "project";
    case ActionKind::SetColumn: return "set_column";
    case ActionKind::Drop: return "drop";
    case ActionKind::Rename: return "rename";
    case ActionKind::AsType: return "astype";
    case ActionKind::FillNa: return "fillna";
    case ActionKind::Round: return "round";
    case ActionKind::Abs: return "abs";
    case ActionKind::DropDuplicates: return "drop_duplicates";
    case ActionKind::SortValues: return "sort_values";
    case ActionKind::Head: return "head";
    case ActionKind::Explode: return "explode";
    case ActionKind::Merge: return "merge";
    case ActionKind::GroupByAgg: return "groupby_agg";
    case ActionKind::Reduce: return "reduce";
    case ActionKind::ScalarExpr: return "scalar_expr";
    case ActionKind::Print: return "print";
    case ActionKind::Opaque: return "opaque";
    case ActionKind::Identity: return "identity";
  }
  return "?";
}

bool AttrSet::intersects(const AttrSet& o) const {
  if (empty() || o.empty()) return false;
  if (all || o.all) return true;
  for (const auto& n : names) {
    if (o.names.count(n)) return true;
  }
  return false;
}

void AttrSet::add(const AttrSet& o) {
  if (all) return;
  if (o.all) {
    all = true;
    names.clear();
    return;
  }
  names.insert(o.names.begin(), o.names.end());
}

std::string AttrSet::to_string() const {
  if (all) return "{*}";
  std::string out = "{";
  bool first = true;
  for (const auto& n : names) {
    if (!first) out += ",";
    out += n;
    first = false;
  }
  return out + "}";
}

namespace {

std::set<std::string> key_set(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

template <typename T>
std::set<std::string> first_set(const std::vector<std::pair<std::string, T>>& v) {
  std::set<std::string> out;
  for (const auto& p : v) out.insert(p.first);
  return out;
}

std::optional<Schema> input_schema(const Node& n, std::size_t i = 0) {
  if (i >= n.sources.size()) return std::nullopt;
  return n.sources[i]->all_attributes;
}

Schema frame_schema(const Frame& f) {
  Schema s;
  for (const auto& c : f.columns()) {
    s.names.push_back(c->name);
    s.types[c->name] = c->dtype;
  }
  return s;
}

void remove_name(Schema& s, const std::string& name) {
  s.names.erase(std::remove(s.names.begin(), s.names.end(), name), s.names.end());
  s.types.erase(name);
}

AttrSet all_or_schema(const std::optional<Schema>& s) {
  if (!s) return AttrSet::everything();
  return AttrSet::of(key_set(s->names));
}

}  // namespace

void derive_attributes(Node& n) {
  const Action& a = n.action;
  n.used_attributes = {};
  n.mod_attributes = {};
  n.all_attributes.reset();
  std::optional<Schema> in = input_schema(n);
  switch (a.kind) {
    case ActionKind::ReadCsv: {
      Schema s;
      if (!a.names.empty()) {
        for (const auto& h : a.names) {
          if (!a.csv.usecols || std::count(a.csv.usecols->begin(), a.csv.usecols->end(), h)) {
            s.names.push_back(h);
          }
        }
      } else if (a.csv.usecols) {
        s.names = *a.csv.usecols;
      } else {
        break;
      }
      for (const auto& [c, t] : a.csv.dtypes) {
        if (std::count(s.names.begin(), s.names.end(), c)) s.types[c] = t;
      }
      for (const auto& c : a.csv.parse_dates) {
        if (std::count(s.names.begin(), s.names.end(), c)) s.types[c] = Dtype::date();
      }
      n.all_attributes = s;
      break;
    }
    case ActionKind::Source:
      if (a.value.is_frame()) n.all_attributes = frame_schema(*a.value.frame);
      break;
    case ActionKind::Filter:
      n.used_attributes = AttrSet::of(used_columns(*a.expr));
      n.all_attributes = in;
      break;
    case ActionKind::Project:
      n.used_attributes = AttrSet::of(key_set(a.names));
      {
        Schema s;
        s.names = a.names;
        if (in) {
          for (const auto& c : a.names) {
            auto it = in->types.find(c);
            if (it != in->types.end()) s.types[c] = it->second;
          }
        }
        n.all_attributes = s;
      }
      break;
    case ActionKind::SetColumn:
      n.used_attributes = AttrSet::of(used_columns(*a.expr));
      n.mod_attributes = AttrSet::of({a.column});
      if (in) {
        Schema s = *in;
        if (!std::count(s.names.begin(), s.names.end(), a.column)) s.names.push_back(a.column);
        s.types.erase(a.column);
        n.all_attributes = s;
      }
      break;
    case ActionKind::Drop:
      if (in) {
        Schema s = *in;
        for (const auto& c : a.names) remove_name(s, c);
        n.all_attributes = s;
      }
      break;
    case ActionKind::Rename: {
      std::set<std::string> from, to;
      for (const auto& [f, t] : a.mapping) {
        from.insert(f);
        to.insert(t);
      }
      n.used_attributes = AttrSet::of(from);
      if (in) {
        Schema s;
        for (const auto& c : in->names) {
          std::string name = c;
          for (const auto& [f, t] : a.mapping) {
            if (f == c) {
              name = t;
              break;
            }
          }
          s.names.push_back(name);
          auto it = in->types.find(c);
          if (it != in->types.end()) s.types[name] = it->second;
        }
        std::set<std::string> present;
        for (const auto& c : s.names) present.insert(c);
        std::set<std::string> mod;
        for (const auto& t : to) {
          if (present.count(t)) mod.insert(t);
        }
        n.mod_attributes = AttrSet::of(mod);
        n.all_attributes = s;
      } else {
        n.mod_attributes = AttrSet::of(to);
      }
      break;
    }
    case ActionKind::AsType:
      n.used_attributes = AttrSet::of(first_set(a.types));
      n.mod_attributes = AttrSet::of(first_set(a.types));
      if (in) {
        Schema s = *in;
        for (const auto& [c, t] : a.types) s.types[c] = t;
        n.all_attributes = s;
      }
      break;
    case ActionKind::FillNa:
      if (a.fill_all) {
        n.used_attributes = all_or_schema(in);
        n.mod_attributes = all_or_schema(in);
      } else {
        n.used_attributes = AttrSet::of(first_set(a.fill_columns));
        n.mod_attributes = AttrSet::of(first_set(a.fill_columns));
      }
      if (in) {
        Schema s = *in;
        s.types.clear();
        n.all_attributes = s;
      }
      break;
    case ActionKind::Round:
    case ActionKind::Abs: {
      if (in && in->types.size() == in->names.size()) {
        std::set<std::string> touched;
        for (const auto& c : in->names) {
          Dtype t = in->types.at(c);
          bool hit = a.kind == ActionKind::Abs ? t.numeric()
                                               : (t.tag == TypeTag::Float64 ||
                                                  (t.tag == TypeTag::Int64 && a.digits < 0));
          if (hit) touched.insert(c);
        }
        n.used_attributes = AttrSet::of(touched);
        n.mod_attributes = AttrSet::of(touched);
      } else {
        n.used_attributes = all_or_schema(in);
        n.mod_attributes = all_or_schema(in);
      }
      n.all_attributes = in;
      break;
    }
    case ActionKind::DropDuplicates:
      n.used_attributes = a.names.empty() ? all_or_schema(in) : AttrSet::of(key_set(a.names));
      n.all_attributes = in;
      break;
    case ActionKind::SortValues:
      n.used_attributes = AttrSet::of(key_set(a.names));
      n.all_attributes = in;
      break;
    case ActionKind::Head:
    case ActionKind::Identity: n.all_attributes = in; break;
    case ActionKind::Explode:
      n.used_attributes = AttrSet::of({a.column});
      n.mod_attributes = AttrSet::of({a.column});
      if (in) {
        Schema s = *in;
        s.types[a.column] = Dtype::text();
        n.all_attributes = s;
      }
      break;
    case ActionKind::Merge: {
      n.used_attributes = AttrSet::of(key_set(a.names));
      std::optional<Schema> right = input_schema(n, 1);
      if (in && right) {
        MergeNames mn = merge_names(in->names, right->names, a.names);
        Schema s;
        for (const auto& c : mn.left_out) s.names.push_back(c);
        for (const auto& c : mn.right_out) {
          if (!c.empty()) s.names.push_back(c);
        }
        n.mod_attributes = AttrSet::of(key_set(s.names));
        n.all_attributes = s;
      } else {
        n.mod_attributes = AttrSet::everything();
      }
      break;
    }
    case ActionKind::GroupByAgg: {
      std::set<std::string> used = key_set(a.names);
      Schema s;
      s.names = a.names;
      std::set<std::string> mod;
      for (const auto& g : a.aggs) {
        used.insert(g.column);
        s.names.push_back(g.output);
        mod.insert(g.output);
      }
      n.used_attributes = AttrSet::of(used);
      n.mod_attributes = AttrSet::of(mod);
      n.all_attributes = s;
      break;
    }
    case ActionKind::Reduce: n.used_attributes = AttrSet::of(used_columns(*a.expr)); break;
    case ActionKind::ScalarExpr: break;
    case ActionKind::Print: n.used_attributes = AttrSet::everything(); break;
    case ActionKind::Opaque:
      n.used_attributes = AttrSet::everything();
      n.mod_attributes = AttrSet::everything();
      break;
  }
}

std::string print_escape(std::int64_t uid) { return "$_#" + std::to_string(uid) + "$_#"; }

NodePtr TaskGraph::lazy_op(Action action, std::vector<NodePtr> inputs) {
  auto n = std::make_shared<Node>();
  n->uid = next_uid_++;
  n->action = std::move(action);
  n->sources = std::move(inputs);
  n->span = span_;
  derive_attributes(*n);
  created_.push_back(n);
  return n;
}

NodePtr TaskGraph::lazy_print(std::string text, std::vector<NodePtr> values) {
  Action a;
  a.kind = ActionKind::Print;
  a.text = std::move(text);
  if (last_print_) values.push_back(last_print_);
  NodePtr n = lazy_op(std::move(a), std::move(values));
  last_print_ = n;
  pending_prints_.push_back(n);
  return n;
}

NodePtr TaskGraph::source(Value v) {
  Action a;
  a.kind = ActionKind::Source;
  a.value = std::move(v);
  return lazy_op(std::move(a), {});
}

std::vector<NodePtr> topological_order(const std::vector<NodePtr>& roots) {
  std::vector<NodePtr> order;
  std::set<const Node*> done;
  std::set<const Node*> active;
  // Iterative post-order DFS; graphs can be deep after long scripts.
  struct Frame {
    NodePtr node;
    std::size_t next = 0;
  };
  for (const auto& r : roots) {
    if (!r || done.count(r.get())) continue;
    std::vector<Frame> stack{{r, 0}};
    active.insert(r.get());
    while (!stack.empty()) {
      Frame& top = stack.back();
      if (top.next < top.node->sources.size()) {
        NodePtr s = top.node->sources[top.next++];
        if (done.count(s.get())) continue;
        if (active.count(s.get())) throw InternalError("task graph contains a cycle");
        active.insert(s.get());
        stack.push_back({s, 0});
        continue;
      }
      active.erase(top.node.get());
      done.insert(top.node.get());
      order.push_back(top.node);
      stack.pop_back();
    }
  }
  return order;
}

std::vector<NodePtr> reachable(const std::vector<NodePtr>& roots) {
  std::vector<NodePtr> out = topological_order(roots);
  std::sort(out.begin(), out.end(), [](const NodePtr& a, const NodePtr& b) { return a->uid < b->uid; });
  return out;
}

std::map<const Node*, std::vector<Node*>> consumers_of(const std::vector<NodePtr>& nodes) {
  std::map<const Node*, std::vector<Node*>> out;
  for (const auto& n : nodes) out[n.get()];
  for (const auto& n : nodes) {
    for (const auto& s : n->sources) {
      auto& list = out[s.get()];
      if (std::find(list.begin(), list.end(), n.get()) == list.end()) list.push_back(n.get());
    }
  }
  return out;
}

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += v[i];
  }
  return out;
}

}  // namespace

std::string node_label(const Node& n) {
  const Action& a = n.action;
  std::string out(action_name(a.kind));
  switch (a.kind) {
    case ActionKind::ReadCsv:
      out += " " + a.path;
      if (a.csv.usecols) out += " usecols=[" + join(*a.csv.usecols) + "]";
      break;
    case ActionKind::Source:
      out += a.value.is_frame() ? " frame" : (a.value.is_scalar() ? " " + format_cell(a.value.scalar) : " none");
      break;
    case ActionKind::Filter:
    case ActionKind::Reduce:
    case ActionKind::ScalarExpr: out += " " + to_string(*a.expr); break;
    case ActionKind::SetColumn: out += " " + a.column + " = " + to_string(*a.expr); break;
    case ActionKind::Project:
    case ActionKind::Drop:
    case ActionKind::DropDuplicates:
    case ActionKind::SortValues: out += " [" + join(a.names) + "]"; break;
    case ActionKind::Rename: {
      std::vector<std::string> parts;
      for (const auto& [f, t] : a.mapping) parts.push_back(f + "->" + t);
      out += " {" + join(parts) + "}";
      break;
    }
    case ActionKind::AsType: {
      std::vector<std::string> parts;
      for (const auto& [c, t] : a.types) parts.push_back(c + ":" + std::string(dtype_name(t)));
      out += " {" + join(parts) + "}";
      break;
    }
    case ActionKind::FillNa:
      if (a.fill_all) out += " " + format_cell(*a.fill_all);
      for (const auto& [c, v] : a.fill_columns) out += " " + c + "=" + format_cell(v);
      break;
    case ActionKind::Round: out += " " + std::to_string(a.digits); break;
    case ActionKind::Head: out += " " + std::to_string(a.count); break;
    case ActionKind::Explode: out += " " + a.column; break;
    case ActionKind::Merge: out += " " + std::string(join_name(a.how)) + " on [" + join(a.names) + "]"; break;
    case ActionKind::GroupByAgg: {
      std::vector<std::string> parts;
      for (const auto& g : a.aggs) parts.push_back(g.column + "." + std::string(agg_name(g.func)));
      out += " [" + join(a.names) + "] " + join(parts);
      break;
    }
    case ActionKind::Print:
    case ActionKind::Opaque: out += " " + a.text; break;
    case ActionKind::Abs:
    case ActionKind::Identity: break;
  }
  return out;
}

namespace {

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out;
}

}  // namespace

std::string to_dot(const std::vector<NodePtr>& roots) {
  std::vector<NodePtr> nodes = reachable(roots);
  std::ostringstream out;
  out << "digraph {\n";
  for (const auto& n : nodes) {
    out << "  n" << n->uid << " [label=\"" << n->uid << ": " << dot_escape(node_label(*n)) << "\""
        << (n->useful ? "" : ", color=red, style=dashed") << "];\n";
  }
  for (const auto& n : nodes) {
    for (const auto& s : n->sources) out << "  n" << n->uid << " -> n" << s->uid << ";\n";
  }
  out << "}\n";
  return out.str();
}

std::string dump_graph(const std::vector<NodePtr>& roots) {
  std::ostringstream out;
  for (const auto& n : reachable(roots)) {
    out << n->uid << ' ' << node_label(*n) << " sources=[";
    for (std::size_t i = 0; i < n->sources.size(); ++i) out << (i ? "," : "") << n->sources[i]->uid;
    out << "] used=" << n->used_attributes.to_string() << " mod=" << n->mod_attributes.to_string() << '\n';
  }
  return out.str();
}

ClonedGraph clone_graph(const std::vector<NodePtr>& roots, const std::map<std::int64_t, Value>& cached) {
  ClonedGraph g;
  for (const auto& n : topological_order(roots)) {
    auto copy = std::make_shared<Node>();
    auto hit = cached.find(n->uid);
    copy->uid = n->uid;
    if (hit != cached.end()) {
      copy->action.kind = ActionKind::Source;
      copy->action.value = hit->second;
      derive_attributes(*copy);
      if (!hit->second.is_frame()) copy->all_attributes = n->all_attributes;
    } else {
      copy->action = n->action;
      for (const auto& s : n->sources) copy->sources.push_back(g.copies.at(s.get()));
      copy->all_attributes = n->all_attributes;
      copy->used_attributes = n->used_attributes;
      copy->mod_attributes = n->mod_attributes;
    }
    copy->disjunction_below = n->disjunction_below;
    copy->span = n->span;
    g.copies[n.get()] = copy;
  }
  for (const auto& r : roots) g.roots.push_back(g.copies.at(r.get()));
  return g;
}

}  // namespace lfp
