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

#include "lfp/rewrite.hpp"

#include <algorithm>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>

#include "lfp/csv.hpp"
#include "lfp/dataflow.hpp"
#include "lfp/errors.hpp"

namespace lfp::rewrite {

namespace sc = script;
namespace df = dataflow;

const std::vector<std::string>& static_pass_names() {
  static const std::vector<std::string> names = {"colsel", "dropcols", "lazyprint"};
  return names;
}

namespace {

using Body = std::vector<sc::StmtPtr>;

bool is_read(const sc::Expr& e) {
  return e.kind == sc::ExprKind::Call && e.object->kind == sc::ExprKind::Name && e.object->text == "read_csv";
}

std::optional<std::vector<std::string>> string_list(const sc::Expr& e) {
  if (e.kind != sc::ExprKind::List) return std::nullopt;
  std::vector<std::string> out;
  for (const auto& x : e.items) {
    if (x->kind != sc::ExprKind::Str) return std::nullopt;
    out.push_back(x->text);
  }
  return out;
}

sc::ExprPtr string_list_expr(const std::vector<std::string>& names) {
  std::vector<sc::ExprPtr> items;
  for (const auto& n : names) items.push_back(sc::str(n));
  return sc::list_of(std::move(items));
}

/// Keyword argument slot, falling back to a positional one.
sc::ExprPtr* arg_slot(sc::Expr& call, std::size_t pos, const std::string& name) {
  for (auto& k : call.keywords) {
    if (k.name == name) return &k.value;
  }
  return pos < call.items.size() ? &call.items[pos] : nullptr;
}

void walk_bodies(Body& body, const std::function<void(Body&, std::size_t)>& fn) {
  for (std::size_t i = 0; i < body.size(); ++i) {
    fn(body, i);
    walk_bodies(body[i]->body, fn);
    walk_bodies(body[i]->orelse, fn);
  }
}

void walk_exprs(const sc::ExprPtr& e, const std::function<void(const sc::ExprPtr&)>& fn) {
  if (!e) return;
  fn(e);
  walk_exprs(e->object, fn);
  walk_exprs(e->rhs, fn);
  for (const auto& x : e->items) walk_exprs(x, fn);
  for (const auto& x : e->values) walk_exprs(x, fn);
  for (const auto& k : e->keywords) walk_exprs(k.value, fn);
  for (const auto& p : e->parts) walk_exprs(p.expr, fn);
}

void walk_stmt_exprs(const sc::Stmt& s, const std::function<void(const sc::ExprPtr&)>& fn) {
  walk_exprs(s.value, fn);
  for (const auto& a : s.args) walk_exprs(a, fn);
}

std::set<std::string> assigned_names(const sc::Program& p) {
  std::set<std::string> out;
  std::function<void(const Body&)> visit = [&](const Body& body) {
    for (const auto& s : body) {
      if (s->kind == sc::StmtKind::Assign || s->kind == sc::StmtKind::SetItem) out.insert(s->target);
      visit(s->body);
      visit(s->orelse);
    }
  };
  visit(p.body);
  return out;
}

std::string resolve(const std::string& path, const RewriteOptions& o) {
  if (o.base_dir.empty() || std::filesystem::path(path).is_absolute()) return path;
  return (std::filesystem::path(o.base_dir) / path).lexically_normal().string();
}

sc::StmtPtr make_assign(const std::string& target, sc::ExprPtr value, SourceSpan span) {
  auto s = std::make_shared<sc::Stmt>();
  s->kind = sc::StmtKind::Assign;
  s->target = target;
  s->value = std::move(value);
  s->span = span;
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Column selection

sc::Program rewrite_column_selection(const sc::Program& in, const RewriteOptions& options) {
  sc::Program p = sc::deep_copy(in);
  df::Cfg cfg = df::build_cfg(p);
  df::LivenessFact facts = df::solve_liveness(cfg, {false, options.externals});
  std::set<std::string> taken = assigned_names(p);
  int next_k = 0;

  struct Edit {
    Body* body;
    std::size_t index;
  };
  std::vector<Edit> reads;
  walk_bodies(p.body, [&](Body& body, std::size_t i) {
    const sc::Stmt& s = *body[i];
    if (s.kind == sc::StmtKind::Assign && is_read(*s.value)) reads.push_back({&body, i});
  });

  // Later insertions shift indices, so edit from the back.
  std::vector<std::pair<Edit, sc::StmtPtr>> inserts;
  std::map<const sc::Stmt*, int> read_number;
  for (const auto& r : reads) read_number[(*r.body)[r.index].get()] = next_k++;

  for (const auto& r : reads) {
    sc::Stmt& s = *(*r.body)[r.index];
    auto live_it = facts.stmt_out[&s].vars.find(s.target);
    if (live_it == facts.stmt_out[&s].vars.end() || live_it->second.all) continue;
    std::set<std::string> live = live_it->second.cols;
    sc::Expr& call = *s.value;

    std::optional<std::vector<std::string>> header;
    if (sc::ExprPtr* path = arg_slot(call, 0, "filepath_or_buffer"); path && (*path)->kind == sc::ExprKind::Str) {
      try {
        header = read_header(resolve((*path)->text, options));
      } catch (const Error&) {
        header.reset();
      }
    }

    sc::ExprPtr* slot = arg_slot(call, 1, "usecols");
    std::optional<std::vector<std::string>> existing;
    sc::Stmt* list_stmt = nullptr;
    if (slot && (*slot)->kind != sc::ExprKind::None) {
      if ((*slot)->kind == sc::ExprKind::Name && r.index > 0) {
        sc::Stmt& prev = *(*r.body)[r.index - 1];
        if (prev.kind == sc::StmtKind::Assign && prev.target == (*slot)->text) {
          existing = string_list(*prev.value);
          if (existing) list_stmt = &prev;
        }
      } else {
        existing = string_list(**slot);
      }
      if (!existing) continue;
    }

    std::vector<std::string> order;
    if (header) {
      order = *header;
    } else if (existing) {
      order = *existing;
    } else {
      order.assign(live.begin(), live.end());
    }
    std::vector<std::string> cols;
    for (const auto& c : order) {
      if (!live.count(c)) continue;
      if (existing && std::find(existing->begin(), existing->end(), c) == existing->end()) continue;
      if (std::find(cols.begin(), cols.end(), c) == cols.end()) cols.push_back(c);
    }
    if (cols.empty()) continue;
    if (existing && std::set<std::string>(cols.begin(), cols.end()) ==
                        std::set<std::string>(existing->begin(), existing->end())) {
      continue;
    }
    if (list_stmt) {
      list_stmt->value = string_list_expr(cols);
      continue;
    }
    int k = read_number[&s];
    std::string var = "SO_columns_" + std::to_string(k);
    while (taken.count(var)) var = "SO_columns_" + std::to_string(++k);
    taken.insert(var);
    if (slot) {
      *slot = sc::name(var);
    } else {
      call.keywords.push_back({"usecols", sc::name(var)});
    }
    inserts.push_back({r, make_assign(var, string_list_expr(cols), s.span)});
  }
  for (auto it = inserts.rbegin(); it != inserts.rend(); ++it) {
    Body& body = *it->first.body;
    body.insert(body.begin() + static_cast<std::ptrdiff_t>(it->first.index), it->second);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Dropped columns

namespace {

/// Columns a frame variable can possibly hold; nullopt when unknown.
using Cols = std::optional<std::set<std::string>>;

struct Env {
  std::map<std::string, Cols> frames;
  std::map<std::string, std::vector<std::string>> lists;

  bool operator==(const Env&) const = default;
};

Env join(const Env& a, const Env& b) {
  Env out;
  for (const auto& [v, c] : a.frames) {
    auto it = b.frames.find(v);
    if (it == b.frames.end() || !c || !it->second) {
      out.frames[v] = std::nullopt;
      continue;
    }
    std::set<std::string> u = *c;
    u.insert(it->second->begin(), it->second->end());
    out.frames[v] = u;
  }
  for (const auto& [v, c] : b.frames) {
    if (!a.frames.count(v)) out.frames[v] = std::nullopt;
  }
  for (const auto& [v, l] : a.lists) {
    auto it = b.lists.find(v);
    if (it != b.lists.end() && it->second == l) out.lists[v] = l;
  }
  return out;
}

class PossibleColumns {
 public:
  /// Environment before each statement, joined over every visit.
  std::map<const sc::Stmt*, Env> before;

  void run(const Body& body, Env& env) {
    for (const auto& s : body) exec(*s, env);
  }

  Cols eval(const sc::Expr& e, const Env& env) const {
    switch (e.kind) {
      case sc::ExprKind::Name: {
        auto it = env.frames.find(e.text);
        return it == env.frames.end() ? std::nullopt : it->second;
      }
      case sc::ExprKind::Index: {
        if (std::optional<std::vector<std::string>> names = string_list(*e.rhs)) {
          return std::set<std::string>(names->begin(), names->end());
        }
        if (e.rhs->kind == sc::ExprKind::Str) return std::nullopt;
        return eval(*e.object, env);
      }
      case sc::ExprKind::Call: {
        if (is_read(e)) {
          const sc::Expr* u = sc::keyword(e, "usecols");
          if (!u && e.items.size() > 1) u = e.items[1].get();
          if (!u) return std::nullopt;
          if (std::optional<std::vector<std::string>> names = string_list(*u)) {
            return std::set<std::string>(names->begin(), names->end());
          }
          if (u->kind == sc::ExprKind::Name) {
            auto it = env.lists.find(u->text);
            if (it != env.lists.end()) return std::set<std::string>(it->second.begin(), it->second.end());
          }
          return std::nullopt;
        }
        if (e.object->kind != sc::ExprKind::Attr) return std::nullopt;
        const std::string& m = e.object->text;
        static const std::set<std::string> same = {"head",  "sort_values", "drop_duplicates", "fillna", "astype",
                                                   "round", "abs",         "explode",         "compute"};
        if (same.count(m)) return eval(*e.object->object, env);
        if (m == "drop") {
          Cols base = eval(*e.object->object, env);
          const sc::Expr* a = sc::keyword(e, "columns");
          if (!a && !e.items.empty()) a = e.items[0].get();
          std::optional<std::vector<std::string>> names = a ? string_list(*a) : std::nullopt;
          if (!base || !names) return base;
          for (const auto& n : *names) base->erase(n);
          return base;
        }
        if (m == "rename") {
          Cols base = eval(*e.object->object, env);
          const sc::Expr* a = sc::keyword(e, "columns");
          if (!a && !e.items.empty()) a = e.items[0].get();
          if (!base || !a || a->kind != sc::ExprKind::Dict) return std::nullopt;
          std::set<std::string> out;
          for (const auto& c : *base) {
            std::string to = c;
            for (std::size_t k = 0; k < a->items.size(); ++k) {
              if (a->items[k]->kind != sc::ExprKind::Str || a->values[k]->kind != sc::ExprKind::Str) return std::nullopt;
              if (a->items[k]->text == c) to = a->values[k]->text;
            }
            out.insert(to);
          }
          return out;
        }
        return std::nullopt;
      }
      default: return std::nullopt;
    }
  }

 private:
  void record(const sc::Stmt& s, const Env& env) {
    auto it = before.find(&s);
    if (it == before.end()) {
      before.emplace(&s, env);
    } else {
      it->second = join(it->second, env);
    }
  }

  void exec(const sc::Stmt& s, Env& env) {
    record(s, env);
    switch (s.kind) {
      case sc::StmtKind::Assign: {
        Cols c = eval(*s.value, env);
        std::optional<std::vector<std::string>> l = string_list(*s.value);
        env.frames[s.target] = c;
        if (l) {
          env.lists[s.target] = *l;
        } else {
          env.lists.erase(s.target);
        }
        break;
      }
      case sc::StmtKind::SetItem: {
        auto it = env.frames.find(s.target);
        if (it != env.frames.end() && it->second) it->second->insert(s.column);
        break;
      }
      case sc::StmtKind::If: {
        Env a = env;
        Env b = env;
        run(s.body, a);
        run(s.orelse, b);
        env = join(a, b);
        break;
      }
      case sc::StmtKind::While: {
        for (int guard = 0; guard < 1000; ++guard) {
          Env body = env;
          run(s.body, body);
          Env next = join(env, body);
          if (next == env) break;
          env = std::move(next);
        }
        break;
      }
      default: break;
    }
  }
};

sc::ExprPtr prune_drops(const sc::ExprPtr& e, const PossibleColumns& pc, const Env& env) {
  if (!e) return e;
  e->object = prune_drops(e->object, pc, env);
  e->rhs = prune_drops(e->rhs, pc, env);
  for (auto& x : e->items) x = prune_drops(x, pc, env);
  for (auto& x : e->values) x = prune_drops(x, pc, env);
  for (auto& k : e->keywords) k.value = prune_drops(k.value, pc, env);
  for (auto& part : e->parts) part.expr = prune_drops(part.expr, pc, env);
  if (e->kind != sc::ExprKind::Call || e->object->kind != sc::ExprKind::Attr || e->object->text != "drop") return e;
  sc::ExprPtr* slot = arg_slot(*e, 0, "columns");
  if (!slot) return e;
  std::optional<std::vector<std::string>> names = string_list(**slot);
  Cols possible = pc.eval(*e->object->object, env);
  if (!names || !possible) return e;
  std::vector<std::string> keep;
  for (const auto& n : *names) {
    if (possible->count(n)) keep.push_back(n);
  }
  if (keep.size() == names->size()) return e;
  if (keep.empty()) return e->object->object;
  *slot = string_list_expr(keep);
  return e;
}

/// Drops `v = v` left behind by a removed drop; a block keeps at least one statement.
void remove_self_assignments(Body& body) {
  for (auto& s : body) {
    remove_self_assignments(s->body);
    remove_self_assignments(s->orelse);
  }
  Body kept;
  for (auto& s : body) {
    bool self = s->kind == sc::StmtKind::Assign && s->value->kind == sc::ExprKind::Name && s->value->text == s->target;
    if (!self) kept.push_back(s);
  }
  if (kept.empty() && !body.empty()) kept.push_back(body.front());
  body = std::move(kept);
}

}  // namespace

sc::Program rewrite_dropped_columns(const sc::Program& in, const RewriteOptions&) {
  sc::Program p = sc::deep_copy(in);
  PossibleColumns pc;
  Env env;
  pc.run(p.body, env);
  walk_bodies(p.body, [&](Body& body, std::size_t i) {
    sc::Stmt& s = *body[i];
    auto it = pc.before.find(&s);
    if (it == pc.before.end()) return;
    s.value = prune_drops(s.value, pc, it->second);
    for (auto& a : s.args) a = prune_drops(a, pc, it->second);
  });
  remove_self_assignments(p.body);
  return p;
}

// ---------------------------------------------------------------------------
// Lazy printing and forced computation

namespace {

bool has_groupby(const sc::Expr& e) {
  for (const sc::Expr* x = &e; x; x = x->object.get()) {
    if (x->kind == sc::ExprKind::Call && x->object->kind == sc::ExprKind::Attr && x->object->text == "groupby") {
      return true;
    }
  }
  return false;
}

/// Whether e evaluates to a frame or a column of one.
bool frame_like(const sc::Expr& e, const std::set<std::string>& frames) {
  switch (e.kind) {
    case sc::ExprKind::Name: return frames.count(e.text) > 0;
    case sc::ExprKind::Index: return frame_like(*e.object, frames) || has_groupby(*e.object);
    case sc::ExprKind::Attr: return e.text != "dt" && frame_like(*e.object, frames);
    case sc::ExprKind::Binary: return frame_like(*e.object, frames) || frame_like(*e.rhs, frames);
    case sc::ExprKind::Unary: return frame_like(*e.object, frames);
    case sc::ExprKind::Call: {
      if (is_read(e)) return true;
      if (e.object->kind != sc::ExprKind::Attr) return false;
      const std::string& m = e.object->text;
      static const std::set<std::string> reductions = {"sum", "mean", "max", "min", "count"};
      if (reductions.count(m)) return has_groupby(*e.object->object);
      if (m == "size" || m == "agg") return true;
      return frame_like(*e.object->object, frames);
    }
    default: return false;
  }
}

std::set<std::string> frame_variables(const sc::Program& p) {
  std::set<std::string> frames;
  for (bool changed = true; changed;) {
    changed = false;
    std::function<void(const Body&)> visit = [&](const Body& body) {
      for (const auto& s : body) {
        if (s->kind == sc::StmtKind::Assign && !frames.count(s->target) && frame_like(*s->value, frames)) {
          frames.insert(s->target);
          changed = true;
        }
        visit(s->body);
        visit(s->orelse);
      }
    };
    visit(p.body);
  }
  return frames;
}

bool any_print(const Body& body) {
  for (const auto& s : body) {
    if (s->kind == sc::StmtKind::Print || any_print(s->body) || any_print(s->orelse)) return true;
  }
  return false;
}

}  // namespace

sc::Program rewrite_lazy_io(const sc::Program& in, const RewriteOptions& options) {
  sc::Program p = sc::deep_copy(in);
  std::set<std::string> assigned = assigned_names(p);
  std::set<std::string> frames = frame_variables(p);
  df::Cfg cfg = df::build_cfg(p);
  df::FrameFacts live = df::solve_live_frames(cfg);

  auto ext_module = [&](const sc::Expr& e) -> const sc::Expr* {
    if (e.kind != sc::ExprKind::Call || e.object->kind != sc::ExprKind::Attr) return nullptr;
    const sc::Expr& base = *e.object->object;
    if (base.kind != sc::ExprKind::Name || assigned.count(base.text)) return nullptr;
    if (base.text == "read_csv" || base.text == "len") return nullptr;
    return &base;
  };

  walk_bodies(p.body, [&](Body& body, std::size_t i) {
    sc::Stmt& s = *body[i];
    walk_stmt_exprs(s, [&](const sc::ExprPtr& e) {
      const sc::Expr* module = ext_module(*e);
      if (!module) return;
      if (!options.externals.count(module->text)) throw UnknownExternal(module->text, module->span);
      std::vector<sc::ExprPtr> hints;
      for (const auto& v : live.stmt_out[&s]) {
        if (frames.count(v)) hints.push_back(sc::name(v));
      }
      auto wrap = [&](sc::ExprPtr& arg) {
        if (!frame_like(*arg, frames)) return;
        if (arg->kind == sc::ExprKind::Call && arg->object->kind == sc::ExprKind::Attr &&
            arg->object->text == "compute") {
          return;
        }
        std::vector<sc::ExprPtr> copy;
        for (const auto& h : hints) copy.push_back(sc::deep_copy(h));
        arg = sc::call(sc::attr(arg, "compute"), {}, {{"live_df", sc::list_of(std::move(copy))}});
      };
      for (auto& a : e->items) wrap(a);
      for (auto& k : e->keywords) wrap(k.value);
    });
  });

  bool printing = any_print(p.body);
  if (p.body.empty() || p.body.front()->kind != sc::StmtKind::Use || p.body.front()->target != "lazy_print") {
    auto use = std::make_shared<sc::Stmt>();
    use->kind = sc::StmtKind::Use;
    use->target = "lazy_print";
    p.body.insert(p.body.begin(), use);
  }
  if (printing && p.body.back()->kind != sc::StmtKind::Flush) {
    auto flush = std::make_shared<sc::Stmt>();
    flush->kind = sc::StmtKind::Flush;
    p.body.push_back(flush);
  }
  return p;
}

sc::Program rewrite_program(const sc::Program& p, const std::set<std::string>& passes, const RewriteOptions& options) {
  sc::Program out = sc::deep_copy(p);
  if (passes.count("colsel")) out = rewrite_column_selection(out, options);
  if (passes.count("dropcols")) out = rewrite_dropped_columns(out, options);
  if (passes.count("lazyprint")) out = rewrite_lazy_io(out, options);
  return out;
}

}  // namespace lfp::rewrite
