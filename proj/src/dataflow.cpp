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

#include "lfp/dataflow.hpp"

#include <algorithm>
#include <deque>

#include "lfp/errors.hpp"

namespace lfp::dataflow {

namespace sc = script;

// ---------------------------------------------------------------------------
// Sets

void ColSet::add(const ColSet& o) {
  if (all && o.all) {
    std::set<std::string> keep;
    for (const auto& c : cols) {
      if (o.cols.count(c)) keep.insert(c);
    }
    cols = std::move(keep);
  } else if (all) {
    for (const auto& c : o.cols) cols.erase(c);
  } else if (o.all) {
    std::set<std::string> excl = o.cols;
    for (const auto& c : cols) excl.erase(c);
    all = true;
    cols = std::move(excl);
  } else {
    cols.insert(o.cols.begin(), o.cols.end());
  }
}

void ColSet::remove(const std::string& c) {
  if (all) {
    cols.insert(c);
  } else {
    cols.erase(c);
  }
}

std::string ColSet::to_string() const {
  std::string out = all ? "τ" : "{";
  if (all && cols.empty()) return out;
  if (all) out += "-{";
  bool first = true;
  for (const auto& c : cols) {
    out += (first ? "" : ",") + c;
    first = false;
  }
  return out + "}";
}

bool AttrFacts::live(const std::string& var, const std::string& col) const {
  auto it = vars.find(var);
  return it != vars.end() && it->second.contains(col);
}

void AttrFacts::add(const std::string& var, const ColSet& c) {
  if (c.empty()) return;
  auto it = vars.find(var);
  if (it == vars.end()) {
    vars.emplace(var, c);
  } else {
    it->second.add(c);
  }
}

void AttrFacts::add(const AttrFacts& o) {
  for (const auto& [v, c] : o.vars) add(v, c);
}

std::string AttrFacts::to_string() const {
  std::string out;
  for (const auto& [v, c] : vars) {
    if (!out.empty()) out += ' ';
    if (c.all) {
      out += v + "." + c.to_string();
    } else {
      bool first = true;
      for (const auto& col : c.cols) {
        out += (first ? "" : " ") + v + "." + col;
        first = false;
      }
    }
  }
  return out.empty() ? "-" : out;
}

// ---------------------------------------------------------------------------
// CFG

namespace {

class CfgBuilder {
 public:
  Cfg build(const sc::Program& p) {
    cfg_.entry = fresh();
    int cur = fresh();
    edge(cfg_.entry, cur);
    cur = block(p.body, cur);
    cfg_.exit = fresh();
    edge(cur, cfg_.exit);
    return std::move(cfg_);
  }

 private:
  int fresh() {
    BasicBlock b;
    b.id = static_cast<int>(cfg_.blocks.size());
    cfg_.blocks.push_back(b);
    return b.id;
  }

  void edge(int from, int to) {
    cfg_.blocks[from].successors.push_back(to);
    cfg_.blocks[to].predecessors.push_back(from);
  }

  int block(const std::vector<sc::StmtPtr>& body, int cur) {
    for (const auto& st : body) {
      if (st->kind == sc::StmtKind::If) {
        cfg_.blocks[cur].statements.push_back(st.get());
        int then_b = fresh();
        edge(cur, then_b);
        int then_end = block(st->body, then_b);
        int else_end = cur;
        if (!st->orelse.empty()) {
          int else_b = fresh();
          edge(cur, else_b);
          else_end = block(st->orelse, else_b);
        }
        int join = fresh();
        edge(then_end, join);
        edge(else_end, join);
        cur = join;
      } else if (st->kind == sc::StmtKind::While) {
        int header = fresh();
        edge(cur, header);
        cfg_.blocks[header].statements.push_back(st.get());
        int body_b = fresh();
        edge(header, body_b);
        int body_end = block(st->body, body_b);
        edge(body_end, header);
        int after = fresh();
        edge(header, after);
        cur = after;
      } else {
        cfg_.blocks[cur].statements.push_back(st.get());
      }
    }
    return cur;
  }

  Cfg cfg_;
};

}  // namespace

Cfg build_cfg(const sc::Program& p) { return CfgBuilder().build(p); }

// ---------------------------------------------------------------------------
// Lineage and statement effects

ColSet Lineage::map_back(ColSet live) const {
  for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
    const LineageStep& s = *it;
    switch (s.kind) {
      case LineageStep::Kind::Restrict: {
        std::set<std::string> out;
        for (const auto& n : s.names) {
          if (live.contains(n)) out.insert(n);
        }
        live = ColSet::of(std::move(out));
        break;
      }
      case LineageStep::Kind::Drop:
        if (live.all) {
          live.cols.insert(s.names.begin(), s.names.end());
        } else {
          for (const auto& n : s.names) live.cols.erase(n);
        }
        break;
      case LineageStep::Kind::Rename: {
        if (live.all) {
          live = ColSet::everything();
          break;
        }
        std::set<std::string> out;
        for (const auto& c : live.cols) {
          auto to = std::find_if(s.mapping.begin(), s.mapping.end(), [&](const auto& m) { return m.second == c; });
          if (to != s.mapping.end()) {
            out.insert(to->first);
            continue;
          }
          bool renamed_away = std::any_of(s.mapping.begin(), s.mapping.end(), [&](const auto& m) { return m.first == c; });
          if (!renamed_away) out.insert(c);
        }
        live = ColSet::of(std::move(out));
        break;
      }
    }
  }
  return live;
}

AttrFacts StmtEffect::apply(const AttrFacts& out) const {
  AttrFacts in = out;
  std::optional<ColSet> through;
  if (lineage && kill_var) {
    auto it = out.vars.find(*kill_var);
    if (it != out.vars.end()) through = lineage->map_back(it->second);
  }
  if (kill_var) in.vars.erase(*kill_var);
  if (kill_col) {
    auto it = in.vars.find(kill_col->first);
    if (it != in.vars.end()) {
      it->second.remove(kill_col->second);
      if (it->second.empty()) in.vars.erase(it);
    }
  }
  in.add(gen);
  if (through) in.add(lineage->source, *through);
  return in;
}

namespace {

const std::set<std::string>& identity_methods() {
  static const std::set<std::string> m = {"head", "sort_values", "drop_duplicates", "fillna", "astype",
                                          "round", "abs", "explode", "compute"};
  return m;
}

const std::set<std::string>& inspection_methods() {
  static const std::set<std::string> m = {"head", "info", "describe"};
  return m;
}

bool is_agg_method(const std::string& m) {
  return m == "sum" || m == "mean" || m == "max" || m == "min" || m == "count" || m == "agg" || m == "size";
}

/// What an expression reads, and which variable its frame result derives from.
struct Info {
  AttrFacts refs;
  std::optional<Lineage> lineage;
  bool inspection = false;
  bool group = false;
  std::vector<std::string> keys;
  std::optional<std::vector<std::string>> group_cols;
};

class Analyzer {
 public:
  explicit Analyzer(const AnalysisOptions& o) : o_(o) {}

  /// The value is consumed whole.
  void sink(const Info& i, AttrFacts& out) const {
    out.add(i.refs);
    if (i.inspection && o_.inspection_heuristic) return;
    if (i.lineage) out.add(i.lineage->source, i.lineage->map_back(ColSet::everything()));
  }

  void sink(const sc::Expr& e, AttrFacts& out) { sink(analyze(e), out); }

  Info analyze(const sc::Expr& e) {
    Info i;
    switch (e.kind) {
      case sc::ExprKind::Name:
        if (!o_.externals.count(e.text)) i.lineage = Lineage{e.text, {}};
        return i;
      case sc::ExprKind::Int:
      case sc::ExprKind::Float:
      case sc::ExprKind::Str:
      case sc::ExprKind::Bool:
      case sc::ExprKind::None: return i;
      case sc::ExprKind::FStr:
        for (const auto& p : e.parts) {
          if (p.expr) sink(*p.expr, i.refs);
        }
        return i;
      case sc::ExprKind::List:
      case sc::ExprKind::Dict:
        for (const auto& x : e.items) sink(*x, i.refs);
        for (const auto& x : e.values) sink(*x, i.refs);
        return i;
      case sc::ExprKind::Binary:
        sink(*e.object, i.refs);
        sink(*e.rhs, i.refs);
        return i;
      case sc::ExprKind::Unary: sink(*e.object, i.refs); return i;
      case sc::ExprKind::Attr: {
        Info base = analyze(*e.object);
        if (base.group) {
          base.group_cols = std::vector<std::string>{e.text};
          return base;
        }
        return column(base, e.text);
      }
      case sc::ExprKind::Index: {
        Info base = analyze(*e.object);
        const sc::Expr& key = *e.rhs;
        std::optional<std::vector<std::string>> names = string_list(key);
        if (base.group) {
          if (key.kind == sc::ExprKind::Str) {
            base.group_cols = std::vector<std::string>{key.text};
          } else if (names) {
            base.group_cols = *names;
          } else {
            sink(key, base.refs);
            base.group_cols.reset();
          }
          return base;
        }
        if (key.kind == sc::ExprKind::Str) return column(base, key.text);
        if (names) {
          base.inspection = false;
          // projecting a missing column fails, so every named column is used
          use_columns(base, &key);
          if (base.lineage) base.lineage->steps.push_back({LineageStep::Kind::Restrict, *names, {}});
          return base;
        }
        sink(key, base.refs);
        base.inspection = false;
        return base;
      }
      case sc::ExprKind::Call: return call(e);
    }
    return i;
  }

 private:
  static std::optional<std::vector<std::string>> string_list(const sc::Expr& e) {
    if (e.kind == sc::ExprKind::Str) return std::vector<std::string>{e.text};
    if (e.kind != sc::ExprKind::List) return std::nullopt;
    std::vector<std::string> out;
    for (const auto& x : e.items) {
      if (x->kind != sc::ExprKind::Str) return std::nullopt;
      out.push_back(x->text);
    }
    return out;
  }

  static const sc::Expr* arg(const sc::Expr& call, std::size_t i, const std::string& name) {
    if (const sc::Expr* k = sc::keyword(call, name)) return k;
    return i < call.items.size() ? call.items[i].get() : nullptr;
  }

  Info column(const Info& base, const std::string& c) const {
    Info i;
    i.refs = base.refs;
    if (base.lineage) i.refs.add(base.lineage->source, base.lineage->map_back(ColSet::of({c})));
    return i;
  }

  /// Sinks every argument except those listed in `skip`.
  void sink_args(const sc::Expr& call, AttrFacts& out, const std::set<std::string>& skip = {}) {
    for (const auto& a : call.items) sink(*a, out);
    for (const auto& k : call.keywords) {
      if (!skip.count(k.name)) sink(*k.value, out);
    }
  }

  /// Columns named by a literal argument, else a whole-frame use.
  void use_columns(Info& base, const sc::Expr* a) {
    if (!a) return;
    std::optional<std::vector<std::string>> names = string_list(*a);
    if (!names) {
      sink(*a, base.refs);
      if (base.lineage) base.refs.add(base.lineage->source, base.lineage->map_back(ColSet::everything()));
      return;
    }
    if (base.lineage) {
      base.refs.add(base.lineage->source,
                    base.lineage->map_back(ColSet::of(std::set<std::string>(names->begin(), names->end()))));
    }
  }

  Info call(const sc::Expr& e) {
    Info i;
    const sc::Expr& callee = *e.object;
    if (callee.kind == sc::ExprKind::Name) {
      if (callee.text == "len" && e.items.size() == 1 && e.keywords.empty()) {
        // the row count does not depend on which columns are present
        i.refs.add(analyze(*e.items[0]).refs);
        return i;
      }
      sink_args(e, i.refs);
      return i;
    }
    if (callee.kind != sc::ExprKind::Attr) {
      sink(callee, i.refs);
      sink_args(e, i.refs);
      return i;
    }
    const std::string& m = callee.text;
    if (callee.object->kind == sc::ExprKind::Name && o_.externals.count(callee.object->text)) {
      sink_args(e, i.refs);
      return i;
    }
    Info base = analyze(*callee.object);
    if (base.group) return group_call(base, e, m);
    if (m == "groupby") {
      const sc::Expr* by = arg(e, 0, "by");
      std::optional<std::vector<std::string>> keys = by ? string_list(*by) : std::nullopt;
      if (!keys) {
        sink(base, i.refs);
        sink_args(e, i.refs);
        return i;
      }
      base.group = true;
      base.keys = *keys;
      base.group_cols.reset();
      base.inspection = false;
      return base;
    }
    if (m == "rename" || m == "drop") {
      const sc::Expr* a = arg(e, 0, "columns");
      LineageStep step;
      bool ok = false;
      if (m == "rename" && a && a->kind == sc::ExprKind::Dict) {
        step.kind = LineageStep::Kind::Rename;
        ok = true;
        for (std::size_t k = 0; k < a->items.size(); ++k) {
          if (a->items[k]->kind != sc::ExprKind::Str || a->values[k]->kind != sc::ExprKind::Str) ok = false;
          else step.mapping.emplace_back(a->items[k]->text, a->values[k]->text);
        }
      } else if (m == "drop" && a) {
        if (std::optional<std::vector<std::string>> names = string_list(*a)) {
          step.kind = LineageStep::Kind::Drop;
          step.names = *names;
          ok = true;
        }
      }
      base.inspection = false;
      if (!ok) {
        sink_args(e, base.refs);
        if (base.lineage) base.refs.add(base.lineage->source, base.lineage->map_back(ColSet::everything()));
        return base;
      }
      if (base.lineage) base.lineage->steps.push_back(step);
      return base;
    }
    if (identity_methods().count(m) && base.lineage) {
      if (m == "sort_values") {
        use_columns(base, arg(e, 0, "by"));
        if (const sc::Expr* asc = arg(e, 1, "ascending")) sink(*asc, base.refs);
      } else if (m == "drop_duplicates") {
        const sc::Expr* subset = arg(e, 0, "subset");
        if (subset && subset->kind != sc::ExprKind::None) {
          use_columns(base, subset);
        } else {
          base.refs.add(base.lineage->source, base.lineage->map_back(ColSet::everything()));
        }
      } else if (m == "explode") {
        use_columns(base, arg(e, 0, "column"));
      } else if (m == "compute") {
        // live_df names are hints, not uses
        sink_args(e, base.refs, {"live_df"});
      } else {
        sink_args(e, base.refs);
      }
      base.inspection = inspection_methods().count(m) > 0;
      return base;
    }
    if (inspection_methods().count(m) && base.lineage) {
      sink_args(e, base.refs);
      base.inspection = true;
      return base;
    }
    sink(base, i.refs);
    sink_args(e, i.refs);
    return i;
  }

  Info group_call(const Info& g, const sc::Expr& e, const std::string& m) {
    Info i;
    sink_args(e, i.refs);
    if (!is_agg_method(m)) {
      if (g.lineage) i.refs.add(g.lineage->source, g.lineage->map_back(ColSet::everything()));
      i.refs.add(g.refs);
      return i;
    }
    i.refs.add(g.refs);
    if (!g.lineage) return i;
    std::set<std::string> cols(g.keys.begin(), g.keys.end());
    if (m == "agg") {
      const sc::Expr* spec = arg(e, 0, "func");
      if (spec && spec->kind == sc::ExprKind::Dict) {
        for (const auto& k : spec->items) {
          if (k->kind == sc::ExprKind::Str) {
            cols.insert(k->text);
          } else {
            i.refs.add(g.lineage->source, g.lineage->map_back(ColSet::everything()));
          }
        }
        i.refs.add(g.lineage->source, g.lineage->map_back(ColSet::of(cols)));
        return i;
      }
    }
    if (m != "size") {
      if (!g.group_cols) {
        i.refs.add(g.lineage->source, g.lineage->map_back(ColSet::everything()));
        return i;
      }
      cols.insert(g.group_cols->begin(), g.group_cols->end());
    }
    i.refs.add(g.lineage->source, g.lineage->map_back(ColSet::of(cols)));
    return i;
  }

  const AnalysisOptions& o_;
};

}  // namespace

StmtEffect statement_effect(const sc::Stmt& s, const AnalysisOptions& options) {
  StmtEffect fx;
  Analyzer a(options);
  switch (s.kind) {
    case sc::StmtKind::Use:
    case sc::StmtKind::Flush: break;
    case sc::StmtKind::Print:
      for (const auto& x : s.args) a.sink(*x, fx.gen);
      break;
    case sc::StmtKind::Assign: {
      Info i = a.analyze(*s.value);
      fx.kill_var = s.target;
      if (i.group) {
        a.sink(i, fx.gen);
      } else {
        fx.gen = i.refs;
        fx.lineage = i.lineage;
      }
      break;
    }
    case sc::StmtKind::SetItem:
      a.sink(*s.value, fx.gen);
      fx.kill_col = std::make_pair(s.target, s.column);
      break;
    case sc::StmtKind::ExprStmt:
    case sc::StmtKind::If:
    case sc::StmtKind::While: a.sink(*s.value, fx.gen); break;
  }
  return fx;
}

// ---------------------------------------------------------------------------
// Solvers

namespace {

std::vector<std::vector<StmtEffect>> effects_of(const Cfg& cfg, const AnalysisOptions& options) {
  std::vector<std::vector<StmtEffect>> out(cfg.blocks.size());
  for (const auto& b : cfg.blocks) {
    for (const auto* s : b.statements) out[b.id].push_back(statement_effect(*s, options));
  }
  return out;
}

AttrFacts run_backward(const std::vector<StmtEffect>& fx, AttrFacts facts) {
  for (auto it = fx.rbegin(); it != fx.rend(); ++it) facts = it->apply(facts);
  return facts;
}

}  // namespace

AttrFacts transfer_block(const BasicBlock& b, const AttrFacts& out, const AnalysisOptions& options) {
  AttrFacts facts = out;
  for (auto it = b.statements.rbegin(); it != b.statements.rend(); ++it) {
    facts = statement_effect(**it, options).apply(facts);
  }
  return facts;
}

std::pair<AttrFacts, AttrFacts> gen_kill(const BasicBlock& b, const AnalysisOptions& options) {
  AttrFacts kill;
  for (const auto* s : b.statements) {
    StmtEffect fx = statement_effect(*s, options);
    if (fx.kill_var) kill.add(*fx.kill_var, ColSet::everything());
    if (fx.kill_col) kill.add(fx.kill_col->first, ColSet::of({fx.kill_col->second}));
  }
  return {transfer_block(b, {}, options), kill};
}

LivenessFact solve_liveness(const Cfg& cfg, const AnalysisOptions& options) {
  std::vector<std::vector<StmtEffect>> fx = effects_of(cfg, options);
  LivenessFact f;
  f.blocks.resize(cfg.blocks.size());
  for (const auto& b : cfg.blocks) {
    auto [gen, kill] = gen_kill(b, options);
    f.blocks[b.id].gen = std::move(gen);
    f.blocks[b.id].kill = std::move(kill);
  }
  bool changed = true;
  while (changed) {
    changed = false;
    ++f.iterations;
    for (auto it = cfg.blocks.rbegin(); it != cfg.blocks.rend(); ++it) {
      BlockFacts& bf = f.blocks[it->id];
      AttrFacts out;
      for (int s : it->successors) out.add(f.blocks[s].in);
      AttrFacts in = run_backward(fx[it->id], out);
      if (!(in == bf.in) || !(out == bf.out)) {
        bf.in = std::move(in);
        bf.out = std::move(out);
        changed = true;
      }
    }
  }
  for (const auto& b : cfg.blocks) {
    AttrFacts cur = f.blocks[b.id].out;
    for (std::size_t k = b.statements.size(); k-- > 0;) {
      f.stmt_out[b.statements[k]] = cur;
      cur = fx[b.id][k].apply(cur);
      f.stmt_in[b.statements[k]] = cur;
    }
  }
  return f;
}

std::vector<AttrFacts> brute_force_in(const Cfg& cfg, const AnalysisOptions& options) {
  std::vector<std::vector<StmtEffect>> fx = effects_of(cfg, options);
  std::vector<AttrFacts> in(cfg.blocks.size());
  std::set<std::pair<int, std::string>> seen;
  std::deque<std::pair<int, AttrFacts>> work;
  auto visit = [&](int block, AttrFacts value) {
    if (!seen.insert({block, value.to_string()}).second) return;
    in[block].add(value);
    work.emplace_back(block, std::move(value));
  };
  visit(cfg.exit, run_backward(fx[cfg.exit], {}));
  while (!work.empty()) {
    auto [block, value] = std::move(work.front());
    work.pop_front();
    for (int p : cfg.blocks[block].predecessors) visit(p, run_backward(fx[p], value));
  }
  return in;
}

FrameFacts solve_live_frames(const Cfg& cfg) {
  struct VarEffect {
    std::set<std::string> uses;
    std::optional<std::string> def;
    std::optional<std::string> through;
  };
  std::vector<std::vector<VarEffect>> fx(cfg.blocks.size());
  for (const auto& b : cfg.blocks) {
    for (const auto* s : b.statements) {
      StmtEffect e = statement_effect(*s);
      VarEffect v;
      for (const auto& [name, cols] : e.gen.vars) v.uses.insert(name);
      v.def = e.kill_var;
      if (e.lineage) v.through = e.lineage->source;
      fx[b.id].push_back(std::move(v));
    }
  }
  auto apply = [](const VarEffect& v, std::set<std::string> live) {
    bool target_live = v.def && live.count(*v.def);
    if (v.def) live.erase(*v.def);
    live.insert(v.uses.begin(), v.uses.end());
    if (target_live && v.through) live.insert(*v.through);
    return live;
  };
  FrameFacts f;
  f.in.resize(cfg.blocks.size());
  f.out.resize(cfg.blocks.size());
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto it = cfg.blocks.rbegin(); it != cfg.blocks.rend(); ++it) {
      std::set<std::string> out;
      for (int s : it->successors) out.insert(f.in[s].begin(), f.in[s].end());
      std::set<std::string> in = out;
      for (auto e = fx[it->id].rbegin(); e != fx[it->id].rend(); ++e) in = apply(*e, std::move(in));
      if (in != f.in[it->id] || out != f.out[it->id]) {
        f.in[it->id] = std::move(in);
        f.out[it->id] = std::move(out);
        changed = true;
      }
    }
  }
  for (const auto& b : cfg.blocks) {
    std::set<std::string> cur = f.out[b.id];
    for (std::size_t k = b.statements.size(); k-- > 0;) {
      f.stmt_out[b.statements[k]] = cur;
      cur = apply(fx[b.id][k], std::move(cur));
    }
  }
  return f;
}

std::string dump(const Cfg& cfg, const LivenessFact& facts) {
  std::string out;
  for (const auto& b : cfg.blocks) {
    out += "block " + std::to_string(b.id);
    if (b.id == cfg.entry) out += " entry";
    if (b.id == cfg.exit) out += " exit";
    out += " succ=";
    for (std::size_t i = 0; i < b.successors.size(); ++i) out += (i ? "," : "") + std::to_string(b.successors[i]);
    out += " stmts=" + std::to_string(b.statements.size()) + "\n";
    const BlockFacts& f = facts.blocks[b.id];
    out += "  gen: " + f.gen.to_string() + "\n";
    out += "  kill: " + f.kill.to_string() + "\n";
    out += "  in: " + f.in.to_string() + "\n";
    out += "  out: " + f.out.to_string() + "\n";
  }
  return out;
}

}  // namespace lfp::dataflow
