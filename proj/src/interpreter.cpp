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

#include <algorithm>
#include <filesystem>

#include "lfp/errors.hpp"
#include "lfp/metastore.hpp"
#include "lfp/session.hpp"

namespace lfp {

namespace sc = script;

namespace {

constexpr std::size_t kLoopLimit = 1000000;

/// A value as the interpreter sees it: host data, or a handle on lazy work.
struct RV {
  enum class Kind { None, Scalar, List, Dict, Frame, Series, LazyScalar, GroupBy, Dt, Module, Builtin };
  Kind kind = Kind::None;
  Cell scalar;
  std::vector<RV> items;
  std::vector<std::pair<Cell, RV>> entries;
  NodePtr node;      // Frame; base frame of Series/Dt/GroupBy; the LazyScalar's node
  ExprPtr expr;      // Series row expression; LazyScalar aggregate expression over `origin`
  NodePtr origin;    // frame a LazyScalar reduces, when known
  std::vector<std::string> keys;
  std::vector<std::string> cols;
  std::string name;  // Module / Builtin

  static RV none() { return {}; }
  static RV of(Cell c) {
    RV v;
    v.kind = Kind::Scalar;
    v.scalar = std::move(c);
    return v;
  }
  static RV frame(NodePtr n) {
    RV v;
    v.kind = Kind::Frame;
    v.node = std::move(n);
    return v;
  }
  static RV series(NodePtr n, ExprPtr e) {
    RV v;
    v.kind = Kind::Series;
    v.node = std::move(n);
    v.expr = std::move(e);
    return v;
  }
  bool lazy() const { return kind == Kind::Frame || kind == Kind::Series || kind == Kind::LazyScalar; }
};

std::string kind_name(RV::Kind k) {
  switch (k) {
    case RV::Kind::None: return "None";
    case RV::Kind::Scalar: return "scalar";
    case RV::Kind::List: return "list";
    case RV::Kind::Dict: return "dict";
    case RV::Kind::Frame: return "frame";
    case RV::Kind::Series: return "column";
    case RV::Kind::LazyScalar: return "scalar";
    case RV::Kind::GroupBy: return "groupby";
    case RV::Kind::Dt: return "dt accessor";
    case RV::Kind::Module: return "module";
    case RV::Kind::Builtin: return "function";
  }
  return "value";
}

std::optional<BinOp> binop_of(const std::string& s) {
  static const std::map<std::string, BinOp> ops = {
      {"+", BinOp::Add}, {"-", BinOp::Sub}, {"*", BinOp::Mul}, {"/", BinOp::Div}, {"==", BinOp::Eq},
      {"!=", BinOp::Ne}, {"<", BinOp::Lt},  {"<=", BinOp::Le}, {">", BinOp::Gt},  {">=", BinOp::Ge},
      {"&", BinOp::And}, {"|", BinOp::Or}};
  auto it = ops.find(s);
  if (it == ops.end()) return std::nullopt;
  return it->second;
}

/// Python-style str(): strings print raw, nested strings are quoted.
std::string host_text(const RV& v, bool nested) {
  switch (v.kind) {
    case RV::Kind::None: return "None";
    case RV::Kind::Scalar:
      if (nested && std::holds_alternative<std::string>(v.scalar)) {
        std::string out = "'";
        for (char c : std::get<std::string>(v.scalar)) {
          if (c == '\'' || c == '\\') out += '\\';
          out += c;
        }
        return out + "'";
      }
      return format_cell(v.scalar);
    case RV::Kind::List: {
      std::string out = "[";
      for (std::size_t i = 0; i < v.items.size(); ++i) out += (i ? ", " : "") + host_text(v.items[i], true);
      return out + "]";
    }
    case RV::Kind::Dict: {
      std::string out = "{";
      for (std::size_t i = 0; i < v.entries.size(); ++i) {
        out += (i ? ", " : "") + host_text(RV::of(v.entries[i].first), true) + ": " +
               host_text(v.entries[i].second, true);
      }
      return out + "}";
    }
    case RV::Kind::Module:
    case RV::Kind::Builtin: return "<" + v.name + ">";
    default: return "<" + kind_name(v.kind) + ">";
  }
}

struct Args {
  std::vector<RV> pos;
  std::map<std::string, RV> kw;
  SourceSpan span;

  const RV* get(std::size_t i, const std::string& name) const {
    auto it = kw.find(name);
    if (it != kw.end()) return &it->second;
    return i < pos.size() ? &pos[i] : nullptr;
  }
};

class Interpreter {
 public:
  Interpreter(Session& s, const sc::Program& program) : s_(s), o_(s.options()) {
    if (o_.use_metadata) written_ = written_columns(program);
  }

  void run(const sc::Program& p) {
    exec_block(p.body);
    s_.flush();
  }

 private:
  [[noreturn]] void fail(const std::string& what, SourceSpan span) const { throw ScriptError(what, span); }

  // -------------------------------------------------------------------------
  // Statements

  void exec_block(const std::vector<sc::StmtPtr>& body) {
    for (const auto& st : body) {
      try {
        s_.graph().set_span(st->span);
        exec(*st);
      } catch (Error& e) {
        e.set_span(st->span);
        throw;
      }
    }
  }

  void exec(const sc::Stmt& st) {
    switch (st.kind) {
      case sc::StmtKind::Use:
        if (st.target != "lazy_print") fail("unknown directive '" + st.target + "'", st.span);
        if (!o_.reference) lazy_print_ = true;
        return;
      case sc::StmtKind::Flush: s_.flush(); return;
      case sc::StmtKind::Print: print(st); return;
      case sc::StmtKind::Assign:
        env_[st.target] = settle(eval(*st.value));
        return;
      case sc::StmtKind::SetItem: {
        auto it = env_.find(st.target);
        if (it == env_.end()) fail("name '" + st.target + "' is not defined", st.span);
        if (it->second.kind != RV::Kind::Frame) fail("column assignment needs a frame", st.span);
        NodePtr base = it->second.node;
        ExprPtr e = row_expr(eval(*st.value), base, st.value->span);
        Action a;
        a.kind = ActionKind::SetColumn;
        a.column = st.column;
        a.expr = e;
        env_[st.target] = settle(RV::frame(s_.graph().lazy_op(std::move(a), {base})));
        return;
      }
      case sc::StmtKind::ExprStmt: eval(*st.value); return;
      case sc::StmtKind::If:
        if (truth(eval(*st.value), st.value->span)) {
          exec_block(st.body);
        } else {
          exec_block(st.orelse);
        }
        return;
      case sc::StmtKind::While: {
        std::size_t n = 0;
        while (truth(eval(*st.value), st.value->span)) {
          if (++n > kLoopLimit) fail("loop iteration limit exceeded", st.span);
          exec_block(st.body);
        }
        return;
      }
    }
  }

  /// Reference mode computes every assigned value immediately.
  RV settle(RV v) {
    if (!o_.reference) return v;
    if (v.kind == RV::Kind::Frame) return RV::frame(s_.graph().source(s_.compute({v.node}, {})[0]));
    if (v.kind == RV::Kind::LazyScalar) return RV::of(force_scalar(v));
    return v;
  }

  bool truth(const RV& v, SourceSpan span) {
    switch (v.kind) {
      case RV::Kind::None: return false;
      case RV::Kind::Scalar: return truthy(v.scalar);
      case RV::Kind::LazyScalar: return truthy(force_scalar(v));
      case RV::Kind::List: return !v.items.empty();
      default: fail("the truth value of a " + kind_name(v.kind) + " is ambiguous", span);
    }
  }

  Cell force_scalar(const RV& v) {
    Value r = s_.compute({v.node}, {})[0];
    if (!r.is_scalar()) throw InternalError("scalar node produced a non-scalar value");
    return r.scalar;
  }

  // -------------------------------------------------------------------------
  // Printing

  /// Text for one print argument; lazy values become escapes and are collected.
  std::string print_piece(const RV& v, std::vector<NodePtr>& lazy, SourceSpan span) {
    switch (v.kind) {
      case RV::Kind::Frame:
      case RV::Kind::LazyScalar:
        lazy.push_back(v.node);
        return print_escape(v.node->uid);
      case RV::Kind::Series: {
        NodePtr f = series_frame(v);
        lazy.push_back(f);
        return print_escape(f->uid);
      }
      case RV::Kind::GroupBy:
      case RV::Kind::Dt: fail("cannot print a " + kind_name(v.kind), span);
      default: return host_text(v, false);
    }
  }

  std::string fstring_piece(const sc::Expr& e, std::vector<NodePtr>& lazy) {
    std::string out;
    for (const auto& part : e.parts) {
      out += part.expr ? print_piece(eval(*part.expr), lazy, part.expr->span) : part.text;
    }
    return out;
  }

  void print(const sc::Stmt& st) {
    std::vector<NodePtr> lazy;
    std::string text;
    for (std::size_t i = 0; i < st.args.size(); ++i) {
      if (i) text += ' ';
      const sc::Expr& a = *st.args[i];
      text += a.kind == sc::ExprKind::FStr ? fstring_piece(a, lazy) : print_piece(eval(a), lazy, a.span);
    }
    if (lazy_print_) {
      s_.graph().lazy_print(text, lazy);
      return;
    }
    std::vector<Value> values = s_.compute(lazy, {});
    std::map<std::int64_t, Value> args;
    for (std::size_t i = 0; i < lazy.size(); ++i) args[lazy[i]->uid] = values[i];
    s_.emit_line(expand_print(text, args), shown_in_order(text, args));
  }

  static std::vector<Value> shown_in_order(const std::string& text, const std::map<std::int64_t, Value>& args) {
    std::vector<Value> out;
    std::size_t pos = 0;
    while ((pos = text.find("$_#", pos)) != std::string::npos) {
      std::size_t end = text.find("$_#", pos + 3);
      if (end == std::string::npos) break;
      std::string digits = text.substr(pos + 3, end - pos - 3);
      bool numeric = !digits.empty() && std::all_of(digits.begin(), digits.end(), [](char c) {
        return std::isdigit(static_cast<unsigned char>(c));
      });
      if (numeric) {
        auto it = args.find(std::stoll(digits));
        if (it != args.end()) out.push_back(it->second);
        pos = end + 3;
      } else {
        pos += 3;
      }
    }
    return out;
  }

  // -------------------------------------------------------------------------
  // Expressions

  NodePtr op(Action a, std::vector<NodePtr> inputs) { return s_.graph().lazy_op(std::move(a), std::move(inputs)); }

  static Action action(ActionKind k) {
    Action a;
    a.kind = k;
    return a;
  }

  /// A column as a one-column frame.
  NodePtr series_frame(const RV& v) {
    std::string name = v.expr->kind == ExprKind::Column ? v.expr->name : "value";
    NodePtr base = v.node;
    if (v.expr->kind != ExprKind::Column) {
      Action a = action(ActionKind::SetColumn);
      a.column = name;
      a.expr = v.expr;
      base = op(std::move(a), {base});
    }
    Action p = action(ActionKind::Project);
    p.names = {name};
    return op(std::move(p), {base});
  }

  /// Expression over `frame` producing v row-wise.
  ExprPtr row_expr(const RV& v, const NodePtr& frame, SourceSpan span) {
    switch (v.kind) {
      case RV::Kind::Scalar: return lit(v.scalar);
      case RV::Kind::None: return lit(Cell{});
      case RV::Kind::Series:
        if (v.node != frame) fail("operands refer to different frames", span);
        return v.expr;
      case RV::Kind::LazyScalar:
        if (v.origin == frame && v.expr) return v.expr;
        return lit(force_scalar(v));
      default: fail("cannot use a " + kind_name(v.kind) + " as a column value", span);
    }
  }

  RV lazy_reduce(const NodePtr& frame, ExprPtr e) {
    Action a = action(ActionKind::Reduce);
    a.expr = e;
    RV v;
    v.kind = RV::Kind::LazyScalar;
    v.node = op(std::move(a), {frame});
    v.origin = frame;
    v.expr = std::move(e);
    return v;
  }

  /// Scalar computed from other lazy scalars.
  RV lazy_scalar_expr(const std::vector<NodePtr>& inputs, ExprPtr e) {
    Action a = action(ActionKind::ScalarExpr);
    a.expr = std::move(e);
    RV v;
    v.kind = RV::Kind::LazyScalar;
    v.node = op(std::move(a), inputs);
    return v;
  }

  RV combine(const std::string& sym, const RV& a, const RV& b, SourceSpan span) {
    std::optional<BinOp> bop = binop_of(sym);
    if (!bop) fail("unsupported operator '" + sym + "'", span);
    auto scalarish = [](const RV& v) {
      return v.kind == RV::Kind::Scalar || v.kind == RV::Kind::None || v.kind == RV::Kind::LazyScalar ||
             v.kind == RV::Kind::Series;
    };
    if (!scalarish(a) || !scalarish(b)) {
      fail("unsupported operand types for " + sym + ": " + kind_name(a.kind) + " and " + kind_name(b.kind), span);
    }
    if (a.kind == RV::Kind::Series || b.kind == RV::Kind::Series) {
      NodePtr f = a.kind == RV::Kind::Series ? a.node : b.node;
      return RV::series(f, binary(*bop, row_expr(a, f, span), row_expr(b, f, span)));
    }
    if (a.kind == RV::Kind::LazyScalar || b.kind == RV::Kind::LazyScalar) {
      const RV& l = a.kind == RV::Kind::LazyScalar ? a : b;
      const RV& r = a.kind == RV::Kind::LazyScalar ? b : a;
      bool same_origin = r.kind != RV::Kind::LazyScalar || (r.origin && r.origin == l.origin && r.expr);
      if (l.origin && l.expr && same_origin) {
        return lazy_reduce(l.origin, binary(*bop, row_expr(a, l.origin, span), row_expr(b, l.origin, span)));
      }
      std::vector<NodePtr> inputs;
      auto operand = [&](const RV& v) {
        if (v.kind != RV::Kind::LazyScalar) return lit(v.scalar);
        inputs.push_back(v.node);
        return col("$" + std::to_string(inputs.size() - 1));
      };
      ExprPtr ea = operand(a);
      ExprPtr eb = operand(b);
      return lazy_scalar_expr(inputs, binary(*bop, ea, eb));
    }
    return RV::of(binary_cells(*bop, a.scalar, b.scalar));
  }

  RV negate(UnOp u, const RV& v, SourceSpan span) {
    switch (v.kind) {
      case RV::Kind::Scalar:
      case RV::Kind::None: return RV::of(unary_cell(u, v.scalar));
      case RV::Kind::Series: return RV::series(v.node, unary(u, v.expr));
      case RV::Kind::LazyScalar:
        if (v.origin && v.expr) return lazy_reduce(v.origin, unary(u, v.expr));
        return lazy_scalar_expr({v.node}, unary(u, col("$0")));
      default: fail("bad operand type for unary operator: " + kind_name(v.kind), span);
    }
  }

  RV eval(const sc::Expr& e) {
    switch (e.kind) {
      case sc::ExprKind::Name: return lookup_name(e);
      case sc::ExprKind::Int: return RV::of(Cell{static_cast<std::int64_t>(std::stoll(e.text))});
      case sc::ExprKind::Float: return RV::of(Cell{std::stod(e.text)});
      case sc::ExprKind::Str: return RV::of(Cell{e.text});
      case sc::ExprKind::Bool: return RV::of(Cell{e.flag});
      case sc::ExprKind::None: return RV::none();
      case sc::ExprKind::FStr: {
        std::string out;
        for (const auto& part : e.parts) {
          if (!part.expr) {
            out += part.text;
            continue;
          }
          RV v = eval(*part.expr);
          if (v.kind == RV::Kind::LazyScalar) v = RV::of(force_scalar(v));
          if (v.lazy()) fail("cannot format a " + kind_name(v.kind) + " outside print", part.expr->span);
          out += host_text(v, false);
        }
        return RV::of(Cell{out});
      }
      case sc::ExprKind::List: {
        RV v;
        v.kind = RV::Kind::List;
        for (const auto& item : e.items) v.items.push_back(eval(*item));
        return v;
      }
      case sc::ExprKind::Dict: {
        RV v;
        v.kind = RV::Kind::Dict;
        for (std::size_t i = 0; i < e.items.size(); ++i) {
          RV k = eval(*e.items[i]);
          if (k.kind != RV::Kind::Scalar) fail("dict keys must be scalars", e.items[i]->span);
          v.entries.emplace_back(k.scalar, eval(*e.values[i]));
        }
        return v;
      }
      case sc::ExprKind::Attr: return attribute(eval(*e.object), e);
      case sc::ExprKind::Call: return call(e);
      case sc::ExprKind::Index: return index(eval(*e.object), eval(*e.rhs), e.span);
      case sc::ExprKind::Binary: return combine(e.text, eval(*e.object), eval(*e.rhs), e.span);
      case sc::ExprKind::Unary: {
        RV v = eval(*e.object);
        if (e.text == "-") return negate(UnOp::Neg, v, e.span);
        if (e.text == "~" || e.text == "not") return negate(UnOp::Not, v, e.span);
        fail("unsupported unary operator '" + e.text + "'", e.span);
      }
    }
    throw InternalError("unhandled expression kind");
  }

  RV lookup_name(const sc::Expr& e) {
    auto it = env_.find(e.text);
    if (it != env_.end()) return it->second;
    RV v;
    if (e.text == "read_csv" || e.text == "len") {
      v.kind = RV::Kind::Builtin;
      v.name = e.text;
      return v;
    }
    if (o_.externals.count(e.text)) {
      v.kind = RV::Kind::Module;
      v.name = e.text;
      return v;
    }
    fail("name '" + e.text + "' is not defined", e.span);
  }

  RV attribute(const RV& base, const sc::Expr& e) {
    switch (base.kind) {
      case RV::Kind::Frame: return RV::series(base.node, col(e.text));
      case RV::Kind::Series:
        if (e.text == "dt") {
          RV v = base;
          v.kind = RV::Kind::Dt;
          return v;
        }
        break;
      case RV::Kind::Dt: {
        static const std::set<std::string> parts = {"year", "month", "day", "weekday", "dayofweek", "hour", "minute"};
        if (!parts.count(e.text)) fail("unknown date part '" + e.text + "'", e.span);
        return RV::series(base.node, date_part(e.text == "weekday" ? "dayofweek" : e.text, base.expr));
      }
      case RV::Kind::GroupBy: {
        RV v = base;
        v.cols = {e.text};
        return v;
      }
      default: break;
    }
    fail("'" + kind_name(base.kind) + "' has no attribute '" + e.text + "'", e.span);
  }

  RV index(const RV& base, const RV& key, SourceSpan span) {
    if (base.kind == RV::Kind::Frame) {
      if (key.kind == RV::Kind::Scalar && std::holds_alternative<std::string>(key.scalar)) {
        return RV::series(base.node, col(std::get<std::string>(key.scalar)));
      }
      if (key.kind == RV::Kind::List) {
        Action a = action(ActionKind::Project);
        a.names = strings(key, span);
        return RV::frame(op(std::move(a), {base.node}));
      }
      if (key.kind == RV::Kind::Series) {
        if (key.node != base.node) fail("filter mask refers to a different frame", span);
        Action a = action(ActionKind::Filter);
        a.expr = key.expr;
        return RV::frame(op(std::move(a), {base.node}));
      }
    }
    if (base.kind == RV::Kind::GroupBy) {
      RV v = base;
      if (key.kind == RV::Kind::List) {
        v.cols = strings(key, span);
      } else {
        v.cols = {string_of(key, span)};
      }
      return v;
    }
    fail("cannot index a " + kind_name(base.kind) + " with a " + kind_name(key.kind), span);
  }

  std::string string_of(const RV& v, SourceSpan span) const {
    if (v.kind != RV::Kind::Scalar || !std::holds_alternative<std::string>(v.scalar)) {
      fail("expected a string, got " + kind_name(v.kind), span);
    }
    return std::get<std::string>(v.scalar);
  }

  std::vector<std::string> strings(const RV& v, SourceSpan span) const {
    if (v.kind == RV::Kind::Scalar) return {string_of(v, span)};
    if (v.kind != RV::Kind::List) fail("expected a list of strings", span);
    std::vector<std::string> out;
    for (const auto& item : v.items) out.push_back(string_of(item, span));
    return out;
  }

  std::int64_t int_of(const RV& v, SourceSpan span) const {
    if (v.kind != RV::Kind::Scalar || !std::holds_alternative<std::int64_t>(v.scalar)) {
      fail("expected an integer", span);
    }
    return std::get<std::int64_t>(v.scalar);
  }

  Dtype dtype_of(const RV& v, SourceSpan span) const {
    std::string name = string_of(v, span);
    std::optional<Dtype> t = parse_dtype(name);
    if (!t) fail("unknown dtype '" + name + "'", span);
    return *t;
  }

  Cell cell_of(const RV& v, SourceSpan span) {
    if (v.kind == RV::Kind::None) return Cell{};
    if (v.kind == RV::Kind::Scalar) return v.scalar;
    if (v.kind == RV::Kind::LazyScalar) return force_scalar(v);
    fail("expected a scalar, got " + kind_name(v.kind), span);
  }

  // -------------------------------------------------------------------------
  // Calls

  RV call(const sc::Expr& e) {
    Args args;
    args.span = e.span;
    for (const auto& a : e.items) args.pos.push_back(eval(*a));
    for (const auto& k : e.keywords) args.kw[k.name] = eval(*k.value);

    const sc::Expr& callee = *e.object;
    if (callee.kind == sc::ExprKind::Attr) {
      const sc::Expr& obj = *callee.object;
      if (obj.kind == sc::ExprKind::Name && !env_.count(obj.text) && !o_.externals.count(obj.text) &&
          obj.text != "read_csv" && obj.text != "len") {
        throw UnknownExternal(obj.text, obj.span);
      }
      RV base = eval(obj);
      const std::string& m = callee.text;
      switch (base.kind) {
        case RV::Kind::Module: return external(base.name + "." + m, args);
        case RV::Kind::Frame: return frame_method(base, m, args);
        case RV::Kind::Series: return series_method(base, m, args);
        case RV::Kind::GroupBy: return groupby_method(base, m, args);
        case RV::Kind::LazyScalar:
          if (m == "compute") return RV::of(force_scalar(base));
          break;
        default: break;
      }
      fail("'" + kind_name(base.kind) + "' has no method '" + m + "'", callee.span);
    }
    RV f = eval(callee);
    if (f.kind != RV::Kind::Builtin) fail("'" + kind_name(f.kind) + "' is not callable", callee.span);
    if (f.name == "read_csv") return read_csv(args);
    return length(args);
  }

  const RV& required(const Args& a, std::size_t i, const std::string& name) const {
    const RV* v = a.get(i, name);
    if (!v) fail("missing argument '" + name + "'", a.span);
    return *v;
  }

  static bool given(const RV* v) { return v && v->kind != RV::Kind::None; }

  RV read_csv(const Args& args) {
    std::string path = string_of(required(args, 0, "filepath_or_buffer"), args.span);
    if (!o_.base_dir.empty() && std::filesystem::path(path).is_relative()) {
      path = (std::filesystem::path(o_.base_dir) / path).lexically_normal().string();
    }
    Action a = action(ActionKind::ReadCsv);
    a.path = path;
    if (const RV* u = args.get(1, "usecols"); given(u)) a.csv.usecols = strings(*u, args.span);
    if (const RV* d = args.get(2, "dtype"); given(d)) {
      if (d->kind != RV::Kind::Dict) fail("dtype must be a dict", args.span);
      for (const auto& [k, t] : d->entries) {
        a.csv.dtypes.emplace_back(string_of(RV::of(k), args.span), dtype_of(t, args.span));
      }
    }
    if (const RV* p = args.get(3, "parse_dates"); given(p)) a.csv.parse_dates = strings(*p, args.span);
    if (o_.use_metadata) apply_metadata(a);
    return RV::frame(op(std::move(a), {}));
  }

  void apply_metadata(Action& a) const {
    std::optional<DatasetMeta> meta = lookup(a.path);
    if (!meta) return;
    a.names = meta->names();
    if (!written_) return;
    std::set<std::string> readonly;
    for (const auto& n : a.names) {
      if (!written_->count(n)) readonly.insert(n);
    }
    for (const auto& [n, t] : a.csv.dtypes) readonly.erase(n);
    for (const auto& n : a.csv.parse_dates) readonly.erase(n);
    for (const auto& n : category_candidates(*meta, readonly)) {
      if (!a.csv.usecols || std::count(a.csv.usecols->begin(), a.csv.usecols->end(), n)) {
        a.csv.category_columns.insert(n);
      }
    }
  }

  RV length(const Args& args) {
    const RV& v = required(args, 0, "obj");
    switch (v.kind) {
      case RV::Kind::Frame: return lazy_reduce(v.node, aggregate(AggFunc::Size, lit(Cell{std::int64_t{0}})));
      case RV::Kind::Series: return lazy_reduce(v.node, aggregate(AggFunc::Size, v.expr));
      case RV::Kind::List: return RV::of(Cell{static_cast<std::int64_t>(v.items.size())});
      case RV::Kind::Dict: return RV::of(Cell{static_cast<std::int64_t>(v.entries.size())});
      case RV::Kind::Scalar:
        if (std::holds_alternative<std::string>(v.scalar)) {
          return RV::of(Cell{static_cast<std::int64_t>(std::get<std::string>(v.scalar).size())});
        }
        break;
      default: break;
    }
    fail("object of type " + kind_name(v.kind) + " has no len()", args.span);
  }

  RV computed(const RV& v, const Args& args) {
    std::vector<NodePtr> hints;
    if (const RV* h = args.get(0, "live_df"); given(h)) {
      std::vector<RV> items = h->kind == RV::Kind::List ? h->items : std::vector<RV>{*h};
      for (const auto& item : items) {
        if (item.kind == RV::Kind::Frame) {
          hints.push_back(item.node);
        } else if (item.kind == RV::Kind::Series) {
          hints.push_back(item.node);
        } else {
          fail("live_df expects frames", args.span);
        }
      }
    }
    NodePtr target = v.kind == RV::Kind::Series ? series_frame(v) : v.node;
    return RV::frame(s_.graph().source(s_.compute({target}, hints)[0]));
  }

  RV frame_method(const RV& f, const std::string& m, const Args& args) {
    const SourceSpan span = args.span;
    if (m == "head") {
      const RV* n = args.get(0, "n");
      Action a = action(ActionKind::Head);
      std::int64_t k = given(n) ? int_of(*n, span) : 5;
      a.count = static_cast<std::size_t>(std::max<std::int64_t>(k, 0));
      return RV::frame(op(std::move(a), {f.node}));
    }
    if (m == "sort_values") {
      Action a = action(ActionKind::SortValues);
      a.names = strings(required(args, 0, "by"), span);
      const RV* asc = args.get(1, "ascending");
      if (!given(asc)) {
        a.ascending.assign(a.names.size(), true);
      } else if (asc->kind == RV::Kind::List) {
        for (const auto& item : asc->items) a.ascending.push_back(truthy(cell_of(item, span)));
        if (a.ascending.size() != a.names.size()) fail("ascending must match the sort keys", span);
      } else {
        a.ascending.assign(a.names.size(), truthy(cell_of(*asc, span)));
      }
      return RV::frame(op(std::move(a), {f.node}));
    }
    if (m == "drop") {
      Action a = action(ActionKind::Drop);
      a.names = strings(required(args, 0, "columns"), span);
      return RV::frame(op(std::move(a), {f.node}));
    }
    if (m == "rename") {
      const RV& cols = required(args, 0, "columns");
      if (cols.kind != RV::Kind::Dict) fail("rename expects columns={...}", span);
      Action a = action(ActionKind::Rename);
      for (const auto& [k, v] : cols.entries) a.mapping.emplace_back(string_of(RV::of(k), span), string_of(v, span));
      return RV::frame(op(std::move(a), {f.node}));
    }
    if (m == "astype") {
      const RV& t = required(args, 0, "dtype");
      Action a = action(ActionKind::AsType);
      if (t.kind == RV::Kind::Dict) {
        for (const auto& [k, v] : t.entries) a.types.emplace_back(string_of(RV::of(k), span), dtype_of(v, span));
      } else {
        Dtype to = dtype_of(t, span);
        if (!f.node->all_attributes) throw SchemaUnknown("astype of a whole frame needs a known schema", span);
        for (const auto& n : f.node->all_attributes->names) a.types.emplace_back(n, to);
      }
      return RV::frame(op(std::move(a), {f.node}));
    }
    if (m == "fillna") {
      const RV& v = required(args, 0, "value");
      Action a = action(ActionKind::FillNa);
      if (v.kind == RV::Kind::Dict) {
        for (const auto& [k, c] : v.entries) a.fill_columns.emplace_back(string_of(RV::of(k), span), cell_of(c, span));
      } else {
        a.fill_all = cell_of(v, span);
      }
      return RV::frame(op(std::move(a), {f.node}));
    }
    if (m == "round") {
      const RV* d = args.get(0, "decimals");
      Action a = action(ActionKind::Round);
      a.digits = given(d) ? static_cast<int>(int_of(*d, span)) : 0;
      return RV::frame(op(std::move(a), {f.node}));
    }
    if (m == "abs") return RV::frame(op(action(ActionKind::Abs), {f.node}));
    if (m == "drop_duplicates") {
      Action a = action(ActionKind::DropDuplicates);
      if (const RV* sub = args.get(0, "subset"); given(sub)) a.names = strings(*sub, span);
      return RV::frame(op(std::move(a), {f.node}));
    }
    if (m == "explode") {
      Action a = action(ActionKind::Explode);
      a.column = string_of(required(args, 0, "column"), span);
      return RV::frame(op(std::move(a), {f.node}));
    }
    if (m == "merge") {
      const RV& right = required(args, 0, "right");
      if (right.kind != RV::Kind::Frame) fail("merge expects a frame", span);
      Action a = action(ActionKind::Merge);
      a.names = strings(required(args, 2, "on"), span);
      if (const RV* how = args.get(1, "how"); given(how)) {
        std::string h = string_of(*how, span);
        std::optional<JoinKind> k = parse_join(h);
        if (!k) fail("unknown join kind '" + h + "'", span);
        a.how = *k;
      }
      return RV::frame(op(std::move(a), {f.node, right.node}));
    }
    if (m == "groupby") {
      RV g = f;
      g.kind = RV::Kind::GroupBy;
      g.keys = strings(required(args, 0, "by"), span);
      if (g.keys.empty()) throw EmptyKeyList("groupby");
      return g;
    }
    if (m == "compute") return computed(f, args);
    fail("frame has no method '" + m + "'", span);
  }

  RV series_method(const RV& s, const std::string& m, const Args& args) {
    const SourceSpan span = args.span;
    if (std::optional<AggFunc> f = parse_agg(m); f && *f != AggFunc::Size) {
      return lazy_reduce(s.node, aggregate(*f, s.expr));
    }
    if (m == "abs") return RV::series(s.node, abs_of(s.expr));
    if (m == "round") {
      const RV* d = args.get(0, "decimals");
      return RV::series(s.node, round_of(s.expr, given(d) ? static_cast<int>(int_of(*d, span)) : 0));
    }
    if (m == "fillna") return RV::series(s.node, fillna_of(s.expr, cell_of(required(args, 0, "value"), span)));
    if (m == "astype") return RV::series(s.node, cast_of(s.expr, dtype_of(required(args, 0, "dtype"), span)));
    if (m == "compute") return computed(s, args);
    if (m == "head") {
      RV f = RV::frame(series_frame(s));
      return frame_method(f, m, args);
    }
    fail("column has no method '" + m + "'", span);
  }

  RV groupby_method(const RV& g, const std::string& m, const Args& args) {
    const SourceSpan span = args.span;
    Action a = action(ActionKind::GroupByAgg);
    a.names = g.keys;
    auto columns = [&]() {
      if (!g.cols.empty()) return g.cols;
      if (!g.node->all_attributes) throw SchemaUnknown("select columns before aggregating a grouped frame", span);
      std::vector<std::string> out;
      for (const auto& n : g.node->all_attributes->names) {
        if (std::find(g.keys.begin(), g.keys.end(), n) == g.keys.end()) out.push_back(n);
      }
      return out;
    };
    auto func = [&](const RV& v) {
      std::string name = string_of(v, span);
      std::optional<AggFunc> f = parse_agg(name);
      if (!f || *f == AggFunc::Size) fail("unknown aggregation '" + name + "'", span);
      return *f;
    };
    if (m == "size") {
      a.aggs.push_back({g.keys[0], AggFunc::Size, "size"});
    } else if (m == "agg") {
      const RV& spec = required(args, 0, "func");
      if (spec.kind == RV::Kind::Dict) {
        for (const auto& [k, v] : spec.entries) {
          std::string c = string_of(RV::of(k), span);
          if (v.kind == RV::Kind::List) {
            for (const auto& item : v.items) a.aggs.push_back({c, func(item), c + "_" + string_of(item, span)});
          } else {
            a.aggs.push_back({c, func(v), c});
          }
        }
      } else {
        AggFunc f = func(spec);
        for (const auto& c : columns()) a.aggs.push_back({c, f, c});
      }
    } else if (std::optional<AggFunc> f = parse_agg(m); f && *f != AggFunc::Size) {
      for (const auto& c : columns()) a.aggs.push_back({c, *f, c});
    } else {
      fail("grouped frame has no method '" + m + "'", span);
    }
    return RV::frame(op(std::move(a), {g.node}));
  }

  RV external(const std::string& fn, const Args& args) {
    std::vector<NodePtr> lazy;
    auto collect = [&](const RV& v) {
      if (v.kind == RV::Kind::Frame || v.kind == RV::Kind::LazyScalar) lazy.push_back(v.node);
      if (v.kind == RV::Kind::Series) lazy.push_back(series_frame(v));
    };
    for (const auto& v : args.pos) collect(v);
    for (const auto& [k, v] : args.kw) collect(v);
    std::vector<Value> values = s_.compute(lazy, {});
    std::vector<Value> shown;
    std::size_t next = 0;
    auto render = [&](const RV& v) -> std::string {
      if (!v.lazy()) return host_text(v, true);
      const Value& r = values.at(next++);
      if (r.is_scalar()) return host_text(RV::of(r.scalar), true);
      shown.push_back(r);
      return "<frame " + std::to_string(r.frame->rows()) + "x" + std::to_string(r.frame->width()) + ">";
    };
    std::string line = fn + "(";
    bool first = true;
    for (const auto& v : args.pos) {
      line += (first ? "" : ", ") + render(v);
      first = false;
    }
    for (const auto& [k, v] : args.kw) {
      line += (first ? "" : ", ") + k + "=" + render(v);
      first = false;
    }
    s_.emit_line(line + ")", shown);
    return RV::none();
  }

  Session& s_;
  const SessionOptions& o_;
  std::map<std::string, RV> env_;
  bool lazy_print_ = false;
  std::optional<std::set<std::string>> written_;
};

void collect_written(const std::vector<sc::StmtPtr>& body, std::set<std::string>& out, bool& everything);

void collect_written(const sc::Expr& e, std::set<std::string>& out, bool& everything) {
  if (e.kind == sc::ExprKind::Call && e.object && e.object->kind == sc::ExprKind::Attr) {
    const std::string& m = e.object->text;
    auto arg = [&](std::size_t i, const std::string& name) -> const sc::Expr* {
      for (const auto& k : e.keywords) {
        if (k.name == name) return k.value.get();
      }
      return i < e.items.size() ? e.items[i].get() : nullptr;
    };
    const sc::Expr* a = nullptr;
    if (m == "astype" || m == "fillna") {
      a = arg(0, m == "astype" ? "dtype" : "value");
      if (a && a->kind == sc::ExprKind::Dict) {
        for (const auto& k : a->items) {
          if (k->kind == sc::ExprKind::Str) out.insert(k->text);
        }
      } else if (e.object->object && e.object->object->kind != sc::ExprKind::Attr &&
                 e.object->object->kind != sc::ExprKind::Index) {
        everything = true;
      }
    } else if (m == "rename") {
      a = arg(0, "columns");
      if (a && a->kind == sc::ExprKind::Dict) {
        for (const auto& v : a->values) {
          if (v->kind == sc::ExprKind::Str) out.insert(v->text);
        }
      }
    } else if (m == "explode") {
      a = arg(0, "column");
      if (a && a->kind == sc::ExprKind::Str) out.insert(a->text);
    }
  }
  auto visit = [&](const sc::ExprPtr& p) {
    if (p) collect_written(*p, out, everything);
  };
  visit(e.object);
  visit(e.rhs);
  for (const auto& p : e.items) visit(p);
  for (const auto& p : e.values) visit(p);
  for (const auto& k : e.keywords) visit(k.value);
  for (const auto& part : e.parts) visit(part.expr);
}

void collect_written(const std::vector<sc::StmtPtr>& body, std::set<std::string>& out, bool& everything) {
  for (const auto& st : body) {
    if (st->kind == sc::StmtKind::SetItem) out.insert(st->column);
    if (st->value) collect_written(*st->value, out, everything);
    for (const auto& a : st->args) collect_written(*a, out, everything);
    collect_written(st->body, out, everything);
    collect_written(st->orelse, out, everything);
  }
}

}  // namespace

std::optional<std::set<std::string>> written_columns(const script::Program& program) {
  std::set<std::string> out;
  bool everything = false;
  collect_written(program.body, out, everything);
  if (everything) return std::nullopt;
  return out;
}

RunResult run_program(const script::Program& program, const SessionOptions& options) {
  Session session(options);
  Interpreter interp(session, program);
  interp.run(program);
  RunResult r;
  r.output = session.output();
  r.hash = session.output_hash();
  r.stats = session.stats();
  r.traces = session.traces();
  return r;
}

}  // namespace lfp
