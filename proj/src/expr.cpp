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

#include "lfp/expr.hpp"

#include <cmath>
#include <sstream>

#include "lfp/errors.hpp"

namespace lfp {

namespace {

ExprPtr make(Expr e) { return std::make_shared<const Expr>(std::move(e)); }

}  // namespace

ExprPtr col(std::string name) {
  Expr e;
  e.kind = ExprKind::Column;
  e.name = std::move(name);
  return make(std::move(e));
}

ExprPtr lit(Cell value) {
  Expr e;
  e.kind = ExprKind::Literal;
  e.value = std::move(value);
  return make(std::move(e));
}

ExprPtr binary(BinOp op, ExprPtr a, ExprPtr b) {
  Expr e;
  e.kind = ExprKind::Binary;
  e.bop = op;
  e.args = {std::move(a), std::move(b)};
  return make(std::move(e));
}

ExprPtr unary(UnOp op, ExprPtr a) {
  Expr e;
  e.kind = ExprKind::Unary;
  e.uop = op;
  e.args = {std::move(a)};
  return make(std::move(e));
}

ExprPtr date_part(std::string part, ExprPtr a) {
  Expr e;
  e.kind = ExprKind::DatePart;
  e.name = std::move(part);
  e.args = {std::move(a)};
  return make(std::move(e));
}

ExprPtr abs_of(ExprPtr a) {
  Expr e;
  e.kind = ExprKind::Abs;
  e.args = {std::move(a)};
  return make(std::move(e));
}

ExprPtr round_of(ExprPtr a, int digits) {
  Expr e;
  e.kind = ExprKind::Round;
  e.digits = digits;
  e.args = {std::move(a)};
  return make(std::move(e));
}

ExprPtr fillna_of(ExprPtr a, Cell value) {
  Expr e;
  e.kind = ExprKind::FillNa;
  e.value = std::move(value);
  e.args = {std::move(a)};
  return make(std::move(e));
}

ExprPtr cast_of(ExprPtr a, Dtype to) {
  Expr e;
  e.kind = ExprKind::Cast;
  e.to = to;
  e.args = {std::move(a)};
  return make(std::move(e));
}

ExprPtr aggregate(AggFunc f, ExprPtr a) {
  Expr e;
  e.kind = ExprKind::Aggregate;
  e.agg = f;
  e.args = {std::move(a)};
  return make(std::move(e));
}

std::string_view binop_symbol(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    case BinOp::And: return "&";
    case BinOp::Or: return "|";
  }
  return "?";
}

std::string_view agg_name(AggFunc f) {
  switch (f) {
    case AggFunc::Sum: return "sum";
    case AggFunc::Mean: return "mean";
    case AggFunc::Count: return "count";
    case AggFunc::Min: return "min";
    case AggFunc::Max: return "max";
    case AggFunc::Size: return "size";
  }
  return "?";
}

std::optional<AggFunc> parse_agg(std::string_view name) {
  if (name == "sum") return AggFunc::Sum;
  if (name == "mean") return AggFunc::Mean;
  if (name == "count") return AggFunc::Count;
  if (name == "min") return AggFunc::Min;
  if (name == "max") return AggFunc::Max;
  if (name == "size") return AggFunc::Size;
  return std::nullopt;
}

bool is_comparison(BinOp op) {
  return op == BinOp::Eq || op == BinOp::Ne || op == BinOp::Lt || op == BinOp::Le ||
         op == BinOp::Gt || op == BinOp::Ge;
}

void collect_columns(const Expr& e, std::set<std::string>& out) {
  if (e.kind == ExprKind::Column) out.insert(e.name);
  for (const auto& a : e.args) collect_columns(*a, out);
}

std::set<std::string> used_columns(const Expr& e) {
  std::set<std::string> out;
  collect_columns(e, out);
  return out;
}

bool has_aggregate(const Expr& e) {
  if (e.kind == ExprKind::Aggregate) return true;
  for (const auto& a : e.args) {
    if (has_aggregate(*a)) return true;
  }
  return false;
}

bool is_scalar_expr(const Expr& e) {
  if (e.kind == ExprKind::Aggregate) return true;
  if (e.kind == ExprKind::Column) return false;
  for (const auto& a : e.args) {
    if (!is_scalar_expr(*a)) return false;
  }
  return true;
}

bool is_predicate(const Expr& e) {
  if (e.kind == ExprKind::Binary) {
    if (is_comparison(e.bop)) return true;
    if (e.bop == BinOp::And || e.bop == BinOp::Or) {
      return is_predicate(*e.args[0]) && is_predicate(*e.args[1]);
    }
    return false;
  }
  if (e.kind == ExprKind::Unary && e.uop == UnOp::Not) return is_predicate(*e.args[0]);
  return false;
}

ExprPtr rename_columns(const ExprPtr& e, const std::map<std::string, std::string>& mapping) {
  if (e->kind == ExprKind::Column) {
    auto it = mapping.find(e->name);
    return it == mapping.end() ? e : col(it->second);
  }
  if (e->args.empty()) return e;
  Expr copy = *e;
  for (auto& a : copy.args) a = rename_columns(a, mapping);
  return make(std::move(copy));
}

bool exprs_equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.args.size() != b.args.size()) return false;
  switch (a.kind) {
    case ExprKind::Column:
    case ExprKind::DatePart:
      if (a.name != b.name) return false;
      break;
    case ExprKind::Literal:
    case ExprKind::FillNa:
      if (a.value.index() != b.value.index() || !cells_equal(a.value, b.value)) return false;
      break;
    case ExprKind::Binary:
      if (a.bop != b.bop) return false;
      break;
    case ExprKind::Unary:
      if (a.uop != b.uop) return false;
      break;
    case ExprKind::Round:
      if (a.digits != b.digits) return false;
      break;
    case ExprKind::Cast:
      if (a.to != b.to) return false;
      break;
    case ExprKind::Aggregate:
      if (a.agg != b.agg) return false;
      break;
    case ExprKind::Abs: break;
  }
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!exprs_equal(*a.args[i], *b.args[i])) return false;
  }
  return true;
}

namespace {

std::string literal_text(const Cell& c) {
  if (auto* s = std::get_if<std::string>(&c)) {
    std::string out = "'";
    for (char ch : *s) {
      if (ch == '\'' || ch == '\\') out += '\\';
      out += ch;
    }
    return out + "'";
  }
  if (auto* d = std::get_if<Date>(&c)) return "'" + format_date(*d) + "'";
  if (is_null(c)) return "None";
  return format_cell(c);
}

}  // namespace

std::string to_string(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Column: return e.name;
    case ExprKind::Literal: return literal_text(e.value);
    case ExprKind::Binary:
      return "(" + to_string(*e.args[0]) + " " + std::string(binop_symbol(e.bop)) + " " +
             to_string(*e.args[1]) + ")";
    case ExprKind::Unary:
      return std::string(e.uop == UnOp::Neg ? "-" : "~") + to_string(*e.args[0]);
    case ExprKind::DatePart: return to_string(*e.args[0]) + ".dt." + e.name;
    case ExprKind::Abs: return to_string(*e.args[0]) + ".abs()";
    case ExprKind::Round: return to_string(*e.args[0]) + ".round(" + std::to_string(e.digits) + ")";
    case ExprKind::FillNa: return to_string(*e.args[0]) + ".fillna(" + literal_text(e.value) + ")";
    case ExprKind::Cast:
      return to_string(*e.args[0]) + ".astype('" + std::string(dtype_name(e.to)) + "')";
    case ExprKind::Aggregate:
      return to_string(*e.args[0]) + "." + std::string(agg_name(e.agg)) + "()";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Scalar operators

Dtype cell_dtype(const Cell& c) {
  switch (c.index()) {
    case 1: return Dtype::int64();
    case 2: return Dtype::float64();
    case 3: return Dtype::boolean();
    case 4: return Dtype::text();
    case 5: return Dtype::date();
    default: return Dtype::float64();
  }
}

bool truthy(const Cell& c) {
  if (auto* b = std::get_if<bool>(&c)) return *b;
  if (auto* i = std::get_if<std::int64_t>(&c)) return *i != 0;
  if (auto* d = std::get_if<double>(&c)) return *d != 0.0 && !std::isnan(*d);
  if (auto* s = std::get_if<std::string>(&c)) return !s->empty();
  if (std::holds_alternative<Date>(c)) return true;
  return false;
}

namespace {

bool int_like(const Cell& c) { return c.index() == 1 || c.index() == 3; }

std::int64_t as_int(const Cell& c) {
  if (auto* b = std::get_if<bool>(&c)) return *b ? 1 : 0;
  return std::get<std::int64_t>(c);
}

double as_double(const Cell& c) {
  if (auto* b = std::get_if<bool>(&c)) return *b ? 1.0 : 0.0;
  if (auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
  return std::get<double>(c);
}

bool numeric_cell(const Cell& c) { return c.index() == 1 || c.index() == 2 || c.index() == 3; }

std::int64_t wrap_add(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
}
std::int64_t wrap_sub(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) - static_cast<std::uint64_t>(b));
}
std::int64_t wrap_mul(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b));
}

template <typename T>
bool compare_op(BinOp op, const T& a, const T& b) {
  switch (op) {
    case BinOp::Eq: return a == b;
    case BinOp::Ne: return a != b;
    case BinOp::Lt: return a < b;
    case BinOp::Le: return a <= b;
    case BinOp::Gt: return a > b;
    case BinOp::Ge: return a >= b;
    default: return false;
  }
}

[[noreturn]] void mismatch(BinOp op, const std::string& a, const std::string& b) {
  throw TypeMismatch("unsupported operand types for " + std::string(binop_symbol(op)) + ": " + a +
                     " and " + b);
}

std::optional<Date> as_date(const Cell& c) {
  if (auto* d = std::get_if<Date>(&c)) return *d;
  if (auto* s = std::get_if<std::string>(&c)) return parse_date(*s);
  return std::nullopt;
}

}  // namespace

Cell binary_cells(BinOp op, const Cell& a, const Cell& b) {
  if (op == BinOp::And || op == BinOp::Or) {
    bool x = !is_null(a) && truthy(a);
    bool y = !is_null(b) && truthy(b);
    return op == BinOp::And ? (x && y) : (x || y);
  }
  if (is_comparison(op)) {
    if (is_null(a) || is_null(b)) return false;
    if (numeric_cell(a) && numeric_cell(b)) {
      if (int_like(a) && int_like(b)) return compare_op(op, as_int(a), as_int(b));
      return compare_op(op, static_cast<long double>(as_double(a)), static_cast<long double>(as_double(b)));
    }
    if (a.index() == 4 && b.index() == 4) {
      return compare_op(op, std::get<std::string>(a), std::get<std::string>(b));
    }
    if (a.index() == 5 || b.index() == 5) {
      auto x = as_date(a);
      auto y = as_date(b);
      if (x && y) return compare_op(op, *x, *y);
    }
    mismatch(op, std::string(dtype_name(cell_dtype(a))), std::string(dtype_name(cell_dtype(b))));
  }
  if (is_null(a) || is_null(b)) return std::monostate{};
  if (numeric_cell(a) && numeric_cell(b)) {
    if (op == BinOp::Div) return as_double(a) / as_double(b);
    if (int_like(a) && int_like(b)) {
      std::int64_t x = as_int(a), y = as_int(b);
      switch (op) {
        case BinOp::Add: return wrap_add(x, y);
        case BinOp::Sub: return wrap_sub(x, y);
        case BinOp::Mul: return wrap_mul(x, y);
        default: break;
      }
    }
    double x = as_double(a), y = as_double(b);
    switch (op) {
      case BinOp::Add: return x + y;
      case BinOp::Sub: return x - y;
      case BinOp::Mul: return x * y;
      default: break;
    }
  }
  if (op == BinOp::Add && a.index() == 4 && b.index() == 4) {
    return std::get<std::string>(a) + std::get<std::string>(b);
  }
  mismatch(op, std::string(dtype_name(cell_dtype(a))), std::string(dtype_name(cell_dtype(b))));
}

Cell unary_cell(UnOp op, const Cell& a) {
  if (is_null(a)) return std::monostate{};
  if (op == UnOp::Not) {
    if (auto* b = std::get_if<bool>(&a)) return !*b;
    if (auto* i = std::get_if<std::int64_t>(&a)) return ~*i;
    throw TypeMismatch("bad operand type for ~: " + std::string(dtype_name(cell_dtype(a))));
  }
  if (auto* i = std::get_if<std::int64_t>(&a)) return wrap_sub(0, *i);
  if (auto* b = std::get_if<bool>(&a)) return static_cast<std::int64_t>(*b ? -1 : 0);
  if (auto* d = std::get_if<double>(&a)) return -*d;
  throw TypeMismatch("bad operand type for unary -: " + std::string(dtype_name(cell_dtype(a))));
}

namespace {

double round_double(double v, int digits) {
  if (!std::isfinite(v)) return v;
  double scale = std::pow(10.0, digits);
  double scaled = v * scale;
  if (!std::isfinite(scaled)) return v;
  return std::nearbyint(scaled) / scale;
}

}  // namespace

Cell round_cell(const Cell& a, int digits) {
  if (auto* d = std::get_if<double>(&a)) return round_double(*d, digits);
  if (auto* i = std::get_if<std::int64_t>(&a)) {
    if (digits >= 0) return *i;
    return static_cast<std::int64_t>(round_double(static_cast<double>(*i), digits));
  }
  if (is_null(a)) return a;
  throw TypeMismatch("round requires a numeric value");
}

Cell abs_cell(const Cell& a) {
  if (auto* d = std::get_if<double>(&a)) return std::fabs(*d);
  if (auto* i = std::get_if<std::int64_t>(&a)) return *i < 0 ? wrap_sub(0, *i) : *i;
  if (is_null(a)) return a;
  throw TypeMismatch("abs requires a numeric value");
}

// ---------------------------------------------------------------------------
// Aggregation

Dtype agg_result_type(AggFunc f, Dtype input) {
  switch (f) {
    case AggFunc::Sum:
      if (input.tag == TypeTag::Float64) return Dtype::float64();
      if (input.tag == TypeTag::Int64 || input.tag == TypeTag::Bool) return Dtype::int64();
      throw TypeMismatch("sum requires a numeric column, got " + std::string(dtype_name(input)));
    case AggFunc::Mean:
      if (input.numeric() || input.tag == TypeTag::Bool) return Dtype::float64();
      throw TypeMismatch("mean requires a numeric column, got " + std::string(dtype_name(input)));
    case AggFunc::Count:
    case AggFunc::Size: return Dtype::int64();
    case AggFunc::Min:
    case AggFunc::Max: return input.tag == TypeTag::Category ? Dtype::text() : input;
  }
  return input;
}

AggState::AggState(AggFunc f, Dtype input) : func_(f), input_(input) { agg_result_type(f, input); }

void AggState::add(const Column& c, std::size_t row) {
  if (func_ == AggFunc::Size) {
    ++count_;
    return;
  }
  if (c.null_at(row)) return;
  ++count_;
  switch (func_) {
    case AggFunc::Sum:
    case AggFunc::Mean:
      if (c.dtype.tag == TypeTag::Float64) {
        fsum_.add(c.floats[row]);
      } else if (c.dtype.tag == TypeTag::Bool) {
        isum_ += c.bools[row];
      } else {
        isum_ += static_cast<std::uint64_t>(c.ints[row]);
      }
      break;
    case AggFunc::Min:
    case AggFunc::Max: {
      Cell v = c.at(row);
      if (is_null(best_)) {
        best_ = std::move(v);
      } else {
        int cmp = compare_cells(v, best_);
        if ((func_ == AggFunc::Min && cmp < 0) || (func_ == AggFunc::Max && cmp > 0)) best_ = std::move(v);
      }
      break;
    }
    default: break;
  }
}

void AggState::add_cell(const Cell& v) {
  if (func_ == AggFunc::Size) {
    ++count_;
    return;
  }
  if (is_null(v)) return;
  ++count_;
  switch (func_) {
    case AggFunc::Sum:
    case AggFunc::Mean:
      if (auto* d = std::get_if<double>(&v)) {
        fsum_.add(*d);
      } else {
        isum_ += static_cast<std::uint64_t>(as_int(v));
      }
      break;
    case AggFunc::Min:
    case AggFunc::Max:
      if (is_null(best_)) {
        best_ = v;
      } else {
        int cmp = compare_cells(v, best_);
        if ((func_ == AggFunc::Min && cmp < 0) || (func_ == AggFunc::Max && cmp > 0)) best_ = v;
      }
      break;
    default: break;
  }
}

void AggState::merge(const AggState& other) {
  count_ += other.count_;
  isum_ += other.isum_;
  fsum_.merge(other.fsum_);
  if (!is_null(other.best_)) {
    if (is_null(best_)) {
      best_ = other.best_;
    } else {
      int cmp = compare_cells(other.best_, best_);
      if ((func_ == AggFunc::Min && cmp < 0) || (func_ == AggFunc::Max && cmp > 0)) best_ = other.best_;
    }
  }
}

Cell AggState::result() const {
  switch (func_) {
    case AggFunc::Count:
    case AggFunc::Size: return count_;
    case AggFunc::Sum:
      if (input_.tag == TypeTag::Float64) return fsum_.value();
      return static_cast<std::int64_t>(isum_);
    case AggFunc::Mean: {
      if (count_ == 0) return std::monostate{};
      if (input_.tag == TypeTag::Float64) return fsum_.value() / static_cast<double>(count_);
      // Integer sums are exact in 128 bits before the single rounding division.
      ExactSum s;
      auto total = static_cast<std::int64_t>(isum_);
      double hi = static_cast<double>(total);
      s.add(hi);
      s.add(static_cast<double>(total - static_cast<std::int64_t>(hi)));
      return s.value() / static_cast<double>(count_);
    }
    case AggFunc::Min:
    case AggFunc::Max: return best_;
  }
  return std::monostate{};
}

Dtype AggState::result_type() const { return agg_result_type(func_, input_); }

std::size_t AggState::state_bytes() const {
  std::size_t bytes = sizeof(AggState);
  if (auto* s = std::get_if<std::string>(&best_)) bytes += s->size();
  return bytes;
}

Cell reduce_column(AggFunc f, const Column& c) {
  AggState st(f, c.dtype);
  for (std::size_t i = 0; i < c.size(); ++i) st.add(c, i);
  return st.result();
}

// ---------------------------------------------------------------------------
// Column evaluation

namespace {

struct Operand {
  bool scalar = false;
  Cell cell;
  Dtype dtype;
  ColumnPtr column;

  bool null_at(std::size_t i) const { return scalar ? is_null(cell) : column->null_at(i); }
  Cell at(std::size_t i) const { return scalar ? cell : column->at(i); }
};

Operand scalar_operand(Cell c, Dtype t) {
  Operand o;
  o.scalar = true;
  o.cell = std::move(c);
  o.dtype = t;
  return o;
}

Operand column_operand(ColumnPtr c) {
  Operand o;
  o.dtype = c->dtype;
  o.column = std::move(c);
  return o;
}

bool int_type(Dtype t) { return t.tag == TypeTag::Int64 || t.tag == TypeTag::Bool; }
bool num_type(Dtype t) { return int_type(t) || t.tag == TypeTag::Float64; }

Dtype binary_type(BinOp op, Dtype a, Dtype b) {
  if (op == BinOp::And || op == BinOp::Or || is_comparison(op)) return Dtype::boolean();
  if (num_type(a) && num_type(b)) {
    if (op == BinOp::Div) return Dtype::float64();
    return int_type(a) && int_type(b) ? Dtype::int64() : Dtype::float64();
  }
  if (op == BinOp::Add && a.textual() && b.textual()) return Dtype::text();
  mismatch(op, std::string(dtype_name(a)), std::string(dtype_name(b)));
}

Operand eval(const Expr& e, const Frame& f);

Column broadcast(const Operand& o, std::size_t rows) {
  if (!o.scalar) return *o.column;
  ColumnBuilder b("", o.dtype.tag == TypeTag::Category ? Dtype::text() : o.dtype, rows);
  for (std::size_t i = 0; i < rows; ++i) b.append(o.cell);
  return b.finish();
}

// Numeric fast path: both operands numeric, no text involved.
Column numeric_binary(BinOp op, const Operand& a, const Operand& b, std::size_t rows, Dtype out) {
  Column res("", out);
  std::vector<std::uint8_t> valid;
  bool any_null = false;
  auto get_i = [](const Operand& o, std::size_t i) -> std::int64_t {
    if (o.scalar) return as_int(o.cell);
    return o.column->dtype.tag == TypeTag::Bool ? o.column->bools[i] : o.column->ints[i];
  };
  auto get_d = [](const Operand& o, std::size_t i) -> double {
    if (o.scalar) return as_double(o.cell);
    switch (o.column->dtype.tag) {
      case TypeTag::Float64: return o.column->floats[i];
      case TypeTag::Bool: return o.column->bools[i];
      default: return static_cast<double>(o.column->ints[i]);
    }
  };
  bool a_null_all = a.scalar && is_null(a.cell);
  bool b_null_all = b.scalar && is_null(b.cell);
  bool ints = int_type(a.dtype) && int_type(b.dtype);
  if (is_comparison(op)) res.bools.resize(rows);
  else if (out.tag == TypeTag::Int64) res.ints.resize(rows);
  else res.floats.resize(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    bool n = a_null_all || b_null_all || (!a.scalar && a.column->null_at(i)) ||
             (!b.scalar && b.column->null_at(i));
    if (is_comparison(op)) {
      if (n) continue;
      res.bools[i] = ints ? compare_op(op, get_i(a, i), get_i(b, i))
                          : compare_op(op, static_cast<long double>(get_d(a, i)),
                                       static_cast<long double>(get_d(b, i)));
      continue;
    }
    if (n) {
      if (!any_null) {
        any_null = true;
        valid.assign(rows, 1);
      }
      valid[i] = 0;
      continue;
    }
    if (out.tag == TypeTag::Int64) {
      std::int64_t x = get_i(a, i), y = get_i(b, i);
      res.ints[i] = op == BinOp::Add ? wrap_add(x, y) : op == BinOp::Sub ? wrap_sub(x, y) : wrap_mul(x, y);
    } else {
      double x = get_d(a, i), y = get_d(b, i);
      switch (op) {
        case BinOp::Add: res.floats[i] = x + y; break;
        case BinOp::Sub: res.floats[i] = x - y; break;
        case BinOp::Mul: res.floats[i] = x * y; break;
        default: res.floats[i] = x / y; break;
      }
    }
  }
  res.valid = std::move(valid);
  return res;
}

Operand eval_binary(const Expr& e, const Frame& f) {
  Operand a = eval(*e.args[0], f);
  Operand b = eval(*e.args[1], f);
  std::size_t rows = f.rows();
  if (a.scalar && b.scalar) {
    Cell r = binary_cells(e.bop, a.cell, b.cell);
    return scalar_operand(r, binary_type(e.bop, a.dtype, b.dtype));
  }
  bool date_vs_text = (a.dtype.tag == TypeTag::Date && b.dtype.textual()) ||
                      (b.dtype.tag == TypeTag::Date && a.dtype.textual());
  Dtype out = date_vs_text && is_comparison(e.bop) ? Dtype::boolean()
                                                     : binary_type(e.bop, a.dtype, b.dtype);
  if (e.bop != BinOp::And && e.bop != BinOp::Or && num_type(a.dtype) && num_type(b.dtype) &&
      (!a.scalar || is_null(a.cell) || numeric_cell(a.cell)) &&
      (!b.scalar || is_null(b.cell) || numeric_cell(b.cell))) {
    return column_operand(make_column(numeric_binary(e.bop, a, b, rows, out)));
  }
  if (is_comparison(e.bop) && a.dtype.textual() && b.dtype.textual()) {
    Column res("", Dtype::boolean());
    res.bools.resize(rows);
    for (std::size_t i = 0; i < rows; ++i) {
      if (a.null_at(i) || b.null_at(i)) continue;
      const std::string& x = a.scalar ? std::get<std::string>(a.cell) : a.column->text_at(i);
      const std::string& y = b.scalar ? std::get<std::string>(b.cell) : b.column->text_at(i);
      res.bools[i] = compare_op(e.bop, x, y);
    }
    return column_operand(make_column(std::move(res)));
  }
  if (is_comparison(e.bop)) {
    // Validate the operand kinds once so empty frames still report mismatches.
    bool ok = (a.dtype.tag == TypeTag::Date || b.dtype.tag == TypeTag::Date)
                  ? (date_vs_text || a.dtype == b.dtype)
                  : (a.dtype.tag == TypeTag::Bool && b.dtype.tag == TypeTag::Bool);
    if (!ok) mismatch(e.bop, std::string(dtype_name(a.dtype)), std::string(dtype_name(b.dtype)));
    if (date_vs_text && (a.scalar || b.scalar)) {
      const Operand& s = a.scalar ? a : b;
      if (!is_null(s.cell) && !as_date(s.cell)) {
        throw TypeMismatch("cannot compare date with '" + format_cell(s.cell) + "'");
      }
    }
  }
  ColumnBuilder out_b("", out, rows);
  for (std::size_t i = 0; i < rows; ++i) out_b.append(binary_cells(e.bop, a.at(i), b.at(i)));
  return column_operand(make_column(out_b.finish()));
}

template <typename Fn>
Operand map_rows(const Operand& a, Dtype out, std::size_t rows, Fn fn) {
  if (a.scalar) return scalar_operand(fn(a.cell), out);
  ColumnBuilder b("", out, rows);
  for (std::size_t i = 0; i < rows; ++i) b.append(fn(a.column->at(i)));
  return column_operand(make_column(b.finish()));
}

Operand eval(const Expr& e, const Frame& f) {
  std::size_t rows = f.rows();
  switch (e.kind) {
    case ExprKind::Column: return column_operand(f.column_ptr(e.name));
    case ExprKind::Literal: return scalar_operand(e.value, cell_dtype(e.value));
    case ExprKind::Binary: return eval_binary(e, f);
    case ExprKind::Unary: {
      Operand a = eval(*e.args[0], f);
      Dtype out;
      if (e.uop == UnOp::Not) {
        if (a.dtype.tag != TypeTag::Bool && a.dtype.tag != TypeTag::Int64) {
          throw TypeMismatch("bad operand type for ~: " + std::string(dtype_name(a.dtype)));
        }
        out = a.dtype;
      } else {
        if (!num_type(a.dtype)) {
          throw TypeMismatch("bad operand type for unary -: " + std::string(dtype_name(a.dtype)));
        }
        out = a.dtype.tag == TypeTag::Float64 ? Dtype::float64() : Dtype::int64();
      }
      UnOp op = e.uop;
      return map_rows(a, out, rows, [op](const Cell& c) { return unary_cell(op, c); });
    }
    case ExprKind::DatePart: {
      Operand a = eval(*e.args[0], f);
      if (a.dtype.tag != TypeTag::Date) {
        throw TypeMismatch(".dt." + e.name + " requires a date column, got " +
                           std::string(dtype_name(a.dtype)));
      }
      std::string part = e.name;
      return map_rows(a, Dtype::int64(), rows, [&part](const Cell& c) -> Cell {
        if (is_null(c)) return c;
        return static_cast<std::int64_t>(date_part(std::get<Date>(c), part));
      });
    }
    case ExprKind::Abs: {
      Operand a = eval(*e.args[0], f);
      if (!num_type(a.dtype)) throw TypeMismatch("abs requires a numeric column");
      Dtype out = a.dtype.tag == TypeTag::Float64 ? Dtype::float64() : Dtype::int64();
      return map_rows(a, out, rows, [](const Cell& c) -> Cell {
        if (auto* b = std::get_if<bool>(&c)) return static_cast<std::int64_t>(*b);
        return abs_cell(c);
      });
    }
    case ExprKind::Round: {
      Operand a = eval(*e.args[0], f);
      if (!num_type(a.dtype)) throw TypeMismatch("round requires a numeric column");
      Dtype out = a.dtype.tag == TypeTag::Float64 ? Dtype::float64() : Dtype::int64();
      int digits = e.digits;
      return map_rows(a, out, rows, [digits](const Cell& c) -> Cell {
        if (auto* b = std::get_if<bool>(&c)) return static_cast<std::int64_t>(*b);
        return round_cell(c, digits);
      });
    }
    case ExprKind::FillNa: {
      Operand a = eval(*e.args[0], f);
      Dtype out = a.dtype.tag == TypeTag::Category ? Dtype::text() : a.dtype;
      const Cell& v = e.value;
      if (out.tag == TypeTag::Int64 && v.index() == 2) out = Dtype::float64();
      bool ok = (num_type(out) && numeric_cell(v)) || (out.textual() && v.index() == 4) ||
                (out.tag == TypeTag::Date && as_date(v)) || (out.tag == TypeTag::Bool && v.index() == 3);
      if (!ok) {
        throw TypeMismatch("fillna value " + format_cell(v) + " does not fit " +
                           std::string(dtype_name(a.dtype)) + " column");
      }
      Cell fill = out.tag == TypeTag::Date ? Cell(*as_date(v)) : v;
      return map_rows(a, out, rows, [&fill](const Cell& c) { return is_null(c) ? fill : c; });
    }
    case ExprKind::Cast: {
      Operand a = eval(*e.args[0], f);
      if (a.scalar) {
        Column one = cast_column(broadcast(a, 1), e.to);
        return scalar_operand(one.at(0), e.to.tag == TypeTag::Category ? Dtype::text() : e.to);
      }
      return column_operand(make_column(cast_column(*a.column, e.to)));
    }
    case ExprKind::Aggregate: {
      Operand a = eval(*e.args[0], f);
      Dtype out = agg_result_type(e.agg, a.dtype);
      if (a.scalar) {
        Column c = broadcast(a, rows);
        return scalar_operand(reduce_column(e.agg, c), out);
      }
      return scalar_operand(reduce_column(e.agg, *a.column), out);
    }
  }
  throw InternalError("unknown expression kind");
}

}  // namespace

Column eval_column(const Expr& e, const Frame& f) {
  Operand o = eval(e, f);
  Column c = broadcast(o, f.rows());
  c.name.clear();
  return c;
}

Cell eval_scalar(const Expr& e, const Frame& f) {
  if (!is_scalar_expr(e)) throw InternalError("expression is not scalar: " + to_string(e));
  Operand o = eval(e, f);
  return o.cell;
}

}  // namespace lfp
