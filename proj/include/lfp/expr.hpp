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
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "lfp/cell.hpp"
#include "lfp/frame.hpp"

namespace lfp {

enum class ExprKind { Column, Literal, Binary, Unary, DatePart, Abs, Round, FillNa, Cast, Aggregate };
enum class BinOp { Add, Sub, Mul, Div, Eq, Ne, Lt, Le, Gt, Ge, And, Or };
enum class UnOp { Neg, Not };
enum class AggFunc { Sum, Mean, Count, Min, Max, Size };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Row expression over the columns of one frame. An Aggregate node reduces its
/// argument over the whole frame and broadcasts the result.
struct Expr {
  ExprKind kind = ExprKind::Literal;
  std::string name;  // column name or date part
  Cell value;        // literal or fillna value
  BinOp bop = BinOp::Add;
  UnOp uop = UnOp::Neg;
  AggFunc agg = AggFunc::Sum;
  int digits = 0;
  Dtype to;
  std::vector<ExprPtr> args;
};

ExprPtr col(std::string name);
ExprPtr lit(Cell value);
ExprPtr binary(BinOp op, ExprPtr a, ExprPtr b);
ExprPtr unary(UnOp op, ExprPtr a);
ExprPtr date_part(std::string part, ExprPtr a);
ExprPtr abs_of(ExprPtr a);
ExprPtr round_of(ExprPtr a, int digits);
ExprPtr fillna_of(ExprPtr a, Cell value);
ExprPtr cast_of(ExprPtr a, Dtype to);
ExprPtr aggregate(AggFunc f, ExprPtr a);

std::string_view binop_symbol(BinOp op);
std::string_view agg_name(AggFunc f);
std::optional<AggFunc> parse_agg(std::string_view name);
bool is_comparison(BinOp op);

/// Columns referenced anywhere in the expression.
std::set<std::string> used_columns(const Expr& e);
void collect_columns(const Expr& e, std::set<std::string>& out);
bool has_aggregate(const Expr& e);
/// True when every column reference sits under an Aggregate.
bool is_scalar_expr(const Expr& e);
/// Boolean tree of comparisons joined by &, |, ~.
bool is_predicate(const Expr& e);
ExprPtr rename_columns(const ExprPtr& e, const std::map<std::string, std::string>& mapping);
bool exprs_equal(const Expr& a, const Expr& b);
std::string to_string(const Expr& e);

/// Evaluates e over every row of f. The result column is unnamed.
Column eval_column(const Expr& e, const Frame& f);
/// Evaluates a scalar expression (see is_scalar_expr) over f.
Cell eval_scalar(const Expr& e, const Frame& f);
/// Reduces a column with nulls skipped.
Cell reduce_column(AggFunc f, const Column& c);

/// Scalar-level operators shared with the script interpreter.
Cell binary_cells(BinOp op, const Cell& a, const Cell& b);
Cell unary_cell(UnOp op, const Cell& a);
Cell round_cell(const Cell& a, int digits);
Cell abs_cell(const Cell& a);
bool truthy(const Cell& c);
Dtype cell_dtype(const Cell& c);

/// Accumulates one aggregate incrementally; states merge for partial aggregation.
class AggState {
 public:
  AggState() = default;
  AggState(AggFunc f, Dtype input);
  void add(const Column& c, std::size_t row);
  void add_cell(const Cell& c);
  void merge(const AggState& other);
  Cell result() const;
  Dtype result_type() const;
  std::size_t state_bytes() const;

 private:
  AggFunc func_ = AggFunc::Sum;
  Dtype input_;
  ExactSum fsum_;
  std::uint64_t isum_ = 0;
  std::int64_t count_ = 0;
  Cell best_;
};

Dtype agg_result_type(AggFunc f, Dtype input);

}  // namespace lfp
