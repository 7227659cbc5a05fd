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
#include <memory>
#include <string>
#include <vector>

#include "lfp/errors.hpp"

namespace lfp::script {

enum class ExprKind { Name, Int, Float, Str, FStr, Bool, None, List, Dict, Attr, Call, Index, Binary, Unary };

struct Expr;
using ExprPtr = std::shared_ptr<Expr>;

struct Keyword {
  std::string name;
  ExprPtr value;
};

/// Literal text when `expr` is null, else an interpolated expression.
struct FPart {
  std::string text;
  ExprPtr expr;
};

struct Expr {
  ExprKind kind = ExprKind::None;
  SourceSpan span;
  std::string text;  // identifier, attribute, string value, number lexeme, operator
  bool flag = false;  // Bool value
  ExprPtr object;     // Attr/Call/Index base, Binary lhs, Unary operand
  ExprPtr rhs;        // Binary rhs, Index key
  std::vector<ExprPtr> items;  // List elements, Call positional args, Dict keys
  std::vector<ExprPtr> values;  // Dict values
  std::vector<Keyword> keywords;
  std::vector<FPart> parts;
};

enum class StmtKind { Use, Flush, Print, Assign, SetItem, ExprStmt, If, While };

struct Stmt;
using StmtPtr = std::shared_ptr<Stmt>;

struct Stmt {
  StmtKind kind = StmtKind::ExprStmt;
  SourceSpan span;
  std::string target;  // Assign/SetItem variable, Use directive
  std::string column;  // SetItem column
  ExprPtr value;       // Assign/SetItem/ExprStmt value, If/While condition
  std::vector<ExprPtr> args;  // Print
  std::vector<StmtPtr> body;
  std::vector<StmtPtr> orelse;
};

struct Program {
  std::vector<StmtPtr> body;
};

Program parse(const std::string& src);
std::string emit(const Program& p);
std::string emit_expr(const Expr& e);

bool equal(const Expr& a, const Expr& b);
bool equal(const Program& a, const Program& b);

// Builders used by rewrites and tests.
ExprPtr name(std::string id);
ExprPtr str(std::string s);
ExprPtr list_of(std::vector<ExprPtr> items);
ExprPtr attr(ExprPtr obj, std::string member);
ExprPtr call(ExprPtr callee, std::vector<ExprPtr> args, std::vector<Keyword> keywords = {});
ExprPtr deep_copy(const ExprPtr& e);
StmtPtr deep_copy(const StmtPtr& s);
Program deep_copy(const Program& p);

/// "df.head" style call target: the method name when e is a call on an attribute.
const Expr* method_call(const Expr& e, const std::string& method);
const Expr* keyword(const Expr& call, const std::string& name);

}  // namespace lfp::script
