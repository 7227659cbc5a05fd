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
#include <stdexcept>
#include <string>

namespace lfp {

/// Location in a script; line and col are 1-based, 0 means "unknown".
struct SourceSpan {
  int line = 0;
  int col = 0;

  bool known() const { return line > 0; }
};

/// Base of every error raised by the engine. User errors map to exit code 1,
/// internal invariant breaches to exit code 2.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what, SourceSpan span = {})
      : std::runtime_error(what), span_(span) {}

  virtual bool internal() const { return false; }
  const SourceSpan& span() const { return span_; }
  void set_span(SourceSpan span) {
    if (!span_.known()) span_ = span;
  }

 private:
  SourceSpan span_;
};

class MissingFile : public Error {
 public:
  explicit MissingFile(const std::string& path)
      : Error("missing file: " + path), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class UnknownColumn : public Error {
 public:
  explicit UnknownColumn(const std::string& name)
      : Error("unknown column: " + name), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class TypeCoercionError : public Error {
 public:
  TypeCoercionError(std::int64_t row, const std::string& column, const std::string& cell)
      : Error("cannot coerce value '" + cell + "' in column " + column + " at row " +
              std::to_string(row)),
        row_(row),
        column_(column) {}
  std::int64_t row() const { return row_; }
  const std::string& column() const { return column_; }

 private:
  std::int64_t row_;
  std::string column_;
};

class TypeMismatch : public Error {
 public:
  using Error::Error;
};

class EmptyKeyList : public Error {
 public:
  explicit EmptyKeyList(const std::string& op) : Error(op + " requires at least one key") {}
};

class MalformedCsv : public Error {
 public:
  MalformedCsv(const std::string& path, std::int64_t line, const std::string& why)
      : Error(path + ":" + std::to_string(line) + ": malformed csv: " + why), line_(line) {}
  std::int64_t line() const { return line_; }

 private:
  std::int64_t line_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(SourceSpan span, const std::string& expected, const std::string& found)
      : Error("syntax error: expected " + expected + ", found " + found, span),
        expected_(expected) {}
  const std::string& expected() const { return expected_; }

 private:
  std::string expected_;
};

class UnknownExternal : public Error {
 public:
  UnknownExternal(const std::string& name, SourceSpan span)
      : Error("unknown external module: " + name, span) {}
};

class SchemaUnknown : public Error {
 public:
  using Error::Error;
};

class ExecutionError : public Error {
 public:
  ExecutionError(std::int64_t uid, const std::string& what)
      : Error("node " + std::to_string(uid) + ": " + what), uid_(uid) {}
  std::int64_t uid() const { return uid_; }

 private:
  std::int64_t uid_;
};

class MemoryBudgetExceeded : public Error {
 public:
  MemoryBudgetExceeded(std::int64_t uid, std::int64_t needed, std::int64_t budget)
      : Error("memory budget exceeded at node " + std::to_string(uid) + ": needs " +
              std::to_string(needed) + " bytes, budget " + std::to_string(budget)),
        uid_(uid) {}
  std::int64_t uid() const { return uid_; }

 private:
  std::int64_t uid_;
};

/// A runtime value or name that a script refers to but the engine cannot use.
class ScriptError : public Error {
 public:
  using Error::Error;
};

class InternalError : public Error {
 public:
  using Error::Error;
  bool internal() const override { return true; }
};

class UnresolvedUid : public InternalError {
 public:
  explicit UnresolvedUid(std::int64_t uid)
      : InternalError("print references uncomputed node " + std::to_string(uid)) {}
};

}  // namespace lfp
