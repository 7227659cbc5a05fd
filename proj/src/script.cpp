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

#include "lfp/script.hpp"

#include <cctype>
#include <set>

namespace lfp::script {

namespace {

// ---------------------------------------------------------------------------
// Lexer

enum class Tok { Name, Int, Float, Str, FStr, Op, Newline, Indent, Dedent, End };

struct Token {
  Tok type = Tok::End;
  std::string text;
  SourceSpan span;
};

std::string describe(const Token& t) {
  switch (t.type) {
    case Tok::Name: return "'" + t.text + "'";
    case Tok::Int:
    case Tok::Float: return "number " + t.text;
    case Tok::Str:
    case Tok::FStr: return "string";
    case Tok::Op: return "'" + t.text + "'";
    case Tok::Newline: return "end of line";
    case Tok::Indent: return "indent";
    case Tok::Dedent: return "dedent";
    case Tok::End: return "end of input";
  }
  return "?";
}

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) {}

  std::vector<Token> run() {
    indents_.push_back(0);
    at_line_start_ = true;
    while (pos_ < src_.size()) {
      if (at_line_start_ && depth_ == 0) {
        if (handle_indent()) continue;
      }
      char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
        continue;
      }
      if (c == '\n') {
        if (depth_ == 0 && !tokens_.empty() && tokens_.back().type != Tok::Newline &&
            tokens_.back().type != Tok::Indent && tokens_.back().type != Tok::Dedent) {
          push(Tok::Newline, "", here());
        }
        advance();
        at_line_start_ = true;
        continue;
      }
      if (c == ' ' || c == '\r') {
        advance();
        continue;
      }
      if (c == '\t') throw SyntaxError(here(), "spaces", "tab character");
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        if ((c == 'f' || c == 'F') && pos_ + 1 < src_.size() && (src_[pos_ + 1] == '\'' || src_[pos_ + 1] == '"')) {
          SourceSpan s = here();
          advance();
          push(Tok::FStr, read_string(true), s);
          continue;
        }
        SourceSpan s = here();
        std::string id;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
          id += src_[pos_];
          advance();
        }
        push(Tok::Name, id, s);
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) ||
          (c == '.' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
        lex_number();
        continue;
      }
      if (c == '\'' || c == '"') {
        SourceSpan s = here();
        push(Tok::Str, read_string(false), s);
        continue;
      }
      lex_op();
    }
    if (!tokens_.empty() && tokens_.back().type != Tok::Newline && tokens_.back().type != Tok::Dedent &&
        tokens_.back().type != Tok::Indent) {
      push(Tok::Newline, "", here());
    }
    while (indents_.size() > 1) {
      indents_.pop_back();
      push(Tok::Dedent, "", here());
    }
    push(Tok::End, "", here());
    return std::move(tokens_);
  }

 private:
  SourceSpan here() const { return {line_, col_}; }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void push(Tok t, std::string text, SourceSpan s) { tokens_.push_back({t, std::move(text), s}); }

  /// Returns true when the line was blank or a comment and has been consumed.
  bool handle_indent() {
    std::size_t width = 0;
    std::size_t p = pos_;
    while (p < src_.size() && src_[p] == ' ') {
      ++width;
      ++p;
    }
    if (p < src_.size() && src_[p] == '\t') throw SyntaxError({line_, static_cast<int>(width) + 1}, "spaces", "tab character");
    if (p >= src_.size() || src_[p] == '\n' || src_[p] == '#' || src_[p] == '\r') {
      while (pos_ < p) advance();
      while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      if (pos_ < src_.size()) advance();
      return true;
    }
    while (pos_ < p) advance();
    at_line_start_ = false;
    if (width > indents_.back()) {
      indents_.push_back(width);
      push(Tok::Indent, "", {line_, 1});
    } else {
      while (width < indents_.back()) {
        indents_.pop_back();
        push(Tok::Dedent, "", {line_, 1});
      }
      if (width != indents_.back()) throw SyntaxError({line_, static_cast<int>(width) + 1}, "consistent indentation", "unindent");
    }
    return false;
  }

  void lex_number() {
    SourceSpan s = here();
    std::string text;
    bool is_float = false;
    auto digits = [&] {
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        text += src_[pos_];
        advance();
      }
    };
    digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      is_float = true;
      text += '.';
      advance();
      digits();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_;
      std::string exp = "e";
      std::size_t p = pos_ + 1;
      if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) exp += src_[p++];
      if (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) {
        is_float = true;
        while (pos_ < p) advance();
        text += exp;
        digits();
      } else {
        pos_ = save;
      }
    }
    push(is_float ? Tok::Float : Tok::Int, text, s);
  }

  char escape(char e) {
    switch (e) {
      case 'n': return '\n';
      case 't': return '\t';
      case 'r': return '\r';
      case '0': return '\0';
      default: return e;
    }
  }

  /// Reads a quoted literal starting at the opening quote. For f-strings the
  /// raw text inside braces is kept verbatim so the parser can split it.
  std::string read_string(bool fstring) {
    char quote = src_[pos_];
    SourceSpan start = here();
    advance();
    std::string out;
    int braces = 0;
    while (true) {
      if (pos_ >= src_.size() || src_[pos_] == '\n') throw SyntaxError(start, "closing quote", "end of line");
      char c = src_[pos_];
      if (fstring && braces > 0) {
        if (c == '\'' || c == '"') {
          char q = c;
          out += c;
          advance();
          while (pos_ < src_.size() && src_[pos_] != q && src_[pos_] != '\n') {
            out += src_[pos_];
            advance();
          }
          if (pos_ >= src_.size() || src_[pos_] != q) throw SyntaxError(start, "closing quote", "end of line");
          out += q;
          advance();
          continue;
        }
        if (c == '{') ++braces;
        if (c == '}') --braces;
        out += c;
        advance();
        continue;
      }
      if (c == quote) {
        advance();
        break;
      }
      if (c == '\\') {
        advance();
        if (pos_ >= src_.size()) throw SyntaxError(start, "closing quote", "end of input");
        char e = escape(src_[pos_]);
        if (fstring && (e == '{' || e == '}')) out += e;
        out += e;
        advance();
        continue;
      }
      if (fstring && c == '{') {
        if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '{') {
          out += "{{";
          advance();
          advance();
          continue;
        }
        ++braces;
      }
      out += c;
      advance();
    }
    if (braces != 0) throw SyntaxError(start, "'}'", "end of string");
    return out;
  }

  void lex_op() {
    static const std::vector<std::string> two = {"==", "!=", "<=", ">="};
    SourceSpan s = here();
    if (pos_ + 1 < src_.size()) {
      std::string pair = src_.substr(pos_, 2);
      for (const auto& op : two) {
        if (pair == op) {
          advance();
          advance();
          push(Tok::Op, op, s);
          return;
        }
      }
    }
    char c = src_[pos_];
    static const std::string singles = "<>+-*/&|~()[]{},:.=";
    if (singles.find(c) == std::string::npos) throw SyntaxError(s, "token", std::string("'") + c + "'");
    if (c == '(' || c == '[' || c == '{') ++depth_;
    if ((c == ')' || c == ']' || c == '}') && depth_ > 0) --depth_;
    advance();
    push(Tok::Op, std::string(1, c), s);
  }

  const std::string& src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  int depth_ = 0;
  bool at_line_start_ = true;
  std::vector<std::size_t> indents_;
  std::vector<Token> tokens_;
};

// ---------------------------------------------------------------------------
// Parser

const std::set<std::string>& reserved() {
  static const std::set<std::string> words = {"if", "else", "elif", "while", "use", "flush", "print", "True", "False", "None"};
  return words;
}

ExprPtr make(ExprKind k, SourceSpan s) {
  auto e = std::make_shared<Expr>();
  e->kind = k;
  e->span = s;
  return e;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : t_(std::move(toks)) {}

  Program program() {
    Program p;
    while (peek().type != Tok::End) {
      if (peek().type == Tok::Newline) {
        ++i_;
        continue;
      }
      p.body.push_back(statement());
    }
    return p;
  }

  ExprPtr lone_expression() {
    ExprPtr e = expr();
    while (peek().type == Tok::Newline) ++i_;
    if (peek().type != Tok::End) fail("end of expression");
    return e;
  }

 private:
  const Token& peek(std::size_t k = 0) const { return t_[std::min(i_ + k, t_.size() - 1)]; }
  bool is_op(const std::string& op, std::size_t k = 0) const { return peek(k).type == Tok::Op && peek(k).text == op; }
  bool is_word(const std::string& w) const { return peek().type == Tok::Name && peek().text == w; }
  [[noreturn]] void fail(const std::string& expected) const {
    throw SyntaxError(peek().span, expected, describe(peek()));
  }
  const Token& take() { return t_[i_++]; }
  void expect_op(const std::string& op) {
    if (!is_op(op)) fail("'" + op + "'");
    ++i_;
  }
  void expect(Tok type, const std::string& what) {
    if (peek().type != type) fail(what);
    ++i_;
  }
  void end_of_statement() {
    if (peek().type == Tok::End) return;
    expect(Tok::Newline, "end of line");
  }

  std::vector<StmtPtr> block() {
    expect(Tok::Newline, "end of line");
    expect(Tok::Indent, "indented block");
    std::vector<StmtPtr> out;
    while (peek().type != Tok::Dedent && peek().type != Tok::End) out.push_back(statement());
    if (peek().type == Tok::Dedent) ++i_;
    return out;
  }

  StmtPtr conditional(SourceSpan s) {
    auto st = std::make_shared<Stmt>();
    st->kind = StmtKind::If;
    st->span = s;
    st->value = expr();
    expect_op(":");
    st->body = block();
    if (is_word("elif")) {
      SourceSpan es = take().span;
      st->orelse.push_back(conditional(es));
    } else if (is_word("else")) {
      ++i_;
      expect_op(":");
      st->orelse = block();
    }
    return st;
  }

  StmtPtr statement() {
    auto st = std::make_shared<Stmt>();
    st->span = peek().span;
    if (is_word("if")) {
      ++i_;
      return conditional(st->span);
    }
    if (is_word("while")) {
      ++i_;
      st->kind = StmtKind::While;
      st->value = expr();
      expect_op(":");
      st->body = block();
      return st;
    }
    if (is_word("use")) {
      ++i_;
      if (peek().type != Tok::Name) fail("directive name");
      st->kind = StmtKind::Use;
      st->target = take().text;
      end_of_statement();
      return st;
    }
    if (is_word("flush") && is_op("(", 1)) {
      i_ += 2;
      expect_op(")");
      st->kind = StmtKind::Flush;
      end_of_statement();
      return st;
    }
    if (is_word("print") && is_op("(", 1)) {
      i_ += 2;
      st->kind = StmtKind::Print;
      while (!is_op(")")) {
        st->args.push_back(expr());
        if (!is_op(",")) break;
        ++i_;
      }
      expect_op(")");
      end_of_statement();
      return st;
    }
    if (peek().type == Tok::Name && (is_word("else") || is_word("elif"))) fail("statement");
    ExprPtr e = expr();
    if (is_op("=")) {
      ++i_;
      if (e->kind == ExprKind::Name) {
        st->kind = StmtKind::Assign;
        st->target = e->text;
      } else if (e->kind == ExprKind::Index && e->object->kind == ExprKind::Name && e->rhs->kind == ExprKind::Str) {
        st->kind = StmtKind::SetItem;
        st->target = e->object->text;
        st->column = e->rhs->text;
      } else {
        throw SyntaxError(e->span, "assignable target", "expression");
      }
      st->value = expr();
      end_of_statement();
      return st;
    }
    if (e->kind != ExprKind::Call) throw SyntaxError(e->span, "statement", "bare expression");
    st->kind = StmtKind::ExprStmt;
    st->value = e;
    end_of_statement();
    return st;
  }

  ExprPtr binary_node(const Token& op, ExprPtr a, ExprPtr b) {
    ExprPtr e = make(ExprKind::Binary, op.span);
    e->text = op.text;
    e->object = std::move(a);
    e->rhs = std::move(b);
    return e;
  }

  ExprPtr expr() { return or_expr(); }

  ExprPtr or_expr() {
    ExprPtr e = and_expr();
    while (is_op("|")) {
      const Token& op = take();
      e = binary_node(op, e, and_expr());
    }
    return e;
  }

  ExprPtr and_expr() {
    ExprPtr e = not_expr();
    while (is_op("&")) {
      const Token& op = take();
      e = binary_node(op, e, not_expr());
    }
    return e;
  }

  ExprPtr not_expr() {
    if (is_op("~")) {
      const Token& op = take();
      ExprPtr e = make(ExprKind::Unary, op.span);
      e->text = "~";
      e->object = not_expr();
      return e;
    }
    return comparison();
  }

  ExprPtr comparison() {
    ExprPtr e = arith();
    static const std::set<std::string> ops = {"==", "!=", "<", "<=", ">", ">="};
    if (peek().type == Tok::Op && ops.count(peek().text)) {
      const Token& op = take();
      e = binary_node(op, e, arith());
      if (peek().type == Tok::Op && ops.count(peek().text)) fail("parenthesized comparison");
    }
    return e;
  }

  ExprPtr arith() {
    ExprPtr e = term();
    while (is_op("+") || is_op("-")) {
      const Token& op = take();
      e = binary_node(op, e, term());
    }
    return e;
  }

  ExprPtr term() {
    ExprPtr e = unary();
    while (is_op("*") || is_op("/")) {
      const Token& op = take();
      e = binary_node(op, e, unary());
    }
    return e;
  }

  ExprPtr unary() {
    if (is_op("-")) {
      const Token& op = take();
      ExprPtr e = make(ExprKind::Unary, op.span);
      e->text = "-";
      e->object = unary();
      return e;
    }
    return postfix();
  }

  ExprPtr postfix() {
    ExprPtr e = atom();
    while (true) {
      if (is_op(".")) {
        SourceSpan s = take().span;
        if (peek().type != Tok::Name) fail("attribute name");
        ExprPtr a = make(ExprKind::Attr, s);
        a->object = e;
        a->text = take().text;
        e = a;
      } else if (is_op("(")) {
        SourceSpan s = take().span;
        ExprPtr c = make(ExprKind::Call, s);
        c->object = e;
        arguments(*c);
        e = c;
      } else if (is_op("[")) {
        SourceSpan s = take().span;
        ExprPtr ix = make(ExprKind::Index, s);
        ix->object = e;
        ix->rhs = expr();
        expect_op("]");
        e = ix;
      } else {
        return e;
      }
    }
  }

  void arguments(Expr& c) {
    while (!is_op(")")) {
      if (peek().type == Tok::Name && is_op("=", 1)) {
        std::string key = take().text;
        ++i_;
        c.keywords.push_back({key, expr()});
      } else {
        if (!c.keywords.empty()) fail("keyword argument");
        c.items.push_back(expr());
      }
      if (!is_op(",")) break;
      ++i_;
    }
    expect_op(")");
  }

  ExprPtr atom() {
    const Token& t = peek();
    switch (t.type) {
      case Tok::Name: {
        ++i_;
        if (t.text == "True" || t.text == "False") {
          ExprPtr e = make(ExprKind::Bool, t.span);
          e->flag = t.text == "True";
          return e;
        }
        if (t.text == "None") return make(ExprKind::None, t.span);
        if (reserved().count(t.text)) {
          --i_;
          fail("expression");
        }
        ExprPtr e = make(ExprKind::Name, t.span);
        e->text = t.text;
        return e;
      }
      case Tok::Int:
      case Tok::Float: {
        ++i_;
        ExprPtr e = make(t.type == Tok::Int ? ExprKind::Int : ExprKind::Float, t.span);
        e->text = t.text;
        return e;
      }
      case Tok::Str: {
        ++i_;
        ExprPtr e = make(ExprKind::Str, t.span);
        e->text = t.text;
        return e;
      }
      case Tok::FStr: {
        ++i_;
        return fstring(t);
      }
      case Tok::Op:
        if (t.text == "(") {
          ++i_;
          ExprPtr e = expr();
          expect_op(")");
          return e;
        }
        if (t.text == "[") {
          ++i_;
          ExprPtr e = make(ExprKind::List, t.span);
          while (!is_op("]")) {
            e->items.push_back(expr());
            if (!is_op(",")) break;
            ++i_;
          }
          expect_op("]");
          return e;
        }
        if (t.text == "{") {
          ++i_;
          ExprPtr e = make(ExprKind::Dict, t.span);
          while (!is_op("}")) {
            e->items.push_back(expr());
            expect_op(":");
            e->values.push_back(expr());
            if (!is_op(",")) break;
            ++i_;
          }
          expect_op("}");
          return e;
        }
        break;
      default: break;
    }
    fail("expression");
  }

  ExprPtr fstring(const Token& t) {
    ExprPtr e = make(ExprKind::FStr, t.span);
    const std::string& raw = t.text;
    std::string lit;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      char c = raw[i];
      if ((c == '{' || c == '}') && i + 1 < raw.size() && raw[i + 1] == c) {
        lit += c;
        ++i;
        continue;
      }
      if (c == '}') throw SyntaxError(t.span, "'{' before '}'", "'}'");
      if (c != '{') {
        lit += c;
        continue;
      }
      int depth = 1;
      std::size_t j = i + 1;
      char quote = 0;
      for (; j < raw.size(); ++j) {
        char d = raw[j];
        if (quote) {
          if (d == quote) quote = 0;
          continue;
        }
        if (d == '\'' || d == '"') quote = d;
        if (d == '{') ++depth;
        if (d == '}' && --depth == 0) break;
      }
      if (!lit.empty()) e->parts.push_back({lit, nullptr});
      lit.clear();
      std::string inner = raw.substr(i + 1, j - i - 1);
      Lexer lx(inner);
      std::vector<Token> toks = lx.run();
      for (auto& tk : toks) tk.span = t.span;
      Parser sub(std::move(toks));
      e->parts.push_back({"", sub.lone_expression()});
      i = j;
    }
    if (!lit.empty()) e->parts.push_back({lit, nullptr});
    return e;
  }

  std::vector<Token> t_;
  std::size_t i_ = 0;
};

// ---------------------------------------------------------------------------
// Emitter

int precedence(const Expr& e) {
  if (e.kind == ExprKind::Binary) {
    const std::string& op = e.text;
    if (op == "|") return 1;
    if (op == "&") return 2;
    if (op == "+" || op == "-") return 5;
    if (op == "*" || op == "/") return 6;
    return 4;
  }
  if (e.kind == ExprKind::Unary) return e.text == "~" ? 3 : 7;
  return 8;
}

std::string quote(const std::string& s, bool fstring) {
  std::string out = fstring ? "f'" : "'";
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\'': out += "\\'"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      case '{':
      case '}':
        out += c;
        if (fstring) out += c;
        break;
      default: out += c;
    }
  }
  return out + "'";
}

void emit_into(const Expr& e, std::string& out);

void emit_child(const Expr& child, int min_prec, std::string& out) {
  if (precedence(child) < min_prec) {
    out += '(';
    emit_into(child, out);
    out += ')';
  } else {
    emit_into(child, out);
  }
}

void emit_list(const std::vector<ExprPtr>& items, std::string& out) {
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    emit_into(*items[i], out);
  }
}

void emit_into(const Expr& e, std::string& out) {
  switch (e.kind) {
    case ExprKind::Name:
    case ExprKind::Int:
    case ExprKind::Float: out += e.text; return;
    case ExprKind::Str: out += quote(e.text, false); return;
    case ExprKind::Bool: out += e.flag ? "True" : "False"; return;
    case ExprKind::None: out += "None"; return;
    case ExprKind::FStr: {
      std::string body;
      out += "f'";
      for (const auto& p : e.parts) {
        if (p.expr) {
          out += '{';
          out += emit_expr(*p.expr);
          out += '}';
        } else {
          std::string q = quote(p.text, true);
          out += q.substr(2, q.size() - 3);
        }
      }
      out += '\'';
      return;
    }
    case ExprKind::List:
      out += '[';
      emit_list(e.items, out);
      out += ']';
      return;
    case ExprKind::Dict:
      out += '{';
      for (std::size_t i = 0; i < e.items.size(); ++i) {
        if (i) out += ", ";
        emit_into(*e.items[i], out);
        out += ": ";
        emit_into(*e.values[i], out);
      }
      out += '}';
      return;
    case ExprKind::Attr:
      emit_child(*e.object, 8, out);
      out += '.';
      out += e.text;
      return;
    case ExprKind::Call:
      emit_child(*e.object, 8, out);
      out += '(';
      emit_list(e.items, out);
      for (std::size_t i = 0; i < e.keywords.size(); ++i) {
        if (i || !e.items.empty()) out += ", ";
        out += e.keywords[i].name;
        out += '=';
        emit_into(*e.keywords[i].value, out);
      }
      out += ')';
      return;
    case ExprKind::Index:
      emit_child(*e.object, 8, out);
      out += '[';
      emit_into(*e.rhs, out);
      out += ']';
      return;
    case ExprKind::Binary: {
      int p = precedence(e);
      // Comparisons do not chain, and under & and | they are parenthesized the
      // way pandas code spells them.
      int left = p == 4 ? 5 : p;
      int right = p + 1;
      if (p <= 2) {
        if (precedence(*e.object) == 4) left = 5;
        if (precedence(*e.rhs) == 4) right = 5;
      }
      emit_child(*e.object, left, out);
      out += ' ';
      out += e.text;
      out += ' ';
      emit_child(*e.rhs, right, out);
      return;
    }
    case ExprKind::Unary:
      out += e.text;
      emit_child(*e.object, e.text == "~" ? 7 : precedence(e), out);
      return;
  }
}

void emit_block(const std::vector<StmtPtr>& body, int depth, std::string& out);

void emit_stmt(const Stmt& s, int depth, std::string& out) {
  std::string pad(static_cast<std::size_t>(depth) * 4, ' ');
  out += pad;
  switch (s.kind) {
    case StmtKind::Use: out += "use " + s.target + "\n"; return;
    case StmtKind::Flush: out += "flush()\n"; return;
    case StmtKind::Print:
      out += "print(";
      emit_list(s.args, out);
      out += ")\n";
      return;
    case StmtKind::Assign:
      out += s.target + " = ";
      emit_into(*s.value, out);
      out += '\n';
      return;
    case StmtKind::SetItem:
      out += s.target + "[" + quote(s.column, false) + "] = ";
      emit_into(*s.value, out);
      out += '\n';
      return;
    case StmtKind::ExprStmt:
      emit_into(*s.value, out);
      out += '\n';
      return;
    case StmtKind::If:
      out += "if ";
      emit_into(*s.value, out);
      out += ":\n";
      emit_block(s.body, depth + 1, out);
      if (!s.orelse.empty()) {
        out += pad + "else:\n";
        emit_block(s.orelse, depth + 1, out);
      }
      return;
    case StmtKind::While:
      out += "while ";
      emit_into(*s.value, out);
      out += ":\n";
      emit_block(s.body, depth + 1, out);
      return;
  }
}

void emit_block(const std::vector<StmtPtr>& body, int depth, std::string& out) {
  for (const auto& s : body) emit_stmt(*s, depth, out);
}

bool equal_ptr(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  return equal(*a, *b);
}

bool equal_list(const std::vector<ExprPtr>& a, const std::vector<ExprPtr>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!equal_ptr(a[i], b[i])) return false;
  }
  return true;
}

bool equal_stmts(const std::vector<StmtPtr>& a, const std::vector<StmtPtr>& b);

bool equal_stmt(const Stmt& a, const Stmt& b) {
  return a.kind == b.kind && a.target == b.target && a.column == b.column && equal_ptr(a.value, b.value) &&
         equal_list(a.args, b.args) && equal_stmts(a.body, b.body) && equal_stmts(a.orelse, b.orelse);
}

bool equal_stmts(const std::vector<StmtPtr>& a, const std::vector<StmtPtr>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!equal_stmt(*a[i], *b[i])) return false;
  }
  return true;
}

}  // namespace

Program parse(const std::string& src) {
  Lexer lx(src);
  Parser p(lx.run());
  return p.program();
}

std::string emit_expr(const Expr& e) {
  std::string out;
  emit_into(e, out);
  return out;
}

std::string emit(const Program& p) {
  std::string out;
  emit_block(p.body, 0, out);
  return out;
}

bool equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.text != b.text || a.flag != b.flag) return false;
  if (!equal_ptr(a.object, b.object) || !equal_ptr(a.rhs, b.rhs)) return false;
  if (!equal_list(a.items, b.items) || !equal_list(a.values, b.values)) return false;
  if (a.keywords.size() != b.keywords.size() || a.parts.size() != b.parts.size()) return false;
  for (std::size_t i = 0; i < a.keywords.size(); ++i) {
    if (a.keywords[i].name != b.keywords[i].name || !equal_ptr(a.keywords[i].value, b.keywords[i].value)) return false;
  }
  for (std::size_t i = 0; i < a.parts.size(); ++i) {
    if (a.parts[i].text != b.parts[i].text || !equal_ptr(a.parts[i].expr, b.parts[i].expr)) return false;
  }
  return true;
}

bool equal(const Program& a, const Program& b) { return equal_stmts(a.body, b.body); }

ExprPtr name(std::string id) {
  ExprPtr e = make(ExprKind::Name, {});
  e->text = std::move(id);
  return e;
}

ExprPtr str(std::string s) {
  ExprPtr e = make(ExprKind::Str, {});
  e->text = std::move(s);
  return e;
}

ExprPtr list_of(std::vector<ExprPtr> items) {
  ExprPtr e = make(ExprKind::List, {});
  e->items = std::move(items);
  return e;
}

ExprPtr attr(ExprPtr obj, std::string member) {
  ExprPtr e = make(ExprKind::Attr, obj ? obj->span : SourceSpan{});
  e->object = std::move(obj);
  e->text = std::move(member);
  return e;
}

ExprPtr call(ExprPtr callee, std::vector<ExprPtr> args, std::vector<Keyword> keywords) {
  ExprPtr e = make(ExprKind::Call, callee ? callee->span : SourceSpan{});
  e->object = std::move(callee);
  e->items = std::move(args);
  e->keywords = std::move(keywords);
  return e;
}

ExprPtr deep_copy(const ExprPtr& e) {
  if (!e) return nullptr;
  auto c = std::make_shared<Expr>(*e);
  c->object = deep_copy(e->object);
  c->rhs = deep_copy(e->rhs);
  for (auto& i : c->items) i = deep_copy(i);
  for (auto& v : c->values) v = deep_copy(v);
  for (auto& k : c->keywords) k.value = deep_copy(k.value);
  for (auto& p : c->parts) p.expr = deep_copy(p.expr);
  return c;
}

StmtPtr deep_copy(const StmtPtr& s) {
  auto c = std::make_shared<Stmt>(*s);
  c->value = deep_copy(s->value);
  for (auto& a : c->args) a = deep_copy(a);
  for (auto& b : c->body) b = deep_copy(b);
  for (auto& b : c->orelse) b = deep_copy(b);
  return c;
}

Program deep_copy(const Program& p) {
  Program out;
  for (const auto& s : p.body) out.body.push_back(deep_copy(s));
  return out;
}

const Expr* method_call(const Expr& e, const std::string& method) {
  if (e.kind != ExprKind::Call || !e.object || e.object->kind != ExprKind::Attr) return nullptr;
  return e.object->text == method ? e.object->object.get() : nullptr;
}

const Expr* keyword(const Expr& call, const std::string& name) {
  for (const auto& k : call.keywords) {
    if (k.name == name) return k.value.get();
  }
  return nullptr;
}

}  // namespace lfp::script
