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
#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "lfp/errors.hpp"
#include "lfp/script.hpp"

using namespace lfp;
namespace sc = lfp::script;

TEST_CASE("emit is a fixed point after one round trip") {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 200; ++i) {
    std::string src = i % 2 ? lfp::testing::generate_program(rng, {}).source : lfp::testing::generate_flow_program(rng, 12);
    sc::Program p = sc::parse(src);
    std::string once = sc::emit(p);
    sc::Program q = sc::parse(once);
    CHECK(sc::equal(p, q));
    CHECK(sc::emit(q) == once);
  }
}

TEST_CASE("emitted programs use four-space indentation") {
  std::string src =
      "i = 0\n"
      "while i < 2:\n"
      "    if i > 0:\n"
      "        print(i)\n"
      "    i = i + 1\n";
  CHECK(sc::emit(sc::parse(src)) == src);
  CHECK(sc::emit(sc::parse("")) == "");
}

TEST_CASE("f-strings and keyword arguments parse") {
  sc::Program p = sc::parse("x = read_csv('a.csv', usecols=['a', 'b'])\nprint(f\"n={len(x)} ok\")\n");
  REQUIRE(p.body.size() == 2);
  const sc::Expr& read = *p.body[0]->value;
  REQUIRE(sc::keyword(read, "usecols"));
  CHECK(sc::keyword(read, "usecols")->items.size() == 2);
  const sc::Expr& f = *p.body[1]->args[0];
  CHECK(f.kind == sc::ExprKind::FStr);
  CHECK(f.parts.size() == 3);
}

TEST_CASE("operator precedence follows the usual rules") {
  sc::Program p = sc::parse("x = a + b * c\ny = df[(df.a > 1) & (df.b < 2) | ~(df.c == 3)]\nz = -a.b\n");
  CHECK(sc::emit_expr(*p.body[0]->value) == "a + b * c");
  const sc::Expr& x = *p.body[0]->value;
  CHECK(x.text == "+");
  const sc::Expr& pred = *p.body[1]->value->rhs;
  CHECK(pred.text == "|");
}

TEST_CASE("syntax errors carry line and column") {
  auto where = [](const std::string& src) -> std::pair<int, int> {
    try {
      sc::parse(src);
    } catch (const SyntaxError& e) {
      return {e.span().line, e.span().col};
    }
    return {0, 0};
  };
  CHECK(where("x = (1 + \n").first >= 1);
  CHECK(where("x = 1\ny = = 2\n") == std::pair<int, int>{2, 5});
  CHECK(where("if x:\nprint(1)\n").first == 2);
  CHECK(where("x = 'open\n").first == 1);
}
