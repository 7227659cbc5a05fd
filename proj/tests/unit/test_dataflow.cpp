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
#include "lfp/dataflow.hpp"
#include "lfp/script.hpp"

using namespace lfp;
using namespace lfp::dataflow;
namespace sc = lfp::script;

namespace {

std::string data_file(const std::string& name) { return std::string(LFP_TEST_DATA) + "/" + name; }

const sc::Stmt* find_stmt(const sc::Program& p, const std::string& prefix) {
  for (const auto& s : p.body) {
    std::string text = sc::emit({{s}});
    if (text.rfind(prefix, 0) == 0) return s.get();
  }
  return nullptr;
}

/// Adds one block per statement group without edges; enough for gen/kill.
BasicBlock block_of(const sc::Program& p) {
  BasicBlock b;
  for (const auto& s : p.body) b.statements.push_back(s.get());
  return b;
}

}  // namespace

TEST_CASE("cfg shapes") {
  SUBCASE("straight-line code is one body block") {
    sc::Program p = sc::parse("a = 1\nb = 2\nc = 3\nprint(c)\n");
    Cfg g = build_cfg(p);
    CHECK(g.blocks.size() == 3);
    CHECK(g.blocks[g.entry].successors.size() == 1);
  }
  SUBCASE("if/else forms a diamond") {
    sc::Program p = sc::parse("x = 1\nif x > 0:\n    print(1)\nelse:\n    print(2)\nprint(3)\n");
    Cfg g = build_cfg(p);
    CHECK(g.blocks.size() == 6);
    int cond = g.blocks[g.entry].successors[0];
    REQUIRE(g.blocks[cond].successors.size() == 2);
    int a = g.blocks[cond].successors[0], b = g.blocks[cond].successors[1];
    REQUIRE(g.blocks[a].successors.size() == 1);
    CHECK(g.blocks[a].successors == g.blocks[b].successors);
  }
  SUBCASE("while has a back edge to its header") {
    sc::Program p = sc::parse("i = 0\nwhile i < 3:\n    i = i + 1\nprint(i)\n");
    Cfg g = build_cfg(p);
    bool back = false;
    for (const auto& b : g.blocks) {
      for (int s : b.successors) back = back || s < b.id;
    }
    CHECK(back);
  }
}

TEST_CASE("gen and kill of an aggregation statement") {
  sc::Program p = sc::parse("df = df.groupby(['day'])['passenger_count'].sum()\n");
  auto [gen, kill] = gen_kill(block_of(p));
  CHECK(gen.to_string() == AttrFacts{{{"df", ColSet::of({"day", "passenger_count"})}}}.to_string());
  REQUIRE(kill.vars.count("df"));
  CHECK(kill.vars.at("df").wildcard());
}

TEST_CASE("inspection calls generate nothing under the heuristic") {
  sc::Program p = sc::parse("print(df.head())\n");
  AnalysisOptions on;
  on.inspection_heuristic = true;
  CHECK(gen_kill(block_of(p), on).first.vars.empty());
  AnalysisOptions off;
  AttrFacts g = gen_kill(block_of(p), off).first;
  REQUIRE(g.vars.count("df"));
  CHECK(g.vars.at("df").wildcard());
  CHECK(gen_kill(BasicBlock{}).first.vars.empty());
}

TEST_CASE("sample program: three columns live after the read") {
  sc::Program p = sc::parse(lfp::testing::read_text(data_file("sample.lfp")));
  Cfg g = build_cfg(p);
  LivenessFact f = solve_liveness(g);
  const sc::Stmt* read = find_stmt(p, "df = read_csv");
  REQUIRE(read);
  AttrFacts out = f.stmt_out.at(read);
  REQUIRE(out.vars.count("df"));
  CHECK(out.vars.at("df") == ColSet::of({"pickup_datetime", "passenger_count", "fare_amount"}));
  CHECK(f.blocks[g.exit].in.vars.empty());
}

TEST_CASE("a column used only inside a loop is live at loop entry") {
  sc::Program p = sc::parse(
      "df = read_csv('x.csv')\n"
      "i = 0\n"
      "while i < 3:\n"
      "    print(df.a.sum())\n"
      "    i = i + 1\n"
      "print(len(df[['b']]))\n");
  LivenessFact f = solve_liveness(build_cfg(p));
  AttrFacts out = f.stmt_out.at(p.body[0].get());
  CHECK(out.live("df", "a"));
  CHECK(out.live("df", "b"));
  CHECK_FALSE(out.live("df", "c"));
}

TEST_CASE("renames map liveness back to the source names") {
  sc::Program p = sc::parse("df = read_csv('x.csv')\nt = df.rename(columns={'a': 'z'})\nprint(t.z.sum())\n");
  LivenessFact f = solve_liveness(build_cfg(p));
  AttrFacts out = f.stmt_out.at(p.body[0].get());
  CHECK(out.vars.at("df") == ColSet::of({"a"}));
}

TEST_CASE("wildcard liveness subsumes every column") {
  AttrFacts f;
  f.add("df", ColSet::everything());
  CHECK(f.live("df", "anything"));
  ColSet s = ColSet::everything();
  s.remove("x");
  CHECK_FALSE(s.contains("x"));
  CHECK(s.contains("y"));
  s.add(ColSet::of({"x"}));
  CHECK(s.wildcard());
}

TEST_CASE("solver matches path exploration on random control flow") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 150; ++trial) {
    std::string src = lfp::testing::generate_flow_program(rng, 12);
    sc::Program p = sc::parse(src);
    Cfg g = build_cfg(p);
    LivenessFact f = solve_liveness(g);
    std::vector<AttrFacts> oracle = brute_force_in(g);
    REQUIRE(oracle.size() == g.blocks.size());
    for (std::size_t b = 0; b < g.blocks.size(); ++b) {
      CHECK_MESSAGE(f.blocks[b].in == oracle[b], src);
      // In = transfer(Out); Out = union of successor Ins
      CHECK(transfer_block(g.blocks[b], f.blocks[b].out) == f.blocks[b].in);
      AttrFacts join;
      for (int s : g.blocks[b].successors) join.add(f.blocks[static_cast<std::size_t>(s)].in);
      CHECK(join == f.blocks[b].out);
    }
    // every variable at most 8 columns + wildcard: height per var is bounded
    CHECK(f.iterations <= g.blocks.size() * 3 * 8 + 2);
  }
}

TEST_CASE("live frames after an external call") {
  sc::Program p = sc::parse(lfp::testing::read_text(data_file("external.lfp")));
  FrameFacts f = solve_live_frames(build_cfg(p));
  const sc::Stmt* plot = find_stmt(p, "ext.plot");
  REQUIRE(plot);
  CHECK(f.stmt_out.at(plot) == std::set<std::string>{"df"});
  const sc::Stmt* last = p.body.back().get();
  CHECK(f.stmt_out.at(last).empty());
}

TEST_CASE("a frame reassigned before use is dead after its first definition") {
  sc::Program p = sc::parse("a = read_csv('x.csv')\nb = read_csv('y.csv')\na = b\nprint(a)\n");
  FrameFacts f = solve_live_frames(build_cfg(p));
  CHECK(f.stmt_out.at(p.body[0].get()).count("a") == 0);
  CHECK(f.stmt_out.at(p.body[1].get()).count("b") == 1);
}
