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

#include <filesystem>

#include "fixtures.hpp"
#include "lfp/errors.hpp"
#include "lfp/executor.hpp"
#include "lfp/taskgraph.hpp"

using namespace lfp;
using lfp::testing::TempDir;

namespace {

Action read_action(const std::string& path) {
  Action a;
  a.kind = ActionKind::ReadCsv;
  a.path = path;
  a.csv.parse_dates = {"dt"};
  return a;
}

/// read -> filter -> set_column -> groupby, sort and merge branches.
std::vector<NodePtr> pipeline(TaskGraph& g, const std::string& mixed, const std::string& lookup) {
  NodePtr r = g.lazy_op(read_action(mixed), {});
  Action f;
  f.kind = ActionKind::Filter;
  f.expr = binary(BinOp::Gt, col("a"), lit(std::int64_t{-10}));
  NodePtr flt = g.lazy_op(f, {r});
  Action s;
  s.kind = ActionKind::SetColumn;
  s.column = "m";
  s.expr = date_part("month", col("dt"));
  NodePtr set = g.lazy_op(s, {flt});
  Action gb;
  gb.kind = ActionKind::GroupByAgg;
  gb.names = {"c", "m"};
  gb.aggs = {{"b", AggFunc::Sum, "b"}, {"a", AggFunc::Mean, "am"}, {"a", AggFunc::Size, "n"}};
  NodePtr grp = g.lazy_op(gb, {set});
  Action so;
  so.kind = ActionKind::SortValues;
  so.names = {"b", "id"};
  so.ascending = {false, true};
  NodePtr srt = g.lazy_op(so, {set});
  Action lk;
  lk.kind = ActionKind::ReadCsv;
  lk.path = lookup;
  NodePtr lkn = g.lazy_op(lk, {});
  Action mg;
  mg.kind = ActionKind::Merge;
  mg.names = {"c"};
  mg.how = JoinKind::Left;
  NodePtr mrg = g.lazy_op(mg, {srt, lkn});
  Action hd;
  hd.kind = ActionKind::Head;
  hd.count = 25;
  NodePtr top = g.lazy_op(hd, {mrg});
  Action red;
  red.kind = ActionKind::Reduce;
  red.expr = aggregate(AggFunc::Sum, col("b"));
  NodePtr total = g.lazy_op(red, {set});
  return {grp, mrg, top, total};
}

std::vector<std::string> run_all(const std::vector<NodePtr>& roots, const ExecOptions& o, ExecStats& stats) {
  ClonedGraph c = clone_graph(roots, {});
  auto out = execute(c.roots, {}, o, stats, nullptr);
  std::vector<std::string> texts;
  for (const auto& r : c.roots) texts.push_back(canonical_text(out.at(r->uid)));
  return texts;
}

}  // namespace

TEST_CASE("stream backend reproduces eager results at any chunk size") {
  TempDir d("exec");
  std::string mixed = d.file("mixed.csv"), lookup = d.file("lookup.csv");
  lfp::testing::write_mixed_csv(mixed, 2000, 8);
  lfp::testing::write_lookup_csv(lookup);
  TaskGraph g;
  std::vector<NodePtr> roots = pipeline(g, mixed, lookup);
  ExecStats es;
  std::vector<std::string> eager = run_all(roots, {}, es);
  for (std::size_t chunk : {1, 3, 64, 5000}) {
    ExecOptions o;
    o.backend = Backend::Stream;
    o.chunk_rows = chunk;
    ExecStats ss;
    CHECK(run_all(roots, o, ss) == eager);
  }
}

TEST_CASE("stream sort spills under a small budget and stays within it") {
  TempDir d("spill");
  std::string mixed = d.file("mixed.csv"), lookup = d.file("lookup.csv");
  lfp::testing::write_mixed_csv(mixed, 20000, 12);
  lfp::testing::write_lookup_csv(lookup);
  TaskGraph g;
  std::vector<NodePtr> roots = pipeline(g, mixed, lookup);
  ExecStats es;
  std::vector<std::string> eager = run_all({roots[2]}, {}, es);

  ExecOptions o;
  o.backend = Backend::Stream;
  o.chunk_rows = 512;
  o.mem_budget = 256 * 1024;
  o.spill_dir = d.path();
  ExecStats ss;
  CHECK(run_all({roots[2]}, o, ss) == eager);
  CHECK(ss.spill_runs > 1);
  CHECK(ss.peak_bytes <= *o.mem_budget);
  std::size_t leftovers = 0;
  for (const auto& e : std::filesystem::directory_iterator(d.path())) {
    if (e.path().filename().string().rfind("lfp-spill-", 0) == 0) ++leftovers;
  }
  CHECK(leftovers == 0);

  o.allow_spill = false;
  ExecStats fail;
  CHECK_THROWS_AS(run_all({roots[2]}, o, fail), MemoryBudgetExceeded);
}

TEST_CASE("print nodes expand escapes in order") {
  TaskGraph g;
  Action lit_a;
  lit_a.kind = ActionKind::ScalarExpr;
  lit_a.expr = binary(BinOp::Add, lit(std::int64_t{2}), lit(std::int64_t{3}));
  NodePtr five = g.lazy_op(lit_a, {});
  NodePtr p1 = g.lazy_print("value " + print_escape(five->uid), {five});
  NodePtr p2 = g.lazy_print("second", {});
  std::vector<std::string> lines;
  ExecStats st;
  execute({p2}, {}, {}, st, [&](const Node& n, const std::map<std::int64_t, Value>& args) {
    lines.push_back(expand_print(n.action.text, args));
  });
  CHECK(lines == std::vector<std::string>{"value 5", "second"});
  (void)p1;
}

TEST_CASE("render_frame truncates to ten rows with a footer") {
  ColumnBuilder a("a", Dtype::int64());
  for (int i = 0; i < 12; ++i) a.append_int(i);
  Frame f({make_column(a.finish())}, 12);
  std::string r = render_frame(f);
  CHECK(r.find("[12 rows x 1 columns]") != std::string::npos);
  CHECK(r.find("11") == std::string::npos);
}

TEST_CASE("a sort that fails while spilling leaves no spill files behind") {
  TempDir d("spill-fail");
  std::string mixed = d.file("mixed.csv"), lookup = d.file("lookup.csv");
  lfp::testing::write_mixed_csv(mixed, 20000, 13);
  lfp::testing::write_lookup_csv(lookup);
  TaskGraph g;
  std::vector<NodePtr> roots = pipeline(g, mixed, lookup);
  ExecOptions o;
  o.backend = Backend::Stream;
  o.chunk_rows = 512;
  o.mem_budget = 40 * 1024;
  o.spill_dir = d.path();
  ExecStats ss;
  CHECK_THROWS_AS(run_all({roots[2]}, o, ss), MemoryBudgetExceeded);
  std::size_t leftovers = 0;
  for (const auto& e : std::filesystem::directory_iterator(d.path())) {
    if (e.path().filename().string().rfind("lfp-spill-", 0) == 0) ++leftovers;
  }
  CHECK(leftovers == 0);
}
