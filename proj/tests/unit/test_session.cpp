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
#include <sstream>

#include "fixtures.hpp"
#include "lfp/errors.hpp"
#include "lfp/pipeline.hpp"

using namespace lfp;
using lfp::testing::TempDir;

namespace {

struct Env {
  TempDir dir{"session"};
  Env() {
    lfp::testing::write_taxi_csv(dir.file("taxi.csv"), {500, 21, 0.9});
    lfp::testing::write_mixed_csv(dir.file("mixed.csv"), 150, 4);
    lfp::testing::write_lookup_csv(dir.file("lookup.csv"));
  }
  PipelineOptions opts() const {
    PipelineOptions o;
    o.base_dir = dir.path().string();
    return o;
  }
  PipelineOptions reference() const {
    PipelineOptions o = opts();
    o.reference = true;
    o.passes.clear();
    return o;
  }
};

std::string data_file(const std::string& name) { return std::string(LFP_TEST_DATA) + "/" + name; }

}  // namespace

TEST_CASE("lazy prints keep program order around external calls") {
  Env e;
  std::string src = lfp::testing::read_text(data_file("external.lfp"));
  RunResult ref = run_source(src, e.reference());
  RunResult opt = run_source(src, e.opts());
  CHECK(opt.output == ref.output);
  CHECK(opt.hash == ref.hash);
  std::istringstream lines(opt.output);
  std::string first;
  std::getline(lines, first);
  CHECK(first == "450");
  CHECK(opt.output.find("ext.plot(<frame 7x2>)") != std::string::npos);
}

TEST_CASE("echo receives every line as it is emitted") {
  Env e;
  std::ostringstream sink;
  PipelineOptions o = e.opts();
  o.echo = &sink;
  RunResult r = run_source("x = 2\nprint(x + 1)\nprint('a', None)\n", o);
  CHECK(sink.str() == r.output);
  CHECK(r.output == "3\na None\n");
}

TEST_CASE("persist hints run the shared prefix once") {
  Env e;
  std::string src = lfp::testing::read_text(data_file("external.lfp"));
  PipelineOptions on = e.opts();
  RunResult a = run_source(src, on);
  PipelineOptions off = e.opts();
  off.passes.erase("persist");
  RunResult b = run_source(src, off);
  CHECK(a.output == b.output);
  CHECK(a.stats.rows_read == 500);
  CHECK(b.stats.rows_read == 1000);
}

TEST_CASE("series from different frames cannot be combined") {
  Env e;
  std::string src = "a = read_csv('mixed.csv')\nb = read_csv('lookup.csv')\nprint(a.id + b.w)\n";
  CHECK_THROWS_AS(run_source(src, e.opts()), ScriptError);
}

TEST_CASE("nulls render as NaN in frames and None literally") {
  Env e;
  RunResult r = run_source(
      "df = read_csv('mixed.csv')\nm = df[df.a.fillna(0) == df.a.fillna(1)]\nprint(len(m) < len(df))\nprint(None)\n",
      e.opts());
  CHECK(r.output == "True\nNone\n");
  RunResult n = run_source("df = read_csv('mixed.csv')\nprint(df[df.a.fillna(-999) == -999][['a']])\n", e.opts());
  CHECK(n.output.find("NaN") != std::string::npos);
}

TEST_CASE("unknown columns and files surface as user errors") {
  Env e;
  CHECK_THROWS_AS(run_source("df = read_csv('mixed.csv')\nprint(df.nope.sum())\n", e.opts()), UnknownColumn);
  CHECK_THROWS_AS(run_source("df = read_csv('missing.csv')\nprint(df)\n", e.opts()), MissingFile);
  CHECK_THROWS_AS(run_source("x = foo.bar(1)\n", e.opts()), UnknownExternal);
}

TEST_CASE("explain lists every compute with both graphs") {
  Env e;
  PipelineOptions o = e.opts();
  o.explain = true;
  RunResult r = run_source(lfp::testing::read_text(data_file("external.lfp")), o);
  std::string report = explain_report(r);
  CHECK(report.find("# compute 1") != std::string::npos);
  CHECK(report.find("## pre") != std::string::npos);
  CHECK(report.find("## post") != std::string::npos);
  CHECK(report.find("## persisted") != std::string::npos);
}

TEST_CASE("reference mode and optimized mode agree under loops") {
  Env e;
  std::string src =
      "df = read_csv('mixed.csv', parse_dates=['dt'])\n"
      "i = 0\n"
      "while i < 3:\n"
      "    df = df[df.id > i * 10]\n"
      "    print(f\"{i}: {len(df)}\")\n"
      "    i = i + 1\n"
      "if len(df) > 10:\n"
      "    print(df.groupby(['c'])['b'].mean())\n"
      "else:\n"
      "    print('small')\n";
  CHECK(run_source(src, e.opts()).output == run_source(src, e.reference()).output);
}

TEST_CASE("pass list parsing") {
  CHECK(parse_pass_list("colsel,dce") == std::set<std::string>{"colsel", "dce"});
  CHECK(parse_pass_list("") .empty());
  CHECK_THROWS_AS(parse_pass_list("colsel,bogus"), Error);
}
