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
#include "lfp/pipeline.hpp"
#include "lfp/rewrite.hpp"

using namespace lfp;
namespace sc = lfp::script;
namespace rw = lfp::rewrite;
using lfp::testing::TempDir;

namespace {

struct Files {
  TempDir dir{"rewrite"};
  Files() {
    lfp::testing::write_taxi_csv(dir.file("taxi.csv"), {100, 1, 0.9});
    lfp::testing::write_text(dir.file("five.csv"), "a,b,c,d,e\n1,2,3,4,5\n6,7,8,9,10\n");
    lfp::testing::write_mixed_csv(dir.file("mixed.csv"), 200, 3);
    lfp::testing::write_lookup_csv(dir.file("lookup.csv"));
  }
  rw::RewriteOptions options() const {
    rw::RewriteOptions o;
    o.base_dir = dir.path().string();
    return o;
  }
};

std::string data_file(const std::string& name) { return std::string(LFP_TEST_DATA) + "/" + name; }

std::string colsel(const Files& f, const std::string& src) {
  return sc::emit(rw::rewrite_column_selection(sc::parse(src), f.options()));
}

}  // namespace

TEST_CASE("column selection on the sample program") {
  Files f;
  std::string out = colsel(f, lfp::testing::read_text(data_file("sample.lfp")));
  CHECK(out ==
        "SO_columns_0 = ['pickup_datetime', 'passenger_count', 'fare_amount']\n"
        "df = read_csv('taxi.csv', parse_dates=['pickup_datetime'], usecols=SO_columns_0)\n"
        "df = df[df.fare_amount > 0]\n"
        "df['day'] = df.pickup_datetime.dt.dayofweek\n"
        "p_per_day = df.groupby(['day'])['passenger_count'].sum()\n"
        "print(p_per_day)\n");
}

TEST_CASE("a whole-frame use leaves the read untouched") {
  Files f;
  std::string src = "df = read_csv('five.csv')\ndf['f'] = df.a + 1\nprint(df)\n";
  CHECK(colsel(f, src) == src);
}

TEST_CASE("existing usecols are narrowed") {
  Files f;
  std::string out = colsel(f, "df = read_csv('five.csv', usecols=['a', 'b'])\nprint(df.a.sum())\n");
  CHECK(out == "SO_columns_0 = ['a']\ndf = read_csv('five.csv', usecols=SO_columns_0)\nprint(df.a.sum())\n");
}

TEST_CASE("dropped columns are not fetched") {
  Files f;
  std::set<std::string> passes{"colsel", "dropcols"};
  SUBCASE("drop of columns with no other use") {
    std::string src = "df = read_csv('five.csv')\ndf = df.drop(columns=['d', 'e'])\nprint(df.a.sum(), df.b.sum(), df.c.sum())\n";
    std::string out = sc::emit(rw::rewrite_program(sc::parse(src), passes, f.options()));
    CHECK(out ==
          "SO_columns_0 = ['a', 'b', 'c']\n"
          "df = read_csv('five.csv', usecols=SO_columns_0)\n"
          "print(df.a.sum(), df.b.sum(), df.c.sum())\n");
  }
  SUBCASE("a column filtered on before the drop stays") {
    std::string src = "df = read_csv('five.csv')\ndf = df[df.d > 0]\ndf = df.drop(columns=['d'])\nprint(df.a.sum())\n";
    std::string out = sc::emit(rw::rewrite_program(sc::parse(src), passes, f.options()));
    CHECK(out.find("drop(columns=['d'])") != std::string::npos);
    CHECK(out.find("SO_columns_0 = ['a', 'd']") != std::string::npos);
  }
  SUBCASE("no drops") {
    std::string src = "df = read_csv('five.csv')\nprint(df)\n";
    CHECK(sc::emit(rw::rewrite_dropped_columns(sc::parse(src), f.options())) == src);
  }
}

TEST_CASE("lazy io rewrite") {
  Files f;
  SUBCASE("external module program") {
    std::string out = sc::emit(rw::rewrite_lazy_io(sc::parse(lfp::testing::read_text(data_file("external.lfp"))), f.options()));
    CHECK(out.rfind("use lazy_print\n", 0) == 0);
    CHECK(out.find("ext.plot(p_per_day.compute(live_df=[df]))") != std::string::npos);
    CHECK(out.size() >= 8);
    CHECK(out.substr(out.size() - 8) == "flush()\n");
  }
  SUBCASE("no prints or externals") {
    std::string src = "df = read_csv('five.csv')\nx = df.a.sum()\n";
    CHECK(sc::emit(rw::rewrite_lazy_io(sc::parse(src), f.options())) == "use lazy_print\n" + src);
  }
  SUBCASE("each external call gets its own live list") {
    std::string src =
        "a = read_csv('five.csv')\n"
        "b = read_csv('five.csv')\n"
        "ext.show(a)\n"
        "print(b)\n"
        "ext.show(b)\n"
        "print(a.a.sum())\n";
    std::string out = sc::emit(rw::rewrite_lazy_io(sc::parse(src), f.options()));
    CHECK(out.find("ext.show(a.compute(live_df=[a, b]))") != std::string::npos);
    CHECK(out.find("ext.show(b.compute(live_df=[a]))") != std::string::npos);
  }
  SUBCASE("unregistered module") {
    CHECK_THROWS_AS(rw::rewrite_lazy_io(sc::parse("plt.plot(1)\n"), f.options()), UnknownExternal);
  }
}

TEST_CASE("rewriting is idempotent and preserves reference output") {
  Files f;
  std::mt19937_64 rng(55);
  std::set<std::string> statics(rw::static_pass_names().begin(), rw::static_pass_names().end());
  for (int i = 0; i < 60; ++i) {
    lfp::testing::GeneratedProgram g = lfp::testing::generate_program(rng, {});
    sc::Program once = rw::rewrite_program(sc::parse(g.source), statics, f.options());
    sc::Program twice = rw::rewrite_program(once, statics, f.options());
    CHECK_MESSAGE(sc::emit(twice) == sc::emit(once), g.source);

    PipelineOptions ref;
    ref.base_dir = f.dir.path().string();
    ref.reference = true;
    ref.passes.clear();
    std::string expected = run_source(g.source, ref).output;
    std::string got = run_prepared(rw::rewrite_program(sc::parse(g.source),
                                                       {"colsel", "dropcols"}, f.options()), ref).output;
    CHECK_MESSAGE(got == expected, g.source);
  }
}
