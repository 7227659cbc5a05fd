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

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "lfp/errors.hpp"
#include "lfp/kernels.hpp"

using namespace lfp;

namespace {

// Row-model oracle: a frame is a list of rows of nullable int / text cells.
struct Row {
  std::optional<std::int64_t> k;  // small-domain key
  std::optional<std::int64_t> v;
  std::string s;
};

Frame to_frame(const std::vector<Row>& rows) {
  ColumnBuilder k("k", Dtype::int64()), v("v", Dtype::int64()), s("s", Dtype::text());
  for (const Row& r : rows) {
    r.k ? k.append_int(*r.k) : k.append_null();
    r.v ? v.append_int(*r.v) : v.append_null();
    s.append_text(r.s);
  }
  return Frame({make_column(k.finish()), make_column(v.finish()), make_column(s.finish())}, rows.size());
}

std::vector<Row> from_frame(const Frame& f) {
  std::vector<Row> out(f.rows());
  const Column& k = f.column("k");
  const Column& v = f.column("v");
  const Column& s = f.column("s");
  for (std::size_t i = 0; i < f.rows(); ++i) {
    if (!k.null_at(i)) out[i].k = k.ints[i];
    if (!v.null_at(i)) out[i].v = v.ints[i];
    out[i].s = s.texts[i];
  }
  return out;
}

bool same(const Row& a, const Row& b) { return a.k == b.k && a.v == b.v && a.s == b.s; }

std::vector<Row> random_rows(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> key(0, 5), val(-50, 50), pct(0, 99);
  std::vector<Row> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (pct(rng) >= 10) rows[i].k = key(rng);
    if (pct(rng) >= 10) rows[i].v = val(rng);
    rows[i].s = "r" + std::to_string(i % 7);
  }
  return rows;
}

}  // namespace

TEST_CASE("filter_rows agrees with a row-at-a-time oracle") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Row> rows = random_rows(rng, 200);
    // v > 3 & k != 2: null comparisons are false
    ExprPtr pred = binary(BinOp::And, binary(BinOp::Gt, col("v"), lit(std::int64_t{3})),
                          binary(BinOp::Ne, col("k"), lit(std::int64_t{2})));
    std::vector<Row> expected;
    for (const Row& r : rows) {
      if (r.v && *r.v > 3 && r.k && *r.k != 2) expected.push_back(r);
    }
    std::vector<Row> got = from_frame(filter_rows(to_frame(rows), *pred));
    REQUIRE(got.size() == expected.size());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(same(got[i], expected[i]));
  }
}

TEST_CASE("sort_values is stable with nulls last in both directions") {
  std::mt19937_64 rng(2);
  for (bool asc : {true, false}) {
    std::vector<Row> rows = random_rows(rng, 300);
    std::vector<Row> expected = rows;
    std::stable_sort(expected.begin(), expected.end(), [&](const Row& a, const Row& b) {
      if (!a.v || !b.v) return a.v.has_value() && !b.v.has_value();
      return asc ? *a.v < *b.v : *a.v > *b.v;
    });
    std::vector<Row> got = from_frame(sort_values(to_frame(rows), {"v"}, {asc}));
    REQUIRE(got.size() == expected.size());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(same(got[i], expected[i]));
  }
}

TEST_CASE("groupby_agg matches a map-based oracle") {
  std::mt19937_64 rng(3);
  std::vector<Row> rows = random_rows(rng, 500);
  struct Acc {
    std::int64_t sum = 0, count = 0, size = 0;
    std::optional<std::int64_t> mn, mx;
  };
  std::map<std::int64_t, Acc> oracle;
  for (const Row& r : rows) {
    if (!r.k) continue;
    Acc& a = oracle[*r.k];
    ++a.size;
    if (!r.v) continue;
    a.sum += *r.v;
    ++a.count;
    a.mn = a.mn ? std::min(*a.mn, *r.v) : *r.v;
    a.mx = a.mx ? std::max(*a.mx, *r.v) : *r.v;
  }
  Frame g = groupby_agg(to_frame(rows), {"k"},
                        {{"v", AggFunc::Sum, "sum"},
                         {"v", AggFunc::Count, "count"},
                         {"v", AggFunc::Min, "min"},
                         {"v", AggFunc::Max, "max"},
                         {"v", AggFunc::Mean, "mean"},
                         {"v", AggFunc::Size, "size"}});
  REQUIRE(g.rows() == oracle.size());
  std::size_t i = 0;
  for (const auto& [k, a] : oracle) {
    CHECK(g.column("k").ints[i] == k);
    CHECK(g.column("sum").ints[i] == a.sum);
    CHECK(g.column("count").ints[i] == a.count);
    CHECK(g.column("size").ints[i] == a.size);
    if (a.count > 0) {
      CHECK(g.column("min").ints[i] == *a.mn);
      CHECK(g.column("max").ints[i] == *a.mx);
      CHECK(g.column("mean").floats[i] == doctest::Approx(static_cast<double>(a.sum) / static_cast<double>(a.count)));
    }
    ++i;
  }
}

TEST_CASE("chunked aggregation equals whole-frame aggregation") {
  std::mt19937_64 rng(4);
  std::vector<Row> rows = random_rows(rng, 1000);
  Frame f = to_frame(rows);
  std::vector<AggSpec> aggs = {{"v", AggFunc::Sum, "sum"}, {"v", AggFunc::Mean, "mean"}};
  Frame whole = groupby_agg(f, {"k"}, aggs);
  for (std::size_t chunk : {1, 7, 64, 999}) {
    GroupAggregator g({"k"}, aggs);
    for (std::size_t b = 0; b < f.rows(); b += chunk) g.consume(slice(f, b, std::min(f.rows(), b + chunk)));
    Frame parts = g.finish();
    REQUIRE(parts.rows() == whole.rows());
    for (std::size_t i = 0; i < whole.rows(); ++i) {
      CHECK(parts.column("sum").ints[i] == whole.column("sum").ints[i]);
      CHECK(parts.column("mean").floats[i] == whole.column("mean").floats[i]);
    }
  }
}

TEST_CASE("merge matches a nested-loop join for every join kind") {
  std::mt19937_64 rng(5);
  std::vector<Row> left = random_rows(rng, 60);
  ColumnBuilder rk("k", Dtype::int64()), rw("w", Dtype::int64());
  std::vector<std::pair<std::int64_t, std::int64_t>> right = {{1, 10}, {2, 20}, {2, 21}, {7, 70}};
  for (auto [k, w] : right) {
    rk.append_int(k);
    rw.append_int(w);
  }
  Frame rf({make_column(rk.finish()), make_column(rw.finish())}, right.size());
  for (JoinKind how : {JoinKind::Inner, JoinKind::Left, JoinKind::Right, JoinKind::Outer}) {
    // multiset of (k, v, w) triples; nulls as a sentinel
    const std::int64_t none = -999;
    std::multiset<std::tuple<std::int64_t, std::int64_t, std::int64_t>> expected;
    std::vector<bool> right_hit(right.size());
    for (const Row& l : left) {
      bool hit = false;
      for (std::size_t j = 0; j < right.size(); ++j) {
        if (l.k && *l.k == right[j].first) {
          expected.insert({*l.k, l.v.value_or(none), right[j].second});
          hit = true;
          right_hit[j] = true;
        }
      }
      if (!hit && (how == JoinKind::Left || how == JoinKind::Outer)) {
        expected.insert({l.k.value_or(none), l.v.value_or(none), none});
      }
    }
    if (how == JoinKind::Right || how == JoinKind::Outer) {
      for (std::size_t j = 0; j < right.size(); ++j) {
        if (!right_hit[j]) expected.insert({right[j].first, none, right[j].second});
      }
    }
    Frame m = merge(to_frame(left), rf, {"k"}, how);
    std::multiset<std::tuple<std::int64_t, std::int64_t, std::int64_t>> got;
    const Column& k = m.column("k");
    const Column& v = m.column("v");
    const Column& w = m.column("w");
    for (std::size_t i = 0; i < m.rows(); ++i) {
      got.insert({k.null_at(i) ? none : k.ints[i], v.null_at(i) ? none : v.ints[i], w.null_at(i) ? none : w.ints[i]});
    }
    CHECK_MESSAGE(got == expected, join_name(how));
  }
}

TEST_CASE("drop_duplicates keeps first occurrences") {
  std::mt19937_64 rng(6);
  std::vector<Row> rows = random_rows(rng, 200);
  std::set<std::pair<std::optional<std::int64_t>, std::string>> seen;
  std::vector<Row> expected;
  for (const Row& r : rows) {
    if (seen.insert({r.k, r.s}).second) expected.push_back(r);
  }
  std::vector<Row> got = from_frame(drop_duplicates(to_frame(rows), {"k", "s"}));
  REQUIRE(got.size() == expected.size());
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(same(got[i], expected[i]));

  Deduplicator d({"k", "s"});
  Frame f = to_frame(rows);
  std::vector<Frame> parts;
  for (std::size_t b = 0; b < f.rows(); b += 13) parts.push_back(d.filter(slice(f, b, std::min(f.rows(), b + 13))));
  std::vector<Row> chunked = from_frame(concat(parts));
  REQUIRE(chunked.size() == expected.size());
  for (std::size_t i = 0; i < chunked.size(); ++i) CHECK(same(chunked[i], expected[i]));
}

TEST_CASE("explode splits on the pipe separator") {
  ColumnBuilder id("id", Dtype::int64()), d("d", Dtype::text());
  id.append_int(1);
  d.append_text("x|y|z");
  id.append_int(2);
  d.append_null();
  id.append_int(3);
  d.append_text("w");
  Frame f({make_column(id.finish()), make_column(d.finish())}, 3);
  Frame e = explode(f, "d");
  REQUIRE(e.rows() == 5);
  CHECK(e.column("id").ints == std::vector<std::int64_t>{1, 1, 1, 2, 3});
  CHECK(e.column("d").texts[2] == "z");
  CHECK(e.column("d").null_at(3));
}

TEST_CASE("exact summation is order independent") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  std::vector<double> xs(5000);
  for (double& x : xs) x = u(rng);
  xs.push_back(1e300);
  xs.push_back(-1e300);
  ExactSum a;
  for (double x : xs) a.add(x);
  for (int k = 0; k < 5; ++k) {
    std::shuffle(xs.begin(), xs.end(), rng);
    ExactSum b, c;
    for (std::size_t i = 0; i < xs.size(); ++i) (i % 2 ? b : c).add(xs[i]);
    b.merge(c);
    CHECK(b.value() == a.value());
  }
  long double naive = 0;
  for (double x : xs) {
    if (std::fabs(x) < 1e299) naive += x;
  }
  CHECK(a.value() == doctest::Approx(static_cast<double>(naive)).epsilon(1e-12));

  ExactSum tiny;
  tiny.add(1.0);
  tiny.add(1e-30);
  tiny.add(-1.0);
  CHECK(tiny.value() == 1e-30);
}

TEST_CASE("cast and fillna follow the documented coercions") {
  ColumnBuilder a("a", Dtype::int64());
  a.append_int(3);
  a.append_null();
  Column c = a.finish();
  Column f = cast_column(c, Dtype::float64());
  CHECK(f.dtype == Dtype::float64());
  CHECK(f.floats[0] == 3.0);
  CHECK(f.null_at(1));
  Frame fr({make_column(c)}, 2);
  Frame filled = fillna(fr, Cell{std::int64_t{0}}, {});
  CHECK(filled.column("a").null_count() == 0);
  CHECK(filled.column("a").ints[1] == 0);
  ColumnBuilder t("t", Dtype::text());
  t.append_text("abc");
  CHECK_THROWS(cast_column(t.finish(), Dtype::int64()));
}
