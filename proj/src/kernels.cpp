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

#include "lfp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <set>

#include "lfp/errors.hpp"

namespace lfp {

std::string_view join_name(JoinKind k) {
  switch (k) {
    case JoinKind::Inner: return "inner";
    case JoinKind::Left: return "left";
    case JoinKind::Right: return "right";
    case JoinKind::Outer: return "outer";
  }
  return "inner";
}

std::optional<JoinKind> parse_join(std::string_view name) {
  if (name == "inner") return JoinKind::Inner;
  if (name == "left") return JoinKind::Left;
  if (name == "right") return JoinKind::Right;
  if (name == "outer") return JoinKind::Outer;
  return std::nullopt;
}

Frame filter_rows(const Frame& f, const Expr& pred) {
  Column mask = eval_column(pred, f);
  if (mask.dtype.tag != TypeTag::Bool) {
    throw TypeMismatch("filter predicate must be boolean, got " + std::string(dtype_name(mask.dtype)));
  }
  std::vector<std::size_t> rows;
  rows.reserve(f.rows());
  for (std::size_t i = 0; i < f.rows(); ++i) {
    if (!mask.null_at(i) && mask.bools[i]) rows.push_back(i);
  }
  if (rows.size() == f.rows()) return f;
  if (f.width() == 0) return with_rows(rows.size());
  return take(f, rows);
}

Frame project(const Frame& f, const std::vector<std::string>& names) {
  std::vector<ColumnPtr> cols;
  for (const auto& n : names) {
    for (const auto& c : cols) {
      if (c->name == n) throw ScriptError("duplicate column in selection: " + n);
    }
    cols.push_back(f.column_ptr(n));
  }
  return Frame(std::move(cols), f.rows());
}

Frame set_column(const Frame& f, const std::string& name, const Expr& e) {
  Column c = eval_column(e, f);
  c.name = name;
  std::vector<ColumnPtr> cols = f.columns();
  auto idx = f.find(name);
  if (idx) {
    cols[*idx] = make_column(std::move(c));
  } else {
    cols.push_back(make_column(std::move(c)));
  }
  return Frame(std::move(cols), f.rows());
}

Frame drop_columns(const Frame& f, const std::vector<std::string>& names) {
  std::vector<ColumnPtr> cols;
  for (const auto& c : f.columns()) {
    if (std::find(names.begin(), names.end(), c->name) == names.end()) cols.push_back(c);
  }
  return Frame(std::move(cols), f.rows());
}

Frame rename(const Frame& f, const RenameMap& mapping) {
  std::vector<ColumnPtr> cols;
  std::set<std::string> seen;
  for (const auto& c : f.columns()) {
    std::string name = c->name;
    for (const auto& [from, to] : mapping) {
      if (from == c->name) {
        name = to;
        break;
      }
    }
    if (!seen.insert(name).second) throw ScriptError("rename produces duplicate column " + name);
    cols.push_back(name == c->name ? c : make_column(renamed(*c, name)));
  }
  return Frame(std::move(cols), f.rows());
}

Frame astype(const Frame& f, const std::vector<std::pair<std::string, Dtype>>& types) {
  std::vector<ColumnPtr> cols = f.columns();
  for (const auto& [name, t] : types) {
    auto idx = f.find(name);
    if (!idx) throw UnknownColumn(name);
    cols[*idx] = make_column(cast_column(*cols[*idx], t));
  }
  return Frame(std::move(cols), f.rows());
}

namespace {

bool fill_fits(Dtype t, const Cell& v) {
  switch (t.tag) {
    case TypeTag::Int64:
    case TypeTag::Float64: return v.index() == 1 || v.index() == 2;
    case TypeTag::Bool: return v.index() == 3;
    case TypeTag::Text:
    case TypeTag::Category: return v.index() == 4;
    case TypeTag::Date: return v.index() == 5 || (v.index() == 4 && parse_date(std::get<std::string>(v)));
  }
  return false;
}

ColumnPtr fill_column(const ColumnPtr& c, const Cell& v) {
  if (c->valid.empty() && !(c->dtype.tag == TypeTag::Int64 && v.index() == 2)) return c;
  Column out = eval_column(*fillna_of(col(c->name), v), Frame({c}, c->size()));
  out.name = c->name;
  if (c->dtype.tag == TypeTag::Category) out = encode_category(out);
  return make_column(std::move(out));
}

}  // namespace

Frame fillna(const Frame& f, const std::optional<Cell>& all,
             const std::vector<std::pair<std::string, Cell>>& per_column) {
  std::vector<ColumnPtr> cols = f.columns();
  if (all) {
    for (auto& c : cols) {
      if (fill_fits(c->dtype, *all)) c = fill_column(c, *all);
    }
  }
  for (const auto& [name, v] : per_column) {
    auto idx = f.find(name);
    if (!idx) throw UnknownColumn(name);
    if (!fill_fits(cols[*idx]->dtype, v)) {
      throw TypeMismatch("fillna value " + format_cell(v) + " does not fit " +
                         std::string(dtype_name(cols[*idx]->dtype)) + " column " + name);
    }
    cols[*idx] = fill_column(cols[*idx], v);
  }
  return Frame(std::move(cols), f.rows());
}

Frame round_frame(const Frame& f, int digits) {
  std::vector<ColumnPtr> cols = f.columns();
  for (auto& c : cols) {
    if (c->dtype.tag == TypeTag::Float64 || (c->dtype.tag == TypeTag::Int64 && digits < 0)) {
      Column out = eval_column(*round_of(col(c->name), digits), Frame({c}, c->size()));
      out.name = c->name;
      c = make_column(std::move(out));
    }
  }
  return Frame(std::move(cols), f.rows());
}

Frame abs_frame(const Frame& f) {
  std::vector<ColumnPtr> cols = f.columns();
  for (auto& c : cols) {
    if (c->dtype.numeric()) {
      Column out = eval_column(*abs_of(col(c->name)), Frame({c}, c->size()));
      out.name = c->name;
      c = make_column(std::move(out));
    }
  }
  return Frame(std::move(cols), f.rows());
}

void encode_key(const Column& c, std::size_t row, std::string& out) {
  auto put_int = [&out](char tag, std::int64_t v) {
    out += tag;
    char buf[8];
    std::memcpy(buf, &v, 8);
    out.append(buf, 8);
  };
  if (c.null_at(row)) {
    out += 'n';
    return;
  }
  switch (c.dtype.tag) {
    case TypeTag::Int64: put_int('i', c.ints[row]); return;
    case TypeTag::Date: put_int('d', c.ints[row]); return;
    case TypeTag::Bool: out += c.bools[row] ? "b1" : "b0"; return;
    case TypeTag::Float64: {
      double v = c.floats[row];
      if (std::isnan(v)) {
        out += 'n';
        return;
      }
      if (v == std::trunc(v) && std::fabs(v) < 9.2e18) {
        put_int('i', static_cast<std::int64_t>(v));
        return;
      }
      std::int64_t bits;
      std::memcpy(&bits, &v, 8);
      put_int('f', bits);
      return;
    }
    case TypeTag::Text:
    case TypeTag::Category: {
      const std::string& s = c.text_at(row);
      put_int('s', static_cast<std::int64_t>(s.size()));
      out += s;
      return;
    }
  }
}

bool encode_row_key(const std::vector<const Column*>& cols, std::size_t row, std::string& out) {
  out.clear();
  bool ok = true;
  for (const Column* c : cols) {
    std::size_t before = out.size();
    encode_key(*c, row, out);
    if (out.size() == before + 1 && out.back() == 'n') ok = false;
  }
  return ok;
}

int compare_rows(const std::vector<const Column*>& left, std::size_t a, const std::vector<const Column*>& right,
                 std::size_t b, const std::vector<bool>& ascending) {
  for (std::size_t k = 0; k < left.size(); ++k) {
    const Column& c = *left[k];
    const Column& d = *right[k];
    bool na = c.null_at(a), nb = d.null_at(b);
    if (na || nb) {
      if (na && nb) continue;
      return na ? 1 : -1;  // nulls last regardless of direction
    }
    int cmp = 0;
    switch (c.dtype.tag) {
      case TypeTag::Int64:
      case TypeTag::Date: cmp = c.ints[a] < d.ints[b] ? -1 : (d.ints[b] < c.ints[a] ? 1 : 0); break;
      case TypeTag::Float64: {
        double x = c.floats[a], y = d.floats[b];
        bool xn = std::isnan(x), yn = std::isnan(y);
        if (xn || yn) {
          if (xn && yn) continue;
          return xn ? 1 : -1;
        }
        cmp = x < y ? -1 : (y < x ? 1 : 0);
        break;
      }
      case TypeTag::Bool: cmp = static_cast<int>(c.bools[a]) - static_cast<int>(d.bools[b]); break;
      case TypeTag::Text:
      case TypeTag::Category: {
        int r = c.text_at(a).compare(d.text_at(b));
        cmp = r < 0 ? -1 : (r > 0 ? 1 : 0);
        break;
      }
    }
    if (cmp != 0) return ascending[k] ? cmp : -cmp;
  }
  return 0;
}

int compare_rows(const std::vector<const Column*>& cols, std::size_t a, std::size_t b,
                 const std::vector<bool>& ascending) {
  return compare_rows(cols, a, cols, b, ascending);
}

namespace {

std::vector<const Column*> resolve(const Frame& f, const std::vector<std::string>& names) {
  std::vector<const Column*> out;
  out.reserve(names.size());
  for (const auto& n : names) out.push_back(&f.column(n));
  return out;
}

std::vector<const Column*> all_columns(const Frame& f) {
  std::vector<const Column*> out;
  for (const auto& c : f.columns()) out.push_back(c.get());
  return out;
}

}  // namespace

Frame drop_duplicates(const Frame& f, const std::vector<std::string>& subset) {
  Deduplicator d(subset);
  return d.filter(f);
}

Frame Deduplicator::filter(const Frame& chunk) {
  std::vector<const Column*> cols = subset_.empty() ? all_columns(chunk) : resolve(chunk, subset_);
  std::vector<std::size_t> keep;
  std::string key;
  for (std::size_t i = 0; i < chunk.rows(); ++i) {
    encode_row_key(cols, i, key);
    auto [it, inserted] = seen_.emplace(key, true);
    if (inserted) {
      keep.push_back(i);
      state_bytes_ += key.size() + 48;
    }
  }
  if (keep.size() == chunk.rows()) return chunk;
  if (chunk.width() == 0) return with_rows(keep.size());
  return take(chunk, keep);
}

Frame sort_values(const Frame& f, const std::vector<std::string>& by, const std::vector<bool>& ascending) {
  std::vector<const Column*> cols = resolve(f, by);
  std::vector<bool> asc = ascending;
  asc.resize(by.size(), asc.empty() ? true : asc.back());
  std::vector<std::size_t> idx(f.rows());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return compare_rows(cols, a, b, asc) < 0; });
  if (f.width() == 0) return f;
  return take(f, idx);
}

Frame head(const Frame& f, std::size_t n) {
  if (f.width() == 0) return with_rows(std::min(n, f.rows()));
  return slice(f, 0, n);
}

Frame explode(const Frame& f, const std::string& column) {
  const Column& src = f.column(column);
  if (!src.dtype.textual()) {
    throw TypeMismatch("explode requires a text column, got " + std::string(dtype_name(src.dtype)));
  }
  std::vector<std::size_t> rows;
  ColumnBuilder pieces(column, Dtype::text(), f.rows());
  for (std::size_t i = 0; i < f.rows(); ++i) {
    if (src.null_at(i)) {
      rows.push_back(i);
      pieces.append_null();
      continue;
    }
    const std::string& s = src.text_at(i);
    std::size_t start = 0;
    while (true) {
      std::size_t bar = s.find('|', start);
      rows.push_back(i);
      pieces.append_text(s.substr(start, bar == std::string::npos ? std::string::npos : bar - start));
      if (bar == std::string::npos) break;
      start = bar + 1;
    }
  }
  Column exploded = pieces.finish();
  std::vector<ColumnPtr> cols;
  for (const auto& c : f.columns()) {
    if (c->name == column) {
      cols.push_back(make_column(exploded));
    } else {
      cols.push_back(make_column(take(*c, rows)));
    }
  }
  return Frame(std::move(cols), rows.size());
}

// ---------------------------------------------------------------------------
// groupby

GroupAggregator::GroupAggregator(std::vector<std::string> keys, std::vector<AggSpec> aggs)
    : keys_(std::move(keys)), aggs_(std::move(aggs)) {
  if (keys_.empty()) throw EmptyKeyList("groupby");
}

void GroupAggregator::consume(const Frame& chunk) {
  std::vector<const Column*> kc = resolve(chunk, keys_);
  std::vector<const Column*> ac;
  for (const auto& a : aggs_) ac.push_back(&chunk.column(a.column));
  if (!typed_) {
    for (const Column* c : kc) key_types_.push_back(c->dtype.tag == TypeTag::Category ? Dtype::category() : c->dtype);
    for (std::size_t k = 0; k < aggs_.size(); ++k) {
      agg_types_.push_back(ac[k]->dtype);
      agg_result_type(aggs_[k].func, ac[k]->dtype);
    }
    typed_ = true;
  }
  std::string key;
  for (std::size_t i = 0; i < chunk.rows(); ++i) {
    if (!encode_row_key(kc, i, key)) continue;
    auto it = index_.find(key);
    std::size_t g;
    if (it == index_.end()) {
      g = groups_.size();
      index_.emplace(key, g);
      Group grp;
      for (const Column* c : kc) grp.key.push_back(c->at(i));
      for (std::size_t k = 0; k < aggs_.size(); ++k) grp.states.emplace_back(aggs_[k].func, agg_types_[k]);
      groups_.push_back(std::move(grp));
      state_bytes_ += key.size() * 2 + 64 + aggs_.size() * sizeof(AggState);
    } else {
      g = it->second;
    }
    for (std::size_t k = 0; k < aggs_.size(); ++k) groups_[g].states[k].add(*ac[k], i);
  }
}

Frame GroupAggregator::finish() {
  if (!typed_) throw InternalError("groupby finished without input");
  std::vector<std::size_t> order(groups_.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    for (std::size_t k = 0; k < keys_.size(); ++k) {
      int c = compare_cells(groups_[a].key[k], groups_[b].key[k]);
      if (c != 0) return c < 0;
    }
    return false;
  });
  std::vector<ColumnPtr> cols;
  for (std::size_t k = 0; k < keys_.size(); ++k) {
    ColumnBuilder b(keys_[k], key_types_[k], order.size());
    for (std::size_t g : order) b.append(groups_[g].key[k]);
    cols.push_back(make_column(b.finish()));
  }
  for (std::size_t k = 0; k < aggs_.size(); ++k) {
    ColumnBuilder b(aggs_[k].output, agg_result_type(aggs_[k].func, agg_types_[k]), order.size());
    for (std::size_t g : order) b.append(groups_[g].states[k].result());
    cols.push_back(make_column(b.finish()));
  }
  return Frame(std::move(cols), order.size());
}

Frame groupby_agg(const Frame& f, const std::vector<std::string>& keys, const std::vector<AggSpec>& aggs) {
  GroupAggregator g(keys, aggs);
  g.consume(f);
  return g.finish();
}

// ---------------------------------------------------------------------------
// merge

MergeNames merge_names(const std::vector<std::string>& left, const std::vector<std::string>& right,
                       const std::vector<std::string>& on) {
  auto is_key = [&on](const std::string& n) { return std::find(on.begin(), on.end(), n) != on.end(); };
  std::set<std::string> rset(right.begin(), right.end());
  std::set<std::string> lset(left.begin(), left.end());
  MergeNames out;
  for (const auto& n : left) {
    out.left_out.push_back(!is_key(n) && rset.count(n) ? n + "_x" : n);
  }
  for (const auto& n : right) {
    if (is_key(n)) {
      out.right_out.emplace_back();
    } else {
      out.right_out.push_back(lset.count(n) ? n + "_y" : n);
    }
  }
  return out;
}

HashJoin::HashJoin(std::vector<std::string> on, JoinKind how) : on_(std::move(on)), how_(how) {
  if (on_.empty()) throw EmptyKeyList("merge");
}

void HashJoin::build(Frame side) {
  build_ = std::move(side);
  std::vector<const Column*> kc = resolve(build_, on_);
  std::string key;
  for (std::size_t i = 0; i < build_.rows(); ++i) {
    if (!encode_row_key(kc, i, key)) continue;
    table_[key].push_back(i);
  }
  matched_.assign(build_.rows(), 0);
  state_bytes_ = build_.resident_bytes() + table_.size() * 64 + build_.rows() * 8;
}

namespace {

Dtype key_output_type(Dtype a, Dtype b) {
  if (a == b) return a.tag == TypeTag::Category ? Dtype::text() : a;
  if (a.numeric() && b.numeric()) return Dtype::float64();
  if (a.textual() && b.textual()) return Dtype::text();
  throw TypeMismatch("merge keys have incompatible types " + std::string(dtype_name(a)) + " and " +
                     std::string(dtype_name(b)));
}

}  // namespace

Frame HashJoin::assemble(const Frame& left, const std::vector<std::optional<std::size_t>>& lrows,
                         const Frame& right, const std::vector<std::optional<std::size_t>>& rrows) const {
  MergeNames names = merge_names(left.names(), right.names(), on_);
  std::size_t n = lrows.size();
  std::vector<ColumnPtr> cols;
  for (std::size_t c = 0; c < left.width(); ++c) {
    const Column& lc = *left.columns()[c];
    bool key = std::find(on_.begin(), on_.end(), lc.name) != on_.end();
    if (key) {
      const Column& rc = right.column(lc.name);
      Dtype t = key_output_type(lc.dtype, rc.dtype);
      ColumnBuilder b(names.left_out[c], t, n);
      for (std::size_t i = 0; i < n; ++i) {
        if (lrows[i]) {
          b.append(lc.at(*lrows[i]));
        } else {
          b.append(rc.at(*rrows[i]));
        }
      }
      cols.push_back(make_column(b.finish()));
      continue;
    }
    ColumnBuilder b(names.left_out[c], lc.dtype, n);
    for (std::size_t i = 0; i < n; ++i) {
      if (lrows[i]) {
        b.append_from(lc, *lrows[i]);
      } else {
        b.append_null();
      }
    }
    Column built = b.finish();
    cols.push_back(make_column(std::move(built)));
  }
  for (std::size_t c = 0; c < right.width(); ++c) {
    if (names.right_out[c].empty()) continue;
    const Column& rc = *right.columns()[c];
    ColumnBuilder b(names.right_out[c], rc.dtype, n);
    for (std::size_t i = 0; i < n; ++i) {
      if (rrows[i]) {
        b.append_from(rc, *rrows[i]);
      } else {
        b.append_null();
      }
    }
    cols.push_back(make_column(b.finish()));
  }
  return Frame(std::move(cols), n);
}

Frame HashJoin::probe(const Frame& chunk) {
  if (!probe_schema_) probe_schema_ = slice(chunk, 0, 0);
  std::vector<const Column*> kc = resolve(chunk, on_);
  // Validate key types even when no rows flow.
  for (std::size_t k = 0; k < on_.size(); ++k) key_output_type(kc[k]->dtype, build_.column(on_[k]).dtype);
  std::vector<std::optional<std::size_t>> probe_rows, build_rows;
  bool keep_unmatched = how_ == JoinKind::Left || how_ == JoinKind::Outer || how_ == JoinKind::Right;
  std::string key;
  for (std::size_t i = 0; i < chunk.rows(); ++i) {
    bool ok = encode_row_key(kc, i, key);
    const std::vector<std::size_t>* hits = nullptr;
    if (ok) {
      auto it = table_.find(key);
      if (it != table_.end()) hits = &it->second;
    }
    if (hits) {
      for (std::size_t b : *hits) {
        probe_rows.emplace_back(i);
        build_rows.emplace_back(b);
        matched_[b] = 1;
      }
    } else if (keep_unmatched) {
      probe_rows.emplace_back(i);
      build_rows.emplace_back(std::nullopt);
    }
  }
  if (builds_left(how_)) return assemble(build_, build_rows, chunk, probe_rows);
  return assemble(chunk, probe_rows, build_, build_rows);
}

Frame HashJoin::finish() {
  if (!probe_schema_) throw InternalError("merge finished without probe input");
  std::vector<std::optional<std::size_t>> probe_rows, build_rows;
  if (how_ == JoinKind::Outer) {
    for (std::size_t b = 0; b < build_.rows(); ++b) {
      if (!matched_[b]) {
        probe_rows.emplace_back(std::nullopt);
        build_rows.emplace_back(b);
      }
    }
  }
  if (builds_left(how_)) return assemble(build_, build_rows, *probe_schema_, probe_rows);
  return assemble(*probe_schema_, probe_rows, build_, build_rows);
}

Frame merge(const Frame& left, const Frame& right, const std::vector<std::string>& on, JoinKind how) {
  HashJoin j(on, how);
  for (const auto& k : on) {
    left.column(k);
    right.column(k);
  }
  if (HashJoin::builds_left(how)) {
    j.build(left);
    return j.probe(right);
  }
  j.build(right);
  Frame body = j.probe(left);
  Frame tail = j.finish();
  if (tail.rows() == 0) return body;
  return concat({body, tail});
}

}  // namespace lfp
