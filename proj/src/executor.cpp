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

#include "lfp/executor.hpp"

#include <algorithm>
#include <atomic>
#include <cstring>
#include <fstream>
#include <memory>
#include <queue>
#include <sstream>
#include <unistd.h>

#include "lfp/csv.hpp"
#include "lfp/errors.hpp"
#include "lfp/kernels.hpp"

namespace lfp {

std::optional<Backend> parse_backend(std::string_view name) {
  if (name == "eager") return Backend::Eager;
  if (name == "stream") return Backend::Stream;
  return std::nullopt;
}

std::int64_t ExecStats::executions(std::int64_t uid) const {
  auto it = nodes.find(uid);
  return it == nodes.end() ? 0 : it->second.executions;
}

std::string ExecStats::to_string() const {
  std::ostringstream out;
  out << "computes=" << computes << " nodes_executed=" << nodes_executed << " columns_parsed=" << columns_parsed
      << " rows_read=" << rows_read << " read_bytes=" << read_bytes << " peak_bytes=" << peak_bytes
      << " spill_runs=" << spill_runs << '\n';
  for (const auto& [uid, s] : nodes) {
    out << "node " << uid << " executions=" << s.executions << " rows_in=" << s.rows_in << " rows_out=" << s.rows_out
        << " bytes_out=" << s.bytes_out << '\n';
  }
  return out.str();
}

std::string expand_print(const std::string& text, const std::map<std::int64_t, Value>& args) {
  std::string out;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t start = text.find("$_#", i);
    if (start == std::string::npos) break;
    std::size_t digits = start + 3;
    std::size_t end = digits;
    while (end < text.size() && std::isdigit(static_cast<unsigned char>(text[end]))) ++end;
    if (end == digits || text.compare(end, 3, "$_#") != 0) {
      out.append(text, i, digits - i);
      i = digits;
      continue;
    }
    out.append(text, i, start - i);
    std::int64_t uid = std::stoll(text.substr(digits, end - digits));
    auto it = args.find(uid);
    if (it == args.end()) throw UnresolvedUid(uid);
    out += render_value(it->second);
    i = end + 3;
  }
  out.append(text, i, std::string::npos);
  return out;
}

namespace {

const Frame& frame_of(const Value& v, const Node& n) {
  if (!v.is_frame()) throw ExecutionError(n.uid, std::string(action_name(n.action.kind)) + " expects a frame input");
  return *v.frame;
}

/// Evaluates a ScalarExpr, whose columns "$i" name its i-th source.
Value eval_scalar_node(const Node& n, const std::vector<Value>& inputs) {
  std::vector<ColumnPtr> cols;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (!inputs[i].is_scalar()) throw ExecutionError(n.uid, "scalar expression over a non-scalar value");
    const Cell& c = inputs[i].scalar;
    ColumnBuilder b("$" + std::to_string(i), is_null(c) ? Dtype::float64() : cell_dtype(c), 1);
    b.append(c);
    cols.push_back(make_column(b.finish()));
  }
  Frame f(std::move(cols), 1);
  Column out = eval_column(*n.action.expr, f);
  return Value::of(out.at(0));
}

}  // namespace

Value apply_action(const Node& n, const std::vector<Value>& inputs, ExecStats* stats) {
  const Action& a = n.action;
  auto in = [&](std::size_t i) -> const Frame& { return frame_of(inputs.at(i), n); };
  switch (a.kind) {
    case ActionKind::ReadCsv: {
      ReadStats rs;
      Frame f = read_csv(a.path, a.csv, &rs);
      if (stats) {
        stats->columns_parsed += rs.columns_parsed;
        stats->rows_read += rs.rows;
        stats->read_bytes += f.resident_bytes();
      }
      return Value::of(std::move(f));
    }
    case ActionKind::Source: return a.value;
    case ActionKind::Filter: return Value::of(filter_rows(in(0), *a.expr));
    case ActionKind::Project: return Value::of(project(in(0), a.names));
    case ActionKind::SetColumn: return Value::of(set_column(in(0), a.column, *a.expr));
    case ActionKind::Drop: return Value::of(drop_columns(in(0), a.names));
    case ActionKind::Rename: return Value::of(rename(in(0), a.mapping));
    case ActionKind::AsType: return Value::of(astype(in(0), a.types));
    case ActionKind::FillNa: return Value::of(fillna(in(0), a.fill_all, a.fill_columns));
    case ActionKind::Round: return Value::of(round_frame(in(0), a.digits));
    case ActionKind::Abs: return Value::of(abs_frame(in(0)));
    case ActionKind::DropDuplicates: return Value::of(drop_duplicates(in(0), a.names));
    case ActionKind::SortValues: return Value::of(sort_values(in(0), a.names, a.ascending));
    case ActionKind::Head: return Value::of(head(in(0), a.count));
    case ActionKind::Explode: return Value::of(explode(in(0), a.column));
    case ActionKind::Merge: return Value::of(merge(in(0), in(1), a.names, a.how));
    case ActionKind::GroupByAgg: return Value::of(groupby_agg(in(0), a.names, a.aggs));
    case ActionKind::Reduce: return Value::of(eval_scalar(*a.expr, in(0)));
    case ActionKind::ScalarExpr: return eval_scalar_node(n, inputs);
    case ActionKind::Print: return Value::none();
    case ActionKind::Opaque:
    case ActionKind::Identity: return inputs.at(0);
  }
  throw InternalError("unknown action");
}

namespace {

// ---------------------------------------------------------------------------
// Memory accounting

class MemoryTracker {
 public:
  MemoryTracker(std::optional<std::size_t> budget, ExecStats& stats) : budget_(budget), stats_(stats) {}

  /// Throws when `current + extra` would exceed the budget.
  void check(std::int64_t uid, std::size_t extra) const {
    std::size_t need = current_ + extra;
    stats_.peak_bytes = std::max(stats_.peak_bytes, need);
    if (budget_ && need > *budget_) {
      throw MemoryBudgetExceeded(uid, static_cast<std::int64_t>(need), static_cast<std::int64_t>(*budget_));
    }
  }
  void charge(std::int64_t uid, std::size_t bytes) {
    check(uid, bytes);
    current_ += bytes;
  }
  void release(std::size_t bytes) { current_ -= std::min(current_, bytes); }
  std::optional<std::size_t> budget() const { return budget_; }
  std::size_t current() const { return current_; }

 private:
  std::optional<std::size_t> budget_;
  ExecStats& stats_;
  std::size_t current_ = 0;
};

// ---------------------------------------------------------------------------
// Spill files: a sequence of framed blocks.

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
bool get(std::istream& in, T& v) {
  return static_cast<bool>(in.read(reinterpret_cast<char*>(&v), sizeof(T)));
}

void put_string(std::ostream& out, const std::string& s) {
  put(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
  std::uint32_t n = 0;
  get(in, n);
  std::string s(n, '\0');
  in.read(s.data(), n);
  return s;
}

void write_block(std::ostream& out, const Frame& f) {
  put(out, static_cast<std::uint64_t>(f.rows()));
  put(out, static_cast<std::uint32_t>(f.width()));
  for (const auto& cp : f.columns()) {
    const Column& c = *cp;
    put_string(out, c.name);
    put(out, static_cast<std::uint8_t>(c.dtype.tag));
    for (std::size_t i = 0; i < f.rows(); ++i) {
      bool null = c.null_at(i);
      put(out, static_cast<std::uint8_t>(null ? 0 : 1));
      if (null) continue;
      switch (c.dtype.tag) {
        case TypeTag::Int64:
        case TypeTag::Date: put(out, c.ints[i]); break;
        case TypeTag::Float64: put(out, c.floats[i]); break;
        case TypeTag::Bool: put(out, c.bools[i]); break;
        case TypeTag::Text:
        case TypeTag::Category: put_string(out, c.text_at(i)); break;
      }
    }
  }
}

std::optional<Frame> read_block(std::istream& in) {
  std::uint64_t rows = 0;
  if (!get(in, rows)) return std::nullopt;
  std::uint32_t width = 0;
  get(in, width);
  std::vector<ColumnPtr> cols;
  for (std::uint32_t k = 0; k < width; ++k) {
    std::string name = get_string(in);
    std::uint8_t tag = 0;
    get(in, tag);
    Dtype t{static_cast<TypeTag>(tag)};
    ColumnBuilder b(name, t, rows);
    for (std::uint64_t i = 0; i < rows; ++i) {
      std::uint8_t ok = 0;
      get(in, ok);
      if (!ok) {
        b.append_null();
        continue;
      }
      switch (t.tag) {
        case TypeTag::Int64: {
          std::int64_t v;
          get(in, v);
          b.append_int(v);
          break;
        }
        case TypeTag::Date: {
          std::int64_t v;
          get(in, v);
          b.append_date(Date{v});
          break;
        }
        case TypeTag::Float64: {
          double v;
          get(in, v);
          b.append_float(v);
          break;
        }
        case TypeTag::Bool: {
          std::uint8_t v;
          get(in, v);
          b.append_bool(v != 0);
          break;
        }
        case TypeTag::Text:
        case TypeTag::Category: b.append_text(get_string(in)); break;
      }
    }
    cols.push_back(make_column(b.finish()));
  }
  if (!in) throw InternalError("truncated spill file");
  return Frame(std::move(cols), rows);
}

std::filesystem::path spill_path(const ExecOptions& o) {
  static std::atomic<std::uint64_t> counter{0};
  std::filesystem::path dir = o.spill_dir.empty() ? std::filesystem::temp_directory_path() : o.spill_dir;
  return dir / ("lfp-spill-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + ".bin");
}

// ---------------------------------------------------------------------------
// Chunk streams

class ChunkSource {
 public:
  virtual ~ChunkSource() = default;
  /// Next chunk; every stream yields at least one (possibly empty) chunk.
  virtual std::optional<Frame> next() = 0;
};

using SourcePtr = std::unique_ptr<ChunkSource>;

Frame slice_any(const Frame& f, std::size_t begin, std::size_t end) {
  if (f.width() == 0) return with_rows(end - begin);
  return slice(f, begin, end);
}

class SliceSource : public ChunkSource {
 public:
  SliceSource(FramePtr f, std::size_t chunk) : f_(std::move(f)), chunk_(chunk) {}
  std::optional<Frame> next() override {
    if (emitted_ && pos_ >= f_->rows()) return std::nullopt;
    std::size_t end = std::min(f_->rows(), pos_ + chunk_);
    Frame out = slice_any(*f_, pos_, end);
    pos_ = end;
    emitted_ = true;
    return out;
  }

 private:
  FramePtr f_;
  std::size_t chunk_;
  std::size_t pos_ = 0;
  bool emitted_ = false;
};

class CsvSource : public ChunkSource {
 public:
  CsvSource(const Action& a, std::size_t chunk, ExecStats& stats)
      : reader_(a.path, plan_read(a.path, a.csv), a.csv.category_columns), chunk_(chunk), stats_(stats) {
    stats_.columns_parsed += reader_.plan().selected.size();
  }
  std::optional<Frame> next() override {
    auto c = reader_.next(chunk_);
    if (c) {
      stats_.rows_read += c->rows();
      stats_.read_bytes += c->resident_bytes();
    }
    return c;
  }

 private:
  CsvChunkReader reader_;
  std::size_t chunk_;
  ExecStats& stats_;
};

/// Charges a growing piece of operator state against the budget.
class StateCharge {
 public:
  StateCharge(MemoryTracker& t, std::int64_t uid) : tracker_(t), uid_(uid) {}
  ~StateCharge() { tracker_.release(charged_); }
  StateCharge(const StateCharge&) = delete;
  StateCharge& operator=(const StateCharge&) = delete;
  void update(std::size_t bytes) {
    if (bytes > charged_) {
      tracker_.charge(uid_, bytes - charged_);
    } else {
      tracker_.release(charged_ - bytes);
    }
    charged_ = bytes;
  }

 private:
  MemoryTracker& tracker_;
  std::int64_t uid_;
  std::size_t charged_ = 0;
};

class MapSource : public ChunkSource {
 public:
  MapSource(const Node& n, SourcePtr in, NodeStats& st) : n_(n), in_(std::move(in)), st_(st) {}
  std::optional<Frame> next() override {
    auto c = in_->next();
    if (!c) return std::nullopt;
    st_.rows_in += c->rows();
    Value v = apply_action(n_, {Value::of(std::move(*c))});
    st_.rows_out += v.frame->rows();
    st_.bytes_out += v.frame->resident_bytes();
    return *v.frame;
  }

 private:
  const Node& n_;
  SourcePtr in_;
  NodeStats& st_;
};

class DedupSource : public ChunkSource {
 public:
  DedupSource(const Node& n, SourcePtr in, NodeStats& st, MemoryTracker& t)
      : dedup_(n.action.names), in_(std::move(in)), st_(st), charge_(t, n.uid) {}
  std::optional<Frame> next() override {
    auto c = in_->next();
    if (!c) return std::nullopt;
    st_.rows_in += c->rows();
    Frame out = dedup_.filter(*c);
    charge_.update(dedup_.state_bytes());
    st_.rows_out += out.rows();
    return out;
  }

 private:
  Deduplicator dedup_;
  SourcePtr in_;
  NodeStats& st_;
  StateCharge charge_;
};

class JoinSource : public ChunkSource {
 public:
  JoinSource(const Node& n, const Frame& build, SourcePtr probe, NodeStats& st, MemoryTracker& t)
      : join_(n.action.names, n.action.how), probe_(std::move(probe)), st_(st), charge_(t, n.uid) {
    join_.build(build);
    charge_.update(join_.state_bytes());
  }
  std::optional<Frame> next() override {
    if (done_) return std::nullopt;
    auto c = probe_->next();
    if (c) {
      st_.rows_in += c->rows();
      Frame out = join_.probe(*c);
      st_.rows_out += out.rows();
      return out;
    }
    done_ = true;
    Frame rest = join_.finish();
    st_.rows_out += rest.rows();
    return rest;
  }

 private:
  HashJoin join_;
  SourcePtr probe_;
  NodeStats& st_;
  StateCharge charge_;
  bool done_ = false;
};

/// Rows per spilled block; the merge keeps one block per run resident.
// TODO: merge in several passes when the run count outgrows the budget.
constexpr std::size_t kSpillBlockRows = 64;

/// Spill file paths, removed on destruction.
struct SpillFiles {
  std::vector<std::filesystem::path> paths;
  SpillFiles() = default;
  SpillFiles(const SpillFiles&) = delete;
  SpillFiles& operator=(const SpillFiles&) = delete;
  ~SpillFiles() {
    for (const auto& p : paths) {
      std::error_code ec;
      std::filesystem::remove(p, ec);
    }
  }
};

/// Sorts its input in memory when it fits, otherwise in sorted runs spilled to
/// disk and merged.
class SortSource : public ChunkSource {
 public:
  SortSource(const Node& n, SourcePtr in, NodeStats& st, MemoryTracker& t, const ExecOptions& o, ExecStats& stats)
      : n_(n), st_(st), options_(o), stats_(stats), charge_(t, n.uid) {
    asc_ = n.action.ascending;
    asc_.resize(n.action.names.size(), asc_.empty() ? true : asc_.back());
    std::optional<std::size_t> run_limit;
    // a spill holds the buffer twice: concatenated input and sorted output
    if (t.budget() && o.allow_spill) run_limit = *t.budget() / 3;
    std::vector<Frame> buf;
    std::size_t buf_bytes = 0;
    while (auto c = in->next()) {
      st_.rows_in += c->rows();
      buf_bytes += c->resident_bytes();
      buf.push_back(std::move(*c));
      charge_.update(buf_bytes);
      if (run_limit && buf_bytes > *run_limit) {
        spill(buf, buf_bytes);
        buf_bytes = 0;
        charge_.update(0);
      }
    }
    if (runs_.paths.empty()) {
      sorted_ = std::make_shared<const Frame>(sort_values(concat(buf), n.action.names, asc_));
      charge_.update(sorted_->resident_bytes());
      mem_ = std::make_unique<SliceSource>(sorted_, o.chunk_rows);
      return;
    }
    if (!buf.empty()) spill(buf, buf_bytes);
    charge_.update(0);
    open_runs();
  }

  std::optional<Frame> next() override {
    if (mem_) {
      auto c = mem_->next();
      if (c) st_.rows_out += c->rows();
      return c;
    }
    if (emitted_ && heap_.empty()) return std::nullopt;
    emitted_ = true;
    std::vector<ColumnBuilder> out;
    for (const auto& c : schema_.columns()) out.emplace_back(c->name, c->dtype, options_.chunk_rows);
    std::size_t rows = 0;
    while (!heap_.empty() && rows < options_.chunk_rows) {
      std::size_t r = heap_.top();
      heap_.pop();
      Run& run = readers_[r];
      const auto& cols = run.block.columns();
      for (std::size_t k = 0; k < cols.size(); ++k) out[k].append_from(*cols[k], run.pos);
      ++rows;
      if (advance(run)) heap_.push(r);
    }
    std::vector<ColumnPtr> cols;
    for (auto& b : out) cols.push_back(make_column(b.finish()));
    st_.rows_out += rows;
    if (cols.empty()) return with_rows(rows);
    return Frame(std::move(cols), rows);
  }

 private:
  struct Run {
    std::unique_ptr<std::ifstream> in;
    Frame block;
    std::size_t pos = 0;
    std::vector<const Column*> keys;
    std::size_t bytes = 0;
  };

  void spill(std::vector<Frame>& buf, std::size_t bytes) {
    charge_.update(2 * bytes);
    Frame all = concat(buf);
    buf.clear();
    Frame sorted = sort_values(all, n_.action.names, asc_);
    all = Frame();
    if (schema_.width() == 0) schema_ = slice_any(sorted, 0, 0);
    if (sorted.rows() == 0) return;
    std::filesystem::path p = spill_path(options_);
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ExecutionError(n_.uid, "cannot create spill file " + p.string());
    std::size_t block_rows = std::min<std::size_t>(options_.chunk_rows, kSpillBlockRows);
    for (std::size_t i = 0; i < sorted.rows(); i += block_rows) {
      write_block(out, slice(sorted, i, std::min(sorted.rows(), i + block_rows)));
    }
    if (!out) throw ExecutionError(n_.uid, "cannot write spill file " + p.string());
    runs_.paths.push_back(p);
    ++stats_.spill_runs;
  }

  bool load(Run& run) {
    auto b = read_block(*run.in);
    if (!b) return false;
    run.block = std::move(*b);
    run.pos = 0;
    resident_ = resident_ - run.bytes + run.block.resident_bytes();
    run.bytes = run.block.resident_bytes();
    charge_.update(resident_);
    run.keys.clear();
    for (const auto& name : n_.action.names) run.keys.push_back(&run.block.column(name));
    return true;
  }

  bool advance(Run& run) {
    if (++run.pos < run.block.rows()) return true;
    return load(run) && run.block.rows() > 0;
  }

  void open_runs() {
    readers_.resize(runs_.paths.size());
    auto greater = [this](std::size_t a, std::size_t b) {
      const Run& x = readers_[a];
      const Run& y = readers_[b];
      int cmp = compare_rows(x.keys, x.pos, y.keys, y.pos, asc_);
      if (cmp != 0) return cmp > 0;
      return a > b;
    };
    heap_ = decltype(heap_)(greater);
    for (std::size_t r = 0; r < runs_.paths.size(); ++r) {
      readers_[r].in = std::make_unique<std::ifstream>(runs_.paths[r], std::ios::binary);
      if (load(readers_[r]) && readers_[r].block.rows() > 0) heap_.push(r);
    }
  }

  const Node& n_;
  NodeStats& st_;
  const ExecOptions& options_;
  ExecStats& stats_;
  StateCharge charge_;
  std::vector<bool> asc_;
  FramePtr sorted_;
  std::unique_ptr<SliceSource> mem_;
  Frame schema_;
  SpillFiles runs_;
  std::vector<Run> readers_;
  std::size_t resident_ = 0;  // merge blocks currently loaded
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::function<bool(std::size_t, std::size_t)>> heap_;
  bool emitted_ = false;
};

// ---------------------------------------------------------------------------
// Driver

bool row_local(const Node& n) {
  switch (n.action.kind) {
    case ActionKind::Filter:
    case ActionKind::SetColumn: return !has_aggregate(*n.action.expr);
    case ActionKind::Project:
    case ActionKind::Drop:
    case ActionKind::Rename:
    case ActionKind::AsType:
    case ActionKind::FillNa:
    case ActionKind::Round:
    case ActionKind::Abs:
    case ActionKind::Explode:
    case ActionKind::Identity:
    case ActionKind::Opaque: return true;
    default: return false;
  }
}

bool streamable(const Node& n) {
  switch (n.action.kind) {
    case ActionKind::ReadCsv:
    case ActionKind::DropDuplicates:
    case ActionKind::Merge:
    case ActionKind::SortValues: return true;
    default: return row_local(n);
  }
}

void collect_aggregates(const Expr& e, std::vector<const Expr*>& out) {
  if (e.kind == ExprKind::Aggregate) {
    out.push_back(&e);
    return;
  }
  for (const auto& a : e.args) collect_aggregates(*a, out);
}

ExprPtr substitute_aggregates(const ExprPtr& e, const std::map<const Expr*, Cell>& values) {
  if (e->kind == ExprKind::Aggregate) return lit(values.at(e.get()));
  if (e->args.empty()) return e;
  Expr copy = *e;
  for (auto& a : copy.args) a = substitute_aggregates(a, values);
  return std::make_shared<const Expr>(std::move(copy));
}

class Runner {
 public:
  Runner(const ExecOptions& o, ExecStats& stats, const PrintHandler& on_print)
      : options_(o), stats_(stats), tracker_(o.backend == Backend::Stream ? o.mem_budget : std::nullopt, stats),
        on_print_(on_print) {}

  std::map<std::int64_t, Value> run(const std::vector<NodePtr>& roots, const std::set<std::int64_t>& keep) {
    std::vector<NodePtr> order = topological_order(roots);
    auto consumers = consumers_of(order);
    std::set<const Node*> kept;
    for (const auto& r : roots) kept.insert(r.get());
    for (const auto& n : order) {
      if (keep.count(n->uid)) kept.insert(n.get());
    }
    for (const auto& n : order) {
      std::size_t fanout = consumers[n.get()].size();
      remaining_[n.get()] = fanout;
      if (options_.backend == Backend::Stream && streamable(*n) && fanout == 1 && !kept.count(n.get())) {
        piped_.insert(n.get());
      }
    }
    for (const auto& n : order) {
      if (piped_.count(n.get())) continue;
      Value v;
      try {
        v = materialize(*n);
      } catch (Error& err) {
        err.set_span(n->span);
        throw;
      }
      if (v.is_frame()) tracker_.charge(n->uid, v.resident_bytes());
      values_[n.get()] = std::move(v);
      release_sources(*n, kept);
    }
    std::map<std::int64_t, Value> out;
    for (const auto& n : order) {
      if (kept.count(n.get())) out[n->uid] = values_.at(n.get());
    }
    return out;
  }

 private:
  NodeStats& begin(const Node& n) {
    if (n.action.kind == ActionKind::Source) {
      scratch_ = {};
      return scratch_;
    }
    NodeStats& st = stats_.nodes[n.uid];
    ++st.executions;
    ++stats_.nodes_executed;
    return st;
  }

  void release_sources(const Node& n, const std::set<const Node*>& kept) {
    for (const auto& s : n.sources) {
      if (piped_.count(s.get())) {
        release_sources(*s, kept);
        continue;
      }
      auto& left = remaining_[s.get()];
      if (left > 0 && --left == 0 && !kept.count(s.get())) {
        auto it = values_.find(s.get());
        if (it != values_.end()) {
          if (it->second.is_frame()) tracker_.release(it->second.resident_bytes());
          values_.erase(it);
        }
      }
    }
  }

  SourcePtr open(const Node& n) {
    auto it = values_.find(&n);
    if (it != values_.end()) {
      if (!it->second.is_frame()) throw ExecutionError(n.uid, "expected a frame");
      return std::make_unique<SliceSource>(it->second.frame, options_.chunk_rows);
    }
    if (!piped_.count(&n)) throw InternalError("node " + std::to_string(n.uid) + " used before it was computed");
    return open_fresh(n);
  }

  SourcePtr open_fresh(const Node& n) {
    const Action& a = n.action;
    if (a.kind == ActionKind::ReadCsv) {
      begin(n);
      return std::make_unique<CsvSource>(a, options_.chunk_rows, stats_);
    }
    if (row_local(n)) {
      SourcePtr in = open(*n.sources.at(0));
      return std::make_unique<MapSource>(n, std::move(in), begin(n));
    }
    if (a.kind == ActionKind::DropDuplicates) {
      SourcePtr in = open(*n.sources.at(0));
      return std::make_unique<DedupSource>(n, std::move(in), begin(n), tracker_);
    }
    if (a.kind == ActionKind::Merge) {
      bool left_build = HashJoin::builds_left(a.how);
      Value build = value_of(*n.sources.at(left_build ? 0 : 1));
      SourcePtr probe = open(*n.sources.at(left_build ? 1 : 0));
      return std::make_unique<JoinSource>(n, frame_of(build, n), std::move(probe), begin(n), tracker_);
    }
    if (a.kind == ActionKind::SortValues) {
      SourcePtr in = open(*n.sources.at(0));
      return std::make_unique<SortSource>(n, std::move(in), begin(n), tracker_, options_, stats_);
    }
    throw InternalError("action is not streamable");
  }

  Frame collect(ChunkSource& src, std::int64_t uid) {
    std::vector<Frame> parts;
    std::size_t bytes = 0;
    while (auto c = src.next()) {
      bytes += c->resident_bytes();
      tracker_.check(uid, bytes);
      parts.push_back(std::move(*c));
    }
    if (parts.size() == 1) return std::move(parts[0]);
    return concat(parts);
  }

  Value value_of(const Node& n) {
    auto it = values_.find(&n);
    if (it != values_.end()) return it->second;
    SourcePtr s = open_fresh(n);
    return Value::of(collect(*s, n.uid));
  }

  Value materialize(const Node& n) {
    if (options_.backend == Backend::Eager) return materialize_eager(n);
    const Action& a = n.action;
    if (a.kind == ActionKind::Source) {
      begin(n);
      return a.value;
    }
    if (streamable(n)) {
      SourcePtr s = open_fresh(n);
      Frame f = collect(*s, n.uid);
      return Value::of(std::move(f));
    }
    switch (a.kind) {
      case ActionKind::GroupByAgg: {
        SourcePtr in = open(*n.sources.at(0));
        NodeStats& st = begin(n);
        GroupAggregator agg(a.names, a.aggs);
        StateCharge charge(tracker_, n.uid);
        while (auto c = in->next()) {
          st.rows_in += c->rows();
          agg.consume(*c);
          charge.update(agg.state_bytes());
        }
        Frame out = agg.finish();
        st.rows_out += out.rows();
        return Value::of(std::move(out));
      }
      case ActionKind::Head: {
        SourcePtr in = open(*n.sources.at(0));
        NodeStats& st = begin(n);
        std::vector<Frame> parts;
        std::size_t rows = 0;
        while (rows < a.count) {
          auto c = in->next();
          if (!c) break;
          st.rows_in += c->rows();
          rows += c->rows();
          parts.push_back(std::move(*c));
        }
        Frame out = head(parts.size() == 1 ? parts[0] : concat(parts), a.count);
        st.rows_out += out.rows();
        return Value::of(std::move(out));
      }
      case ActionKind::Reduce: return stream_reduce(n);
      default: break;
    }
    std::vector<Value> inputs;
    for (const auto& s : n.sources) inputs.push_back(value_of(*s));
    return finish_node(n, inputs);
  }

  Value stream_reduce(const Node& n) {
    const Expr& e = *n.action.expr;
    std::vector<const Expr*> aggs;
    collect_aggregates(e, aggs);
    bool nested = false;
    for (const Expr* g : aggs) nested = nested || has_aggregate(*g->args[0]);
    if (nested || aggs.empty()) {
      std::vector<Value> inputs{value_of(*n.sources.at(0))};
      return finish_node(n, inputs);
    }
    SourcePtr in = open(*n.sources.at(0));
    NodeStats& st = begin(n);
    std::vector<std::optional<AggState>> states(aggs.size());
    while (auto c = in->next()) {
      st.rows_in += c->rows();
      for (std::size_t k = 0; k < aggs.size(); ++k) {
        Column col = eval_column(*aggs[k]->args[0], *c);
        if (!states[k]) states[k].emplace(aggs[k]->agg, col.dtype);
        for (std::size_t i = 0; i < col.size(); ++i) states[k]->add(col, i);
      }
    }
    std::map<const Expr*, Cell> results;
    for (std::size_t k = 0; k < aggs.size(); ++k) results[aggs[k]] = states[k]->result();
    ExprPtr folded = substitute_aggregates(n.action.expr, results);
    st.rows_out += 1;
    return Value::of(eval_scalar(*folded, with_rows(0)));
  }

  Value materialize_eager(const Node& n) {
    std::vector<Value> inputs;
    for (const auto& s : n.sources) inputs.push_back(values_.at(s.get()));
    return finish_node(n, inputs);
  }

  Value finish_node(const Node& n, const std::vector<Value>& inputs) {
    NodeStats& st = begin(n);
    for (const auto& v : inputs) {
      if (v.is_frame()) st.rows_in += v.frame->rows();
    }
    Value out = apply_action(n, inputs, &stats_);
    if (out.is_frame()) {
      st.rows_out += out.frame->rows();
      st.bytes_out += out.frame->resident_bytes();
    }
    if (n.action.kind == ActionKind::Print) {
      std::map<std::int64_t, Value> args;
      for (std::size_t i = 0; i < n.sources.size(); ++i) args[n.sources[i]->uid] = inputs[i];
      on_print_(n, args);
    }
    return out;
  }

  const ExecOptions& options_;
  ExecStats& stats_;
  NodeStats scratch_;  // sink for Source nodes
  MemoryTracker tracker_;
  const PrintHandler& on_print_;
  std::set<const Node*> piped_;
  std::map<const Node*, std::size_t> remaining_;
  std::map<const Node*, Value> values_;
};

}  // namespace

std::map<std::int64_t, Value> execute(const std::vector<NodePtr>& roots, const std::set<std::int64_t>& keep,
                                      const ExecOptions& options, ExecStats& stats, const PrintHandler& on_print) {
  ++stats.computes;
  Runner r(options, stats, on_print);
  return r.run(roots, keep);
}

}  // namespace lfp
