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

#include "fixtures.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace lfp::testing {

namespace fs = std::filesystem;

TempDir::TempDir(const std::string& tag) {
  static std::uint64_t counter = 0;
  std::random_device rd;
  for (int attempt = 0; attempt < 100; ++attempt) {
    fs::path p = fs::temp_directory_path() /
                 (tag + "-" + std::to_string(rd()) + "-" + std::to_string(++counter));
    if (fs::create_directory(p)) {
      path_ = p;
      return;
    }
  }
  throw std::runtime_error("cannot create temporary directory");
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::vector<std::string>& taxi_columns() {
  static const std::vector<std::string> cols = {
      "vendor_id",        "pickup_datetime",   "dropoff_datetime", "passenger_count", "trip_distance",
      "pickup_longitude", "pickup_latitude",   "rate_code",        "store_and_fwd_flag",
      "dropoff_longitude", "dropoff_latitude", "payment_type",     "fare_amount",     "extra",
      "mta_tax",          "tip_amount",        "tolls_amount",     "improvement_surcharge",
      "total_amount",     "airport_fee",       "congestion_surcharge", "trip_type"};
  return cols;
}

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string two(int v) { return (v < 10 ? "0" : "") + std::to_string(v); }

}  // namespace

void write_taxi_csv(const std::string& path, const TaxiOptions& o) {
  std::mt19937_64 rng(o.seed);
  auto pick = [&rng](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto real = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

  std::size_t positives = static_cast<std::size_t>(static_cast<double>(o.rows) * o.positive_fare + 0.5);
  std::vector<std::uint8_t> positive(o.rows, 0);
  std::fill(positive.begin(), positive.begin() + static_cast<std::ptrdiff_t>(std::min(positives, o.rows)), 1);
  std::shuffle(positive.begin(), positive.end(), rng);

  static const char* payments[] = {"card", "cash", "dispute", "no_charge"};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (std::size_t i = 0; i < taxi_columns().size(); ++i) out << (i ? "," : "") << taxi_columns()[i];
  out << '\n';
  std::string line;
  for (std::size_t r = 0; r < o.rows; ++r) {
    int day = pick(1, 31);
    int hour = pick(0, 23);
    int minute = pick(0, 59);
    int second = pick(0, 59);
    int ride = pick(1, 50);
    int dmin = minute + ride;
    int dhour = std::min(23, hour + dmin / 60);
    dmin %= 60;
    double fare = positive[r] ? static_cast<double>(pick(250, 8000)) / 100.0 : -static_cast<double>(pick(0, 500)) / 100.0;
    double extra = std::vector<double>{-0.5, 0.0, 0.5, 1.0}[static_cast<std::size_t>(pick(0, 3))];
    double tip = pick(0, 9) < 4 ? 0.0 : static_cast<double>(pick(1, 2000)) / 100.0;
    double tolls = pick(0, 19) < 17 ? 0.0 : 5.54;
    double airport = pick(0, 9) == 0 ? 1.25 : 0.0;
    double congestion = pick(0, 1) ? 2.5 : 0.0;
    double total = fare + extra + 0.5 + tip + tolls + 0.3 + airport + congestion;
    line.clear();
    line += std::to_string(pick(1, 2)) + ",";
    line += "2015-01-" + two(day) + " " + two(hour) + ":" + two(minute) + ":" + two(second) + ",";
    line += "2015-01-" + two(day) + " " + two(dhour) + ":" + two(dmin) + ":" + two(second) + ",";
    line += std::to_string(pick(1, 6)) + ",";
    line += fixed(real(0.1, 30.0), 2) + ",";
    line += fixed(real(-74.05, -73.75), 6) + "," + fixed(real(40.60, 40.90), 6) + ",";
    line += std::to_string(pick(1, 6)) + ",";
    line += std::string(pick(0, 19) == 0 ? "Y" : "N") + ",";
    line += fixed(real(-74.05, -73.75), 6) + "," + fixed(real(40.60, 40.90), 6) + ",";
    line += std::string(payments[pick(0, 3)]) + ",";
    line += fixed(fare, 2) + "," + fixed(extra, 1) + ",0.5," + fixed(tip, 2) + "," + fixed(tolls, 2) + ",0.3,";
    line += fixed(total, 2) + "," + fixed(airport, 2) + "," + fixed(congestion, 1) + ",";
    line += std::to_string(pick(1, 2)) + "\n";
    out << line;
  }
}

void write_mixed_csv(const std::string& path, std::size_t rows, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto pick = [&rng](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  static const char* parts[] = {"x", "y", "z"};
  std::ofstream out(path, std::ios::binary);
  out << "id,a,b,c,d,dt,flag\n";
  for (std::size_t i = 0; i < rows; ++i) {
    out << i << ',';
    if (pick(0, 19) != 0) out << pick(-50, 50);
    out << ',';
    if (pick(0, 19) != 0) out << fixed(static_cast<double>(pick(-10000, 10000)) / 100.0, 2);
    out << ",k" << pick(0, 4) << ',';
    int n = pick(1, 3);
    for (int k = 0; k < n; ++k) out << (k ? "|" : "") << parts[pick(0, 2)];
    out << ",2024-" << two(pick(1, 12)) << '-' << two(pick(1, 28)) << ',';
    out << (pick(0, 1) ? "True" : "False") << '\n';
  }
}

void write_lookup_csv(const std::string& path) {
  write_text(path, "c,w\nk0,10\nk1,20\nk2,30\nk1,25\nk3,40\n");
}

// ---------------------------------------------------------------------------
// Program generator

namespace {

struct Col {
  std::string name;
  char type;  // I F S D B
  bool listy = false;
};

class ProgramGen {
 public:
  ProgramGen(std::mt19937_64& rng, const GeneratorOptions& o) : rng_(rng), o_(o) {}

  GeneratedProgram run() {
    GeneratedProgram g;
    line("df = read_csv('mixed.csv', parse_dates=['dt'])", 0);
    line("lk = read_csv('lookup.csv')", 0);
    frames_["df"] = {{"id", 'I'}, {"a", 'I'}, {"b", 'F'}, {"c", 'S'}, {"d", 'S', true}, {"dt", 'D'}, {"flag", 'B'}};
    int budget = o_.max_statements - 2;
    int reserve = std::max(0, o_.min_prints) + std::max(0, o_.min_externals);
    while (budget > reserve) {
      int used = statement(budget - reserve);
      if (used == 0) break;
      budget -= used;
    }
    while (prints_ < o_.min_prints && budget > 0) {
      print_stmt(pick_frame(), 0);
      --budget;
    }
    while (externals_ < o_.min_externals && budget > 0) {
      ext_stmt(pick_frame(), 0);
      --budget;
    }
    g.source = out_;
    g.prints = prints_;
    g.externals = externals_;
    g.order_sensitive = order_sensitive_;
    return g;
  }

 private:
  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool chance(int pct) { return pick(1, 100) <= pct; }
  template <class T>
  const T& any(const std::vector<T>& v) { return v[static_cast<std::size_t>(pick(0, static_cast<int>(v.size()) - 1))]; }

  void line(const std::string& s, int depth) { out_ += std::string(static_cast<std::size_t>(depth) * 4, ' ') + s + "\n"; }

  std::string pick_frame() {
    std::vector<std::string> names;
    for (const auto& [n, c] : frames_) names.push_back(n);
    names.erase(std::remove(names.begin(), names.end(), "lk"), names.end());
    if (names.empty()) return "df";
    return any(names);
  }

  std::vector<Col> cols_of(const std::string& f, const std::string& types) {
    std::vector<Col> out;
    for (const auto& c : frames_[f]) {
      if (types.find(c.type) != std::string::npos) out.push_back(c);
    }
    return out;
  }

  static std::string ref(const std::string& f, const std::string& c) { return f + "." + c; }
  std::string new_frame_name() { return "t" + std::to_string(++counter_); }
  std::string target_for(const std::string& u) { return chance(50) ? u : new_frame_name(); }

  std::string comparison(const std::string& f) {
    std::vector<std::string> options;
    for (const auto& c : frames_[f]) {
      if (c.type == 'I' || c.type == 'F') {
        static const char* ops[] = {">", "<", ">=", "<=", "!=", "=="};
        options.push_back(ref(f, c.name) + " " + ops[pick(0, 5)] + " " + std::to_string(pick(-30, 30)));
      } else if (c.type == 'S' && !c.listy) {
        options.push_back(ref(f, c.name) + (chance(50) ? " == " : " != ") + "'k" + std::to_string(pick(0, 4)) + "'");
      } else if (c.type == 'B') {
        options.push_back(ref(f, c.name) + " == " + (chance(50) ? "True" : "False"));
      }
    }
    if (options.empty()) return "";
    return any(options);
  }

  std::string predicate(const std::string& f) {
    std::string a = comparison(f);
    if (a.empty()) return "";
    if (chance(40)) {
      std::string b = comparison(f);
      a = "(" + a + ")" + (chance(50) ? " & " : " | ") + "(" + b + ")";
    }
    if (chance(15)) a = "~(" + a + ")";
    return a;
  }

  /// Numeric row expression and its type.
  std::pair<std::string, char> numeric(const std::string& f) {
    std::vector<Col> nums = cols_of(f, "IF");
    std::vector<Col> dates = cols_of(f, "D");
    if (nums.empty() && dates.empty()) return {"", ' '};
    if (nums.empty() || (!dates.empty() && chance(15))) {
      static const char* parts[] = {"month", "day", "dayofweek", "year"};
      return {ref(f, any(dates).name) + ".dt." + parts[pick(0, 3)], 'I'};
    }
    const Col& x = any(nums);
    const Col& y = any(nums);
    switch (pick(0, 7)) {
      case 0: return {ref(f, x.name) + " * 2", x.type};
      case 1: return {ref(f, x.name) + " + " + ref(f, y.name), x.type == 'I' && y.type == 'I' ? 'I' : 'F'};
      case 2: return {ref(f, x.name) + " / 4", 'F'};
      case 3: return {ref(f, x.name) + " - " + ref(f, x.name) + ".mean()", 'F'};
      case 4: return {"-" + ref(f, x.name), x.type};
      case 5: return {ref(f, x.name) + ".abs()", x.type};
      case 6: return {ref(f, x.name) + ".fillna(0)", x.type};
      default: return {ref(f, x.name) + ".round(1)", x.type};
    }
  }

  void print_stmt(const std::string& f, int depth) {
    ++prints_;
    std::vector<Col> nums = cols_of(f, "IF");
    switch (pick(0, 6)) {
      case 0: line("print(" + f + ")", depth); return;
      case 1: line("print(" + f + ".head(" + std::to_string(pick(1, 6)) + "))", depth); return;
      case 2: line("print(len(" + f + "))", depth); return;
      case 3: line("print(f\"rows of " + f + ": {len(" + f + ")}\")", depth); return;
      case 4:
        if (!nums.empty()) {
          static const char* aggs[] = {"sum", "mean", "max", "min", "count"};
          line("print('" + std::string(aggs[pick(0, 4)]) + "', " + ref(f, any(nums).name) + "." + aggs[pick(0, 4)] + "())",
               depth);
          return;
        }
        break;
      case 5: {
        const Col& c = any(frames_[f]);
        line("print(" + f + "['" + c.name + "'])", depth);
        return;
      }
      default: break;
    }
    line("print(" + f + ")", depth);
  }

  void ext_stmt(const std::string& f, int depth) {
    ++externals_;
    if (chance(30)) {
      line("ext.plot(" + f + ", len(" + f + "))", depth);
    } else {
      line("ext.show(" + f + ")", depth);
    }
  }

  /// Emits one statement (or a compound one); returns the statements used.
  int statement(int budget) {
    std::string u = pick_frame();
    int kind = pick(0, 21);
    if (!o_.externals && kind == 20) kind = 0;
    if ((!o_.control_flow || budget < 3) && kind >= 17 && kind <= 19) kind = 1;
    switch (kind) {
      case 0:
      case 1: {
        std::string p = predicate(u);
        if (p.empty()) return 0;
        std::string t = target_for(u);
        line(t + " = " + u + "[" + p + "]", 0);
        frames_[t] = frames_[u];
        return 1;
      }
      case 2:
      case 3: {
        auto [e, type] = numeric(u);
        if (e.empty()) return 0;
        std::string name = "n" + std::to_string(++counter_);
        if (chance(30)) {
          std::string p = comparison(u);
          if (!p.empty()) {
            e = p;
            type = 'B';
          }
        }
        line(u + "['" + name + "'] = " + e, 0);
        frames_[u].push_back({name, type});
        return 1;
      }
      case 4: {
        std::vector<Col> cols = frames_[u];
        std::shuffle(cols.begin(), cols.end(), rng_);
        cols.resize(static_cast<std::size_t>(pick(1, static_cast<int>(cols.size()))));
        std::string list;
        for (const auto& c : cols) list += (list.empty() ? "'" : ", '") + c.name + "'";
        std::string t = target_for(u);
        line(t + " = " + u + "[[" + list + "]]", 0);
        frames_[t] = cols;
        return 1;
      }
      case 5: {
        if (frames_[u].size() < 2) return 0;
        std::vector<Col> cols = frames_[u];
        std::size_t k = static_cast<std::size_t>(pick(0, static_cast<int>(cols.size()) - 1));
        std::string t = target_for(u);
        line(t + " = " + u + ".drop(columns=['" + cols[k].name + "'])", 0);
        cols.erase(cols.begin() + static_cast<std::ptrdiff_t>(k));
        frames_[t] = cols;
        return 1;
      }
      case 6: {
        std::vector<Col> cols = frames_[u];
        Col& c = cols[static_cast<std::size_t>(pick(0, static_cast<int>(cols.size()) - 1))];
        std::string to = c.name + "_r";
        for (const auto& other : cols) {
          if (other.name == to) return 0;
        }
        std::string t = target_for(u);
        line(t + " = " + u + ".rename(columns={'" + c.name + "': '" + to + "'})", 0);
        c.name = to;
        frames_[t] = cols;
        return 1;
      }
      case 7: {
        std::vector<Col> ints = cols_of(u, "I");
        if (ints.empty()) return 0;
        std::string name = any(ints).name;
        std::string t = target_for(u);
        line(t + " = " + u + ".astype({'" + name + "': 'float64'})", 0);
        std::vector<Col> cols = frames_[u];
        for (auto& c : cols) {
          if (c.name == name) c.type = 'F';
        }
        frames_[t] = cols;
        return 1;
      }
      case 8: {
        std::vector<Col> nums = cols_of(u, "IF");
        std::string t = target_for(u);
        if (nums.empty() || chance(40)) {
          line(t + " = " + u + ".fillna(0)", 0);
        } else {
          line(t + " = " + u + ".fillna({'" + any(nums).name + "': 0})", 0);
        }
        frames_[t] = frames_[u];
        return 1;
      }
      case 9: {
        std::string t = target_for(u);
        line(t + " = " + u + (chance(50) ? ".round(1)" : ".abs()"), 0);
        frames_[t] = frames_[u];
        return 1;
      }
      case 10: {
        std::vector<Col> keys = cols_of(u, "SB");
        std::string t = target_for(u);
        if (keys.empty() || chance(30)) {
          line(t + " = " + u + ".drop_duplicates()", 0);
        } else {
          line(t + " = " + u + ".drop_duplicates(subset=['" + any(keys).name + "'])", 0);
        }
        frames_[t] = frames_[u];
        return 1;
      }
      case 11: {
        std::vector<Col> keys = cols_of(u, "IFSD");
        if (keys.empty()) return 0;
        std::string a = any(keys).name;
        std::string b = any(keys).name;
        std::string t = target_for(u);
        if (a == b) {
          line(t + " = " + u + ".sort_values(['" + a + "'], ascending=" + (chance(50) ? "True" : "False") + ")", 0);
        } else {
          line(t + " = " + u + ".sort_values(['" + a + "', '" + b + "'], ascending=[" + (chance(50) ? "True" : "False") +
                   ", " + (chance(50) ? "True" : "False") + "])",
               0);
        }
        frames_[t] = frames_[u];
        order_sensitive_ = true;
        return 1;
      }
      case 12: {
        std::string t = target_for(u);
        line(t + " = " + u + ".head(" + std::to_string(pick(1, 40)) + ")", 0);
        frames_[t] = frames_[u];
        order_sensitive_ = true;
        return 1;
      }
      case 13: {
        std::string listy;
        for (const auto& c : frames_[u]) {
          if (c.listy) listy = c.name;
        }
        if (listy.empty()) return 0;
        std::string t = target_for(u);
        line(t + " = " + u + ".explode('" + listy + "')", 0);
        std::vector<Col> cols = frames_[u];
        for (auto& c : cols) {
          if (c.name == listy) c.listy = false;
        }
        frames_[t] = cols;
        return 1;
      }
      case 14: {
        bool has_c = false;
        for (const auto& c : frames_[u]) {
          if (c.name == "w") return 0;
          has_c = has_c || (c.name == "c" && c.type == 'S' && !c.listy);
        }
        if (!has_c) return 0;
        static const char* hows[] = {"inner", "left", "right", "outer"};
        std::string t = new_frame_name();
        line(t + " = " + u + ".merge(lk, on=['c'], how='" + hows[pick(0, 3)] + "')", 0);
        frames_[t] = frames_[u];
        frames_[t].push_back({"w", 'I'});
        return 1;
      }
      case 15: {
        std::vector<Col> keys = cols_of(u, "SB");
        std::vector<Col> nums = cols_of(u, "IF");
        keys.erase(std::remove_if(keys.begin(), keys.end(), [](const Col& c) { return c.listy; }), keys.end());
        if (keys.empty()) return 0;
        Col key_col = any(keys);
        std::string key = key_col.name;
        std::string t = new_frame_name();
        std::vector<Col> out = {key_col};
        int form = nums.empty() ? 3 : pick(0, 3);
        if (form == 0) {
          static const char* aggs[] = {"sum", "mean", "max", "min", "count"};
          int a = pick(0, 4);
          const Col& v = any(nums);
          line(t + " = " + u + ".groupby(['" + key + "'])['" + v.name + "']." + aggs[a] + "()", 0);
          char type = a == 1 ? 'F' : (a == 4 ? 'I' : v.type);
          out.push_back({v.name, type});
        } else if (form == 1) {
          const Col& v = any(nums);
          line(t + " = " + u + ".groupby(['" + key + "']).agg({'" + v.name + "': 'mean'})", 0);
          out.push_back({v.name, 'F'});
        } else if (form == 2) {
          const Col& v = any(nums);
          line(t + " = " + u + ".groupby(['" + key + "'])['" + v.name + "'].agg('sum')", 0);
          out.push_back({v.name, v.type});
        } else {
          line(t + " = " + u + ".groupby(['" + key + "']).size()", 0);
          out.push_back({"size", 'I'});
        }
        frames_[t] = out;
        return 1;
      }
      case 16: {
        std::vector<Col> nums = cols_of(u, "IF");
        if (nums.empty()) return 0;
        std::string s = "s" + std::to_string(++counter_);
        line(s + " = " + ref(u, any(nums).name) + ".sum()", 0);
        line("print(f\"total {" + s + "} over {len(" + u + ")}\")", 0);
        ++prints_;
        return 2;
      }
      case 17: {
        line("if len(" + u + ") > " + std::to_string(pick(0, 400)) + ":", 0);
        print_stmt(u, 1);
        line("else:", 0);
        if (o_.externals && chance(40)) {
          ext_stmt(u, 1);
        } else {
          print_stmt(u, 1);
        }
        return 3;
      }
      case 18: {
        if (budget < 5) return 0;
        std::string p = predicate(u);
        if (p.empty()) return 0;
        std::string i = "i" + std::to_string(++counter_);
        line(i + " = 0", 0);
        line("while " + i + " < " + std::to_string(pick(1, 3)) + ":", 0);
        line("print(f\"pass {" + i + "}: {len(" + u + ")}\")", 1);
        ++prints_;
        line(u + " = " + u + "[" + p + "]", 1);
        line(i + " = " + i + " + 1", 1);
        return 5;
      }
      case 19: {
        std::vector<Col> nums = cols_of(u, "IF");
        if (nums.empty()) return 0;
        line("if " + ref(u, any(nums).name) + ".max() > " + std::to_string(pick(-20, 60)) + ":", 0);
        print_stmt(u, 1);
        return 2;
      }
      case 20: ext_stmt(u, 0); return 1;
      default: print_stmt(u, 0); return 1;
    }
  }

  std::mt19937_64& rng_;
  GeneratorOptions o_;
  std::map<std::string, std::vector<Col>> frames_;
  std::string out_;
  int counter_ = 0;
  int prints_ = 0;
  int externals_ = 0;
  bool order_sensitive_ = false;
};

}  // namespace

GeneratedProgram generate_program(std::mt19937_64& rng, const GeneratorOptions& options) {
  return ProgramGen(rng, options).run();
}

namespace {

class FlowGen {
 public:
  FlowGen(std::mt19937_64& rng, int max_blocks) : rng_(rng), blocks_left_(max_blocks) {}

  std::string run() {
    for (int f = 0; f < 3; ++f) line("f" + std::to_string(f) + " = read_csv('in" + std::to_string(f) + ".csv')", 0);
    body(0, pick(3, 8));
    return out_;
  }

 private:
  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  std::string frame() { return "f" + std::to_string(pick(0, 2)); }
  std::string col() { return "c" + std::to_string(pick(0, 5)); }
  void line(const std::string& s, int depth) { out_ += std::string(static_cast<std::size_t>(depth) * 4, ' ') + s + "\n"; }

  void body(int depth, int n) {
    for (int k = 0; k < n; ++k) stmt(depth);
  }

  void stmt(int depth) {
    int kind = pick(0, 14);
    if (depth >= 2 && kind >= 12) kind = pick(0, 11);
    std::string t = frame();
    std::string u = frame();
    switch (kind) {
      case 0: line(t + "['" + col() + "'] = " + u + "." + col() + " + " + u + "['" + col() + "']", depth); return;
      case 1: line(t + " = " + u + "[" + u + "." + col() + " > 0]", depth); return;
      case 2: line(t + " = " + u + "[['" + col() + "', '" + col() + "']]", depth); return;
      case 3: line(t + " = " + u + ".drop(columns=['" + col() + "'])", depth); return;
      case 4: line(t + " = " + u + ".rename(columns={'" + col() + "': '" + col() + "'})", depth); return;
      case 5: line("print(" + u + "." + col() + ".sum())", depth); return;
      case 6: line("print(" + u + ")", depth); return;
      case 7: line(t + " = " + u + ".groupby(['" + col() + "'])['" + col() + "'].mean()", depth); return;
      case 8: line(t + " = " + u + ".sort_values(['" + col() + "']).head(3)", depth); return;
      case 9: line(t + " = read_csv('in" + std::to_string(pick(0, 2)) + ".csv')", depth); return;
      case 10: line(t + " = " + u + ".merge(" + frame() + ", on=['" + col() + "'])", depth); return;
      case 11: line("ext.show(" + u + "[['" + col() + "']])", depth); return;
      case 12:
      case 13:
        if (blocks_left_ < 4) break;
        blocks_left_ -= 4;
        line("if " + u + "." + col() + ".max() > " + std::to_string(pick(0, 9)) + ":", depth);
        body(depth + 1, pick(1, 3));
        if (pick(0, 1)) {
          line("else:", depth);
          body(depth + 1, pick(1, 3));
        }
        return;
      default:
        if (blocks_left_ < 3) break;
        blocks_left_ -= 3;
        line("while len(" + u + ") > " + std::to_string(pick(0, 9)) + ":", depth);
        body(depth + 1, pick(1, 3));
        return;
    }
    line("print(" + u + "." + col() + ")", depth);
  }

  std::mt19937_64& rng_;
  int blocks_left_;
  std::string out_;
};

}  // namespace

std::string generate_flow_program(std::mt19937_64& rng, int max_blocks) { return FlowGen(rng, max_blocks).run(); }

}  // namespace lfp::testing
