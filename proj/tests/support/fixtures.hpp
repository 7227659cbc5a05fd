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

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace lfp::testing {

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "lfp");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

/// Names of the 22 taxi columns, in file order.
const std::vector<std::string>& taxi_columns();

struct TaxiOptions {
  std::size_t rows = 1000;
  std::uint64_t seed = 7;
  /// Fraction of rows with fare_amount > 0; exact, rows are shuffled.
  double positive_fare = 0.9;
};
/// Taxi-trip style data: every column populated, pickup dates in January 2015.
void write_taxi_csv(const std::string& path, const TaxiOptions& options = {});

/// Small mixed-type dataset for generated programs:
/// id, a (int, nulls), b (float, nulls), c (5 keys), d ('|' lists), dt (date), flag.
void write_mixed_csv(const std::string& path, std::size_t rows, std::uint64_t seed);
/// Lookup table keyed by c with columns c, w.
void write_lookup_csv(const std::string& path);

struct GeneratedProgram {
  std::string source;
  int prints = 0;
  int externals = 0;
  bool order_sensitive = false;
};

struct GeneratorOptions {
  int max_statements = 12;
  int min_prints = 1;
  int min_externals = 0;
  bool externals = true;
  bool control_flow = true;
};

/// Random well-typed program over mixed.csv and lookup.csv.
GeneratedProgram generate_program(std::mt19937_64& rng, const GeneratorOptions& options = {});

/// Random analysis-only program: structured control flow, frames f0..f2 over
/// columns c0..c5. Not meant to run.
std::string generate_flow_program(std::mt19937_64& rng, int max_blocks);

}  // namespace lfp::testing
