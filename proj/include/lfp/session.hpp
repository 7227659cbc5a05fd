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
#include <functional>
#include <ostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "lfp/executor.hpp"
#include "lfp/optimizer.hpp"
#include "lfp/script.hpp"
#include "lfp/taskgraph.hpp"

namespace lfp {

/// Runtime passes applied at every compute.
inline const std::vector<std::string>& runtime_pass_names() {
  static const std::vector<std::string> names = {"pushdown", "xpushdown", "dce", "persist"};
  return names;
}

struct SessionOptions {
  ExecOptions exec;
  std::set<std::string> passes{"pushdown", "xpushdown", "dce", "persist"};
  /// Statement-by-statement eager evaluation with immediate prints; the
  /// reference semantics every optimized run must reproduce.
  bool reference = false;
  /// Consult dataset sidecars at read time (schema, category encoding).
  bool use_metadata = false;
  std::set<std::string> externals{"ext"};
  /// Directory that relative dataset paths resolve against.
  std::string base_dir;
  bool explain = false;
  /// Receives each output line as it is emitted.
  std::ostream* echo = nullptr;
};

/// One compute: graphs before and after the runtime passes.
struct ComputeTrace {
  std::string pre_dot;
  std::string post_dot;
  PushdownReport pushdown;
  RedundancyReport redundancy;
  std::set<std::int64_t> persisted;
};

struct RunResult {
  std::string output;
  std::uint64_t hash = 0;
  ExecStats stats;
  std::vector<ComputeTrace> traces;
};

/// Owns the task graph, persisted results and program output of one run.
class Session {
 public:
  explicit Session(SessionOptions options);

  TaskGraph& graph() { return graph_; }
  const SessionOptions& options() const { return options_; }
  ExecStats& stats() { return stats_; }
  const std::vector<ComputeTrace>& traces() const { return traces_; }

  /// Materializes targets; pending prints are emitted first, in order.
  std::vector<Value> compute(const std::vector<NodePtr>& targets, const std::vector<NodePtr>& live_hints);
  /// Emits every pending print.
  void flush();

  /// Appends a line of program output and folds it into the output hash,
  /// preceded by the canonical text of the frames it shows.
  void emit_line(const std::string& line, const std::vector<Value>& shown);
  const std::string& output() const { return output_; }
  std::uint64_t output_hash() const { return hash_.digest(); }
  std::size_t persisted_count() const { return persisted_.size(); }

 private:
  void on_print(const Node& print, const std::map<std::int64_t, Value>& args);

  SessionOptions options_;
  TaskGraph graph_;
  ExecStats stats_;
  std::map<std::int64_t, Value> persisted_;
  std::set<std::int64_t> emitted_prints_;
  std::vector<ComputeTrace> traces_;
  std::string output_;
  Fnv1a hash_;
};

/// Executes a parsed program.
RunResult run_program(const script::Program& program, const SessionOptions& options);

/// Columns the program writes: assignment, rename, fillna, astype and explode
/// targets. nullopt when a whole-frame fillna or astype writes every column.
std::optional<std::set<std::string>> written_columns(const script::Program& program);

}  // namespace lfp
