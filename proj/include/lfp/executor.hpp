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
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lfp/taskgraph.hpp"

namespace lfp {

enum class Backend { Eager, Stream };
std::optional<Backend> parse_backend(std::string_view name);

struct ExecOptions {
  Backend backend = Backend::Eager;
  std::size_t chunk_rows = 65536;
  /// Bound on blocking-operator state and materialized intermediates (stream only).
  std::optional<std::size_t> mem_budget;
  /// Lets sort spill sorted runs to disk when the budget would be exceeded.
  bool allow_spill = true;
  std::filesystem::path spill_dir;  // empty: system temp directory
};

struct NodeStats {
  /// Times the node ran; reading a cached Source value does not count.
  std::int64_t executions = 0;
  std::uint64_t rows_in = 0;
  std::uint64_t rows_out = 0;
  std::uint64_t bytes_out = 0;
};

/// Counters accumulated over every execution in a session.
struct ExecStats {
  std::map<std::int64_t, NodeStats> nodes;
  std::uint64_t nodes_executed = 0;
  std::uint64_t columns_parsed = 0;
  std::uint64_t rows_read = 0;
  std::uint64_t read_bytes = 0;  // resident bytes of read results
  std::size_t peak_bytes = 0;
  std::size_t spill_runs = 0;
  std::int64_t computes = 0;

  std::int64_t executions(std::int64_t uid) const;
  std::string to_string() const;
};

/// Called once per executed print node with the values of its sources keyed by uid.
using PrintHandler = std::function<void(const Node& print, const std::map<std::int64_t, Value>& args)>;

/// Replaces $_#uid$_# escapes with rendered argument values.
std::string expand_print(const std::string& text, const std::map<std::int64_t, Value>& args);

/// Executes the graph below `roots` in dependency order and returns the
/// values of the roots and of every node in `keep`.
std::map<std::int64_t, Value> execute(const std::vector<NodePtr>& roots, const std::set<std::int64_t>& keep,
                                      const ExecOptions& options, ExecStats& stats, const PrintHandler& on_print);

/// Computes one node from materialized source values.
Value apply_action(const Node& n, const std::vector<Value>& inputs, ExecStats* stats = nullptr);

}  // namespace lfp
