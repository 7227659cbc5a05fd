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

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lfp/script.hpp"

namespace lfp::dataflow {

/// Columns of one frame variable. With `all` set the set is every column
/// except `cols`; otherwise exactly `cols`.
struct ColSet {
  bool all = false;
  std::set<std::string> cols;

  static ColSet everything() { return {true, {}}; }
  static ColSet of(std::set<std::string> c) { return {false, std::move(c)}; }
  bool empty() const { return !all && cols.empty(); }
  /// True for the plain wildcard (no exclusions).
  bool wildcard() const { return all && cols.empty(); }
  bool contains(const std::string& c) const { return all ? !cols.count(c) : cols.count(c) > 0; }
  void add(const ColSet& o);
  void remove(const std::string& c);
  bool operator==(const ColSet&) const = default;
  std::string to_string() const;
};

/// Live attributes keyed by variable; a variable is absent when nothing of it is live.
struct AttrFacts {
  std::map<std::string, ColSet> vars;

  bool live(const std::string& var, const std::string& col) const;
  bool live(const std::string& var) const { return vars.count(var) > 0; }
  void add(const std::string& var, const ColSet& c);
  void add(const AttrFacts& o);
  bool operator==(const AttrFacts&) const = default;
  std::string to_string() const;
};

struct BasicBlock {
  int id = 0;
  /// If/While entries stand for their condition only.
  std::vector<const script::Stmt*> statements;
  std::vector<int> successors;
  std::vector<int> predecessors;
};

struct Cfg {
  std::vector<BasicBlock> blocks;
  int entry = 0;
  int exit = 0;
};

Cfg build_cfg(const script::Program& p);

/// Column lineage of an assignment: column c of the target comes from column
/// map(c) of `source`. Steps apply outermost last.
struct LineageStep {
  enum class Kind { Restrict, Rename, Drop };
  Kind kind = Kind::Restrict;
  std::vector<std::string> names;
  std::vector<std::pair<std::string, std::string>> mapping;  // old -> new
};

struct Lineage {
  std::string source;
  std::vector<LineageStep> steps;
  /// Maps live columns of the target back to the source.
  ColSet map_back(ColSet live) const;
};

/// Effect of one statement: In = gen ∪ (Out − kill) ∪ lineage(Out[target]).
struct StmtEffect {
  AttrFacts gen;
  std::optional<std::string> kill_var;  // whole-variable definition
  std::optional<std::pair<std::string, std::string>> kill_col;
  std::optional<Lineage> lineage;

  AttrFacts apply(const AttrFacts& out) const;
};

struct AnalysisOptions {
  /// Ignore whole-frame uses by head/info/describe.
  bool inspection_heuristic = false;
  /// Names treated as external modules rather than variables.
  std::set<std::string> externals{"ext"};
};

StmtEffect statement_effect(const script::Stmt& s, const AnalysisOptions& options = {});

struct BlockFacts {
  AttrFacts gen;
  AttrFacts kill;
  AttrFacts in;
  AttrFacts out;
};

struct LivenessFact {
  std::vector<BlockFacts> blocks;
  std::size_t iterations = 0;
  /// Out and In of every statement, keyed by statement.
  std::map<const script::Stmt*, AttrFacts> stmt_out;
  std::map<const script::Stmt*, AttrFacts> stmt_in;
};

/// Gen = transfer of the empty set; Kill = every attribute some statement defines.
std::pair<AttrFacts, AttrFacts> gen_kill(const BasicBlock& b, const AnalysisOptions& options = {});
AttrFacts transfer_block(const BasicBlock& b, const AttrFacts& out, const AnalysisOptions& options = {});

LivenessFact solve_liveness(const Cfg& cfg, const AnalysisOptions& options = {});

/// Per-path reference: explores (block, fact) states backwards from the exit
/// without joining, then unions per block.
std::vector<AttrFacts> brute_force_in(const Cfg& cfg, const AnalysisOptions& options = {});

/// Live variables at whole-frame granularity.
struct FrameFacts {
  std::vector<std::set<std::string>> in;
  std::vector<std::set<std::string>> out;
  std::map<const script::Stmt*, std::set<std::string>> stmt_out;
};
FrameFacts solve_live_frames(const Cfg& cfg);

std::string dump(const Cfg& cfg, const LivenessFact& facts);

}  // namespace lfp::dataflow
