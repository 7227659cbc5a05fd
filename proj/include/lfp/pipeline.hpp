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

#include <set>
#include <string>
#include <vector>

#include "lfp/rewrite.hpp"
#include "lfp/session.hpp"

namespace lfp {

/// Every optimization pass: static rewrites first, then graph passes.
const std::vector<std::string>& all_pass_names();
/// Comma-separated pass list; throws Error on an unknown name.
std::set<std::string> parse_pass_list(const std::string& text);

struct PipelineOptions {
  std::set<std::string> passes{"colsel", "dropcols", "pushdown", "xpushdown", "dce", "persist", "lazyprint"};
  ExecOptions exec;
  bool reference = false;
  bool use_metadata = false;
  std::set<std::string> externals{"ext"};
  std::string base_dir;
  bool explain = false;
  std::ostream* echo = nullptr;
};

/// Applies the enabled static rewrites.
script::Program prepare(const script::Program& p, const PipelineOptions& options);
RunResult run_prepared(const script::Program& p, const PipelineOptions& options);
/// Parse, rewrite and execute.
RunResult run_source(const std::string& source, const PipelineOptions& options);

/// Pre/post DOT and pass reports for every compute, as line-oriented text.
std::string explain_report(const RunResult& r);

}  // namespace lfp
