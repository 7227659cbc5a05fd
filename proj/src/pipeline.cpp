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

#include "lfp/pipeline.hpp"

#include <sstream>

#include "lfp/errors.hpp"

namespace lfp {

const std::vector<std::string>& all_pass_names() {
  static const std::vector<std::string> names = {"colsel", "dropcols", "pushdown", "xpushdown",
                                                 "dce",    "persist",  "lazyprint"};
  return names;
}

std::set<std::string> parse_pass_list(const std::string& text) {
  std::set<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    bool known = false;
    for (const auto& n : all_pass_names()) known = known || n == item;
    if (!known) throw Error("unknown pass '" + item + "'");
    out.insert(item);
  }
  return out;
}

script::Program prepare(const script::Program& p, const PipelineOptions& options) {
  if (options.reference) return script::deep_copy(p);
  rewrite::RewriteOptions ro;
  ro.externals = options.externals;
  ro.base_dir = options.base_dir;
  return rewrite::rewrite_program(p, options.passes, ro);
}

RunResult run_prepared(const script::Program& p, const PipelineOptions& options) {
  SessionOptions so;
  so.exec = options.exec;
  so.passes.clear();
  if (!options.reference) {
    for (const auto& n : runtime_pass_names()) {
      if (options.passes.count(n)) so.passes.insert(n);
    }
  }
  so.reference = options.reference;
  so.use_metadata = options.use_metadata;
  so.externals = options.externals;
  so.base_dir = options.base_dir;
  so.explain = options.explain;
  so.echo = options.echo;
  return run_program(p, so);
}

RunResult run_source(const std::string& source, const PipelineOptions& options) {
  return run_prepared(prepare(script::parse(source), options), options);
}

namespace {

std::string uid_list(const std::vector<std::int64_t>& uids) {
  std::string out;
  for (auto u : uids) out += (out.empty() ? "" : " ") + std::to_string(u);
  return out.empty() ? "-" : out;
}

}  // namespace

std::string explain_report(const RunResult& r) {
  std::string out;
  for (std::size_t i = 0; i < r.traces.size(); ++i) {
    const ComputeTrace& t = r.traces[i];
    out += "# compute " + std::to_string(i + 1) + "\n";
    out += "## pre\n" + t.pre_dot;
    out += "## post\n" + t.post_dot;
    out += "## pushdown\n" + t.pushdown.to_string();
    if (!out.empty() && out.back() != '\n') out += '\n';
    out += "## redundancy\n";
    out += "removed: " + uid_list(t.redundancy.removed) + "\n";
    out += "bypassed: " + uid_list(t.redundancy.bypassed) + "\n";
    out += "## persisted\n" + uid_list({t.persisted.begin(), t.persisted.end()}) + "\n";
  }
  return out;
}

}  // namespace lfp
