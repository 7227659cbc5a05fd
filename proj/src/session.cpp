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

#include "lfp/session.hpp"

#include <algorithm>

#include "lfp/errors.hpp"

namespace lfp {

Session::Session(SessionOptions options) : options_(std::move(options)) {}

void Session::emit_line(const std::string& line, const std::vector<Value>& shown) {
  for (const auto& v : shown) {
    if (v.is_frame()) hash_.update(canonical_text(v));
  }
  hash_.update(line);
  hash_.update("\n");
  output_ += line;
  output_ += '\n';
  if (options_.echo) {
    *options_.echo << line << '\n';
    options_.echo->flush();
  }
}

void Session::on_print(const Node& print, const std::map<std::int64_t, Value>& args) {
  const std::string& text = print.action.text;
  std::vector<Value> shown;
  std::size_t pos = 0;
  while ((pos = text.find("$_#", pos)) != std::string::npos) {
    std::size_t end = text.find("$_#", pos + 3);
    if (end == std::string::npos) break;
    std::string digits = text.substr(pos + 3, end - pos - 3);
    if (!digits.empty() && std::all_of(digits.begin(), digits.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      auto it = args.find(std::stoll(digits));
      if (it != args.end()) shown.push_back(it->second);
      pos = end + 3;
    } else {
      pos += 3;
    }
  }
  emit_line(expand_print(text, args), shown);
}

std::vector<Value> Session::compute(const std::vector<NodePtr>& targets, const std::vector<NodePtr>& live_hints) {
  std::vector<NodePtr> roots;
  auto add_root = [&roots](const NodePtr& n) {
    if (std::find(roots.begin(), roots.end(), n) == roots.end()) roots.push_back(n);
  };
  for (const auto& t : targets) add_root(t);
  bool printing = !graph_.pending_prints().empty();
  if (!printing && std::all_of(targets.begin(), targets.end(),
                               [](const NodePtr& t) { return t->action.kind == ActionKind::Source; })) {
    std::vector<Value> values;
    for (const auto& t : targets) values.push_back(t->action.value);
    return values;
  }
  if (printing) add_root(graph_.last_print());
  if (roots.empty()) return {};

  std::map<std::int64_t, Value> cached = persisted_;
  for (auto uid : emitted_prints_) cached[uid] = Value::none();
  ClonedGraph cg = clone_graph(roots, cached);
  ComputeTrace trace;
  if (options_.explain) trace.pre_dot = to_dot(cg.roots);

  const auto& passes = options_.passes;
  std::set<std::int64_t> marked;
  std::set<std::int64_t> frontier;
  if (passes.count("persist")) {
    marked = mark_persist(cg.roots, live_hints);
    frontier = persist_frontier(cg.roots, marked, live_hints);
  }
  std::int64_t next = graph_.peek_uid();
  OptContext ctx;
  ctx.next_uid = &next;
  ctx.pinned = marked;
  if (passes.count("pushdown")) trace.pushdown.append(pushdown(cg.roots, ctx));
  if (passes.count("xpushdown")) trace.pushdown.append(pushdown_extended(cg.roots, ctx));
  while (graph_.peek_uid() < next) graph_.next_uid();
  if (passes.count("dce")) {
    std::vector<NodePtr> requested = cg.roots;
    for (const auto& n : reachable(cg.roots)) {
      if (frontier.count(n->uid)) requested.push_back(n);
    }
    trace.redundancy = eliminate_redundant(cg.roots, requested, frontier);
  }
  if (options_.explain) trace.post_dot = to_dot(cg.roots);

  auto results = execute(cg.roots, frontier, options_.exec, stats_,
                         [this](const Node& p, const std::map<std::int64_t, Value>& args) { on_print(p, args); });

  for (auto uid : frontier) {
    auto it = results.find(uid);
    if (it != results.end()) persisted_[uid] = it->second;
  }
  std::set<std::int64_t> hinted;
  for (const auto& n : reachable(live_hints)) hinted.insert(n->uid);
  if (!live_hints.empty()) {
    for (auto it = persisted_.begin(); it != persisted_.end();) {
      it = hinted.count(it->first) ? std::next(it) : persisted_.erase(it);
    }
  }
  trace.persisted = frontier;
  if (printing) {
    for (const auto& p : graph_.pending_prints()) emitted_prints_.insert(p->uid);
    graph_.clear_pending_prints();
  }
  if (options_.explain) traces_.push_back(std::move(trace));

  std::vector<Value> out;
  for (const auto& t : targets) out.push_back(results.at(t->uid));
  return out;
}

void Session::flush() {
  if (!graph_.pending_prints().empty()) compute({}, {});
}

}  // namespace lfp
