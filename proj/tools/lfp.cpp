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

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "lfp/errors.hpp"
#include "lfp/metastore.hpp"
#include "lfp/pipeline.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw lfp::MissingFile(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int report(const std::string& file, const lfp::Error& e) {
  std::cerr << file;
  if (e.span().known()) std::cerr << ":" << e.span().line << ":" << e.span().col;
  std::cerr << ": " << (e.internal() ? "internal error: " : "error: ") << e.what() << "\n";
  return e.internal() ? 2 : 1;
}

struct RunFlags {
  std::string script;
  std::string backend = "eager";
  std::size_t chunk_rows = 65536;
  std::optional<std::size_t> mem_budget;
  bool no_opt = false;
  std::string opt;
  std::string explain;
  bool stats = false;
  bool meta = false;
  bool reference = false;
  std::vector<std::string> ext;
};

lfp::PipelineOptions pipeline_options(const RunFlags& f) {
  lfp::PipelineOptions o;
  if (f.no_opt) {
    o.passes.clear();
  } else if (!f.opt.empty()) {
    o.passes = lfp::parse_pass_list(f.opt);
  }
  o.exec.backend = *lfp::parse_backend(f.backend);
  o.exec.chunk_rows = f.chunk_rows;
  if (f.mem_budget) o.exec.mem_budget = *f.mem_budget;
  o.use_metadata = f.meta;
  o.reference = f.reference;
  if (!f.ext.empty()) o.externals = {f.ext.begin(), f.ext.end()};
  o.base_dir = std::filesystem::path(f.script).parent_path().string();
  o.explain = !f.explain.empty();
  return o;
}

void add_common(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("script", f.script, "LFP-script file")->required();
  cmd->add_option("--opt", f.opt, "comma-separated passes to enable");
  cmd->add_flag("--no-opt", f.no_opt, "disable every optimization pass");
  cmd->add_option("--ext", f.ext, "registered external module names");
}

int cmd_run(const RunFlags& f) {
  try {
    lfp::PipelineOptions o = pipeline_options(f);
    o.echo = &std::cout;
    lfp::RunResult r = lfp::run_source(read_file(f.script), o);
    if (f.stats) std::cerr << r.stats.to_string();
    if (!f.explain.empty()) {
      std::ofstream out(f.explain, std::ios::binary);
      if (!out) throw lfp::Error("cannot write " + f.explain);
      out << lfp::explain_report(r);
    }
    return 0;
  } catch (const lfp::Error& e) {
    return report(f.script, e);
  } catch (const std::exception& e) {
    std::cerr << f.script << ": internal error: " << e.what() << "\n";
    return 2;
  }
}

int cmd_rewrite(const RunFlags& f, const std::string& output) {
  try {
    lfp::PipelineOptions o = pipeline_options(f);
    std::string text = lfp::script::emit(lfp::prepare(lfp::script::parse(read_file(f.script)), o));
    if (output.empty()) {
      std::cout << text;
    } else {
      std::ofstream out(output, std::ios::binary);
      if (!out) throw lfp::Error("cannot write " + output);
      out << text;
    }
    return 0;
  } catch (const lfp::Error& e) {
    return report(f.script, e);
  } catch (const std::exception& e) {
    std::cerr << f.script << ": internal error: " << e.what() << "\n";
    return 2;
  }
}

int cmd_meta(const std::string& sub, const std::string& path) {
  try {
    if (sub == "scan") {
      lfp::DatasetMeta m = lfp::scan(path);
      std::cout << "scanned " << path << ": " << m.row_count << " rows, " << m.columns.size() << " columns\n";
      return 0;
    }
    if (!std::filesystem::exists(path)) throw lfp::MissingFile(path);
    std::optional<lfp::DatasetMeta> m = lfp::lookup(path);
    if (!m) {
      std::cerr << path << ": no metadata\n";
      return 1;
    }
    std::cout << lfp::meta_to_text(*m);
    return 0;
  } catch (const lfp::Error& e) {
    return report(path, e);
  } catch (const std::exception& e) {
    std::cerr << path << ": internal error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lfp: lazy dataframe engine"};
  app.require_subcommand(1);

  RunFlags run;
  CLI::App* run_cmd = app.add_subcommand("run", "execute a script");
  add_common(run_cmd, run);
  run_cmd->add_option("--backend", run.backend, "eager or stream")->check(CLI::IsMember({"eager", "stream"}));
  run_cmd->add_option("--chunk-rows", run.chunk_rows, "rows per chunk on the stream backend")
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--mem-budget", run.mem_budget, "byte limit for blocking operator state");
  run_cmd->add_option("--explain", run.explain, "write plans and pass reports to this path");
  run_cmd->add_flag("--stats", run.stats, "print execution statistics to stderr");
  run_cmd->add_flag("--meta", run.meta, "use dataset metadata sidecars");
  run_cmd->add_flag("--reference", run.reference, "statement-by-statement evaluation");

  RunFlags rw;
  std::string rw_out;
  CLI::App* rw_cmd = app.add_subcommand("rewrite", "print the statically rewritten script");
  add_common(rw_cmd, rw);
  rw_cmd->add_option("-o,--output", rw_out, "output path");

  std::string meta_sub;
  std::string meta_path;
  CLI::App* meta_cmd = app.add_subcommand("meta", "dataset metadata");
  meta_cmd->add_option("action", meta_sub, "scan or show")->required()->check(CLI::IsMember({"scan", "show"}));
  meta_cmd->add_option("file", meta_path, "CSV file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  if (*run_cmd) return cmd_run(run);
  if (*rw_cmd) return cmd_rewrite(rw, rw_out);
  return cmd_meta(meta_sub, meta_path);
}
