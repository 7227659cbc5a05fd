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
// Python bindings for the engine.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lfp/dataflow.hpp"
#include "lfp/errors.hpp"
#include "lfp/metastore.hpp"
#include "lfp/pipeline.hpp"
#include "lfp/script.hpp"

namespace py = pybind11;

namespace {

lfp::PipelineOptions make_options(const std::optional<std::vector<std::string>>& passes, const std::string& backend,
                                  std::size_t chunk_rows, std::optional<std::size_t> mem_budget, bool allow_spill,
                                  bool reference, bool use_metadata, const std::string& base_dir,
                                  const std::vector<std::string>& externals, bool explain) {
  lfp::PipelineOptions o;
  if (passes) {
    std::string joined;
    for (const auto& p : *passes) joined += (joined.empty() ? "" : ",") + p;
    o.passes = joined.empty() ? std::set<std::string>{} : lfp::parse_pass_list(joined);
  }
  auto b = lfp::parse_backend(backend);
  if (!b) throw lfp::Error("unknown backend: " + backend);
  o.exec.backend = *b;
  o.exec.chunk_rows = chunk_rows;
  o.exec.mem_budget = mem_budget;
  o.exec.allow_spill = allow_spill;
  o.reference = reference;
  o.use_metadata = use_metadata;
  o.base_dir = base_dir;
  o.externals = {externals.begin(), externals.end()};
  o.explain = explain;
  return o;
}

py::dict stats_dict(const lfp::ExecStats& s) {
  py::dict d;
  d["computes"] = s.computes;
  d["nodes_executed"] = s.nodes_executed;
  d["columns_parsed"] = s.columns_parsed;
  d["rows_read"] = s.rows_read;
  d["read_bytes"] = s.read_bytes;
  d["peak_bytes"] = s.peak_bytes;
  d["spill_runs"] = s.spill_runs;
  py::dict nodes;
  for (const auto& [uid, n] : s.nodes) {
    py::dict e;
    e["executions"] = n.executions;
    e["rows_in"] = n.rows_in;
    e["rows_out"] = n.rows_out;
    e["bytes_out"] = n.bytes_out;
    nodes[py::int_(uid)] = e;
  }
  d["nodes"] = nodes;
  return d;
}

py::dict meta_dict(const lfp::DatasetMeta& m) {
  py::dict d;
  d["path"] = m.path;
  d["row_count"] = m.row_count;
  d["approx_row_bytes"] = m.approx_row_bytes;
  py::list cols;
  for (const auto& c : m.columns) {
    py::dict e;
    e["name"] = c.name;
    e["dtype"] = std::string(lfp::dtype_name(c.dtype));
    e["distinct"] = c.distinct ? py::object(py::int_(*c.distinct)) : py::object(py::none());
    e["nulls"] = c.nulls;
    cols.append(e);
  }
  d["columns"] = cols;
  return d;
}

}  // namespace

PYBIND11_MODULE(_lfp, m) {
  m.doc() = "Lazy dataframe engine";

  auto error = py::register_exception<lfp::Error>(m, "LfpError");
  py::register_exception<lfp::MemoryBudgetExceeded>(m, "MemoryBudgetExceeded", error.ptr());
  py::register_exception<lfp::SyntaxError>(m, "ScriptSyntaxError", error.ptr());
  py::register_exception<lfp::MissingFile>(m, "MissingFile", error.ptr());
  py::register_exception<lfp::UnknownColumn>(m, "UnknownColumn", error.ptr());

  py::class_<lfp::RunResult>(m, "RunResult")
      .def_readonly("output", &lfp::RunResult::output)
      .def_readonly("hash", &lfp::RunResult::hash)
      .def_property_readonly("stats", [](const lfp::RunResult& r) { return stats_dict(r.stats); })
      .def("explain", [](const lfp::RunResult& r) { return lfp::explain_report(r); })
      .def("__repr__", [](const lfp::RunResult& r) {
        return "<RunResult hash=" + std::to_string(r.hash) + " lines=" +
               std::to_string(std::count(r.output.begin(), r.output.end(), '\n')) + ">";
      });

  m.def(
      "run",
      [](const std::string& source, std::optional<std::vector<std::string>> passes, const std::string& backend,
         std::size_t chunk_rows, std::optional<std::size_t> mem_budget, bool allow_spill, bool reference,
         bool use_metadata, const std::string& base_dir, const std::vector<std::string>& externals, bool explain) {
        lfp::PipelineOptions o = make_options(passes, backend, chunk_rows, mem_budget, allow_spill, reference,
                                              use_metadata, base_dir, externals, explain);
        py::gil_scoped_release release;
        return lfp::run_source(source, o);
      },
      py::arg("source"), py::kw_only(), py::arg("passes") = py::none(), py::arg("backend") = "eager",
      py::arg("chunk_rows") = 65536, py::arg("mem_budget") = py::none(), py::arg("allow_spill") = true,
      py::arg("reference") = false, py::arg("use_metadata") = false, py::arg("base_dir") = "",
      py::arg("externals") = std::vector<std::string>{"ext"}, py::arg("explain") = false,
      "Parse, rewrite and execute a script. `passes=None` enables every pass.");

  m.def(
      "rewrite",
      [](const std::string& source, std::optional<std::vector<std::string>> passes,
         const std::vector<std::string>& externals) {
        lfp::PipelineOptions o =
            make_options(passes, "eager", 65536, std::nullopt, true, false, false, "", externals, false);
        return lfp::script::emit(lfp::prepare(lfp::script::parse(source), o));
      },
      py::arg("source"), py::kw_only(), py::arg("passes") = py::none(),
      py::arg("externals") = std::vector<std::string>{"ext"}, "Statically rewritten script text.");

  m.def(
      "format", [](const std::string& source) { return lfp::script::emit(lfp::script::parse(source)); },
      py::arg("source"), "Parse and pretty-print a script.");

  m.def(
      "liveness",
      [](const std::string& source) {
        lfp::script::Program p = lfp::script::parse(source);
        lfp::dataflow::Cfg g = lfp::dataflow::build_cfg(p);
        lfp::dataflow::LivenessFact f = lfp::dataflow::solve_liveness(g);
        py::list blocks;
        for (const auto& b : f.blocks) {
          py::dict e;
          e["in"] = b.in.to_string();
          e["out"] = b.out.to_string();
          blocks.append(e);
        }
        return blocks;
      },
      py::arg("source"), "Live attributes at entry and exit of every basic block.");

  m.def("pass_names", &lfp::all_pass_names, "Every optimization pass name.");
  m.def(
      "scan_meta", [](const std::string& path) { return meta_dict(lfp::scan(path)); }, py::arg("path"),
      "Compute and store dataset metadata next to the file.");
  m.def(
      "lookup_meta",
      [](const std::string& path) -> py::object {
        auto meta = lfp::lookup(path);
        return meta ? py::object(meta_dict(*meta)) : py::object(py::none());
      },
      py::arg("path"), "Stored metadata when fresh, else None.");
  m.def("category_threshold", &lfp::category_threshold, py::arg("row_count"));
}
