# Copyright 2026 The LFP Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Lazy dataframe engine: run, rewrite and inspect LFP scripts."""

from ._lfp import (
    LfpError,
    MemoryBudgetExceeded,
    MissingFile,
    RunResult,
    ScriptSyntaxError,
    UnknownColumn,
    category_threshold,
    format,
    liveness,
    lookup_meta,
    pass_names,
    rewrite,
    run,
    scan_meta,
)


def run_file(path, **options):
    """Run a script file; relative dataset paths resolve against its directory."""
    import os

    with open(path, encoding="utf-8") as f:
        source = f.read()
    options.setdefault("base_dir", os.path.dirname(os.path.abspath(path)))
    return run(source, **options)


__all__ = [
    "LfpError",
    "MemoryBudgetExceeded",
    "MissingFile",
    "RunResult",
    "ScriptSyntaxError",
    "UnknownColumn",
    "category_threshold",
    "format",
    "liveness",
    "lookup_meta",
    "pass_names",
    "rewrite",
    "run",
    "run_file",
    "scan_meta",
]
