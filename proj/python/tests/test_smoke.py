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
import lfp
import pytest

PROGRAM = """\
df = read_csv('trips.csv', parse_dates=['pickup_datetime'])
df = df[df.fare_amount > 0]
df['day'] = df.pickup_datetime.dt.dayofweek
by_day = df.groupby(['day'])['passenger_count'].sum()
print(by_day)
ext.show(by_day)
print(f"mean tip: {df.tip_amount.mean()}")
"""


def run(trips, **kw):
    return lfp.run(PROGRAM, base_dir=str(trips.parent), **kw)


def test_modes_agree(trips):
    base = run(trips, passes=[])
    for kw in ({}, {"backend": "stream", "chunk_rows": 7}, {"reference": True, "passes": []}):
        r = run(trips, **kw)
        assert r.output == base.output
        assert r.hash == base.hash
    assert "mean tip:" in base.output
    assert base.output.index("ext.show") < base.output.index("mean tip")


def test_column_selection_narrows_the_read(trips):
    # unoptimized, each of the three computes reads every column
    assert run(trips, passes=[]).stats["columns_parsed"] == 15
    assert run(trips).stats["columns_parsed"] == 4


def test_rewrite_inserts_usecols_and_hints():
    text = lfp.rewrite(PROGRAM)
    assert "usecols=" in text
    assert "by_day.compute(live_df=[df])" in text
    assert lfp.rewrite(text) == text
    assert lfp.format(PROGRAM).splitlines()[0].startswith("df = read_csv(")


def test_explain_and_node_stats(trips):
    r = run(trips, explain=True)
    assert "digraph" in r.explain()
    assert all(n["executions"] == 1 for n in r.stats["nodes"].values())


def test_errors_map_to_exceptions(trips):
    with pytest.raises(lfp.ScriptSyntaxError):
        lfp.run("df = read_csv('x.csv'\n")
    with pytest.raises(lfp.MissingFile):
        lfp.run("df = read_csv('nope.csv')\nprint(df)\n", base_dir=str(trips.parent))
    with pytest.raises(lfp.LfpError):
        lfp.run("print(1)\n", passes=["nosuchpass"])
    with pytest.raises(lfp.UnknownColumn):
        lfp.run("df = read_csv('trips.csv')\nprint(df.nope.sum())\n", base_dir=str(trips.parent))


def test_memory_budget(trips):
    sort = "df = read_csv('trips.csv')\ndf = df.sort_values(['fare_amount'])\nprint(df.head(3))\n"
    base = lfp.run(sort, base_dir=str(trips.parent))
    kw = dict(base_dir=str(trips.parent), backend="stream", chunk_rows=16, mem_budget=32 * 1024)
    with pytest.raises(lfp.MemoryBudgetExceeded):
        lfp.run(sort, allow_spill=False, **kw)
    spilled = lfp.run(sort, **kw)
    assert spilled.output == base.output
    assert spilled.stats["spill_runs"] > 1


def test_metadata_round_trip(trips):
    meta = lfp.scan_meta(str(trips))
    assert meta["row_count"] == 400
    kinds = {c["name"]: c for c in meta["columns"]}
    assert kinds["payment_type"]["distinct"] == 2
    assert kinds["tip_amount"]["nulls"] == 24
    assert lfp.lookup_meta(str(trips)) == meta
    assert lfp.category_threshold(400) == 40
    assert run(trips, use_metadata=True).output == run(trips).output


def test_liveness_blocks():
    blocks = lfp.liveness("df = read_csv('a.csv')\nif x:\n    print(df.a)\nelse:\n    print(df.b)\n")
    assert len(blocks) >= 4
    assert all({"in", "out"} <= set(b) for b in blocks)


def test_pass_names():
    assert {"colsel", "pushdown", "dce", "persist", "lazyprint"} <= set(lfp.pass_names())
