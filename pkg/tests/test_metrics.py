import csv
import io
import json
from fractions import Fraction

import pytest

from irkit import independent_loads
from oracles import recompute_metrics
from typeline.compiler import compile
from typeline.fuzz import random_program
from typeline.machine import ExecTrace, load_jsonl, run, run_baseline
from typeline.machine.trace import CONTROL, LOAD_CLUSTER, OP_CLUSTER, SCALAR, IssueRecord
from typeline.metrics import CSV_FIELDS, TraceMismatch, export, pooled, report
from typeline.pipeline import bench, compare


def rec(kind, cost, members, loads=0, compute=0, conv=0, trad=0):
    return IssueRecord(0, cost, kind, members, ("int",), loads, compute, conv, trad)


def trace(records, outputs=None):
    t = ExecTrace(list(records), outputs or {"x": 1})
    start = 0
    for r in t.records:
        r.cycle_start = start
        start += r.cost
    return t


def test_load_parallelism_example():
    t = trace([rec(LOAD_CLUSTER, 3, 4, loads=4), rec(LOAD_CLUSTER, 3, 4, loads=4), rec(LOAD_CLUSTER, 3, 2, loads=2)])
    b = trace([rec(SCALAR, 3, 1, loads=1)] * 10)
    r = report(t, b)
    assert r.load_parallelism == pytest.approx(0.7)
    assert r.cluster_histogram == {2: 1, 4: 2}


def test_all_scalar_is_zero():
    recs = [rec(SCALAR, 3, 1, loads=1), rec(SCALAR, 1, 1, compute=1), rec(CONTROL, 1, 0)]
    r = report(trace(recs), trace(recs))
    assert (r.load_parallelism, r.compute_parallelism, r.cycle_reduction) == (0.0, 0.0, 0.0)
    assert r.cluster_histogram == {}


def test_cycle_reduction_example():
    t = trace([rec(OP_CLUSTER, 16, 2, compute=2)])
    b = trace([rec(SCALAR, 13, 1, compute=1), rec(SCALAR, 13, 1, compute=1)])
    r = report(t, b)
    assert round(r.cycle_reduction, 3) == 0.385
    assert r.cycle_reduction == float(Fraction(10, 26))


def test_conversions_not_compute():
    t = trace([rec(OP_CLUSTER, 13, 3, compute=2, conv=1)])
    r = report(t, trace([rec(SCALAR, 1, 1, compute=1)]))
    assert r.compute_parallelism == 0.5
    assert r.cluster_histogram == {2: 1}  # size excludes the conversion


def test_mismatch_rejected():
    t = trace([rec(SCALAR, 1, 1, compute=1)], {"x": 0.0})
    b = trace([rec(SCALAR, 1, 1, compute=1)], {"x": -0.0})
    with pytest.raises(TraceMismatch):
        report(t, b)


def test_export_empty_corpus():
    out = export([], "csv").decode()
    assert out.splitlines() == [",".join(CSV_FIELDS)]
    assert json.loads(export([], "json")) == []


def test_export_one_report(fig5_source, fig5_inputs):
    r = compare(fig5_source, fig5_inputs, unit="fig5").report
    rows = list(csv.DictReader(io.StringIO(export([r], "csv").decode())))
    assert len(rows) == 1 and len(rows[0]) == 7
    assert rows[0]["unit"] == "fig5"
    d = json.loads(export(r, "json"))
    assert d["cycles_typeline"] == r.cycles_typeline
    assert d["load_parallelism"] == r.load_parallelism
    assert "definitions" in d
    table = export([r], "table").decode().splitlines()
    assert table[0].split() == list(CSV_FIELDS)
    with pytest.raises(ValueError):
        export([r], "xml")


@pytest.mark.parametrize("seed", range(0, 60, 3))
def test_metrics_recompute_from_trace(tmp_path, seed):
    g, ir = random_program(seed)
    t = run(compile(ir), g.inputs)
    b = run_baseline(ir, g.inputs)
    r = report(t, b)
    path = tmp_path / "t.jsonl"
    t.dump_jsonl(path)
    raw = [json.loads(line) for line in path.read_text().splitlines()]
    assert load_jsonl(path) == t.records
    want = recompute_metrics(raw, b.cycles)
    for k, v in want.items():
        assert getattr(r, k) == pytest.approx(v, abs=1e-12), k


def test_pooled_sums_counts():
    a = report(trace([rec(LOAD_CLUSTER, 3, 4, loads=4)]), trace([rec(SCALAR, 12, 4, loads=4)]))
    b = report(trace([rec(SCALAR, 3, 1, loads=1)] * 2), trace([rec(SCALAR, 6, 2, loads=2)]))
    p = pooled([a, b])
    # slots 1 + 2 over 6 loads, not the mean of 0.75 and 0
    assert p.load_parallelism == pytest.approx(0.5)
    assert p.cycles_typeline == 9 and p.cycles_baseline == 18
    assert p.cycle_reduction == 0.5


def test_sdt_only_code_misses_only_narrowing():
    for seed in range(30):
        g, ir = random_program(seed)
        if any(op.kind is None for blk in ir.blocks for op in blk.ops):
            continue
        prog = compile(ir)
        trad = {i.opcode.value for i in prog.instructions if i.opcode.value.startswith("T.")}
        assert trad <= {"T.CVT", "T.BR", "T.BZ", "T.BNZ"}
        r = report(run(prog, g.inputs), run_baseline(ir, g.inputs))
        if "T.CVT" not in trad:
            assert r.miss_handled_fraction == 0.0
    for src in (
        "int i; float f; f = i * 2.5f;",
        "double d[4]; char c; int main() { for (int i = 0; i < 4; i++) { d[i] = i + c; } return 0; }",
    ):
        assert compare(src).report.miss_handled_fraction == 0.0


def test_pointer_code_is_missed():
    src = "int x; int *p; int main() { p = &x; *p = 3; return 0; }"
    assert compare(src).report.miss_handled_fraction > 0


def test_monotone_below_cap():
    prev = -1.0
    for n in range(1, 17):
        ir = independent_loads(n)
        lp = report(run(compile(ir)), run_baseline(ir)).load_parallelism
        assert lp >= prev
        assert lp == pytest.approx(1 - 1 / n)
        prev = lp


def test_cap_split_lowers_ratio():
    # seventeen loads need a second slot: 1 - 2/17 < 1 - 1/16
    ir = independent_loads(17)
    lp = report(run(compile(ir)), run_baseline(ir)).load_parallelism
    assert lp == pytest.approx(1 - 2 / 17)


def test_bench_corpus_thresholds():
    from typeline.analyzer import fixture_path

    reports = bench(fixture_path("corpus"))
    assert reports
    p = pooled(reports)
    assert p.load_parallelism >= 0.30 and p.compute_parallelism >= 0.10
    assert p.cycle_reduction > 0
