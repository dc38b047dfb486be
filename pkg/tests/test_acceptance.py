"""Acceptance gate: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the verdict lines are
also printed in the terminal summary.
"""

import json
import time

import pytest

from irkit import independent_loads
from oracles import heap_replay, heap_script, recompute_metrics
from typeline.analyzer import aggregate, fixture_path, read_type_csv, select_sdt
from typeline.compiler import compile
from typeline.frontend import compile_source
from typeline.fuzz import random_ir_block, random_program
from typeline.isa import CostTable, Opcode, format_assembly, parse_assembly, validate
from typeline.machine import issues_of, run, run_baseline
from typeline.machine.heap import HeapError, ObjectHeap
from typeline.metrics import pooled, report, same_outputs
from typeline.pipeline import compare, compile_text, corpus_units, read_inputs

RESULTS: dict[int, str] = {}
N_FUZZ = 1000


def verdict(n: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    RESULTS[n] = line
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def fuzz_corpus():
    """Compile and run every fuzz program once; criteria 3, 4 and 8 share it."""
    t0 = time.perf_counter()
    rows = []
    for seed in range(N_FUZZ):
        g, ir = random_program(seed)
        prog = compile(ir)
        t = run(prog, g.inputs)
        b = run_baseline(ir, g.inputs)
        n_ops = sum(len(blk.ops) for blk in ir.blocks)
        rows.append((seed, n_ops, prog, same_outputs(t.outputs, b.outputs), t.cycles, b.cycles))
    return rows, time.perf_counter() - t0


def test_criterion_1_sdt_selection():
    t0 = time.perf_counter()
    chosen = select_sdt(aggregate(read_type_csv(fixture_path("figure3a.csv"))), 4)
    dt = time.perf_counter() - t0
    ok = set(chosen) == {"int", "float", "double", "char"} and dt < 1.0
    verdict(1, ok, f"select-sdt k=4 -> {chosen} in {dt * 1000:.1f} ms")


def test_criterion_2_fig5(fig5_source, fig5_inputs):
    prog = compile(compile_source(fig5_source))
    clusters = [i for i in issues_of(prog)[0] if i.cluster is not None]
    loads = [c for c in clusters if all(x.opcode.value == "LD.in" for x in c.instructions)]
    ops = [c for c in clusters if c not in loads]
    table = CostTable.default()
    problems = []
    if len(loads) != 1 or len(loads[0].instructions) != 4:
        problems.append("expected one 4-wide int load cluster")
    if len(ops) != 1:
        problems.append("expected one op cluster")
    else:
        insts = ops[0].instructions
        body = sorted(x.opcode.value for x in insts if x.opcode is not Opcode("CONV"))
        conv = [x for x in insts if x.opcode is Opcode("CONV")]
        if body != ["ADD.in", "DIV.ft"]:
            problems.append(f"op cluster holds {body}")
        if len(conv) != 1 or not conv[0].operands[0].bits & 1:
            problems.append("conversion mask bit 0 not set")
    t = run(prog, fig5_inputs)
    b = run_baseline(compile_source(fig5_source), fig5_inputs)
    op_cost = [r.cost for r in t.records if r.kind == "op-cluster"]
    data = sum(r.cost for r in t.records if r.kind in ("load-cluster", "op-cluster"))
    region_base = sum(r.cost for r in b.records[:7])
    if op_cost != [1 + table["DIV.ft"]]:
        problems.append(f"op cluster cost {op_cost}")
    if (data, region_base) != (16, 26):
        problems.append(f"region cycles {data} vs {region_base}")
    if not same_outputs(t.outputs, b.outputs):
        problems.append("outputs differ")
    verdict(2, not problems, "; ".join(problems) or f"op cluster cost {op_cost[0]}, region {data} vs baseline {region_base}")


def test_criterion_3_equivalence(fuzz_corpus):
    rows, dt = fuzz_corpus
    bad = [seed for seed, _, _, same, _, _ in rows if not same]
    big = max(n for _, n, *_ in rows)
    ok = not bad and len(rows) >= 1000 and big <= 200 and dt < 60
    verdict(3, ok, f"{len(rows)} programs (<= {big} ops), {len(bad)} mismatches {bad[:5]}, {dt:.1f} s")


def test_criterion_4_cycle_dominance(fuzz_corpus):
    rows, _ = fuzz_corpus
    bad = [seed for seed, _, _, _, tc, bc in rows if tc > bc]
    saved = sum(bc - tc for *_, tc, bc in rows)
    verdict(4, not bad, f"{len(bad)} violations over {len(rows)} programs, {saved} cycles saved in total")


def test_criterion_5_cluster_legality():
    t0 = time.perf_counter()
    bad = []
    for seed in range(10_000):
        prog = compile(random_ir_block(seed))
        if validate(prog):
            bad.append(seed)
    dt = time.perf_counter() - t0
    verdict(5, not bad and dt < 60, f"10000 blocks, {len(bad)} invalid {bad[:5]}, {dt:.1f} s")


def test_criterion_6_heap_oracle():
    problems = 0
    caught = {"DoubleFree": 0, "UnknownHandle": 0, "ZeroSizeAllocation": 0}
    for seed in range(3):
        script = heap_script(seed, 10_000)
        heap = ObjectHeap()
        handles = []
        got = []
        for op, arg in script:
            try:
                if op == "new":
                    handles.append(heap.new(arg))
                elif op == "release":
                    heap.release(handles[arg])
                else:
                    heap.release(arg)
                got.append(("ok", heap.live_bytes, heap.peak_bytes))
            except HeapError as exc:
                got.append((type(exc).__name__,))
                caught[type(exc).__name__] += 1
        want = heap_replay(script)
        problems += sum(g != w for g, w in zip(got, want))
    verdict(6, problems == 0, f"3 x 10000 ops, {problems} divergences, caught {caught}")


def test_criterion_7_corpus_metrics(tmp_path):
    problems = []
    reports = []
    for unit, src, inp in corpus_units(fixture_path("corpus")):
        c = compare(src.read_text(), read_inputs(inp), unit=unit)
        r = c.report
        reports.append(r)
        if not any(op.nonsdt for blk in c.ir.blocks for op in blk.ops) and r.miss_handled_fraction > 0.05:
            problems.append(f"{unit} missHandled {r.miss_handled_fraction:.3f}")
        path = tmp_path / f"{unit}.jsonl"
        c.typeline.dump_jsonl(path)
        raw = [json.loads(line) for line in path.read_text().splitlines()]
        for k, v in recompute_metrics(raw, c.baseline.cycles).items():
            if abs(getattr(r, k) - v) > 1e-12:
                problems.append(f"{unit} {k} recomputes to {v}")
    p = pooled(reports)
    if p.load_parallelism < 0.30:
        problems.append(f"loadParallelism {p.load_parallelism:.3f}")
    if p.compute_parallelism < 0.10:
        problems.append(f"computeParallelism {p.compute_parallelism:.3f}")
    if p.cycle_reduction <= 0:
        problems.append(f"cycleReduction {p.cycle_reduction:.3f}")
    # appending one independent same-type load must never lower loadParallelism
    prev, drops = None, []
    for n in range(1, 41):
        ir = independent_loads(n)
        lp = report(run(compile(ir)), run_baseline(ir)).load_parallelism
        if prev is not None and lp < prev:
            drops.append(f"{n - 1}->{n}: {prev:.4f}->{lp:.4f}")
        prev = lp
    if drops:
        problems.append("monotonicity broken at " + ", ".join(drops))
    summary = (
        f"load {p.load_parallelism:.3f}, compute {p.compute_parallelism:.3f}, "
        f"cycleReduction {p.cycle_reduction:.3f}, missHandled {p.miss_handled_fraction:.3f}"
    )
    verdict(7, not problems, summary + ("; " + "; ".join(problems) if problems else ""))


def test_criterion_8_round_trip(fuzz_corpus, fig5_source):
    rows, _ = fuzz_corpus
    bad = [seed for seed, _, prog, *_ in rows if parse_assembly(format_assembly(prog)) != prog]
    bad += [f"b{s}" for s in range(500) if (p := compile(random_ir_block(s))) != parse_assembly(format_assembly(p))]
    sources = [fig5_source] + [src.read_text() for _, src, _ in corpus_units(fixture_path("corpus"))]
    sources += [random_program(s)[0].source for s in range(50)]
    unstable = sum(
        format_assembly(compile_text(s).program) != format_assembly(compile_text(s).program) for s in sources
    )
    verdict(8, not bad and not unstable, f"{len(rows) + 500} round trips, {len(bad)} failures; {unstable} unstable compiles of {len(sources)}")
