"""
Clustering the mixed int/float example
======================================

Compile the bundled four-load example and compare the clustered program
with the all-scalar baseline.
"""

import json

from typeline.analyzer import fixture_path
from typeline.compiler import compile
from typeline.frontend import compile_source
from typeline.isa import format_assembly
from typeline.machine import run, run_baseline

source = fixture_path("fig5.mc").read_text()
inputs = json.loads(fixture_path("fig5.json").read_text())
print(source)

# lowering to three-address IR
ir = compile_source(source)
for op in ir.ops:
    print(op)

# four int loads share one issue; ADD.in and DIV.ft share another behind a CONV
program = compile(ir)
print(format_assembly(program))

# issue-by-issue trace of the clustered program
trace = run(program, inputs)
for r in trace.records:
    print(f"{r.cycle_start:4d} {r.cost:3d} {r.kind:13s} {r.member_count}")

base = run_baseline(ir, inputs)
print("outputs", trace.outputs)
print("cycles", trace.cycles, "baseline", base.cycles)
