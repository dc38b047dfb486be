"""
Random programs, two executors, same bits
=========================================

Generate MiniC programs, run each through the clustered machine and the
sequential baseline, and compare outputs bit for bit.
"""

from typeline.compiler import compile
from typeline.fuzz import random_program
from typeline.machine import run, run_baseline
from typeline.metrics import report

g, ir = random_program(7)
print(g.source)

# both executors see the same IR and the same inputs
t = run(compile(ir), g.inputs)
b = run_baseline(ir, g.inputs)
r = report(t, b, unit="seed7")  # raises TraceMismatch on any differing bit
print(r.cycles_typeline, r.cycles_baseline, round(r.cycle_reduction, 3))

# a small sweep
saved = 0
for seed in range(100):
    g, ir = random_program(seed)
    r = report(run(compile(ir), g.inputs), run_baseline(ir, g.inputs))
    assert r.cycles_typeline <= r.cycles_baseline
    saved += r.cycles_baseline - r.cycles_typeline
print("100 programs agree; cycles saved:", saved)
