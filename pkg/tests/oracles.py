"""Independent reference computations used by the tests."""

from __future__ import annotations

import random
from fractions import Fraction


def f32_round(n: int) -> float:
    """Nearest binary32 value to integer ``n``, ties to even, in exact arithmetic."""
    if n == 0:
        return 0.0
    sign = -1 if n < 0 else 1
    m = abs(n)
    e = m.bit_length() - 1
    ulp = Fraction(2) ** (e - 23)
    q = Fraction(m) / ulp
    lo = q.numerator // q.denominator
    rem = q - lo
    if rem > Fraction(1, 2) or (rem == Fraction(1, 2) and lo % 2 == 1):
        lo += 1
    return sign * float(lo * ulp)


def heap_script(seed: int, n_ops: int, adversarial: float = 0.1) -> list[tuple]:
    """Random new/release operations; some releases are stale or made-up handles.

    Releases name the k-th allocation, not a handle, so the script is
    independent of any allocator's handle numbering.
    """
    rng = random.Random(seed)
    script: list[tuple] = []
    allocated = 0
    for _ in range(n_ops):
        roll = rng.random()
        if roll < 0.5 or allocated == 0:
            size = 0 if rng.random() < 0.02 else rng.randint(1, 64)
            script.append(("new", size))
            allocated += size > 0
        elif roll < 1 - adversarial:
            script.append(("release", rng.randrange(allocated)))
        else:
            script.append(("bogus", rng.randint(1, 10**6)))
    return script


def heap_replay(script) -> list[tuple]:
    """Expected outcome of every step: ("ok", live, peak) or the error name."""
    sizes: dict[int, int] = {}
    freed: set[int] = set()
    live = peak = 0
    k = 0
    out = []
    for op, arg in script:
        if op == "new":
            if arg <= 0:
                out.append(("ZeroSizeAllocation",))
                continue
            sizes[k] = arg
            k += 1
            live += arg
            peak = max(peak, live)
            out.append(("ok", live, peak))
        elif op == "release":
            if arg in freed:
                out.append(("DoubleFree",))
            else:
                freed.add(arg)
                live -= sizes[arg]
                out.append(("ok", live, peak))
        else:
            out.append(("UnknownHandle",))
    return out


def recompute_metrics(records: list[dict], baseline_cycles: int) -> dict:
    """Report fields from raw trace records (as written to JSON lines)."""
    load_slots = sum(1 for r in records if r["load_ops"] > 0)
    load_ops = sum(r["load_ops"] for r in records)
    comp_slots = sum(1 for r in records if r["compute_ops"] > 0)
    comp_ops = sum(r["compute_ops"] for r in records)
    members = sum(r["member_count"] for r in records)
    trad = sum(r["traditional_ops"] for r in records)
    cycles = sum(r["cost"] for r in records)
    return {
        "load_parallelism": 1 - load_slots / load_ops if load_ops else 0.0,
        "compute_parallelism": 1 - comp_slots / comp_ops if comp_ops else 0.0,
        "miss_handled_fraction": trad / members if members else 0.0,
        "cycles_typeline": cycles,
        "cycle_reduction": (baseline_cycles - cycles) / baseline_cycles if baseline_cycles else 0.0,
    }
