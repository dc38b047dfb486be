"""Linear-scan register allocation, one pass per register file.

Program points: the k-th issue slot owns points 2k and 2k+1. A scalar op
reads at 2k and writes at 2k+1, so a dying source may share its register
with the result. Cluster members read and write at 2k: everything a
cluster touches is live at once and gets distinct registers, which keeps
co-issued members free of false dependences.

Intervals are the hull of all points where a value is live, using block
liveness across the control-flow graph. Registers 29-31 of each file are
reserved as scratch for spill code.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..frontend.ir import IRProgram, VReg
from ..isa import NUM_REGISTERS

SCRATCH = (NUM_REGISTERS - 3, NUM_REGISTERS - 2, NUM_REGISTERS - 1)
ALLOCATABLE = NUM_REGISTERS - len(SCRATCH)


class RegisterPressure(Exception):
    """A single cluster needs more registers than a file holds."""


@dataclass
class Allocation:
    regs: dict = field(default_factory=dict)  # VReg -> register index
    spilled: list = field(default_factory=list)  # VRegs kept in memory
    dissolve: set = field(default_factory=set)  # (block id, cluster index) to break up before retrying


def _file(v: VReg):
    return v.vtype.lane


def block_liveness(ir: IRProgram, schedules: dict) -> tuple[dict, dict]:
    use: dict[int, set] = {}
    defs: dict[int, set] = {}
    for b in ir.blocks:
        u, d = set(), set()
        ops = b.ops
        for c in schedules[b.id].clusters:
            reads = [r for m in c.members for r in ops[m].reads()]
            writes = [w for m in c.members for w in ops[m].writes()]
            u.update(r for r in reads if r not in d)
            d.update(writes)
        cond = getattr(b.term, "cond", None)
        if cond is not None and cond not in d:
            u.add(cond)
        use[b.id], defs[b.id] = u, d
    live_in = {b.id: set() for b in ir.blocks}
    live_out = {b.id: set() for b in ir.blocks}
    changed = True
    order = list(reversed(ir.blocks))
    while changed:
        changed = False
        for b in order:
            out = set()
            for s in b.successors():
                out |= live_in[s]
            inn = use[b.id] | (out - defs[b.id])
            if out != live_out[b.id] or inn != live_in[b.id]:
                live_out[b.id], live_in[b.id] = out, inn
                changed = True
    return live_in, live_out


def allocate(ir: IRProgram, schedules: dict) -> Allocation:
    """Assign registers to every virtual register of the scheduled program."""
    live_in, live_out = block_liveness(ir, schedules)
    lo: dict[VReg, int] = {}
    hi: dict[VReg, int] = {}
    in_group: dict[VReg, set] = {}

    def touch(v: VReg, p: int) -> None:
        if v in lo:
            if p < lo[v]:
                lo[v] = p
            if p > hi[v]:
                hi[v] = p
        else:
            lo[v] = hi[v] = p

    slot = 0
    group_files: list[tuple[tuple, dict]] = []
    for b in ir.blocks:
        first = slot
        ops = b.ops
        for ci, c in enumerate(schedules[b.id].clusters):
            if c.is_group:
                p = 2 * slot
                per_file: dict = {}
                for m in c.members:
                    for v in ops[m].reads() + ops[m].writes():
                        touch(v, p)
                        in_group.setdefault(v, set()).add((b.id, ci))
                        per_file.setdefault(_file(v), set()).add(v)
                group_files.append(((b.id, ci), per_file))
            else:
                for m in c.members:
                    for v in ops[m].reads():
                        touch(v, 2 * slot)
                    for v in ops[m].writes():
                        touch(v, 2 * slot + 1)
            slot += 1
        cond = getattr(b.term, "cond", None)
        if cond is not None:
            touch(cond, 2 * slot)
        last = slot
        slot += 1
        for v in live_in[b.id]:
            touch(v, 2 * first)
        for v in live_out[b.id]:
            touch(v, 2 * last + 1)

    for _, per_file in group_files:
        for f, vs in per_file.items():
            if len(vs) > ALLOCATABLE:
                raise RegisterPressure(f"a cluster needs {len(vs)} registers in one file")

    alloc = Allocation()
    by_file: dict = {}
    for v in lo:
        by_file.setdefault(_file(v), []).append(v)
    for vs in by_file.values():
        vs.sort(key=lambda v: (lo[v], hi[v], v.id))
        free = list(range(ALLOCATABLE - 1, -1, -1))  # pop() hands out low registers first
        active: list[VReg] = []
        for v in vs:
            start = lo[v]
            still = []
            for a in active:
                if hi[a] < start:
                    free.append(alloc.regs[a])
                else:
                    still.append(a)
            active = still
            if free:
                free.sort(reverse=True)
                alloc.regs[v] = free.pop()
                active.append(v)
                continue
            # spill the value whose interval reaches furthest, preferring ones outside clusters
            candidates = active + [v]
            plain = [a for a in candidates if a not in in_group]
            pool = plain or candidates
            victim = max(pool, key=lambda a: (hi[a], a.id))
            if victim in in_group:
                alloc.dissolve |= in_group[victim]
            alloc.spilled.append(victim)
            if victim is not v:
                alloc.regs[v] = alloc.regs.pop(victim)
                active.remove(victim)
                active.append(v)
    return alloc
