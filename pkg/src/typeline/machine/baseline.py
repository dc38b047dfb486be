"""Sequential reference executor: every IR op issues alone at its scalar cost."""

from __future__ import annotations

import numpy as np

from ..compiler.select import ALL_LANES, select
from ..frontend.ir import BIN, CMP, CONST, CONV, LEA, LOAD, MOV, NEW, RELEASE, STORE, Const, IRProgram, flow_ops
from ..isa import BaseOp, CostTable, instruction_cost, Instruction
from ..semantics import alu, compare, convert, is_true, normalize, truth
from .core import DEFAULT_STEP_LIMIT, StepLimitExceeded, _finish, bind_inputs
from .heap import obj_new, obj_release
from .state import MachineState
from .trace import CONTROL, SCALAR, TRADITIONAL, ExecTrace, IssueRecord, op_counts


def _lane_names(v) -> tuple:
    lane = v.vtype.lane
    return ("t",) if lane is None else (lane.name.lower(),)


def run_baseline(
    ir: IRProgram,
    inputs: dict | None = None,
    *,
    cost_table: CostTable | None = None,
    lanes: frozenset = ALL_LANES,
    step_limit: int = DEFAULT_STEP_LIMIT,
) -> ExecTrace:
    """Interpret ``ir`` directly with the machine's arithmetic and cost table."""
    table = cost_table or CostTable.default()
    state = MachineState(ir.symbols)
    bind_inputs(state, ir.symbols, inputs)
    mem = state.memory
    vals: dict = {}
    records: list[IssueRecord] = []
    blocks = ir.blocks
    pos = {b.id: k for k, b in enumerate(blocks)}
    plans = []
    for b in blocks:
        mns = [select(op, lanes) for op in b.ops]
        costs = [instruction_cost(Instruction(m), table) for m in mns]
        nxt = blocks[pos[b.id] + 1].id if pos[b.id] + 1 < len(blocks) else None
        plans.append((mns, costs, flow_ops(b, nxt)))

    def val(a):
        return a.value if isinstance(a, Const) else vals[a]

    def addr(op):
        base = mem_base[op.sym] if op.sym is not None else 0
        return base + op.offset + (vals[op.index] if op.index is not None else 0)

    mem_base = {s.name: s.addr for s in ir.symbols}
    k = 0 if blocks else None
    steps = 0
    with np.errstate(all="ignore"):
        while k is not None:
            b = blocks[k]
            mns, costs, flows = plans[k]
            for op, mn, cost in zip(b.ops, mns, costs):
                steps += 1
                if steps > step_limit:
                    raise StepLimitExceeded(f"no halt after {step_limit} operations")
                vt = op.vtype
                name = op.op
                if name in (CONST, MOV):
                    vals[op.dst] = normalize(val(op.args[0]), vt)
                elif name == LOAD:
                    vals[op.dst] = normalize(mem.load(addr(op)), vt)
                elif name == STORE:
                    mem.store(addr(op), val(op.args[0]))
                elif name == BIN:
                    vals[op.dst] = alu(op.stem, vt, val(op.args[0]), val(op.args[1]))
                elif name == CMP:
                    vals[op.dst] = truth(vt, compare(op.stem, val(op.args[0]), val(op.args[1])))
                elif name == CONV:
                    vals[op.dst] = normalize(convert(val(op.args[0]), op.src, vt), vt)
                elif name == NEW:
                    vals[op.dst] = obj_new(state, val(op.args[0]))
                elif name == RELEASE:
                    obj_release(state, val(op.args[0]))
                elif name == LEA:
                    vals[op.dst] = normalize(addr(op), vt)
                kind = TRADITIONAL if isinstance(mn, BaseOp) else SCALAR
                records.append(IssueRecord(state.cycles, cost, kind, 1, _lane_names(op), **op_counts(mn)))
                state.cycles += cost
            target = None
            for f in flows:
                mn = BaseOp("T." + f[0])
                cost = table[mn.value]
                touched = () if f[0] == "BR" else _lane_names(f[1])
                records.append(IssueRecord(state.cycles, cost, CONTROL, 0, touched))
                state.cycles += cost
                if f[0] == "BR" or (f[0] == "BNZ") == is_true(vals[f[1]]):
                    target = f[-1]
                    break
            if target is not None:
                k = pos[target]
            elif flows or b.successors():
                k = k + 1
            else:
                k = None
    return _finish(state, records, ir.symbols)

