"""In-order execution of TYPELINE programs, one issue at a time."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..isa import (
    BaseOp,
    CostTable,
    FLOW_OPS,
    Handle,
    Imm,
    Instruction,
    Label,
    Mem,
    Opcode,
    Program,
    Reg,
    SdtKind,
    base_name,
    instruction_cost,
    is_load,
    opcode_kind,
    validate,
)
from ..semantics import LANE_VTYPE, VType, alu, compare, convert as numeric_convert, is_true, normalize, truth
from .heap import obj_new, obj_release
from .state import MachineState, UnboundInput, convert, set_line
from .trace import CONTROL, LOAD_CLUSTER, OP_CLUSTER, SCALAR, TRADITIONAL, ExecTrace, IssueRecord, op_counts

_INT_COND = {"CMPE": "eq", "CMPEG": "ge", "CMPEs": "le", "CMPS": "lt"}
_LINE_OPS = {
    "FTEN": (SdtKind.FLOAT, True),
    "DBEN": (SdtKind.DOUBLE, True),
    "CHEN": (SdtKind.CHAR, True),
    "FTDS": (SdtKind.FLOAT, False),
    "DBDS": (SdtKind.DOUBLE, False),
    "CHDS": (SdtKind.CHAR, False),
}
_WRAPPERS = frozenset({"VEN", "VDS", "PEN", "PDS"})
DEFAULT_STEP_LIMIT = 5_000_000


class ValidationFailed(Exception):
    def __init__(self, violations):
        self.violations = violations
        first = violations[0]
        super().__init__(f"item {first.index}: {first.rule}: {first.message}")


class StepLimitExceeded(RuntimeError):
    pass


def _lane_name(lane) -> str:
    return "t" if lane is None else lane.name.lower()


@dataclass(frozen=True)
class Issue:
    instructions: tuple
    cluster: int | None


def issues_of(program: Program) -> tuple[list[Issue], dict[str, int]]:
    """Split a program into issues; labels map to the index of the issue they precede."""
    issues: list[Issue] = []
    labels: dict[str, int] = {}
    group: list[Instruction] = []

    def close():
        if group:
            issues.append(Issue(tuple(group), group[0].cluster))
            group.clear()

    for item in program.items:
        if isinstance(item, Label):
            close()
            labels[item.name] = len(issues)
            continue
        if item.cluster is None:
            close()
            issues.append(Issue((item,), None))
            continue
        if group and group[0].cluster != item.cluster:
            close()
        group.append(item)
    close()
    return issues, labels


class Executor:
    """Applies instruction effects to a MachineState."""

    def __init__(self, state: MachineState, table: CostTable, spill_words: frozenset = frozenset()):
        self.state = state
        self.table = table
        self.spill_words = spill_words

    def value(self, o):
        if isinstance(o, Reg):
            return self.state.read(o.lane, o.index)
        if isinstance(o, Imm):
            return normalize(o.value, LANE_VTYPE[o.kind])
        if isinstance(o, Handle):
            return o.id
        raise TypeError(f"operand {o} has no value")

    def address(self, m: Mem) -> int:
        return m.addr + (self.state.read(m.index.lane, m.index.index) if m.index is not None else 0)

    def is_spill(self, ins: Instruction) -> bool:
        return (
            (is_load(ins.opcode) or base_name(ins.opcode) == "ST")
            and ins.operands[1].index is None
            and ins.operands[1].addr in self.spill_words
        )

    def execute(self, ins: Instruction) -> str | None:
        """Apply ``ins``; returns a label name when it transfers control."""
        st = self.state
        op = ins.opcode
        name = op.value
        ops = ins.operands
        stem = base_name(op)
        if name in _WRAPPERS:
            f = st.flags
            if name == "VEN":
                f.vector_length = ops[0].n
            elif name == "VDS":
                f.vector_length = None
                f.vector_mode = {k: False for k in f.vector_mode}
            else:
                f.parallel_mode = name == "PEN"
            return None
        if name in _LINE_OPS:
            set_line(st, *_LINE_OPS[name])
            return None
        if name == "CONV":
            mask = ops[0]
            st.flags.conv_mask = mask
            pairs = list(zip(ops[1::2], ops[2::2]))
            vals = [convert(self.value(s), s.lane, d.lane, mask) for d, s in pairs]
            for (d, _), v in zip(pairs, vals):
                st.write(d.lane, d.index, v)
            return None
        if op in FLOW_OPS:
            if name == "T.BR":
                return ops[0].name
            taken = is_true(self.value(ops[0]))
            if name == "T.BNZ":
                return ops[1].name if taken else None
            return ops[1].name if not taken else None
        dst = ops[0] if ops else None
        if stem in ("LD",):
            st.write(dst.lane, dst.index, st.memory.load(self.address(ops[1])))
        elif stem == "ST":
            st.memory.store(self.address(ops[1]), self.value(dst))
        elif stem == "MOV":
            st.write(dst.lane, dst.index, self.value(ops[1]))
        elif stem == "LEA":
            st.write(dst.lane, dst.index, self.address(ops[1]))
        elif stem == "CVT":
            src = ops[1]
            st.write(dst.lane, dst.index, numeric_convert(self.value(src), LANE_VTYPE[src.lane], LANE_VTYPE[dst.lane]))
        elif name == "OBJ.n":
            st.write(dst.lane, dst.index, obj_new(st, self.value(ops[1])))
        elif name == "OBJ.r":
            obj_release(st, self.value(ops[0]))
        elif stem in _INT_COND or stem == "CMP":
            cond = _INT_COND.get(stem) or ops[3].code
            flag = compare(cond, self.value(ops[1]), self.value(ops[2]))
            st.write(dst.lane, dst.index, truth(LANE_VTYPE[dst.lane], flag))
        else:
            vt = LANE_VTYPE[dst.lane]
            st.write(dst.lane, dst.index, alu(stem, vt, self.value(ops[1]), self.value(ops[2])))
        return None


def _lanes_of(instructions) -> tuple:
    lanes = set()
    for ins in instructions:
        for o in ins.operands:
            if isinstance(o, Reg):
                lanes.add(_lane_name(o.lane))
    order = ["char", "int", "float", "double", "t"]
    return tuple(sorted(lanes, key=order.index))


def _members(ins: Instruction) -> int:
    if ins.opcode is Opcode("CONV"):
        return (len(ins.operands) - 1) // 2
    return 1


def exec_issue(state: MachineState, issue, table: CostTable | None = None, spill_words: frozenset = frozenset()):
    """Execute one issue (a cluster or a single instruction).

    Returns ``(records, target)``: normally one record, plus one traditional
    record per member whose lane is disabled at run time; ``target`` is the
    label a taken branch jumps to.
    """
    table = table or CostTable.default()
    ex = Executor(state, table, spill_words)
    instructions = issue.instructions if isinstance(issue, Issue) else tuple(issue)
    tagged = instructions[0].cluster is not None
    enabled = state.flags.lane_enabled
    records: list[IssueRecord] = []

    def rerouted(ins: Instruction) -> bool:
        k = opcode_kind(ins.opcode)
        return isinstance(ins.opcode, Opcode) and k is not None and not enabled[k]

    if tagged:
        inlane = [i for i in instructions if not rerouted(i)]
        moved = [i for i in instructions if rerouted(i)]
    else:
        inlane, moved = list(instructions), []
        if rerouted(instructions[0]):
            inlane, moved = [], list(instructions)

    target = None
    # members are hazard-free, so in-order application equals simultaneous issue
    for ins in inlane:
        if ins.opcode is Opcode("CONV"):
            ex.execute(ins)
    for ins in inlane:
        if ins.opcode is not Opcode("CONV"):
            target = ex.execute(ins) or target
    for ins in moved:
        ex.execute(ins)

    if inlane:
        records.append(_record(state, inlane, tagged, table, ex))
        if records[-1].kind == LOAD_CLUSTER and state.flags.vector_length is not None:
            state.flags.vector_mode[opcode_kind(inlane[0].opcode)] = True
        state.cycles += records[-1].cost
    for ins in moved:
        counts = op_counts(ins.opcode, traditional=True)
        lane = opcode_kind(ins.opcode)
        r = IssueRecord(
            state.cycles,
            table.traditional(ins.opcode.value),
            TRADITIONAL,
            _members(ins),
            _lanes_of([ins]),
            note=f"{_lane_name(lane)} lane disabled, re-routed",
            **counts,
        )
        records.append(r)
        state.cycles += r.cost
    return records, target


def _record(state, instructions, tagged, table, ex) -> IssueRecord:
    first = instructions[0]
    counts = {"load_ops": 0, "compute_ops": 0, "conv_ops": 0, "traditional_ops": 0}
    members = 0
    spill = False
    for ins in instructions:
        if ex.is_spill(ins):
            spill = True
            continue
        n = _members(ins)
        members += n
        for k, v in op_counts(ins.opcode).items():
            counts[k] += v * n
    if tagged:
        if all(is_load(i.opcode) for i in instructions):
            kind, cost = LOAD_CLUSTER, table[first.opcode.value]
        else:
            kind = OP_CLUSTER
            body = [instruction_cost(i, table) for i in instructions if i.opcode is not Opcode("CONV")]
            cost = max(body) + (table["CONV"] if len(body) < len(instructions) else 0)
    else:
        op = first.opcode
        cost = instruction_cost(first, table)
        if op in FLOW_OPS or op.value in _WRAPPERS or op.value in _LINE_OPS:
            kind = CONTROL
        elif isinstance(op, BaseOp):
            kind = TRADITIONAL
        else:
            kind = SCALAR
    if kind == CONTROL:
        members = 0
        counts = dict.fromkeys(counts, 0)
    note = "spill" if spill else ""
    return IssueRecord(state.cycles, cost, kind, members, _lanes_of(instructions), note=note, **counts)


def bind_inputs(state: MachineState, symbols, inputs: dict | None) -> None:
    by_name = {s.name: s for s in symbols if s.scope != "spill"}
    for name, value in (inputs or {}).items():
        sym = by_name.get(name)
        if sym is None:
            raise UnboundInput(name)
        vt = VType(sym.vtype)
        values = value if isinstance(value, (list, tuple)) else [value]
        if len(values) > sym.length:
            raise UnboundInput(f"{name} holds {sym.length} values, got {len(values)}")
        for k, v in enumerate(values):
            state.memory.store(sym.addr + k, normalize(v, vt))


def read_outputs(state: MachineState, symbols) -> dict:
    """Final values of global-scope variables; arrays as lists."""
    out = {}
    for s in symbols:
        if s.scope != "global":
            continue
        vt = VType(s.vtype)
        vals = [normalize(state.memory.words.get(s.addr + k, 0), vt) for k in range(s.length)]
        out[s.name] = vals[0] if s.length == 1 else vals
    return out


def _finish(state: MachineState, records, symbols) -> ExecTrace:
    static = {a: state.memory.words.get(a, 0) for a in sorted(state.memory.static)}
    return ExecTrace(records, read_outputs(state, symbols), state.snapshot(), static, state.heap.stats())


def run(
    program: Program,
    inputs: dict | None = None,
    *,
    cost_table: CostTable | None = None,
    relax: bool = False,
    state: MachineState | None = None,
    step_limit: int = DEFAULT_STEP_LIMIT,
) -> ExecTrace:
    """Execute ``program`` from its first issue until it falls off the end."""
    problems = validate(program, relax=relax)
    if problems:
        raise ValidationFailed(problems)
    table = cost_table or CostTable.default()
    state = state or MachineState(program.symbols)
    bind_inputs(state, program.symbols, inputs)
    spill_words = frozenset(a for s in program.symbols if s.scope == "spill" for a in range(s.addr, s.addr + s.length))
    issues, labels = issues_of(program)
    records: list[IssueRecord] = []
    pc = 0
    steps = 0
    with np.errstate(all="ignore"):
        while pc < len(issues):
            steps += 1
            if steps > step_limit:
                raise StepLimitExceeded(f"no halt after {step_limit} issues")
            recs, target = exec_issue(state, issues[pc], table, spill_words)
            records.extend(recs)
            pc = labels[target] if target is not None else pc + 1
    return _finish(state, records, program.symbols)
