"""Turn scheduled, register-allocated blocks into a TYPELINE Program."""

from __future__ import annotations

from ..frontend.ir import BIN, CMP, CONST, CONV, LEA, LOAD, MOV, NEW, RELEASE, STORE, Const, IROp, IRProgram, VReg, flow_ops
from ..isa import (
    BaseOp,
    Cond,
    ConvMask,
    Imm,
    Instruction,
    Label,
    LabelRef,
    Mem,
    Opcode,
    Program,
    Reg,
    SdtKind,
    Symbol,
    VecLen,
)
from ..semantics import VType
from .regalloc import SCRATCH, Allocation
from .schedule import LOAD_CLUSTER, OP_CLUSTER

_SPILL_TYPE = {
    VType.CHAR: "char",
    VType.INT: "int",
    VType.FLOAT: "float",
    VType.DOUBLE: "double",
    VType.LONG: "long",
    VType.PTR: "ptr",
}


def label_name(bid: int) -> str:
    return f"L{bid}"


def _imm(c: Const) -> Imm:
    return Imm(c.value, c.vtype.lane if c.vtype is not VType.LONG else None)


class Emitter:
    def __init__(self, ir: IRProgram, schedules: dict, alloc: Allocation, lanes):
        self.ir = ir
        self.schedules = schedules
        self.alloc = alloc
        self.lanes = lanes
        self.addr = {s.name: s.addr for s in ir.symbols}
        self.items: list = []
        self.next_tag = 0
        top = max((s.addr + s.length for s in ir.symbols), default=16)
        self.spill_syms: list[Symbol] = []
        self.spill_addr: dict[VReg, int] = {}
        for k, v in enumerate(sorted(alloc.spilled, key=lambda v: v.id)):
            self.spill_addr[v] = top + k
            self.spill_syms.append(Symbol(f"__spill{k}", _SPILL_TYPE[v.vtype], top + k, 1, "spill"))

    # -- operands --
    def reg(self, v: VReg, scratch: dict | None = None) -> Reg:
        if scratch is not None and v in scratch:
            return Reg(v.vtype.lane, scratch[v])
        return Reg(v.vtype.lane, self.alloc.regs[v])

    def val(self, a, scratch):
        return _imm(a) if isinstance(a, Const) else self.reg(a, scratch)

    def mem(self, op: IROp, scratch) -> Mem:
        base = self.addr[op.sym] if op.sym is not None else 0
        index = self.reg(op.index, scratch) if op.index is not None else None
        return Mem(base + op.offset, index)

    def instruction(self, op: IROp, mn, scratch=None, tag=None) -> Instruction:
        r = lambda v: self.reg(v, scratch)  # noqa: E731
        name = op.op
        if name in (CONST, MOV):
            ops = (r(op.dst), self.val(op.args[0], scratch))
        elif name == LOAD:
            ops = (r(op.dst), self.mem(op, scratch))
        elif name == STORE:
            ops = (r(op.args[0]), self.mem(op, scratch))
        elif name == BIN:
            ops = (r(op.dst), self.val(op.args[0], scratch), self.val(op.args[1], scratch))
        elif name == CMP:
            ops = (r(op.dst), self.val(op.args[0], scratch), self.val(op.args[1], scratch))
            if mn.value.startswith("CMP.") or mn is BaseOp("T.CMP"):
                ops += (Cond(op.stem),)
        elif name == CONV:
            if mn is Opcode("CONV"):
                mask = ConvMask.for_directions([(op.src.sdt, op.vtype.sdt)])
                ops = (mask, r(op.dst), r(op.args[0]))
            else:
                ops = (r(op.dst), r(op.args[0]))
        elif name == NEW:
            ops = (r(op.dst), self.val(op.args[0], scratch))
        elif name == RELEASE:
            ops = (r(op.args[0]),)
        elif name == LEA:
            ops = (r(op.dst), self.mem(op, scratch))
        else:
            raise ValueError(name)
        return Instruction(mn, ops, tag)

    # -- spill code --
    def _spill_mn(self, v: VReg, load: bool):
        lane = v.vtype.lane
        if lane is None:
            return BaseOp("T.LD" if load else "T.ST")
        return Opcode(f"{'LD' if load else 'ST'}.{lane.suffix}")

    def scalar(self, op: IROp, mn) -> None:
        spilled = self.spill_addr
        scratch: dict = {}
        pre, post = [], []
        used: dict = {}
        for v in op.reads():
            if v in spilled and v not in scratch:
                lane = v.vtype.lane
                k = used.get(lane, 0)
                used[lane] = k + 1
                scratch[v] = SCRATCH[k]
                pre.append(Instruction(self._spill_mn(v, True), (Reg(lane, SCRATCH[k]), Mem(spilled[v])), None))
        out_scratch = dict(scratch)
        for v in op.writes():
            if v in spilled:
                lane = v.vtype.lane
                out_scratch[v] = SCRATCH[-1]
                post.append(Instruction(self._spill_mn(v, False), (Reg(lane, SCRATCH[-1]), Mem(spilled[v])), None))
        # reads see the loaded scratch copies, the write goes to the last scratch register
        ins = self.instruction(op, mn, _merge(scratch, out_scratch, op))
        self.items.extend(pre)
        self.items.append(ins)
        self.items.extend(post)

    def tag(self) -> int:
        self.next_tag += 1
        return self.next_tag - 1

    # -- blocks --
    def emit(self) -> Program:
        blocks = self.ir.blocks
        flows = []
        targets = set()
        for k, b in enumerate(blocks):
            nxt = blocks[k + 1].id if k + 1 < len(blocks) else None
            f = flow_ops(b, nxt)
            flows.append(f)
            targets.update(x[-1] for x in f)
        for b, f in zip(blocks, flows):
            if b.id in targets:
                self.items.append(Label(label_name(b.id)))
            self.block(b)
            for x in f:
                self.flow(x)
        return Program(tuple(self.items), tuple(self.ir.symbols) + tuple(self.spill_syms))

    def flow(self, x: tuple) -> None:
        if x[0] == "BR":
            self.items.append(Instruction(BaseOp("T.BR"), (LabelRef(label_name(x[1])),)))
            return
        cond = x[1]
        pre = []
        scratch = None
        if cond in self.spill_addr:
            scratch = {cond: SCRATCH[0]}
            lane = cond.vtype.lane
            pre.append(Instruction(self._spill_mn(cond, True), (Reg(lane, SCRATCH[0]), Mem(self.spill_addr[cond]))))
        self.items.extend(pre)
        self.items.append(Instruction(BaseOp("T." + x[0]), (self.reg(cond, scratch), LabelRef(label_name(x[2])))))

    def block(self, b) -> None:
        sched = self.schedules[b.id]
        ops = b.ops
        in_par = False
        from .select import select

        for c in sched.clusters:
            if c.kind == OP_CLUSTER:
                if not in_par:
                    self.items.append(Instruction(Opcode("PEN")))
                    in_par = True
                t = self.tag()
                if c.convs:
                    pairs = []
                    for i in c.convs:
                        pairs += [self.reg(ops[i].dst), self.reg(ops[i].args[0])]
                    self.items.append(Instruction(Opcode("CONV"), (c.mask, *pairs), t))
                for m in c.members:
                    if m in c.convs:
                        continue
                    self.items.append(self.instruction(ops[m], select(ops[m], self.lanes), None, t))
                continue
            if in_par:
                self.items.append(Instruction(Opcode("PDS")))
                in_par = False
            if c.kind == LOAD_CLUSTER:
                t = self.tag()
                self.items.append(Instruction(Opcode("VEN"), (VecLen(len(c.members)),)))
                for m in c.members:
                    self.items.append(self.instruction(ops[m], select(ops[m], self.lanes), None, t))
                self.items.append(Instruction(Opcode("VDS")))
            else:
                m = c.members[0]
                self.scalar(ops[m], select(ops[m], self.lanes))
        if in_par:
            self.items.append(Instruction(Opcode("PDS")))


def _merge(read_scratch: dict, all_scratch: dict, op: IROp) -> dict:
    """Scratch map for one instruction: sources keep their load registers, the result its store register."""
    out = dict(read_scratch)
    for v in op.writes():
        if v in all_scratch:
            out[v] = all_scratch[v]
    return out


def emit_program(ir: IRProgram, schedules: dict, alloc: Allocation, lanes) -> Program:
    return Emitter(ir, schedules, alloc, lanes).emit()


__all__ = ["emit_program", "label_name", "SdtKind"]
