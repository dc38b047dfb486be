"""Lowering of the typed syntax tree to the three-address IR.

Scalar locals and parameters live in virtual registers, one "home" register
per variable. Inside a block every assignment writes a fresh temporary and
the variable is re-pointed at it; when the block ends, the op that produced
the variable's final temporary is renamed to write the home register
instead. Every virtual register is therefore assigned at most once per block.

Globals, arrays, struct fields, static locals and locals whose address is
taken live in word-addressed memory. Calls are inlined.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from ..isa import Symbol
from ..semantics import IntDivisionByZero, VType, alu, compare, convert, normalize, truth, wrap32, zero
from . import ast as A
from .ir import (
    BIN,
    CMP,
    CONST,
    CONV,
    LEA,
    LOAD,
    MOV,
    NEW,
    RELEASE,
    STORE,
    Block,
    Branch,
    Const,
    Halt,
    IROp,
    IRProgram,
    Jump,
    Value,
    VReg,
)
from .parser import UnsupportedConstruct
from .typecheck import EnumConst, TypedAst, VarInfo

DATA_BASE = 16
# OBJ.n takes a size in bytes
ELEMENT_BYTES = {"char": 1, "int": 4, "float": 4, "double": 8, "long": 8, "enum": 8}
_SYMBOL_TYPE = {
    VType.CHAR: "char",
    VType.INT: "int",
    VType.FLOAT: "float",
    VType.DOUBLE: "double",
    VType.LONG: "long",
    VType.PTR: "ptr",
}
_STEMS = {"+": "ADD", "-": "SUB", "*": "MUL", "/": "DIV", "%": "REM", "&": "AND", "|": "OR", "^": "XOR", "<<": "SHL"}
_CONDS = {"==": "eq", "!=": "ne", "<": "lt", "<=": "le", ">": "gt", ">=": "ge"}


@dataclass(frozen=True)
class LowerOptions:
    unroll: int = 1  # unroll factor for counted for-loops


@dataclass(eq=False)
class _Frame:
    func: str | None
    homes: dict = field(default_factory=dict)  # VarInfo -> VReg
    ret: VReg | None = None
    exit: int | None = None


def _shift_stem(vt: VType) -> str:
    return "SRA" if vt is VType.INT else "SHR"


class Lowerer:
    def __init__(self, typed: TypedAst, options: LowerOptions):
        self.typed = typed
        self.opts = options
        self.blocks: list[Block] = []
        self.cur: Block | None = None
        self.next_block = 0
        self.next_vreg = 0
        self.depth = 0
        self.symbols: list[Symbol] = []
        self.sym_names: set[str] = set()
        self.sym_of: dict = {}  # (VarInfo, field) -> symbol name
        self.next_addr = DATA_BASE
        self.frames: list[_Frame] = [_Frame(None)]
        self.loops: list[tuple[int, int]] = []  # (break target, continue target)
        self.calls: list[str] = []
        self.cur_map: dict[VReg, VReg] = {}
        self.defined_here: dict[VReg, int] = {}
        self.renames: dict[VReg, VReg] = {}
        self.homes_all: set[VReg] = set()

    # -- registers and blocks --
    def vreg(self, vt: VType) -> VReg:
        self.next_vreg += 1
        return VReg(self.next_vreg, vt)

    def new_block(self) -> int:
        self.next_block += 1
        return self.next_block - 1

    def start(self, bid: int) -> None:
        assert self.cur is None
        self.cur = Block(bid, loop_depth=self.depth)
        self.blocks.append(self.cur)

    def live(self) -> Block:
        """Current block; code after return/break goes to a fresh unreachable block."""
        if self.cur is None:
            self.start(self.new_block())
        return self.cur

    def emit(self, op: IROp) -> IROp:
        blk = self.live()
        if op.dst is not None:
            self.defined_here[op.dst] = len(blk.ops)
        blk.ops.append(op)
        return op

    def finish(self, term) -> None:
        blk = self.live()
        for home, tmp in self.cur_map.items():
            if tmp == home:
                continue
            idx = self.defined_here[tmp]
            blk.ops[idx] = replace(blk.ops[idx], dst=home)
            self.renames[tmp] = home
        if isinstance(term, Branch):
            term = Branch(self.renames.get(term.cond, term.cond), term.if_true, term.if_false)
        blk.term = term
        self.cur_map = {}
        self.defined_here = {}
        self.cur = None

    def jump_to(self, bid: int) -> None:
        self.finish(Jump(bid))
        self.start(bid)

    # -- symbols --
    def add_symbol(self, name: str, vt: VType, length: int, scope: str, init=()) -> str:
        base, n = name, 1
        while name in self.sym_names:
            n += 1
            name = f"{base}#{n}"
        self.sym_names.add(name)
        self.symbols.append(Symbol(name, _SYMBOL_TYPE[vt], self.next_addr, length, scope, tuple(init)))
        self.next_addr += length
        return name

    def place(self, info: VarInfo, init=()) -> None:
        scope = "global" if info.storage == "global" else "local"
        prefix = "" if scope == "global" else f"{info.func or 'top'}."
        t = info.ty
        if t.kind == "struct":
            for fname, fty in self.typed.structs[t.tag]:
                self.sym_of[(info, fname)] = self.add_symbol(f"{prefix}{info.name}.{fname}", fty.vtype, 1, scope)
        elif t.kind == "array":
            self.sym_of[(info, None)] = self.add_symbol(f"{prefix}{info.name}", t.elem.vtype, t.length, scope, init)
        else:
            self.sym_of[(info, None)] = self.add_symbol(f"{prefix}{info.name}", t.vtype, 1, scope, init)

    def home(self, info: VarInfo) -> VReg:
        for frame in reversed(self.frames):
            if info in frame.homes:
                return frame.homes[info]
        raise AssertionError(f"no register for {info}")

    def bind_home(self, info: VarInfo) -> VReg:
        h = self.vreg(info.ty.vtype)
        self.frames[-1].homes[info] = h
        self.homes_all.add(h)
        return h

    # -- values --
    def reg(self, v: Value) -> VReg:
        if isinstance(v, VReg):
            return v
        dst = self.vreg(v.vtype)
        self.emit(IROp(CONST, v.vtype, dst, (v,)))
        return dst

    def set_var(self, info: VarInfo, value: Value) -> None:
        """Assign a register-resident variable."""
        h = self.home(info)
        claimable = (
            isinstance(value, VReg)
            and value in self.defined_here
            and value not in self.homes_all
            and value not in self.cur_map.values()
            and value.vtype is h.vtype
        )
        if claimable:
            self.cur_map[h] = value
            return
        t = self.vreg(h.vtype)
        if isinstance(value, Const):
            self.emit(IROp(CONST, h.vtype, t, (value,)))
        else:
            self.emit(IROp(MOV, h.vtype, t, (value,)))
        self.cur_map[h] = t

    def get_var(self, info: VarInfo) -> VReg:
        h = self.home(info)
        return self.cur_map.get(h, h)

    # -- program --
    def lower_program(self) -> IRProgram:
        prog = self.typed.program
        self.start(self.new_block())
        for item in prog.items:
            if isinstance(item, A.Stmt):
                self.stmt(item)
        main = self.typed.functions.get("main")
        if main is not None:
            if main.params:
                raise UnsupportedConstruct("main takes no parameters", main.node.pos)
            self.inline(main, [])
        exit_id = self.new_block()
        self.finish(Jump(exit_id))
        self.start(exit_id)
        self.finish(Halt())
        blocks = [self.fix(b) for b in self.blocks]
        return IRProgram(blocks, tuple(self.symbols))

    def fix(self, b: Block) -> Block:
        r = self.renames
        b.ops = [op.renamed(r) for op in b.ops]
        if isinstance(b.term, Branch) and b.term.cond in r:
            b.term = Branch(r[b.term.cond], b.term.if_true, b.term.if_false)
        return b

    # -- statements --
    def stmt(self, s: A.Stmt) -> None:
        if isinstance(s, A.Block):
            for x in s.stmts:
                self.stmt(x)
        elif isinstance(s, A.DeclStmt):
            for d in s.decls:
                self.decl(d)
        elif isinstance(s, A.Assign):
            self.assign(s.target, self.expr(s.value))
        elif isinstance(s, A.If):
            then_b, join = self.new_block(), self.new_block()
            else_b = self.new_block() if s.orelse is not None else join
            self.cond(s.cond, then_b, else_b)
            self.start(then_b)
            self.stmt(s.then)
            self.finish(Jump(join))
            if s.orelse is not None:
                self.start(else_b)
                self.stmt(s.orelse)
                self.finish(Jump(join))
            self.start(join)
        elif isinstance(s, A.While):
            self.loop(None, s.cond, None, s.body)
        elif isinstance(s, A.For):
            if s.init is not None:
                self.stmt(s.init)
            factor = self.unroll_factor(s)
            self.loop(None, s.cond, s.step, s.body, factor)
        elif isinstance(s, A.Return):
            frame = self.frames[-1]
            if s.value is not None:
                v = self.expr(s.value)
                if frame.exit is None:
                    frame.ret = v  # single trailing return, no jump needed
                    return
                self.emit(IROp(MOV if isinstance(v, VReg) else CONST, frame.ret.vtype, frame.ret, (v,)))
            if frame.exit is not None:
                self.finish(Jump(frame.exit))
        elif isinstance(s, A.Break):
            self.finish(Jump(self.loops[-1][0]))
        elif isinstance(s, A.Continue):
            self.finish(Jump(self.loops[-1][1]))
        elif isinstance(s, A.Delete):
            h = self.reg(self.expr(s.target))
            self.emit(IROp(RELEASE, VType.PTR, None, (h,)))
        elif isinstance(s, A.ExprStmt):
            self.expr(s.expr)
        elif isinstance(s, A.Empty):
            pass
        else:
            raise UnsupportedConstruct(f"cannot lower {type(s).__name__}", s.pos)

    def decl(self, d: A.VarDecl) -> None:
        info: VarInfo = d.info  # type: ignore[attr-defined]
        if info.in_memory:
            static_init = info.storage == "global" or info.static
            literal = _literal_values(d.init)
            if static_init and literal is not None:
                self.place(info, literal)
                return
            self.place(info)
            if d.init is None:
                return
            if info.ty.kind == "array":
                name = self.sym_of[(info, None)]
                for i, e in enumerate(d.init):
                    v = self.reg(self.expr(e))
                    self.emit(IROp(STORE, v.vtype, None, (v,), sym=name, offset=i))
            else:
                self.store_var(info, self.expr(d.init))
            return
        self.bind_home(info)
        if d.init is None:
            self.set_var(info, Const(zero(info.ty.vtype), info.ty.vtype))
        else:
            self.set_var(info, self.expr(d.init))

    def store_var(self, info: VarInfo, v: Value) -> None:
        r = self.reg(v)
        self.emit(IROp(STORE, r.vtype, None, (r,), sym=self.sym_of[(info, None)]))

    def assign(self, target: A.Expr, v: Value) -> None:
        if isinstance(target, A.Name):
            info = target.ref
            if info.in_memory:
                self.store_var(info, v)
            else:
                self.set_var(info, v)
            return
        r = self.reg(v)
        sym, offset, index, nonsdt = self.address(target)
        self.emit(IROp(STORE, r.vtype, None, (r,), sym=sym, offset=offset, index=index, nonsdt=nonsdt))

    def address(self, e: A.Expr):
        """(symbol, offset, index register, nonsdt) locating an lvalue in memory."""
        if isinstance(e, A.Name):
            return self.sym_of[(e.ref, None)], 0, None, False
        if isinstance(e, A.Field):
            return self.sym_of[(e.base.ref, e.name)], 0, None, True
        if isinstance(e, A.Index):
            idx = self.expr(e.index)
            if e.base.ty.kind == "array":
                name = self.sym_of[(e.base.ref, None)]
                if isinstance(idx, Const) and idx.value >= 0:
                    return name, int(idx.value), None, False
                return name, 0, self.reg(idx), False
            base = self.reg(self.expr(e.base))
            if isinstance(idx, Const) and idx.value >= 0:
                return None, int(idx.value), base, True
            addr = self.vreg(VType.PTR)
            self.emit(IROp(BIN, VType.PTR, addr, (base, idx), stem="ADD"))
            return None, 0, addr, True
        if isinstance(e, A.Unary) and e.op == "*":
            return None, 0, self.reg(self.expr(e.operand)), True
        raise UnsupportedConstruct("expression has no address", e.pos)

    def loop(self, init, cond, step, body, factor: int = 1) -> None:
        head, body_b, exit_b = self.new_block(), self.new_block(), self.new_block()
        cont_b = self.new_block() if step is not None else head
        self.depth += 1
        self.jump_to(head)
        if cond is None:
            self.finish(Jump(body_b))
        else:
            self.cond(cond, body_b, exit_b)
        self.start(body_b)
        self.loops.append((exit_b, cont_b))
        for k in range(factor):
            self.stmt(body)
            if k < factor - 1:
                self.stmt(step)
        self.loops.pop()
        if step is not None:
            self.jump_to(cont_b)
            self.stmt(step)
        self.finish(Jump(head))
        self.depth -= 1
        self.start(exit_b)

    def unroll_factor(self, s: A.For) -> int:
        k = self.opts.unroll
        if k <= 1:
            return 1
        trip = _trip_count(s)
        if trip is None or trip % k:
            return 1
        return k

    def inline(self, info, args: list[Value]) -> Value | None:
        if info.name in self.calls:
            raise UnsupportedConstruct(f"recursive call to {info.name}", info.node.pos)
        self.calls.append(info.name)
        frame = _Frame(info.name)
        returns = [n for n in A.walk(info.node.body) if isinstance(n, A.Return)]
        body = info.node.body.stmts
        trailing = len(returns) == 1 and body and body[-1] is returns[0]
        if returns and not trailing:
            frame.exit = self.new_block()
            if info.ret.kind != "void":
                frame.ret = self.vreg(info.ret.vtype)
                self.homes_all.add(frame.ret)
        self.frames.append(frame)
        for p, a in zip(info.params, args):
            if p.in_memory:
                self.place(p)
                self.store_var(p, a)
            else:
                self.bind_home(p)
                self.set_var(p, a)
        saved_loops, self.loops = self.loops, []
        self.stmt(info.node.body)
        self.loops = saved_loops
        if frame.exit is not None:
            self.jump_to(frame.exit)
        self.frames.pop()
        self.calls.pop()
        return frame.ret

    # -- conditions --
    def cond(self, e: A.Expr, t: int, f: int) -> None:
        """Branch to ``t`` when ``e`` holds, else to ``f``; ends the current block."""
        if isinstance(e, A.Logical):
            mid = self.new_block()
            if e.op == "&&":
                self.cond(e.left, mid, f)
            else:
                self.cond(e.left, t, mid)
            self.start(mid)
            self.cond(e.right, t, f)
            return
        if isinstance(e, A.Unary) and e.op == "!":
            self.cond(e.operand, f, t)
            return
        if isinstance(e, A.Binary) and e.op == "!=" and e.left.ty.vtype in (VType.INT, VType.CHAR):
            # branch on equality with the targets swapped
            a, b = self.expr(e.left), self.expr(e.right)
            v = self.compare("eq", a, b, e.left.ty.vtype)
            t, f = f, t
        elif isinstance(e, A.Binary) and e.op in _CONDS:
            v = self.comparison(e)
        else:
            v = self.expr(e)
        if isinstance(v, Const):
            self.finish(Jump(t if v.value != 0 else f))
            return
        self.finish(Branch(v, t, f))

    # -- expressions --
    def expr(self, e: A.Expr) -> Value:
        if isinstance(e, (A.IntLit, A.CharLit, A.FloatLit)):
            vt = e.ty.vtype
            return Const(normalize(e.value, vt) if vt is not VType.PTR else int(e.value), vt)
        if isinstance(e, A.Name):
            info = e.ref
            if isinstance(info, EnumConst):
                return Const(info.value, VType.LONG)
            if info.in_memory:
                dst = self.vreg(info.ty.vtype)
                self.emit(IROp(LOAD, dst.vtype, dst, sym=self.sym_of[(info, None)]))
                return dst
            return self.get_var(info)
        if isinstance(e, (A.Index, A.Field)) or (isinstance(e, A.Unary) and e.op == "*"):
            sym, offset, index, nonsdt = self.address(e)
            dst = self.vreg(e.ty.vtype)
            self.emit(IROp(LOAD, dst.vtype, dst, sym=sym, offset=offset, index=index, nonsdt=nonsdt))
            return dst
        if isinstance(e, A.Unary):
            return self.unary(e)
        if isinstance(e, A.Binary):
            if e.op in _CONDS:
                return self.as_int(self.comparison(e))
            return self.binary(e)
        if isinstance(e, A.Logical):
            r = self.vreg(VType.INT)
            self.homes_all.add(r)
            t, f, join = self.new_block(), self.new_block(), self.new_block()
            self.cond(e, t, f)
            self.start(t)
            self.emit(IROp(CONST, VType.INT, r, (Const(1, VType.INT),)))
            self.finish(Jump(join))
            self.start(f)
            self.emit(IROp(CONST, VType.INT, r, (Const(0, VType.INT),)))
            self.jump_to(join)
            return r
        if isinstance(e, A.Convert):
            return self.conversion(e)
        if isinstance(e, A.Call):
            info = self.typed.functions[e.name]
            args = [self.expr(a) for a in e.args]
            out = self.inline(info, args)
            if out is None:
                return Const(0, VType.INT)
            return out
        if isinstance(e, A.New):
            count = self.expr(e.count)
            width = ELEMENT_BYTES[e.ty.elem.kind]
            if isinstance(count, Const):
                size = Const(wrap32(count.value * width), VType.INT)
            elif width == 1:
                size = count
            else:
                size = self.vreg(VType.INT)
                self.emit(IROp(BIN, VType.INT, size, (count, Const(width, VType.INT)), stem="MUL"))
            dst = self.vreg(VType.PTR)
            self.emit(IROp(NEW, VType.PTR, dst, (size,)))
            return dst
        raise UnsupportedConstruct(f"cannot lower {type(e).__name__}", e.pos)

    def conversion(self, e: A.Convert) -> Value:
        v = self.expr(e.expr)
        src, dst_t = e.expr.ty.vtype, e.ty.vtype
        if src is dst_t:
            return v
        if isinstance(v, Const):
            return Const(convert(v.value, src, dst_t), dst_t)
        dst = self.vreg(dst_t)
        self.emit(IROp(CONV, dst_t, dst, (v,), src=src))
        return dst

    def as_int(self, v: Value) -> Value:
        """A comparison result moved to the int lane."""
        if isinstance(v, Const):
            return Const(int(v.value != 0), VType.INT)
        if v.vtype is VType.INT:
            return v
        dst = self.vreg(VType.INT)
        self.emit(IROp(CONV, VType.INT, dst, (v,), src=v.vtype))
        return dst

    def comparison(self, e: A.Binary) -> Value:
        a, b = self.expr(e.left), self.expr(e.right)
        vt = e.left.ty.vtype
        return self.compare(_CONDS[e.op], a, b, vt)

    def compare(self, cond: str, a: Value, b: Value, vt: VType) -> Value:
        out_t = VType.INT if vt in (VType.LONG, VType.PTR) else vt
        if isinstance(a, Const) and isinstance(b, Const):
            return Const(truth(out_t, compare(cond, a.value, b.value)), out_t)
        if vt in (VType.INT, VType.CHAR):
            # integer lanes have eq/ge/le/lt compares only
            if cond == "gt":
                cond, a, b = "lt", b, a
            if cond == "ne":
                eq = self.compare("eq", a, b, vt)
                dst = self.vreg(vt)
                self.emit(IROp(BIN, vt, dst, (eq, Const(1, vt)), stem="XOR"))
                return dst
        dst = self.vreg(out_t)
        nonsdt = out_t is not vt
        self.emit(IROp(CMP, out_t, dst, (a, b), stem=cond, src=vt if nonsdt else None, nonsdt=nonsdt))
        return dst

    def unary(self, e: A.Unary) -> Value:
        if e.op == "&":
            inner = e.operand
            sym, offset, index, _ = self.address(inner)
            dst = self.vreg(VType.PTR)
            if sym is None:
                if offset == 0:
                    return index
                self.emit(IROp(BIN, VType.PTR, dst, (index, Const(offset, VType.INT)), stem="ADD"))
                return dst
            self.emit(IROp(LEA, VType.PTR, dst, sym=sym, offset=offset, index=index))
            return dst
        v = self.expr(e.operand)
        vt = e.operand.ty.vtype
        if e.op == "!":
            return self.as_int(self.compare("eq", v, Const(zero(vt), vt), vt))
        if e.op == "-":
            if vt in (VType.FLOAT, VType.DOUBLE):
                return self.bin("MUL", v, Const(-1.0, vt), vt)
            return self.bin("SUB", Const(0, vt), v, vt)
        if e.op == "~":
            if vt is VType.LONG:
                return self.bin("XOR", v, Const(-1, vt), vt)
            r = self.reg(v)
            return self.bin("NOR", r, r, vt)
        raise UnsupportedConstruct(f"unary {e.op}", e.pos)

    def binary(self, e: A.Binary) -> Value:
        a, b = self.expr(e.left), self.expr(e.right)
        vt = e.ty.vtype
        if e.op == ">>":
            stem = _shift_stem(vt)
        else:
            stem = _STEMS[e.op]
        return self.bin(stem, a, b, vt)

    def bin(self, stem: str, a: Value, b: Value, vt: VType) -> Value:
        if isinstance(a, Const) and isinstance(b, Const):
            try:
                return Const(alu(stem, vt, a.value, b.value), vt)
            except IntDivisionByZero:
                a = self.reg(a)
        dst = self.vreg(vt)
        self.emit(IROp(BIN, vt, dst, (a, b), stem=stem))
        return dst


def _literal_values(init) -> tuple | None:
    """Initializer values when every element is a literal, else None."""
    if init is None:
        return ()
    items = init if isinstance(init, list) else [init]
    out = []
    for e in items:
        if not isinstance(e, (A.IntLit, A.FloatLit, A.CharLit)):
            return None
        out.append(normalize(e.value, e.ty.vtype) if e.ty.kind != "ptr" else int(e.value))
    return tuple(out)


def _assigned_names(node) -> set[str]:
    out = set()
    for n in A.walk(node):
        if isinstance(n, A.Assign) and isinstance(n.target, A.Name):
            out.add(n.target.id)
    return out


def _trip_count(s: A.For) -> int | None:
    """Iterations of ``for (i = c0; i < c1; i++)`` with a register-resident int ``i``."""
    init, cond, step = s.init, s.cond, s.step
    if isinstance(init, A.DeclStmt) and len(init.decls) == 1:
        d = init.decls[0]
        name, start, info = d.name, d.init, d.info
    elif isinstance(init, A.Assign) and isinstance(init.target, A.Name):
        name, start, info = init.target.id, init.value, init.target.ref
    else:
        return None
    if not isinstance(info, VarInfo) or info.in_memory or info.ty.kind != "int":
        return None
    if not isinstance(start, A.IntLit):
        return None
    if not (isinstance(cond, A.Binary) and cond.op in ("<", "<=") and isinstance(cond.left, A.Name)):
        return None
    if cond.left.ref is not info or not isinstance(cond.right, A.IntLit):
        return None
    if not (
        isinstance(step, A.Assign)
        and isinstance(step.target, A.Name)
        and step.target.ref is info
        and isinstance(step.value, A.Binary)
        and step.value.op == "+"
        and isinstance(step.value.left, A.Name)
        and step.value.left.ref is info
        and isinstance(step.value.right, A.IntLit)
        and step.value.right.value == 1
    ):
        return None
    for n in A.walk(s.body):
        if isinstance(n, (A.Break, A.Continue, A.Return, A.Call)):
            return None
    if name in _assigned_names(s.body):
        return None
    end = cond.right.value + (1 if cond.op == "<=" else 0)
    return max(0, end - start.value)


def lower(typed: TypedAst, options: LowerOptions | None = None) -> IRProgram:
    """Lower a type-checked program to IR blocks plus the memory symbol table."""
    return Lowerer(typed, options or LowerOptions()).lower_program()
