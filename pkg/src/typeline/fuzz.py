"""Random MiniC programs and random IR blocks for property testing.

Generated programs always type-check, never divide by zero (integer
divisors are forced odd with ``| 1``), index arrays through a power-of-two
mask, and only loop a bounded number of times.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .frontend.ir import BIN, CMP, CONST, CONV, LOAD, MOV, STORE, Block, Const, Halt, IROp, IRProgram, VReg
from .isa import Symbol
from .semantics import VType, normalize

SCALARS = ("char", "int", "float", "double", "long")
_INTEGRAL = ("char", "int", "long")
_ARITH = ("+", "-", "*")
_BITS = ("&", "|", "^")
_CMPS = ("<", "<=", ">", ">=", "==", "!=")
ARRAY_LEN = 8


@dataclass
class _Var:
    name: str
    ty: str
    length: int | None = None  # arrays
    pointer: bool = False


@dataclass
class GenProgram:
    source: str
    inputs: dict
    globals: list = field(default_factory=list)


class MiniCGenerator:
    """Builds one random, well-typed, terminating MiniC program."""

    def __init__(self, rng: random.Random, *, statements: int = 10, max_depth: int = 2, heap: bool = True):
        self.rng = rng
        self.statements = statements
        self.max_depth = max_depth
        self.heap = heap
        self.globals: list[_Var] = []
        self.locals: list[_Var] = []
        self.counters = 0
        self.lines: list[str] = []

    # -- values --
    def literal(self, ty: str) -> str:
        r = self.rng
        if ty == "char":
            return str(r.randint(0, 127)) if r.random() < 0.7 else f"'{r.choice('abcxyz')}'"
        if ty == "int":
            return str(r.choice([r.randint(0, 9), r.randint(0, 1000), r.randint(0, 2**31 - 1)]))
        if ty == "long":
            return f"{r.randint(0, 2**40)}L"
        v = r.choice([r.uniform(-100, 100), r.randint(0, 8) / 4, r.uniform(-1e6, 1e6)])
        text = repr(float(v)) if "e" not in repr(float(v)) else f"{v:.6f}"
        if text.startswith("-"):
            text = text[1:]
        return text + ("f" if ty == "float" else "")

    def readable(self, ty: str | None = None) -> list[str]:
        out = []
        for v in self.globals + self.locals:
            if ty is not None and v.ty != ty:
                continue
            if v.length is None and not v.pointer:
                out.append(v.name)
        return out

    def index(self) -> str:
        return f"(({self.expr('int', 1)}) & {ARRAY_LEN - 1})"

    def leaf(self, ty: str) -> str:
        r = self.rng
        arrays = [v for v in self.globals if v.length and v.ty == ty]
        names = self.readable(ty)
        roll = r.random()
        if arrays and roll < 0.25:
            return f"{r.choice(arrays).name}[{self.index()}]"
        if names and roll < 0.85:
            return r.choice(names)
        return self.literal(ty)

    def operand_type(self, ty: str) -> str:
        """A type whose values mix legally into an expression of type ``ty``."""
        if ty == "long":
            return self.rng.choice(_INTEGRAL)
        order = ("char", "int", "float", "double")
        if ty in order and self.rng.random() < 0.3:
            return self.rng.choice(order[: order.index(ty) + 1])
        return ty

    def expr(self, ty: str, depth: int = 2) -> str:
        r = self.rng
        if depth <= 0 or r.random() < 0.3:
            return self.leaf(ty)
        roll = r.random()
        a = self.expr(self.operand_type(ty), depth - 1)
        b = self.expr(self.operand_type(ty), depth - 1)
        if roll < 0.45:
            return f"({a} {r.choice(_ARITH)} {b})"
        if roll < 0.6:
            if ty in _INTEGRAL:
                return f"({a} / ({b} | 1))" if r.random() < 0.7 else f"({a} % ({b} | 1))"
            # the operands may be integers even here; a float divisor keeps the division in floating point
            return f"({a} / ({b} + {'0.0f' if ty == 'float' else '0.0'}))"
        if roll < 0.72 and ty in _INTEGRAL:
            if r.random() < 0.5:
                return f"({a} {r.choice(_BITS)} {b})"
            return f"({a} {r.choice(('<<', '>>'))} ({self.leaf('int')} & 7))"
        if roll < 0.82 and ty == "int":
            t = r.choice(SCALARS)
            return f"({self.expr(t, depth - 1)} {r.choice(_CMPS)} {self.expr(t, depth - 1)})"
        if roll < 0.9:
            if ty in _INTEGRAL and r.random() < 0.5:
                return f"(~{a})"
            return f"(-{a})"
        if ty == "int" and roll < 0.95:
            return f"(({a} < {b}) && ({a} != 0) || !{b})"
        return f"({a} + {b})"

    # -- statements --
    def target(self) -> tuple[str, str]:
        r = self.rng
        pool = [v for v in self.globals + self.locals if not v.name.startswith("i") or not v.name[1:].isdigit()]
        pool = [v for v in pool if not v.pointer]
        v = r.choice(pool)
        if v.length:
            return f"{v.name}[{self.index()}]", v.ty
        return v.name, v.ty

    def emit(self, text: str, indent: int) -> None:
        self.lines.append("    " * indent + text)

    def statement(self, indent: int, depth: int) -> None:
        r = self.rng
        roll = r.random()
        if roll < 0.55 or depth >= self.max_depth:
            lhs, ty = self.target()
            src = self.operand_type(ty) if r.random() < 0.8 else r.choice(SCALARS)
            if ty == "long" and src in ("float", "double"):
                src = "int"
            op = "="
            if r.random() < 0.2 and src in _INTEGRAL and ty in _INTEGRAL:
                op = r.choice(("+=", "-=", "^="))
            self.emit(f"{lhs} {op} {self.expr(src)};", indent)
        elif roll < 0.7:
            t = r.choice(SCALARS)
            self.emit(f"if ({self.expr(t, 1)} {r.choice(_CMPS)} {self.expr(t, 1)}) {{", indent)
            self.block(indent + 1, depth + 1, r.randint(1, 3))
            if r.random() < 0.5:
                self.emit("} else {", indent)
                self.block(indent + 1, depth + 1, r.randint(1, 2))
            self.emit("}", indent)
        elif roll < 0.85:
            c = f"i{self.counters}"
            self.counters += 1
            trips = r.randint(1, 5)
            if r.random() < 0.6:
                self.emit(f"for ({c} = 0; {c} < {trips}; {c}++) {{", indent)
                self.block(indent + 1, depth + 1, r.randint(1, 3))
                self.emit("}", indent)
            else:
                self.emit(f"{c} = 0;", indent)
                self.emit(f"while ({c} < {trips}) {{", indent)
                self.block(indent + 1, depth + 1, r.randint(1, 3))
                self.emit(f"{c} = {c} + 1;", indent + 1)
                self.emit("}", indent)
        elif roll < 0.93 and self.heap:
            ty = r.choice(("int", "float", "double", "char"))
            n = r.randint(1, 6)
            h = f"p{len(self.lines)}"
            lhs, lty = self.target()
            self.emit("{", indent)
            self.emit(f"{ty} *{h} = new {ty}[{n}];", indent + 1)
            self.emit(f"{h}[{r.randrange(n)}] = {self.expr(ty, 1)};", indent + 1)
            self.emit(f"{h}[{r.randrange(n)}] = {self.expr(ty, 1)};", indent + 1)
            src = f"{h}[{r.randrange(n)}]"
            if lty == "long" and ty in ("float", "double"):
                src = "1"
            self.emit(f"{lhs} = {src};", indent + 1)
            self.emit(f"delete {h};", indent + 1)
            self.emit("}", indent)
        else:
            lhs, ty = self.target()
            a, b = self.operand_type("int"), "int"
            self.emit(f"{lhs} = mix({self.expr(a, 1)}, {self.expr(b, 1)});" if ty != "long" else f"{lhs} = {self.expr('int')};", indent)

    def block(self, indent: int, depth: int, n: int) -> None:
        for _ in range(n):
            self.statement(indent, depth)

    def generate(self) -> GenProgram:
        r = self.rng
        decls = []
        inputs = {}
        for k in range(r.randint(4, 9)):
            ty = r.choice(SCALARS)
            v = _Var(f"g{k}", ty)
            self.globals.append(v)
            decls.append(f"{ty} {v.name};")
            inputs[v.name] = self.input_value(ty)
        for k in range(r.randint(0, 2)):
            ty = r.choice(("char", "int", "float", "double"))
            v = _Var(f"a{k}", ty, ARRAY_LEN)
            self.globals.append(v)
            decls.append(f"{ty} {v.name}[{ARRAY_LEN}];")
            inputs[v.name] = [self.input_value(ty) for _ in range(ARRAY_LEN)]
        helper = [
            "int mix(int x, int y) {",
            "    int t = x ^ (y << 3);",
            "    return t + (x / (y | 1));",
            "}",
        ]
        self.locals = [_Var("t0", "int"), _Var("t1", "float"), _Var("t2", "double")]
        self.block(1, 0, self.statements)
        counters = [f"int i{k};" for k in range(self.counters)]
        body = ["    int t0 = 0;", "    float t1 = 0.5f;", "    double t2 = 0.25;"]
        body += ["    " + c for c in counters] + self.lines
        src = "\n".join(decls + helper + ["int main() {"] + body + ["    return 0;", "}"]) + "\n"
        return GenProgram(src, inputs, [v.name for v in self.globals])

    def input_value(self, ty: str):
        r = self.rng
        if ty == "char":
            return r.randint(0, 255)
        if ty == "int":
            return r.randint(-(2**31), 2**31 - 1) if r.random() < 0.3 else r.randint(-50, 50)
        if ty == "long":
            return r.randint(-(2**63), 2**63 - 1) if r.random() < 0.3 else r.randint(-50, 50)
        return normalize(r.uniform(-1000, 1000), VType.FLOAT if ty == "float" else VType.DOUBLE)


def random_program(seed: int, *, max_ops: int = 200, statements: int = 10) -> tuple[GenProgram, IRProgram]:
    """A random program whose IR has at most ``max_ops`` ops, plus its IR."""
    from .frontend import compile_source

    rng = random.Random(seed)
    n = statements
    while True:
        g = MiniCGenerator(rng, statements=n).generate()
        ir = compile_source(g.source)
        if len(ir.ops) <= max_ops or n <= 1:
            return g, ir
        n = max(1, n // 2)


# -- straight-line IR blocks --

_IR_TYPES = (VType.CHAR, VType.INT, VType.FLOAT, VType.DOUBLE, VType.LONG)
_STEMS = {
    VType.CHAR: ("ADD", "SUB", "AND", "OR", "XOR", "NOR", "XNOR"),
    VType.INT: ("ADD", "SUB", "MUL", "AND", "OR", "XOR", "NOR", "XNOR", "SRA", "SRL"),
    VType.FLOAT: ("ADD", "SUB", "MUL", "DIV"),
    VType.DOUBLE: ("ADD", "SUB", "MUL", "DIV"),
    VType.LONG: ("ADD", "SUB", "MUL", "AND", "OR", "XOR"),
}
_WIDEN = ((VType.INT, VType.FLOAT), (VType.INT, VType.DOUBLE), (VType.FLOAT, VType.DOUBLE), (VType.CHAR, VType.INT))
_OTHER_CONV = ((VType.DOUBLE, VType.INT), (VType.FLOAT, VType.INT), (VType.INT, VType.LONG), (VType.LONG, VType.INT), (VType.INT, VType.CHAR))


def random_ir_block(seed: int, n_ops: int | None = None) -> IRProgram:
    """One straight-line block over a handful of globals; operands are always defined."""
    rng = random.Random(seed)
    n_ops = n_ops or rng.randint(1, 60)
    symbols = []
    addr = 16
    syms_of: dict = {}
    for vt in _IR_TYPES:
        for k in range(rng.randint(1, 4)):
            length = rng.choice((1, 1, 4, 20))
            name = f"{vt.value}{k}"
            symbols.append(Symbol(name, vt.value, addr, length))
            syms_of.setdefault(vt, []).append((name, length))
            addr += length
    next_id = 0
    live: dict = {vt: [] for vt in _IR_TYPES}
    ops: list[IROp] = []

    def fresh(vt):
        nonlocal next_id
        # sometimes redefine an existing register to exercise WAR/WAW
        if live[vt] and rng.random() < 0.1:
            return rng.choice(live[vt])
        v = VReg(next_id, vt)
        next_id += 1
        return v

    def define(v):
        if v not in live[v.vtype]:
            live[v.vtype].append(v)

    def value(vt):
        if live[vt] and rng.random() < 0.8:
            return rng.choice(live[vt])
        if vt in (VType.FLOAT, VType.DOUBLE):
            return Const(normalize(rng.uniform(-10, 10), vt), vt)
        return Const(normalize(rng.randint(-20, 20), vt), vt)

    while len(ops) < n_ops:
        roll = rng.random()
        vt = rng.choice(_IR_TYPES)
        sdt = vt is not VType.LONG
        if roll < 0.35 or not live[vt]:
            name, length = rng.choice(syms_of[vt])
            d = fresh(vt)
            ops.append(IROp(LOAD, vt, d, sym=name, offset=rng.randrange(length), nonsdt=not sdt))
            define(d)
        elif roll < 0.6:
            d = fresh(vt)
            ops.append(IROp(BIN, vt, d, (value(vt), value(vt)), stem=rng.choice(_STEMS[vt]), nonsdt=not sdt))
            define(d)
        elif roll < 0.7:
            src, dst = rng.choice(_WIDEN + _OTHER_CONV)
            if not live[src]:
                continue
            d = fresh(dst)
            ops.append(IROp(CONV, dst, d, (rng.choice(live[src]),), src=src, nonsdt=dst is VType.LONG))
            define(d)
        elif roll < 0.78:
            if vt is VType.LONG:
                continue
            integral = vt in (VType.INT, VType.CHAR)
            cond = rng.choice(("eq", "ge", "le", "lt")) if integral else rng.choice(("eq", "ne", "lt", "le", "gt", "ge"))
            d = fresh(vt)
            ops.append(IROp(CMP, d.vtype, d, (value(vt), value(vt)), stem=cond))
            define(d)
        elif roll < 0.85:
            d = fresh(vt)
            v = value(vt)
            ops.append(IROp(MOV if isinstance(v, VReg) else CONST, vt, d, (v,), nonsdt=not sdt))
            define(d)
        else:
            if not live[vt]:
                continue
            name, length = rng.choice(syms_of[vt])
            ops.append(IROp(STORE, vt, None, (rng.choice(live[vt]),), sym=name, offset=rng.randrange(length), nonsdt=not sdt))
    return IRProgram([Block(0, ops, Halt())], tuple(symbols))
