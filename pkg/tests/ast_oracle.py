"""Reference interpreter that walks the typed AST directly.

It shares no code with lowering, the IR or either executor. Scalar
arithmetic and conversions reuse the semantics helpers so that a mismatch
points at lowering or control flow, not at numerics. Pointers are
``(cells, offset)`` pairs over Python lists.
"""

from __future__ import annotations

from typeline.frontend import ast as A
from typeline.frontend.typecheck import EnumConst, type_check
from typeline.frontend.parser import parse_minic
from typeline.semantics import VType, alu, compare, convert, normalize, truth, zero

_STEMS = {"+": "ADD", "-": "SUB", "*": "MUL", "/": "DIV", "%": "REM", "&": "AND", "|": "OR", "^": "XOR", "<<": "SHL"}
_CONDS = {"==": "eq", "!=": "ne", "<": "lt", "<=": "le", ">": "gt", ">=": "ge"}


class _Return(Exception):
    def __init__(self, value):
        self.value = value


class _Break(Exception):
    pass


class _Continue(Exception):
    pass


class Cell:
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = value


class Interp:
    def __init__(self, typed, inputs):
        self.typed = typed
        self.inputs = inputs
        self.statics: dict = {}
        self.frames: list[dict] = [{}]
        self.globals: dict = {}

    # storage: every variable is a list of cells (scalars have one)
    def storage(self, info):
        if info.storage == "global":
            return self.globals[id(info)]
        if info.static:
            return self.statics[id(info)]
        return self.frames[-1][id(info)]

    def declare(self, d: A.VarDecl):
        info = d.info
        t = info.ty
        if info.static and id(info) in self.statics:
            return
        if t.kind == "array":
            vt = t.elem.vtype
            cells = [zero(vt) for _ in range(t.length)]
            init = d.init or []
            for i, e in enumerate(init):
                cells[i] = self.eval(e)
            if info.storage == "global" and info.name in self.inputs:
                given = self.inputs[info.name]
                given = given if isinstance(given, list) else [given]
                for i, v in enumerate(given):
                    cells[i] = normalize(v, vt)
        else:
            vt = t.vtype
            value = self.eval(d.init) if d.init is not None else (None if vt is VType.PTR else zero(vt))
            if info.storage == "global" and info.name in self.inputs:
                value = normalize(self.inputs[info.name], vt)
            cells = [value]
        if info.storage == "global":
            self.globals[id(info)] = cells
        elif info.static:
            self.statics[id(info)] = cells
        else:
            self.frames[-1][id(info)] = cells

    def place(self, e):
        """(cells, index) of an lvalue."""
        if isinstance(e, A.Name):
            return self.storage(e.ref), 0
        if isinstance(e, A.Index):
            i = self.eval(e.index)
            if e.base.ty.kind == "array":
                cells, off = self.storage(e.base.ref), 0
            else:
                cells, off = self.eval(e.base)
            return cells, off + i
        if isinstance(e, A.Unary) and e.op == "*":
            return self.eval(e.operand)
        raise NotImplementedError(type(e).__name__)

    def eval(self, e):
        if isinstance(e, (A.IntLit, A.CharLit, A.FloatLit)):
            if e.ty.kind == "ptr":
                return None
            return normalize(e.value, e.ty.vtype)
        if isinstance(e, A.Name):
            if isinstance(e.ref, EnumConst):
                return e.ref.value
            return self.storage(e.ref)[0]
        if isinstance(e, (A.Index,)) or (isinstance(e, A.Unary) and e.op == "*"):
            cells, i = self.place(e)
            return cells[i]
        if isinstance(e, A.Unary):
            if e.op == "&":
                return self.place(e.operand)
            v = self.eval(e.operand)
            vt = e.operand.ty.vtype
            if e.op == "!":
                return 1 if v == 0 else 0
            if e.op == "-":
                if vt in (VType.FLOAT, VType.DOUBLE):
                    return -v
                return alu("SUB", vt, 0, v)
            if e.op == "~":
                return normalize(~v, vt)
        if isinstance(e, A.Binary):
            if e.op in _CONDS:
                a, b = self.eval(e.left), self.eval(e.right)
                return truth(VType.INT, compare(_CONDS[e.op], a, b))
            if e.ty.kind == "ptr":
                cells, off = self.eval(e.left)
                k = self.eval(e.right)
                return cells, off + (k if e.op == "+" else -k)
            a, b = self.eval(e.left), self.eval(e.right)
            vt = e.ty.vtype
            stem = ("SRA" if vt is VType.INT else "SHR") if e.op == ">>" else _STEMS[e.op]
            return alu(stem, vt, a, b)
        if isinstance(e, A.Logical):
            left = self.eval(e.left) != 0
            if e.op == "&&":
                return int(left and self.eval(e.right) != 0)
            return int(left or self.eval(e.right) != 0)
        if isinstance(e, A.Convert):
            return convert(self.eval(e.expr), e.expr.ty.vtype, e.ty.vtype)
        if isinstance(e, A.Call):
            info = self.typed.functions[e.name]
            args = [self.eval(a) for a in e.args]
            return self.call(info, args)
        if isinstance(e, A.New):
            n = self.eval(e.count)
            return [zero(e.ty.elem.vtype)] * n, 0
        raise NotImplementedError(type(e).__name__)

    def call(self, info, args):
        frame = {}
        for p, a in zip(info.params, args):
            frame[id(p)] = [a]
        self.frames.append(frame)
        try:
            self.stmt(info.node.body)
            result = None
        except _Return as r:
            result = r.value
        finally:
            self.frames.pop()
        return result

    def stmt(self, s):
        if s is None or isinstance(s, A.Empty):
            return
        if isinstance(s, A.Block):
            for x in s.stmts:
                self.stmt(x)
        elif isinstance(s, A.DeclStmt):
            for d in s.decls:
                self.declare(d)
        elif isinstance(s, A.Assign):
            value = self.eval(s.value)
            cells, i = self.place(s.target)
            cells[i] = value
        elif isinstance(s, A.If):
            if self.eval(s.cond) != 0:
                self.stmt(s.then)
            else:
                self.stmt(s.orelse)
        elif isinstance(s, A.While):
            while self.eval(s.cond) != 0:
                try:
                    self.stmt(s.body)
                except _Break:
                    break
                except _Continue:
                    pass
        elif isinstance(s, A.For):
            self.stmt(s.init)
            while s.cond is None or self.eval(s.cond) != 0:
                try:
                    self.stmt(s.body)
                except _Break:
                    break
                except _Continue:
                    pass
                self.stmt(s.step)
        elif isinstance(s, A.Return):
            raise _Return(self.eval(s.value) if s.value is not None else None)
        elif isinstance(s, A.Break):
            raise _Break
        elif isinstance(s, A.Continue):
            raise _Continue
        elif isinstance(s, A.ExprStmt):
            self.eval(s.expr)
        elif isinstance(s, A.Delete):
            self.eval(s.target)
        else:
            raise NotImplementedError(type(s).__name__)

    def run(self) -> dict:
        prog = self.typed.program
        for item in prog.items:
            if isinstance(item, A.Stmt):
                self.stmt(item)
        main = self.typed.functions.get("main")
        if main is not None:
            self.call(main, [])
        out = {}
        for info in self.typed.globals:
            if info.ty.kind == "array":
                out[info.name] = list(self.globals[id(info)])
            elif info.ty.kind != "ptr":
                out[info.name] = self.globals[id(info)][0]
        return out


def interpret(source: str, inputs: dict | None = None) -> dict:
    """Global outputs of ``source`` evaluated straight off the typed AST."""
    return Interp(type_check(parse_minic(source)), inputs or {}).run()
