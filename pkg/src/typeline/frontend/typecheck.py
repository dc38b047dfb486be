"""Type checking: name resolution, promotion and explicit conversion nodes.

Every mixed-type binary operation gets both operands converted to the
lattice maximum. Widenings use only the steps char->int, int->float,
int->double and float->double. Anything else the program asks for
(narrowing on assignment, int<->long) becomes a conversion marked
``traditional``; literals are simply re-typed.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

from ..semantics import VType, convert, normalize
from . import ast as A
from .parser import FrontendError, UnsupportedConstruct
from .types import CHAR, COMPARISONS, DOUBLE, FLOAT, INT, LONG, VOID, Ty, ptr_to, result_type, widening_chain


class TypeCheckError(FrontendError):
    pass


class UndeclaredVariable(TypeCheckError):
    pass


class ArityMismatch(TypeCheckError):
    pass


class NonSdtArithmetic(TypeCheckError):
    pass


class InvalidOperands(TypeCheckError):
    pass


class NotAssignable(TypeCheckError):
    pass


class Redeclaration(TypeCheckError):
    pass


@dataclass(eq=False)
class VarInfo:
    name: str
    ty: Ty
    storage: str  # global | local | param
    func: str | None = None
    const: bool = False
    static: bool = False
    unsigned: bool = False
    address_taken: bool = False
    decl: object = field(default=None, repr=False)

    @property
    def in_memory(self) -> bool:
        return (
            self.storage == "global"
            or self.static
            or self.address_taken
            or self.ty.kind in ("array", "struct")
        )

    def __repr__(self) -> str:
        return f"VarInfo({self.name}: {self.ty}, {self.storage})"


@dataclass(frozen=True)
class EnumConst:
    name: str
    value: int
    tag: str


@dataclass(eq=False)
class FuncInfo:
    name: str
    ret: Ty
    params: list
    node: A.FuncDef


@dataclass
class TypedAst:
    program: A.Program
    globals: list = field(default_factory=list)
    functions: dict = field(default_factory=dict)
    structs: dict = field(default_factory=dict)  # tag -> [(field, Ty)]


_ARITH = frozenset("+-*/")
_BITWISE = frozenset({"%", "&", "|", "^", "<<", ">>"})


def _is_literal(e: A.Expr) -> bool:
    return isinstance(e, (A.IntLit, A.FloatLit, A.CharLit))


def _literal_of(value, ty: Ty, pos) -> A.Expr:
    if ty.kind in ("float", "double"):
        out: A.Expr = A.FloatLit(normalize(value, ty.vtype), ty.kind == "float", pos=pos)
    elif ty.kind == "char":
        out = A.CharLit(normalize(value, VType.CHAR), pos=pos)
    else:
        out = A.IntLit(normalize(value, ty.vtype if ty.kind != "ptr" else VType.INT), ty.kind in ("long", "enum"), pos=pos)
    out.ty = ty
    return out


def _lit_vtype(e: A.Expr) -> VType:
    return e.ty.vtype


class Checker:
    def __init__(self) -> None:
        self.structs: dict[str, list[tuple[str, Ty]]] = {}
        self.enums: dict[str, dict[str, int]] = {}
        self.typedefs: dict[str, Ty] = {}
        self.functions: dict[str, FuncInfo] = {}
        self.scopes: list[dict] = [{}]
        self.globals: list[VarInfo] = []
        self.func: FuncInfo | None = None
        self.loop_depth = 0

    # -- scopes --
    def declare(self, name: str, info, pos) -> None:
        scope = self.scopes[-1]
        if name in scope:
            raise Redeclaration(f"'{name}' is already declared in this scope", pos)
        if len(self.scopes) == 1 and name in self.functions:
            raise Redeclaration(f"'{name}' is already a function", pos)
        scope[name] = info

    def lookup(self, name: str, pos):
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        raise UndeclaredVariable(f"'{name}' is not declared", pos)

    # -- types --
    def resolve(self, spec: A.TypeSpec, pointer: bool = False, array_len: int | None = None) -> Ty:
        if spec.is_typedef_name:
            base = self.typedefs[spec.base]
        elif spec.base == "struct":
            if spec.tag not in self.structs:
                raise UndeclaredVariable(f"struct {spec.tag} is not defined", spec.pos)
            base = Ty("struct", tag=spec.tag)
        elif spec.base == "enum":
            if spec.tag not in self.enums:
                raise UndeclaredVariable(f"enum {spec.tag} is not defined", spec.pos)
            base = Ty("enum", tag=spec.tag)
        else:
            base = Ty(spec.base)
        if pointer:
            if base.kind in ("struct", "ptr", "void"):
                raise UnsupportedConstruct(f"pointers to {base} are not part of MiniC", spec.pos)
            base = ptr_to(base)
        if array_len is not None:
            if base.kind in ("struct", "void", "array"):
                raise UnsupportedConstruct(f"arrays of {base} are not part of MiniC", spec.pos)
            base = Ty("array", elem=base, length=array_len)
        return base

    # -- program --
    def check_program(self, prog: A.Program) -> TypedAst:
        # functions are visible before their definition
        for item in prog.items:
            if isinstance(item, A.FuncDef):
                if item.name in self.functions:
                    raise Redeclaration(f"function '{item.name}' defined twice", item.pos)
                self.functions[item.name] = FuncInfo(item.name, VOID, [], item)
        for item in prog.items:
            if isinstance(item, A.StructDef):
                self.struct_def(item)
            elif isinstance(item, A.EnumDef):
                self.enum_def(item)
            elif isinstance(item, A.TypedefDecl):
                self.typedefs[item.name] = self.resolve(item.spec, item.pointer)
            elif isinstance(item, A.FuncDef):
                self.signature(item)
        for i, item in enumerate(prog.items):
            if isinstance(item, A.FuncDef):
                self.function(item)
            elif isinstance(item, A.Stmt):
                prog.items[i] = self.stmt(item)
        return TypedAst(prog, self.globals, self.functions, self.structs)

    def struct_def(self, node: A.StructDef) -> None:
        if node.name in self.structs:
            raise Redeclaration(f"struct {node.name} defined twice", node.pos)
        fields = []
        seen = set()
        for f in node.fields:
            t = self.resolve(f.spec, f.pointer, f.array_len)
            if not t.is_scalar:
                raise UnsupportedConstruct(f"struct field {f.name} must be a scalar", f.pos)
            if f.name in seen:
                raise Redeclaration(f"field {f.name} repeated", f.pos)
            seen.add(f.name)
            fields.append((f.name, t))
        self.structs[node.name] = fields

    def enum_def(self, node: A.EnumDef) -> None:
        if node.name in self.enums:
            raise Redeclaration(f"enum {node.name} defined twice", node.pos)
        self.enums[node.name] = dict(node.members)
        for name, value in node.members:
            self.declare(name, EnumConst(name, value, node.name), node.pos)

    def signature(self, node: A.FuncDef) -> None:
        info = self.functions[node.name]
        info.ret = self.resolve(node.ret, node.ret_pointer)
        if info.ret.kind == "struct":
            raise UnsupportedConstruct("functions cannot return structs", node.pos)
        for p in node.params:
            t = self.resolve(p.spec, p.pointer)
            if not t.is_scalar:
                raise UnsupportedConstruct(f"parameter {p.name} must be a scalar or pointer", p.pos)
            info.params.append(
                VarInfo(p.name, t, "param", node.name, const="const" in p.spec.qualifiers, decl=p)
            )

    def function(self, node: A.FuncDef) -> None:
        info = self.functions[node.name]
        self.func = info
        self.scopes.append({})
        for v in info.params:
            self.declare(v.name, v, v.decl.pos)
        node.body = self.stmt(node.body)
        self.scopes.pop()
        self.func = None

    # -- statements --
    def stmt(self, s: A.Stmt) -> A.Stmt:
        if isinstance(s, A.Block):
            self.scopes.append({})
            s.stmts = [self.stmt(x) for x in s.stmts]
            self.scopes.pop()
            return s
        if isinstance(s, A.DeclStmt):
            for d in s.decls:
                self.var_decl(d)
            return s
        if isinstance(s, A.Assign):
            return self.assign(s)
        if isinstance(s, A.IncDec):
            one = A.IntLit(1, pos=s.pos)
            return self.assign(A.Assign(s.target, "+=" if s.op == "++" else "-=", one, pos=s.pos))
        if isinstance(s, A.If):
            s.cond = self.condition(s.cond)
            s.then = self.scoped(s.then)
            if s.orelse is not None:
                s.orelse = self.scoped(s.orelse)
            return s
        if isinstance(s, A.While):
            s.cond = self.condition(s.cond)
            self.loop_depth += 1
            s.body = self.scoped(s.body)
            self.loop_depth -= 1
            return s
        if isinstance(s, A.For):
            self.scopes.append({})
            if s.init is not None:
                s.init = self.stmt(s.init)
            if s.cond is not None:
                s.cond = self.condition(s.cond)
            if s.step is not None:
                s.step = self.stmt(s.step)
            self.loop_depth += 1
            s.body = self.scoped(s.body)
            self.loop_depth -= 1
            self.scopes.pop()
            return s
        if isinstance(s, A.Return):
            if self.func is None:
                raise UnsupportedConstruct("return outside a function", s.pos)
            ret = self.func.ret
            if s.value is None:
                if ret.kind != "void":
                    raise InvalidOperands(f"{self.func.name} must return a {ret}", s.pos)
            else:
                if ret.kind == "void":
                    raise InvalidOperands(f"{self.func.name} returns void", s.pos)
                s.value = self.coerce(self.expr(s.value), ret)
            return s
        if isinstance(s, (A.Break, A.Continue)):
            if self.loop_depth == 0:
                raise InvalidOperands(f"{type(s).__name__.lower()} outside a loop", s.pos)
            return s
        if isinstance(s, A.Delete):
            s.target = self.value(self.expr(s.target))
            if s.target.ty.kind != "ptr":
                raise InvalidOperands("delete needs a pointer", s.pos)
            return s
        if isinstance(s, A.ExprStmt):
            if isinstance(s.expr, A.Call):
                s.expr = self.call(s.expr, allow_void=True)
            else:
                s.expr = self.expr(s.expr)
            return s
        if isinstance(s, A.Empty):
            return s
        raise UnsupportedConstruct(f"unexpected statement {type(s).__name__}", s.pos)

    def scoped(self, s: A.Stmt) -> A.Stmt:
        self.scopes.append({})
        out = self.stmt(s)
        self.scopes.pop()
        return out

    def var_decl(self, d: A.VarDecl) -> None:
        t = self.resolve(d.spec, d.pointer, d.array_len)
        if t.kind == "void":
            raise InvalidOperands(f"variable {d.name} cannot be void", d.pos)
        quals = d.spec.qualifiers
        # only file-scope declarations are program outputs
        storage = "global" if self.func is None and len(self.scopes) == 1 else "local"
        info = VarInfo(
            d.name,
            t,
            storage,
            self.func.name if self.func else None,
            const="const" in quals,
            static="static" in quals,
            unsigned="unsigned" in quals,
            decl=d,
        )
        if d.init is not None:
            if t.kind == "array":
                if not isinstance(d.init, list):
                    raise InvalidOperands(f"array {d.name} needs an initializer list", d.pos)
                if len(d.init) > t.length:
                    raise InvalidOperands(f"too many initializers for {d.name}", d.pos)
                d.init = [self.coerce(self.expr(e), t.elem) for e in d.init]
            elif t.kind == "struct":
                raise UnsupportedConstruct("struct initializers are not part of MiniC", d.pos)
            else:
                if isinstance(d.init, list):
                    raise InvalidOperands(f"{d.name} is not an array", d.pos)
                d.init = self.coerce(self.expr(d.init), t)
        self.declare(d.name, info, d.pos)
        d.info = info  # type: ignore[attr-defined]
        if storage == "global":
            self.globals.append(info)

    def assign(self, s: A.Assign) -> A.Stmt:
        reread = copy.deepcopy(s.target) if s.op != "=" else None
        target = self.lvalue(s.target)
        if s.op != "=":
            value = s.value
            # literal steps on char stay char (c += 1 is ADD.ch, not a widening)
            if target.ty.kind == "char" and isinstance(value, A.IntLit) and 0 <= value.value <= 255:
                value = A.CharLit(value.value, pos=value.pos)
            rhs = A.Binary(s.op[:-1], reread, value, pos=s.pos)
            s.value = self.coerce(self.expr(rhs), target.ty)
            s.op = "="
        else:
            s.value = self.coerce(self.expr(s.value), target.ty)
        s.target = target
        return s

    def lvalue(self, e: A.Expr) -> A.Expr:
        if isinstance(e, A.Name):
            e = self.expr(e)
            info = e.ref
            if not isinstance(info, VarInfo):
                raise NotAssignable(f"'{e.id}' is not a variable", e.pos)
            if info.const:
                raise NotAssignable(f"'{e.id}' is const", e.pos)
            if info.ty.kind in ("array", "struct"):
                raise NotAssignable(f"cannot assign to the whole of '{e.id}'", e.pos)
            return e
        if isinstance(e, (A.Index, A.Field)) or (isinstance(e, A.Unary) and e.op == "*"):
            e = self.expr(e)
            if isinstance(e, A.Field) and e.base.ref.const:
                raise NotAssignable(f"'{e.base.id}' is const", e.pos)
            if isinstance(e, A.Index) and isinstance(e.base, A.Name) and e.base.ref.const:
                raise NotAssignable(f"'{e.base.id}' is const", e.pos)
            return e
        raise NotAssignable("left side of assignment is not assignable", e.pos)

    def condition(self, e: A.Expr) -> A.Expr:
        e = self.value(self.expr(e))
        if not e.ty.is_scalar:
            raise InvalidOperands(f"condition of type {e.ty}", e.pos)
        return e

    # -- expressions --
    def value(self, e: A.Expr) -> A.Expr:
        """Array names decay to pointers when used as values."""
        if e.ty.kind == "array":
            addr = A.Unary("&", A.Index(e, _literal_of(0, INT, e.pos), pos=e.pos), pos=e.pos)
            addr.operand.ty = e.ty.elem
            addr.ty = ptr_to(e.ty.elem)
            return addr
        return e

    def expr(self, e: A.Expr) -> A.Expr:
        if isinstance(e, A.IntLit):
            e.ty = LONG if e.is_long or not -(2**31) <= e.value < 2**31 else INT
            return e
        if isinstance(e, A.FloatLit):
            e.ty = FLOAT if e.is_float else DOUBLE
            e.value = normalize(e.value, e.ty.vtype)
            return e
        if isinstance(e, A.CharLit):
            e.ty = CHAR
            return e
        if isinstance(e, A.Name):
            info = self.lookup(e.id, e.pos)
            e.ref = info
            e.ty = Ty("enum", tag=info.tag) if isinstance(info, EnumConst) else info.ty
            return e
        if isinstance(e, A.Index):
            e.base = self.expr(e.base)
            if e.base.ty.kind not in ("array", "ptr"):
                raise InvalidOperands(f"cannot index a {e.base.ty}", e.pos)
            e.index = self.index_value(self.expr(e.index))
            e.ty = e.base.ty.elem
            return e
        if isinstance(e, A.Field):
            if not isinstance(e.base, A.Name):
                raise UnsupportedConstruct("field access needs a struct variable", e.pos)
            e.base = self.expr(e.base)
            if e.base.ty.kind != "struct":
                raise InvalidOperands(f"'{e.base.id}' is not a struct", e.pos)
            for name, t in self.structs[e.base.ty.tag]:
                if name == e.name:
                    e.ty = t
                    return e
            raise UndeclaredVariable(f"struct {e.base.ty.tag} has no field {e.name}", e.pos)
        if isinstance(e, A.Unary):
            return self.unary(e)
        if isinstance(e, A.Binary):
            return self.binary(e)
        if isinstance(e, A.Logical):
            e.left = self.condition(e.left)
            e.right = self.condition(e.right)
            e.ty = INT
            return e
        if isinstance(e, A.Call):
            return self.call(e, allow_void=False)
        if isinstance(e, A.New):
            t = self.resolve(e.spec)
            if not (t.is_sdt or t.kind in ("long", "enum")):
                raise UnsupportedConstruct(f"new of {t} is not part of MiniC", e.pos)
            e.count = self.index_value(self.expr(e.count))
            e.ty = ptr_to(t)
            return e
        raise UnsupportedConstruct(f"unexpected expression {type(e).__name__}", e.pos)

    def index_value(self, e: A.Expr) -> A.Expr:
        e = self.value(e)
        if e.ty.kind not in ("char", "int"):
            raise InvalidOperands(f"index or count must be char or int, got {e.ty}", e.pos)
        return self.coerce(e, INT)

    def unary(self, e: A.Unary) -> A.Expr:
        if e.op == "&":
            inner = self.expr(e.operand)
            if isinstance(inner, A.Name):
                if not isinstance(inner.ref, VarInfo) or not inner.ty.is_scalar:
                    raise InvalidOperands(f"cannot take the address of '{inner.id}'", e.pos)
                if inner.ty.kind == "ptr":
                    raise UnsupportedConstruct("pointers to pointers are not part of MiniC", e.pos)
                inner.ref.address_taken = True
            elif isinstance(inner, A.Field):
                inner.base.ref.address_taken = True
            elif not isinstance(inner, A.Index):
                raise InvalidOperands("operand of & must be a variable or element", e.pos)
            if inner.ty.kind == "ptr":
                raise UnsupportedConstruct("pointers to pointers are not part of MiniC", e.pos)
            e.operand = inner
            e.ty = ptr_to(inner.ty)
            return e
        inner = self.value(self.expr(e.operand))
        t = inner.ty
        if e.op == "*":
            if t.kind != "ptr":
                raise InvalidOperands(f"cannot dereference a {t}", e.pos)
            e.operand = inner
            e.ty = t.elem
            return e
        if e.op == "!":
            if not t.is_scalar:
                raise InvalidOperands(f"'!' on a {t}", e.pos)
            e.operand = inner
            e.ty = INT
            return e
        if e.op == "-":
            if _is_literal(inner):
                return _literal_of(-inner.value, inner.ty, e.pos)
            if not (t.is_sdt or t.kind in ("long", "enum")):
                raise NonSdtArithmetic(f"unary minus on a {t}", e.pos)
            e.operand = inner
            e.ty = LONG if t.kind == "enum" else t
            return e
        if e.op == "~":
            if not t.is_integral:
                raise InvalidOperands(f"'~' on a {t}", e.pos)
            e.operand = inner
            e.ty = LONG if t.kind == "enum" else t
            return e
        raise UnsupportedConstruct(f"unary {e.op}", e.pos)

    def binary(self, e: A.Binary) -> A.Expr:
        left = self.value(self.expr(e.left))
        right = self.value(self.expr(e.right))
        lt, rt = left.ty, right.ty
        op = e.op
        if lt.kind in ("struct", "void", "array") or rt.kind in ("struct", "void", "array"):
            raise NonSdtArithmetic(f"'{op}' on {lt} and {rt}", e.pos)
        # pointer arithmetic and comparison
        if lt.kind == "ptr" or rt.kind == "ptr":
            if op in ("+", "-") and lt.kind == "ptr" and rt.kind in ("char", "int"):
                e.left, e.right, e.ty = left, self.coerce(right, INT), lt
                return e
            if op == "+" and rt.kind == "ptr" and lt.kind in ("char", "int"):
                e.left, e.right, e.ty = right, self.coerce(left, INT), rt
                return e
            if op in COMPARISONS:
                if lt == rt:
                    e.left, e.right, e.ty = left, right, INT
                    return e
                if lt.kind == "ptr" and isinstance(right, A.IntLit) and right.value == 0:
                    e.left, e.right, e.ty = left, _literal_of(0, lt, right.pos), INT
                    return e
                if rt.kind == "ptr" and isinstance(left, A.IntLit) and left.value == 0:
                    e.left, e.right, e.ty = _literal_of(0, rt, left.pos), right, INT
                    return e
            raise NonSdtArithmetic(f"'{op}' on {lt} and {rt}", e.pos)
        if op in _BITWISE and not (lt.is_integral and rt.is_integral):
            raise InvalidOperands(f"'{op}' needs integer operands, got {lt} and {rt}", e.pos)
        # long and enum stay on the traditional lane
        if lt.kind in ("long", "enum") or rt.kind in ("long", "enum"):
            if not (lt.is_integral and rt.is_integral):
                raise NonSdtArithmetic(f"'{op}' mixes {lt} with {rt}", e.pos)
            e.left, e.right = self.coerce(left, LONG), self.coerce(right, LONG)
            e.ty = INT if op in COMPARISONS else LONG
            return e
        common = result_type("+", lt, rt)
        e.left, e.right = self.coerce(left, common), self.coerce(right, common)
        e.ty = result_type(op, lt, rt)
        return e

    def call(self, e: A.Call, allow_void: bool) -> A.Expr:
        info = self.functions.get(e.name)
        if info is None:
            raise UndeclaredVariable(f"function '{e.name}' is not defined", e.pos)
        if len(e.args) != len(info.params):
            raise ArityMismatch(f"{e.name} takes {len(info.params)} arguments, got {len(e.args)}", e.pos)
        e.args = [self.coerce(self.value(self.expr(a)), p.ty) for a, p in zip(e.args, info.params)]
        if info.ret.kind == "void" and not allow_void:
            raise InvalidOperands(f"{e.name} returns no value", e.pos)
        e.ty = info.ret
        return e

    # -- conversions --
    def coerce(self, e: A.Expr, target: Ty) -> A.Expr:
        e = self.value(e)
        src = e.ty
        if src == target:
            return e
        if _is_literal(e) and target.kind in ("char", "int", "float", "double", "long", "enum"):
            return _literal_of(convert(e.value, _lit_vtype(e), target.vtype), target, e.pos)
        if src.kind in ("long", "enum") and target.kind in ("long", "enum"):
            if src.kind == target.kind == "enum" and src.tag != target.tag:
                raise InvalidOperands(f"cannot assign {src} to {target}", e.pos)
            # same representation, only the static type changes
            e.ty = target
            return e
        if src.kind == "ptr" and target.kind == "ptr":
            raise InvalidOperands(f"cannot convert {src} to {target}", e.pos)
        if target.kind == "ptr" and isinstance(e, A.IntLit) and e.value == 0:
            return _literal_of(0, target, e.pos)
        if not (src.is_scalar and target.is_scalar) or "ptr" in (src.kind, target.kind):
            raise InvalidOperands(f"cannot convert {src} to {target}", e.pos)
        chain = widening_chain(src, target)
        if chain is not None:
            for step in chain:
                e = A.Convert(e, False, pos=e.pos)
                e.ty = step
            return e
        out = A.Convert(e, True, pos=e.pos)
        out.ty = target
        return out


def type_check(program: A.Program) -> TypedAst:
    """Resolve names, insert conversions, annotate every expression with its type."""
    return Checker().check_program(program)
