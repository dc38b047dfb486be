"""MiniC syntax tree."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

Pos = tuple  # (line, col)


@dataclass
class Node:
    pos: Pos = field(default=(0, 0), kw_only=True)


@dataclass
class TypeSpec(Node):
    base: str  # int float double long char void struct enum, or a typedef name
    tag: Optional[str] = None  # struct/enum tag
    qualifiers: tuple = ()  # subset of static, const, unsigned
    is_typedef_name: bool = False


# ---- expressions ----------------------------------------------------------


@dataclass
class Expr(Node):
    # filled in by the type checker
    ty: object = field(default=None, kw_only=True, compare=False)


@dataclass
class IntLit(Expr):
    value: int
    is_long: bool = False


@dataclass
class FloatLit(Expr):
    value: float
    is_float: bool = False  # 1.5f


@dataclass
class CharLit(Expr):
    value: int


@dataclass
class Name(Expr):
    id: str
    # resolved declaration, set by the type checker
    ref: object = field(default=None, kw_only=True, compare=False)


@dataclass
class Index(Expr):
    base: Expr
    index: Expr


@dataclass
class Field(Expr):
    base: Expr
    name: str


@dataclass
class Unary(Expr):
    op: str  # - ! ~ * &
    operand: Expr


@dataclass
class Binary(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass
class Logical(Expr):
    op: str  # && ||
    left: Expr
    right: Expr


@dataclass
class Call(Expr):
    name: str
    args: list


@dataclass
class New(Expr):
    spec: TypeSpec
    count: Expr


@dataclass
class Convert(Expr):
    """Conversion inserted by the type checker.

    ``traditional`` marks conversions outside the widening chain
    char->int->float->double (they run on the traditional lane).
    """

    expr: Expr
    traditional: bool = False


# ---- statements -----------------------------------------------------------


@dataclass
class Stmt(Node):
    pass


@dataclass
class VarDecl(Stmt):
    spec: TypeSpec
    name: str
    pointer: bool = False
    array_len: Optional[int] = None  # -1: size taken from the initializer
    init: Union[Expr, list, None] = None


@dataclass
class DeclStmt(Stmt):
    decls: list


@dataclass
class Block(Stmt):
    stmts: list


@dataclass
class If(Stmt):
    cond: Expr
    then: Stmt
    orelse: Optional[Stmt] = None


@dataclass
class For(Stmt):
    init: Optional[Stmt]
    cond: Optional[Expr]
    step: Optional[Stmt]
    body: Stmt


@dataclass
class While(Stmt):
    cond: Expr
    body: Stmt


@dataclass
class Return(Stmt):
    value: Optional[Expr] = None


@dataclass
class Break(Stmt):
    pass


@dataclass
class Continue(Stmt):
    pass


@dataclass
class ExprStmt(Stmt):
    expr: Expr


@dataclass
class Assign(Stmt):
    target: Expr
    op: str  # = += -= *= /= %= &= |= ^= <<= >>=
    value: Expr


@dataclass
class IncDec(Stmt):
    target: Expr
    op: str  # ++ --


@dataclass
class Delete(Stmt):
    target: Expr


@dataclass
class Empty(Stmt):
    pass


# ---- top level ------------------------------------------------------------


@dataclass
class StructDef(Node):
    name: str
    fields: list  # VarDecl


@dataclass
class EnumDef(Node):
    name: str
    members: list  # (name, value)


@dataclass
class TypedefDecl(Node):
    name: str
    spec: TypeSpec
    pointer: bool = False


@dataclass
class Param(Node):
    spec: TypeSpec
    name: str
    pointer: bool = False


@dataclass
class FuncDef(Node):
    name: str
    ret: TypeSpec
    params: list
    body: Block
    ret_pointer: bool = False


@dataclass
class Program(Node):
    items: list  # StructDef | EnumDef | TypedefDecl | FuncDef | Stmt


def walk(node):
    """Yield ``node`` and every node below it, depth first in source order."""
    if isinstance(node, list):
        for x in node:
            yield from walk(x)
        return
    if not isinstance(node, Node):
        return
    yield node
    for name in node.__dataclass_fields__:
        if name in ("pos", "ty", "spec", "ret", "ref"):
            continue
        value = getattr(node, name)
        if isinstance(value, (Node, list)):
            yield from walk(value)
