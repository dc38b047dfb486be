"""Typed three-address intermediate representation.

Ops name virtual registers. Each op carries one value type; ops whose type
is not a significant data type (long, enum, pointers) or that touch struct
fields carry the NonSdt marker (``kind is None``).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Union

from ..isa import SdtKind
from ..semantics import VType


@dataclass(frozen=True)
class VReg:
    id: int
    vtype: VType

    def __str__(self) -> str:
        return f"v{self.id}:{self.vtype.value}"


@dataclass(frozen=True)
class Const:
    value: Union[int, float]
    vtype: VType

    def __str__(self) -> str:
        return f"{self.value!r}:{self.vtype.value}"


Value = Union[VReg, Const]

# op names
CONST = "const"  # dst = immediate
MOV = "mov"  # dst = a
LOAD = "load"  # dst = sym[offset + index]   or  dst = *(a)  when sym is None
STORE = "store"  # sym[offset + index] = a    or  *(b) = a
BIN = "bin"  # dst = a <stem> b
CMP = "cmp"  # dst = a <cond> b  (1/0 in the result's lane)
CONV = "conv"  # dst = convert(a) from src type to vtype
NEW = "new"  # dst = handle of a fresh object of a words
RELEASE = "release"  # release handle a
LEA = "lea"  # dst = address of sym[offset + index]

OP_NAMES = (CONST, MOV, LOAD, STORE, BIN, CMP, CONV, NEW, RELEASE, LEA)


@dataclass(frozen=True)
class IROp:
    op: str
    vtype: VType
    dst: VReg | None = None
    args: tuple = ()
    stem: str | None = None  # ADD SUB ... for bin, condition for cmp
    sym: str | None = None
    offset: int = 0
    index: VReg | None = None
    src: VType | None = None  # conversion source type
    nonsdt: bool = False

    @property
    def kind(self) -> SdtKind | None:
        """SDT of the op, or None for the NonSdt marker."""
        if self.nonsdt:
            return None
        return self.vtype.sdt

    def reads(self) -> list[VReg]:
        out = [a for a in self.args if isinstance(a, VReg)]
        if self.index is not None:
            out.append(self.index)
        return out

    def writes(self) -> list[VReg]:
        return [self.dst] if self.dst is not None else []

    def renamed(self, mapping: dict) -> "IROp":
        if not mapping:
            return self
        g = mapping.get
        return replace(
            self,
            dst=g(self.dst, self.dst) if self.dst is not None else None,
            args=tuple(g(a, a) if isinstance(a, VReg) else a for a in self.args),
            index=g(self.index, self.index) if self.index is not None else None,
        )

    def __str__(self) -> str:
        head = f"{self.dst} = " if self.dst is not None else ""
        what = self.op if self.stem is None else f"{self.op}.{self.stem}"
        where = ""
        if self.sym is not None:
            where = f" {self.sym}[{self.offset}{'+' + str(self.index) if self.index else ''}]"
        args = ", ".join(str(a) for a in self.args)
        tag = " nonsdt" if self.nonsdt else ""
        src = f" from {self.src.value}" if self.src is not None else ""
        return f"{head}{what}.{self.vtype.value}{where} {args}{src}{tag}".rstrip()


@dataclass(frozen=True)
class Jump:
    target: int


@dataclass(frozen=True)
class Branch:
    cond: VReg
    if_true: int
    if_false: int


@dataclass(frozen=True)
class Halt:
    pass


Terminator = Union[Jump, Branch, Halt]


@dataclass
class Block:
    id: int
    ops: list = field(default_factory=list)
    term: Terminator = field(default_factory=Halt)
    loop_depth: int = 0

    def successors(self) -> list[int]:
        t = self.term
        if isinstance(t, Jump):
            return [t.target]
        if isinstance(t, Branch):
            return [t.if_true, t.if_false]
        return []


@dataclass
class IRProgram:
    """Blocks in layout order; the first is the entry, the Halt block is last."""

    blocks: list = field(default_factory=list)
    symbols: tuple = ()

    @property
    def ops(self) -> list[IROp]:
        return [op for b in self.blocks for op in b.ops]

    def block(self, bid: int) -> Block:
        for b in self.blocks:
            if b.id == bid:
                return b
        raise KeyError(bid)

    def dump(self) -> str:
        lines = [f"@sym {s.name} {s.vtype} {s.addr} {s.length} {s.scope}" for s in self.symbols]
        for b in self.blocks:
            lines.append(f"B{b.id} (depth {b.loop_depth}):")
            lines.extend(f"  {op}" for op in b.ops)
            t = b.term
            if isinstance(t, Jump):
                lines.append(f"  jump B{t.target}")
            elif isinstance(t, Branch):
                lines.append(f"  branch {t.cond} B{t.if_true} B{t.if_false}")
            else:
                lines.append("  halt")
        return "\n".join(lines)


def flow_ops(block: Block, next_id: int | None) -> list[tuple]:
    """Branch instructions ending ``block`` when ``next_id`` follows it in layout.

    Returns tuples ("BR", target), ("BZ", cond, target) or ("BNZ", cond, target).
    Both executors use this so they pay for exactly the same branches.
    """
    t = block.term
    if isinstance(t, Jump):
        return [] if t.target == next_id else [("BR", t.target)]
    if isinstance(t, Branch):
        if t.if_false == next_id:
            return [("BNZ", t.cond, t.if_true)]
        if t.if_true == next_id:
            return [("BZ", t.cond, t.if_false)]
        return [("BNZ", t.cond, t.if_true), ("BR", t.if_false)]
    return []
