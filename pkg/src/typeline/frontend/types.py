"""MiniC types and the promotion lattice."""

from __future__ import annotations

from dataclasses import dataclass

from ..isa import SdtKind
from ..semantics import VType

SDT_NAMES = ("char", "int", "float", "double")
_RANK = {name: i for i, name in enumerate(SDT_NAMES)}
COMPARISONS = frozenset({"==", "!=", "<", "<=", ">", ">="})


@dataclass(frozen=True)
class Ty:
    kind: str  # char int float double long enum ptr struct void array
    elem: "Ty | None" = None
    tag: str | None = None
    length: int | None = None

    def __str__(self) -> str:
        if self.kind == "ptr":
            return f"{self.elem}*"
        if self.kind == "array":
            return f"{self.elem}[{self.length}]"
        if self.kind in ("struct", "enum"):
            return f"{self.kind} {self.tag}"
        return self.kind

    @property
    def is_sdt(self) -> bool:
        return self.kind in _RANK

    @property
    def is_integral(self) -> bool:
        return self.kind in ("char", "int", "long", "enum")

    @property
    def is_scalar(self) -> bool:
        return self.kind in ("char", "int", "float", "double", "long", "enum", "ptr")

    @property
    def sdt(self) -> SdtKind | None:
        return _SDT_OF.get(self.kind)

    @property
    def vtype(self) -> VType:
        """Runtime value type; raises for aggregates."""
        try:
            return _VTYPE_OF[self.kind]
        except KeyError:
            raise ValueError(f"{self} has no scalar runtime representation") from None


CHAR = Ty("char")
INT = Ty("int")
FLOAT = Ty("float")
DOUBLE = Ty("double")
LONG = Ty("long")
VOID = Ty("void")

_SDT_OF = {"char": SdtKind.CHAR, "int": SdtKind.INT, "float": SdtKind.FLOAT, "double": SdtKind.DOUBLE}
_VTYPE_OF = {
    "char": VType.CHAR,
    "int": VType.INT,
    "float": VType.FLOAT,
    "double": VType.DOUBLE,
    "long": VType.LONG,
    "enum": VType.LONG,
    "ptr": VType.PTR,
}
_OF_SDT = {SdtKind.CHAR: CHAR, SdtKind.INT: INT, SdtKind.FLOAT: FLOAT, SdtKind.DOUBLE: DOUBLE}


def of_sdt(kind: SdtKind) -> Ty:
    return _OF_SDT[kind]


def ptr_to(t: Ty) -> Ty:
    return Ty("ptr", elem=t)


def result_type(op: str, left, right):
    """Type of ``left op right`` for significant data types.

    The result is the larger operand under char < int < float < double;
    comparisons yield int. Accepts ``Ty`` or ``SdtKind`` operands and
    answers in the same form.
    """
    as_kind = isinstance(left, SdtKind) and isinstance(right, SdtKind)
    if as_kind:
        left, right = of_sdt(left), of_sdt(right)
    if not (left.is_sdt and right.is_sdt):
        raise ValueError(f"result_type is defined on char/int/float/double, got {left} and {right}")
    if op in COMPARISONS:
        out = INT
    else:
        out = left if _RANK[left.kind] >= _RANK[right.kind] else right
    return out.sdt if as_kind else out


def widening_chain(src: Ty, dst: Ty) -> list[Ty] | None:
    """Intermediate targets converting ``src`` up to ``dst``, or None if not a widening.

    Only the steps char->int, int->float, int->double and float->double exist,
    so char reaches float or double through int.
    """
    if not (src.is_sdt and dst.is_sdt) or _RANK[src.kind] >= _RANK[dst.kind]:
        return None
    chain: list[Ty] = []
    cur = src
    if cur.kind == "char":
        cur = INT
        chain.append(INT)
    if cur.kind == dst.kind:
        return chain
    if cur.kind == "int" and dst.kind in ("float", "double"):
        chain.append(dst)
        return chain
    chain.append(dst)  # float -> double
    return chain
