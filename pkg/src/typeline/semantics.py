"""Value types and the arithmetic both executors share.

The TYPELINE simulator and the sequential baseline call the same routines
here, so their results agree bit for bit (floats included).
"""

from __future__ import annotations

import enum
import math

import numpy as np

from .isa import SdtKind


class VType(enum.Enum):
    CHAR = "char"
    INT = "int"
    FLOAT = "float"
    DOUBLE = "double"
    LONG = "long"  # also carries enum values
    PTR = "ptr"

    @property
    def lane(self) -> SdtKind | None:
        """Register file holding values of this type (None: ``t`` registers)."""
        return _LANE[self]

    @property
    def sdt(self) -> SdtKind | None:
        """The significant datatype, or None for types the TEUs do not own."""
        return _SDT.get(self)

    @classmethod
    def of_sdt(cls, kind: SdtKind) -> "VType":
        return _OF_SDT[kind]


_SDT = {VType.CHAR: SdtKind.CHAR, VType.INT: SdtKind.INT, VType.FLOAT: SdtKind.FLOAT, VType.DOUBLE: SdtKind.DOUBLE}
_OF_SDT = {v: k for k, v in _SDT.items()}
_LANE = dict(_SDT)
_LANE[VType.LONG] = None
_LANE[VType.PTR] = SdtKind.INT

LANE_VTYPE: dict[SdtKind | None, VType] = {
    SdtKind.CHAR: VType.CHAR,
    SdtKind.INT: VType.INT,
    SdtKind.FLOAT: VType.FLOAT,
    SdtKind.DOUBLE: VType.DOUBLE,
    None: VType.LONG,
}


class Trap(Exception):
    """Base class for runtime faults of either executor."""


class IntDivisionByZero(Trap):
    pass


def wrap32(v: int) -> int:
    v &= 0xFFFFFFFF
    return v - (1 << 32) if v & 0x80000000 else v


def wrap64(v: int) -> int:
    v &= 0xFFFFFFFFFFFFFFFF
    return v - (1 << 64) if v & (1 << 63) else v


def to_f32(v: float | int) -> float:
    with np.errstate(all="ignore"):
        return float(np.float32(v))


def normalize(v, vt: VType):
    """Coerce an externally supplied number into a value of type ``vt``."""
    if vt is VType.FLOAT:
        return to_f32(v)
    if vt is VType.DOUBLE:
        return float(v)
    if vt is VType.CHAR:
        return int(v) & 0xFF
    if vt is VType.LONG:
        return wrap64(int(v))
    return wrap32(int(v))


def zero(vt: VType):
    return 0.0 if vt in (VType.FLOAT, VType.DOUBLE) else 0


def _int_div(a: int, b: int) -> int:
    if b == 0:
        raise IntDivisionByZero("integer division by zero")
    q = abs(a) // abs(b)
    return q if (a < 0) == (b < 0) else -q


def _int_rem(a: int, b: int) -> int:
    return a - _int_div(a, b) * b


def _wrap_for(vt: VType):
    if vt is VType.CHAR:
        return lambda v: v & 0xFF
    if vt is VType.LONG:
        return wrap64
    return wrap32


def _shift_mask(vt: VType) -> int:
    return {VType.CHAR: 7, VType.LONG: 63}.get(vt, 31)


def _width_mask(vt: VType) -> int:
    return {VType.CHAR: 0xFF, VType.LONG: 0xFFFFFFFFFFFFFFFF}.get(vt, 0xFFFFFFFF)


def alu(stem: str, vt: VType, a, b):
    """Binary operation ``stem`` (ADD, SUB, ... SHR) on two values of type ``vt``."""
    if vt in (VType.FLOAT, VType.DOUBLE):
        with np.errstate(all="ignore"):
            return _float_alu(stem, vt, a, b)
    return _int_alu(stem, vt, a, b)


def _float_alu(stem: str, vt: VType, a, b):
    if vt is VType.FLOAT:
        x, y = np.float32(a), np.float32(b)
        if stem == "ADD":
            return float(x + y)
        if stem == "SUB":
            return float(x - y)
        if stem == "MUL":
            return float(x * y)
        if stem == "DIV":
            return float(x / y)
        raise ValueError(f"{stem} is not defined on float")
    if vt is VType.DOUBLE:
        x, y = np.float64(a), np.float64(b)
        if stem == "ADD":
            return float(x + y)
        if stem == "SUB":
            return float(x - y)
        if stem == "MUL":
            return float(x * y)
        if stem == "DIV":
            return float(x / y)
        raise ValueError(f"{stem} is not defined on double")


def _int_alu(stem: str, vt: VType, a, b):
    wrap = _wrap_for(vt)
    if stem == "ADD":
        return wrap(a + b)
    if stem == "SUB":
        return wrap(a - b)
    if stem == "MUL":
        return wrap(a * b)
    if stem == "DIV":
        return wrap(_int_div(a, b))
    if stem == "REM":
        return wrap(_int_rem(a, b))
    if stem == "AND":
        return wrap(a & b)
    if stem == "OR":
        return wrap(a | b)
    if stem == "XOR":
        return wrap(a ^ b)
    if stem == "NOR":
        return wrap(~(a | b))
    if stem == "XNOR":
        return wrap(~(a ^ b))
    sh = b & _shift_mask(vt)
    if stem == "SHL":
        return wrap(a << sh)
    if stem in ("SRA", "SHR"):
        return wrap(a >> sh)
    if stem == "SRL":
        return wrap((a & _width_mask(vt)) >> sh)
    raise ValueError(f"unknown ALU operation {stem}")


def compare(cond: str, a, b) -> bool:
    if cond == "eq":
        return a == b
    if cond == "ne":
        return a != b
    if cond == "lt":
        return a < b
    if cond == "le":
        return a <= b
    if cond == "gt":
        return a > b
    if cond == "ge":
        return a >= b
    raise ValueError(cond)


def truth(vt: VType, flag: bool):
    """A comparison result stored in a register of type ``vt``."""
    if vt in (VType.FLOAT, VType.DOUBLE):
        return 1.0 if flag else 0.0
    return 1 if flag else 0


def is_true(v) -> bool:
    return v != 0 or (isinstance(v, float) and math.isnan(v))


def _float_to_int(v: float, wrap) -> int:
    if math.isnan(v) or math.isinf(v):
        return 0
    return wrap(int(v))


def convert(v, src: VType, dst: VType):
    """Numeric conversion from ``src`` to ``dst`` (C-style truncation for narrowing)."""
    if src is dst:
        return v
    if dst is VType.FLOAT:
        return to_f32(v)
    if dst is VType.DOUBLE:
        return float(v)
    wrap = {VType.CHAR: lambda x: x & 0xFF, VType.LONG: wrap64}.get(dst, wrap32)
    if src in (VType.FLOAT, VType.DOUBLE):
        return _float_to_int(v, wrap)
    return wrap(v)
