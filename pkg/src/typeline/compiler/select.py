"""Instruction selection: which mnemonic executes each IR op.

Shared by the compiler and the sequential baseline so both charge the same
scalar cost for every op.
"""

from __future__ import annotations

from ..frontend.ir import BIN, CMP, CONST, CONV, LEA, LOAD, MOV, NEW, RELEASE, STORE, IROp
from ..isa import CONV_DIRECTIONS, BaseOp, CostTable, Opcode, SdtKind, instruction_cost, Instruction
from ..semantics import VType

ALL_LANES = frozenset(SdtKind)

# stems each typed lane implements
_LANE_STEMS = {
    SdtKind.INT: frozenset("ADD SUB MUL DIV AND OR XOR NOR XNOR SRA SRL".split()),
    SdtKind.CHAR: frozenset("ADD SUB AND OR XOR NOR XNOR".split()),
    SdtKind.FLOAT: frozenset("ADD SUB MUL DIV".split()),
    SdtKind.DOUBLE: frozenset("ADD SUB MUL".split()),
}
_INT_COMPARE = {"eq": "CMPE", "ge": "CMPEG", "le": "CMPEs", "lt": "CMPS"}
_TRAD_STEM = {"SRA": "SHR", "SRL": "SHR", "XNOR": "XOR"}


def _op(name: str):
    return Opcode(name) if not name.startswith("T.") else BaseOp(name)


def typed_lane(op: IROp, lanes: frozenset = ALL_LANES) -> SdtKind | None:
    """Lane whose TEU runs ``op``, or None when it goes to the traditional lane."""
    k = op.kind
    if k is None or k not in lanes:
        return None
    return k


def is_tcu_conversion(op: IROp, lanes: frozenset = ALL_LANES) -> bool:
    if op.op != CONV or op.src is None:
        return False
    src, dst = op.src.sdt, op.vtype.sdt
    return (src, dst) in CONV_DIRECTIONS and dst in lanes


def select(op: IROp, lanes: frozenset = ALL_LANES):
    """The Opcode or BaseOp that executes ``op``."""
    k = typed_lane(op, lanes)
    name = op.op
    if name in (CONST, MOV):
        return _op(f"MOV.{k.suffix}") if k is not None else BaseOp("T.MOV")
    if name == LOAD:
        return _op(f"LD.{k.suffix}") if k is not None else BaseOp("T.LD")
    if name == STORE:
        return _op(f"ST.{k.suffix}") if k is not None else BaseOp("T.ST")
    if name == BIN:
        if k is not None and op.stem in _LANE_STEMS[k]:
            return _op(f"{op.stem}.{k.suffix}")
        return BaseOp("T." + _TRAD_STEM.get(op.stem, op.stem))
    if name == CMP:
        if k in (SdtKind.INT, SdtKind.CHAR) and op.stem in _INT_COMPARE:
            return _op(f"{_INT_COMPARE[op.stem]}.{k.suffix}")
        if k in (SdtKind.FLOAT, SdtKind.DOUBLE):
            return _op(f"CMP.{k.suffix}")
        return BaseOp("T.CMP")
    if name == CONV:
        if is_tcu_conversion(op, lanes):
            return Opcode("CONV")
        if op.src is VType.CHAR and op.vtype is VType.INT:
            # widening through the data path, no TCU switch needed
            return Opcode("MOV.in")
        return BaseOp("T.CVT")
    if name == NEW:
        return Opcode("OBJ.n")
    if name == RELEASE:
        return Opcode("OBJ.r")
    if name == LEA:
        return BaseOp("T.LEA")
    raise ValueError(f"unknown IR op {name}")


def is_traditional(mnemonic) -> bool:
    return isinstance(mnemonic, BaseOp)


def mnemonic_cost(mnemonic, table: CostTable) -> int:
    return instruction_cost(Instruction(mnemonic), table)


def scalar_cost(op: IROp, table: CostTable, lanes: frozenset = ALL_LANES) -> int:
    """Cycles ``op`` takes when issued alone."""
    return mnemonic_cost(select(op, lanes), table)
