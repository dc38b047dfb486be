"""Data and memory dependences inside one basic block."""

from __future__ import annotations

from typing import Sequence

from ..frontend.ir import LOAD, NEW, RELEASE, STORE, IROp

RAW, WAR, WAW, MEM = "RAW", "WAR", "WAW", "MEM"


def _mem_effect(op: IROp):
    """(kind, symbol) where kind is 'r', 'w' or 'x' (touches the whole heap)."""
    if op.op == LOAD:
        return "r", op.sym
    if op.op == STORE:
        return "w", op.sym
    if op.op in (NEW, RELEASE):
        return "x", None
    return None


def _mem_conflict(a, b) -> bool:
    if a is None or b is None:
        return False
    ka, sa = a
    kb, sb = b
    if ka == "x" or kb == "x":
        return True
    if ka == "r" and kb == "r":
        return False
    # symbol-less accesses go through pointers and may alias anything
    return sa is None or sb is None or sa == sb


def dependence_kinds(a: IROp, b: IROp) -> set[str]:
    """Why ``b`` (later) must stay after ``a`` (earlier); empty when independent."""
    out = set()
    wa, wb = set(a.writes()), set(b.writes())
    ra, rb = set(a.reads()), set(b.reads())
    if wa & rb:
        out.add(RAW)
    if ra & wb:
        out.add(WAR)
    if wa & wb:
        out.add(WAW)
    if _mem_conflict(_mem_effect(a), _mem_effect(b)):
        out.add(MEM)
    return out


def hazards(ops: Sequence[IROp]) -> dict[tuple[int, int], set[str]]:
    """All dependent pairs (i, j), i < j, with the kinds of dependence."""
    n = len(ops)
    effects = [_mem_effect(o) for o in ops]
    writes = [set(o.writes()) for o in ops]
    reads = [set(o.reads()) for o in ops]
    out: dict[tuple[int, int], set[str]] = {}
    for j in range(n):
        for i in range(j):
            kinds = set()
            if writes[i] & reads[j]:
                kinds.add(RAW)
            if reads[i] & writes[j]:
                kinds.add(WAR)
            if writes[i] & writes[j]:
                kinds.add(WAW)
            if _mem_conflict(effects[i], effects[j]):
                kinds.add(MEM)
            if kinds:
                out[(i, j)] = kinds
    return out


def predecessors(ops: Sequence[IROp]) -> list[dict[int, set[str]]]:
    """For each op j, the earlier ops it depends on with the dependence kinds."""
    preds: list[dict[int, set[str]]] = [dict() for _ in ops]
    for (i, j), kinds in hazards(ops).items():
        preds[j][i] = kinds
    return preds
