"""Small hand-built IR programs shared by several test modules."""

from typeline.frontend.ir import LOAD, Block, Halt, IROp, IRProgram, VReg
from typeline.isa import Symbol
from typeline.semantics import VType


def independent_loads(n: int, vt: VType = VType.INT) -> IRProgram:
    """One block of ``n`` loads from distinct globals, nothing else."""
    ops = [IROp(LOAD, vt, VReg(i, vt), sym=f"g{i}") for i in range(n)]
    symbols = tuple(Symbol(f"g{i}", vt.value, 16 + i, 1) for i in range(n))
    return IRProgram([Block(0, ops, Halt())], symbols)
