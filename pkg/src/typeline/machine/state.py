"""Architectural state: register files, control flags, memory and heap."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from ..isa import CONV_DIRECTIONS, NUM_REGISTERS, ConvMask, SdtKind, Symbol
from ..semantics import LANE_VTYPE, Trap, VType, convert as numeric_convert, normalize, zero
from .heap import ObjectHeap

LANES: tuple = (SdtKind.CHAR, SdtKind.INT, SdtKind.FLOAT, SdtKind.DOUBLE, None)


class MemoryFault(Trap):
    pass


class UnboundInput(KeyError):
    """An input names no global variable of the program."""


class ProtectedLane(ValueError):
    """The integer lane cannot be disabled."""


class ConversionDisabled(Trap):
    pass


class UnsupportedConversion(Trap):
    pass


class Memory:
    """Word-addressed memory: static symbols plus live heap objects."""

    def __init__(self, symbols: Iterable[Symbol], heap: ObjectHeap):
        self.heap = heap
        self.words: dict[int, object] = {}
        self.static: set[int] = set()
        self.types: dict[int, VType] = {}
        for s in symbols:
            vt = VType(s.vtype)
            for k in range(s.length):
                a = s.addr + k
                self.static.add(a)
                self.types[a] = vt
                self.words[a] = normalize(s.init[k], vt) if k < len(s.init) else zero(vt)

    def _check(self, addr: int) -> None:
        if addr not in self.static and self.heap.owner(addr) is None:
            raise MemoryFault(f"access to unmapped address {addr}")

    def load(self, addr: int):
        self._check(addr)
        return self.words.get(addr, 0)

    def store(self, addr: int, value) -> None:
        self._check(addr)
        self.words[addr] = value

    def forget(self, handle: int, size: int) -> None:
        """Drop the contents of a released object; its words stay unmapped."""
        for a in range(handle, handle + size):
            self.words.pop(a, None)


@dataclass
class ControlFlags:
    lane_enabled: dict = field(default_factory=lambda: {k: True for k in SdtKind})
    vector_mode: dict = field(default_factory=lambda: {k: False for k in SdtKind})
    vector_length: int | None = None
    parallel_mode: bool = False
    conv_mask: ConvMask = field(default_factory=ConvMask)


class MachineState:
    def __init__(self, symbols: Iterable[Symbol] = ()):
        self.heap = ObjectHeap()
        self.memory = Memory(symbols, self.heap)
        self.regs: dict = {lane: [zero(LANE_VTYPE[lane])] * NUM_REGISTERS for lane in LANES}
        self.flags = ControlFlags()
        self.cycles = 0

    def read(self, lane: SdtKind | None, index: int):
        return self.regs[lane][index]

    def write(self, lane: SdtKind | None, index: int, value) -> None:
        self.regs[lane][index] = normalize(value, LANE_VTYPE[lane])

    def snapshot(self) -> dict:
        name = {None: "t"}
        return {
            (name.get(lane) or lane.reg_prefix): list(vals) for lane, vals in self.regs.items()
        }


def set_line(state: MachineState, lane: SdtKind, enabled: bool) -> MachineState:
    if lane is SdtKind.INT and not enabled:
        raise ProtectedLane("the integer lane is always enabled")
    state.flags.lane_enabled[lane] = enabled
    return state


def convert(value, src: SdtKind, dst: SdtKind, mask: ConvMask):
    """Type-conversion unit: one of the three widening directions, gated by ``mask``."""
    if (src, dst) not in CONV_DIRECTIONS:
        raise UnsupportedConversion(f"the conversion unit cannot convert {src.name} to {dst.name}")
    if not mask.enabled(src, dst):
        raise ConversionDisabled(f"conversion {src.name} to {dst.name} is not enabled by mask {mask}")
    return numeric_convert(value, LANE_VTYPE[src], LANE_VTYPE[dst])
