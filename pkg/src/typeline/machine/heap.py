"""Object heap behind OBJ.n / OBJ.r."""

from __future__ import annotations

from bisect import bisect_right

from ..semantics import Trap

HEAP_BASE = 1 << 24
_HEAP_LIMIT = (1 << 31) - 1


class HeapError(Trap):
    pass


class ZeroSizeAllocation(HeapError):
    pass


class DoubleFree(HeapError):
    pass


class UnknownHandle(HeapError):
    pass


class HeapExhausted(HeapError):
    pass


class ObjectHeap:
    """Bump allocator with byte accounting.

    A handle is the word address of the object's first slot. Every object
    reserves one word per byte of its size, so any element type fits, and
    the next handle always lies past every earlier object: handles are never
    reused.
    """

    def __init__(self, base: int = HEAP_BASE):
        self.base = base
        self.next_handle = base
        self.live: dict[int, int] = {}  # handle -> size in bytes
        self.released: set[int] = set()
        self.live_bytes = 0
        self.peak_bytes = 0
        self.alloc_count = 0
        self.release_count = 0
        self._bases: list[int] = []
        self._sizes: list[int] = []

    def new(self, size: int) -> int:
        if size <= 0:
            raise ZeroSizeAllocation(f"object size must be positive, got {size}")
        h = self.next_handle
        if h + size > _HEAP_LIMIT:
            raise HeapExhausted("heap address space exhausted")
        self.next_handle = h + size
        self.live[h] = size
        self._bases.append(h)
        self._sizes.append(size)
        self.live_bytes += size
        self.peak_bytes = max(self.peak_bytes, self.live_bytes)
        self.alloc_count += 1
        return h

    def release(self, handle: int) -> None:
        size = self.live.pop(handle, None)
        if size is None:
            if handle in self.released:
                raise DoubleFree(f"handle {handle} released twice")
            raise UnknownHandle(f"handle {handle} was never allocated")
        self.released.add(handle)
        self.live_bytes -= size
        self.release_count += 1

    def owner(self, addr: int) -> int | None:
        """Handle of the live object containing word ``addr``."""
        k = bisect_right(self._bases, addr) - 1
        if k < 0:
            return None
        h = self._bases[k]
        if addr < h + self._sizes[k] and h in self.live:
            return h
        return None

    def stats(self) -> dict:
        return {
            "live_objects": len(self.live),
            "live_bytes": self.live_bytes,
            "peak_bytes": self.peak_bytes,
            "alloc_count": self.alloc_count,
            "release_count": self.release_count,
        }


def obj_new(state, size: int) -> int:
    return state.heap.new(size)


def obj_release(state, handle: int):
    size = state.heap.live.get(handle, 0)
    state.heap.release(handle)
    state.memory.forget(handle, size)
    return state
