"""
Object heap: new, release and the errors it catches
===================================================
"""

from typeline.machine import DoubleFree, MachineState, UnknownHandle, obj_new, obj_release
from typeline.pipeline import compare

state = MachineState()
a = obj_new(state, 16)
b = obj_new(state, 8)
print(hex(a), hex(b), state.heap.live_bytes, state.heap.peak_bytes)

obj_release(state, a)
print(state.heap.live_bytes, state.heap.peak_bytes)

for bad in (a, 12345):
    try:
        obj_release(state, bad)
    except (DoubleFree, UnknownHandle) as exc:
        print(type(exc).__name__, exc)

# new/delete in MiniC go through OBJ.n / OBJ.r on the traditional lane
c = compare("int n = 5; int s; int main() { int *p = new int[n]; p[2] = 7; s = p[2]; delete p; return 0; }")
print(c.typeline.heap, c.report.miss_handled_fraction)
