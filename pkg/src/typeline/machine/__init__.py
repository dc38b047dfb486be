"""Cycle-level simulator of the four-lane machine and the sequential baseline."""

from .baseline import run_baseline
from .core import Executor, Issue, StepLimitExceeded, ValidationFailed, exec_issue, issues_of, run
from .heap import DoubleFree, HeapError, HeapExhausted, ObjectHeap, UnknownHandle, ZeroSizeAllocation, obj_new, obj_release
from .state import (
    ConversionDisabled,
    ControlFlags,
    MachineState,
    Memory,
    MemoryFault,
    ProtectedLane,
    UnboundInput,
    UnsupportedConversion,
    convert,
    set_line,
)
from .trace import CONTROL, ISSUE_KINDS, LOAD_CLUSTER, OP_CLUSTER, SCALAR, TRADITIONAL, ExecTrace, IssueRecord, load_jsonl

__all__ = [
    "CONTROL",
    "ISSUE_KINDS",
    "LOAD_CLUSTER",
    "OP_CLUSTER",
    "SCALAR",
    "TRADITIONAL",
    "ControlFlags",
    "ConversionDisabled",
    "DoubleFree",
    "ExecTrace",
    "Executor",
    "HeapError",
    "HeapExhausted",
    "Issue",
    "IssueRecord",
    "MachineState",
    "Memory",
    "MemoryFault",
    "ObjectHeap",
    "ProtectedLane",
    "StepLimitExceeded",
    "UnboundInput",
    "UnknownHandle",
    "UnsupportedConversion",
    "ValidationFailed",
    "ZeroSizeAllocation",
    "convert",
    "exec_issue",
    "issues_of",
    "load_jsonl",
    "obj_new",
    "obj_release",
    "run",
    "run_baseline",
    "set_line",
]
