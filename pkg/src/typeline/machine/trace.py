"""Issue records and execution traces."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..isa import BaseOp, FLOW_OPS, Opcode, is_compute, is_load

LOAD_CLUSTER = "load-cluster"
OP_CLUSTER = "op-cluster"
SCALAR = "scalar"
TRADITIONAL = "traditional"
CONTROL = "control"
ISSUE_KINDS = (LOAD_CLUSTER, OP_CLUSTER, SCALAR, TRADITIONAL, CONTROL)


@dataclass
class IssueRecord:
    cycle_start: int
    cost: int
    kind: str
    member_count: int = 0  # IR operations carried out by this issue
    lanes: tuple = ()  # lane names touched
    load_ops: int = 0
    compute_ops: int = 0
    conv_ops: int = 0
    traditional_ops: int = 0
    note: str = ""

    def to_json(self) -> dict:
        d = asdict(self)
        d["lanes"] = list(self.lanes)
        return d


@dataclass
class ExecTrace:
    records: list = field(default_factory=list)
    outputs: dict = field(default_factory=dict)
    registers: dict = field(default_factory=dict)
    memory: dict = field(default_factory=dict)
    heap: dict = field(default_factory=dict)

    @property
    def cycles(self) -> int:
        return sum(r.cost for r in self.records)

    @property
    def total_ops(self) -> int:
        return sum(r.member_count for r in self.records if r.kind != CONTROL)

    def dump_jsonl(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for r in self.records:
                fh.write(json.dumps(r.to_json()) + "\n")


def load_jsonl(path: str | Path) -> list[IssueRecord]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                d = json.loads(line)
                d["lanes"] = tuple(d["lanes"])
                out.append(IssueRecord(**d))
    return out


def op_counts(mnemonic, traditional: bool | None = None) -> dict:
    """Metric contributions of one executed operation.

    Shared by both executors so the two traces count work the same way.
    ``traditional`` overrides the mnemonic when a typed op was re-routed.
    """
    if traditional is None:
        traditional = isinstance(mnemonic, BaseOp) and mnemonic not in FLOW_OPS
    return {
        "load_ops": int(is_load(mnemonic)),
        "compute_ops": int(is_compute(mnemonic)),
        "conv_ops": int(mnemonic is Opcode("CONV")),
        "traditional_ops": int(traditional),
    }
