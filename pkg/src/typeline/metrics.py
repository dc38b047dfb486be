"""Parallelism and cycle metrics from a pair of execution traces."""

from __future__ import annotations

import csv
import io
import json
import math
import struct
from collections import Counter
from dataclasses import dataclass, field

from .machine.trace import CONTROL, LOAD_CLUSTER, OP_CLUSTER, ExecTrace

DEFINITIONS = {
    "load_parallelism": "1 - load issue slots / executed load ops (typeline trace)",
    "compute_parallelism": "1 - arithmetic/logic issue slots / executed arithmetic/logic ops; conversions excluded",
    "cycle_reduction": "(baseline cycles - typeline cycles) / baseline cycles",
    "miss_handled_fraction": "ops run on the traditional lane / all executed ops (typeline trace)",
    "cycles_typeline": "sum of issue costs, clustered program",
    "cycles_baseline": "sum of issue costs, every IR op issued alone",
    "cluster_histogram": "cluster size -> number of executed cluster issues",
}
CSV_FIELDS = (
    "unit",
    "load_parallelism",
    "compute_parallelism",
    "cycle_reduction",
    "miss_handled_fraction",
    "cycles_typeline",
    "cycles_baseline",
)


class TraceMismatch(ValueError):
    """The two traces disagree on program outputs."""


@dataclass
class Counts:
    load_slots: int = 0
    load_ops: int = 0
    compute_slots: int = 0
    compute_ops: int = 0
    traditional_ops: int = 0
    total_ops: int = 0
    cycles_typeline: int = 0
    cycles_baseline: int = 0

    def __add__(self, other: "Counts") -> "Counts":
        return Counts(*(a + b for a, b in zip(self.astuple(), other.astuple())))

    def astuple(self) -> tuple:
        return (
            self.load_slots,
            self.load_ops,
            self.compute_slots,
            self.compute_ops,
            self.traditional_ops,
            self.total_ops,
            self.cycles_typeline,
            self.cycles_baseline,
        )


def _ratio_saving(slots: int, ops: int) -> float:
    return 1.0 - slots / ops if ops else 0.0


@dataclass
class ExecReport:
    unit: str
    load_parallelism: float
    compute_parallelism: float
    cycle_reduction: float
    miss_handled_fraction: float
    cycles_typeline: int
    cycles_baseline: int
    cluster_histogram: dict = field(default_factory=dict)
    counts: Counts = field(default_factory=Counts)

    @classmethod
    def from_counts(cls, unit: str, c: Counts, histogram: dict | None = None) -> "ExecReport":
        base = c.cycles_baseline
        return cls(
            unit,
            _ratio_saving(c.load_slots, c.load_ops),
            _ratio_saving(c.compute_slots, c.compute_ops),
            (base - c.cycles_typeline) / base if base else 0.0,
            c.traditional_ops / c.total_ops if c.total_ops else 0.0,
            c.cycles_typeline,
            base,
            dict(sorted((histogram or {}).items())),
            c,
        )

    def row(self) -> dict:
        return {k: getattr(self, k) for k in CSV_FIELDS}

    def to_dict(self) -> dict:
        d = self.row()
        d["cluster_histogram"] = {str(k): v for k, v in self.cluster_histogram.items()}
        d["counts"] = dict(zip(Counts.__dataclass_fields__, self.counts.astuple()))
        d["definitions"] = DEFINITIONS
        return d


def _bits(v):
    if isinstance(v, float):
        return ("f", struct.pack("<d", v))
    if isinstance(v, list):
        return [_bits(x) for x in v]
    return ("i", v)


def same_outputs(a: dict, b: dict) -> bool:
    """Bit-level equality of two output maps (NaN payloads and signed zeros included)."""
    return a.keys() == b.keys() and all(_bits(a[k]) == _bits(b[k]) for k in a)


def trace_counts(typeline: ExecTrace, baseline: ExecTrace) -> tuple[Counts, Counter]:
    c = Counts(cycles_typeline=typeline.cycles, cycles_baseline=baseline.cycles)
    hist: Counter = Counter()
    for r in typeline.records:
        if r.kind == CONTROL:
            continue
        c.load_ops += r.load_ops
        c.load_slots += r.load_ops > 0
        c.compute_ops += r.compute_ops
        c.compute_slots += r.compute_ops > 0
        c.traditional_ops += r.traditional_ops
        c.total_ops += r.member_count
        if r.kind in (LOAD_CLUSTER, OP_CLUSTER):
            hist[r.member_count - r.conv_ops] += 1
    return c, hist


def report(typeline: ExecTrace, baseline: ExecTrace, unit: str = "") -> ExecReport:
    if not same_outputs(typeline.outputs, baseline.outputs):
        diff = sorted(k for k in typeline.outputs if _bits(typeline.outputs[k]) != _bits(baseline.outputs.get(k)))
        raise TraceMismatch(f"outputs differ: {', '.join(diff) or 'variable sets'}")
    c, hist = trace_counts(typeline, baseline)
    return ExecReport.from_counts(unit, c, hist)


def pooled(reports: list[ExecReport], unit: str = "pooled") -> ExecReport:
    """One report over a whole corpus, summing raw counts rather than averaging ratios."""
    total = Counts()
    hist: Counter = Counter()
    for r in reports:
        total = total + r.counts
        hist.update(r.cluster_histogram)
    return ExecReport.from_counts(unit, total, hist)


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6f}" if math.isfinite(v) else str(v)
    return str(v)


def export(reports, fmt: str = "json") -> bytes:
    """Serialize one report or a list of them as json, csv or a text table."""
    many = list(reports) if isinstance(reports, (list, tuple)) else [reports]
    if fmt == "json":
        body = many[0].to_dict() if not isinstance(reports, (list, tuple)) else [r.to_dict() for r in many]
        return (json.dumps(body, indent=2) + "\n").encode()
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
        w.writeheader()
        for r in many:
            w.writerow({k: _fmt(v) for k, v in r.row().items()})
        return buf.getvalue().encode()
    if fmt == "table":
        rows = [[_fmt(v) for v in r.row().values()] for r in many]
        widths = [max([len(h)] + [len(row[i]) for row in rows]) for i, h in enumerate(CSV_FIELDS)]
        lines = ["  ".join(h.ljust(w) for h, w in zip(CSV_FIELDS, widths))]
        lines.append("  ".join("-" * w for w in widths))
        lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)) for row in rows]
        return ("\n".join(lines) + "\n").encode()
    raise ValueError(f"unknown format {fmt!r}")
