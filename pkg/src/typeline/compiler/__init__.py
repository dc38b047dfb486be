"""IR to TYPELINE assembly: clustering, register allocation and emission."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from ..frontend.ir import IRProgram
from ..isa import LOAD_CLUSTER_CAP, OP_CLUSTER_CAP, CostTable, Program, SdtKind, validate
from .emit import emit_program
from .regalloc import Allocation, allocate
from .schedule import (
    LOAD_CLUSTER,
    OP_CLUSTER,
    SCALAR,
    TRADITIONAL,
    Cluster,
    Schedule,
    ScheduleConfig,
    _Scheduler,
    dissolve,
    scalar_schedule,
    schedule_block,
    schedule_cost,
)
from .select import ALL_LANES, scalar_cost, select


class CompileError(Exception):
    """The compiler produced a program that breaks an ISA rule."""


@dataclass(frozen=True)
class CompilerConfig:
    window: int = 8
    load_cap: int = LOAD_CLUSTER_CAP
    op_cap: int = OP_CLUSTER_CAP
    lanes: frozenset = ALL_LANES
    unroll: int = 1
    relax: bool = False
    cluster: bool = True
    cost_table: CostTable = field(default_factory=CostTable.default)

    @classmethod
    def from_json(cls, path: str | Path) -> "CompilerConfig":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if "cost_table" in data:
            data["cost_table"] = CostTable.with_overrides(data["cost_table"])
        if "lanes" in data:
            data["lanes"] = frozenset(SdtKind[n.upper()] for n in data["lanes"])
        return cls(**data)

    def schedule_config(self) -> ScheduleConfig:
        return ScheduleConfig(
            window=self.window,
            load_cap=self.load_cap,
            op_cap=self.op_cap,
            cluster=self.cluster,
            lanes=self.lanes,
            cost_table=self.cost_table,
        )


@dataclass
class CompileResult:
    program: Program
    schedules: dict  # block id -> Schedule
    ir: IRProgram
    allocation: Allocation


def compile_ir(ir: IRProgram, config: CompilerConfig | None = None) -> CompileResult:
    """Schedule, allocate and emit ``ir``; the result passes ``validate``."""
    cfg = config or CompilerConfig()
    scfg = cfg.schedule_config()
    schedules = {b.id: schedule_block(b.ops, scfg, b.id) for b in ir.blocks}
    while True:
        alloc = allocate(ir, schedules)
        if not alloc.dissolve:
            break
        # a clustered value had to spill: break those clusters up and start over
        for bid in {bid for bid, _ in alloc.dissolve}:
            sched = schedules[bid]
            helper = _Scheduler(sched.ops, scfg)
            clusters = sched.clusters
            for idx in sorted((i for b, i in alloc.dissolve if b == bid), reverse=True):
                clusters = dissolve(clusters, idx, helper)
            schedules[bid] = Schedule(bid, sched.ops, clusters)
    program = emit_program(ir, schedules, alloc, cfg.lanes)
    problems = validate(program, load_cap=cfg.load_cap, op_cap=cfg.op_cap, relax=cfg.relax)
    if problems:
        first = problems[0]
        raise CompileError(f"item {first.index}: {first.rule}: {first.message}")
    return CompileResult(program, schedules, ir, alloc)


def compile(ir: IRProgram, config: CompilerConfig | None = None) -> Program:  # noqa: A001
    return compile_ir(ir, config).program


__all__ = [
    "CompileError",
    "CompileResult",
    "CompilerConfig",
    "Cluster",
    "Schedule",
    "ScheduleConfig",
    "LOAD_CLUSTER",
    "OP_CLUSTER",
    "SCALAR",
    "TRADITIONAL",
    "compile",
    "compile_ir",
    "scalar_cost",
    "scalar_schedule",
    "schedule_block",
    "schedule_cost",
    "select",
]
