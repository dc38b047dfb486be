"""Source to report in one call: compile, run both executors, compare."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

from .compiler import CompileResult, CompilerConfig, compile_ir
from .frontend import LowerOptions, compile_source
from .frontend.ir import IRProgram
from .machine import ExecTrace, run, run_baseline
from .metrics import ExecReport, report


@dataclass
class Comparison:
    report: ExecReport
    compiled: CompileResult
    typeline: ExecTrace
    baseline: ExecTrace

    @property
    def ir(self) -> IRProgram:
        return self.compiled.ir


def lower_source(source: str, config: CompilerConfig | None = None) -> IRProgram:
    cfg = config or CompilerConfig()
    return compile_source(source, LowerOptions(unroll=cfg.unroll))


def compile_text(source: str, config: CompilerConfig | None = None) -> CompileResult:
    cfg = config or CompilerConfig()
    return compile_ir(lower_source(source, cfg), cfg)


def compare(source: str, inputs: dict | None = None, config: CompilerConfig | None = None, unit: str = "") -> Comparison:
    """Compile ``source``, execute it clustered and sequentially, and report."""
    cfg = config or CompilerConfig()
    compiled = compile_text(source, cfg)
    t = run(compiled.program, inputs, cost_table=cfg.cost_table, relax=cfg.relax)
    b = run_baseline(compiled.ir, inputs, cost_table=cfg.cost_table, lanes=cfg.lanes)
    return Comparison(report(t, b, unit), compiled, t, b)


def read_inputs(path: str | Path | None) -> dict:
    if path is None:
        return {}
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise ValueError("inputs file must hold a JSON object")
    return data


def corpus_units(directory: str | Path) -> list[tuple[str, Path, Path | None]]:
    """``(unit, source, inputs)`` for every ``*.mc`` file; inputs sit beside it as ``<unit>.json``."""
    out = []
    for src in sorted(Path(directory).glob("*.mc")):
        inp = src.with_suffix(".json")
        out.append((src.stem, src, inp if inp.exists() else None))
    return out


def bench(directory: str | Path, config: CompilerConfig | None = None) -> list[ExecReport]:
    cfg = config or CompilerConfig()
    return [
        compare(src.read_text(encoding="utf-8"), read_inputs(inp), cfg, unit).report
        for unit, src, inp in corpus_units(directory)
    ]


def with_overrides(config: CompilerConfig, **changes) -> CompilerConfig:
    return replace(config, **{k: v for k, v in changes.items() if v is not None})
