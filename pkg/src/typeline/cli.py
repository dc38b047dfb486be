"""Command-line front end: ``typeline <subcommand> ...``.

Exit codes: 0 success, 1 usage, 2 compile error, 3 runtime trap,
4 validation failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import analyzer
from .compiler import CompileError, CompilerConfig
from .compiler.regalloc import RegisterPressure
from .frontend import FrontendError
from .isa import AssemblyError, CostTable, InvalidCostTable, format_assembly, parse_assembly
from .machine import StepLimitExceeded, UnboundInput, ValidationFailed, run
from .metrics import TraceMismatch, export, pooled
from .pipeline import bench, compare, compile_text, read_inputs, with_overrides
from .semantics import Trap

EXIT_OK, EXIT_USAGE, EXIT_COMPILE, EXIT_TRAP, EXIT_INVALID = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _config(args) -> CompilerConfig:
    cfg = CompilerConfig.from_json(args.config) if getattr(args, "config", None) else CompilerConfig()
    table = CostTable.load(args.cost_table) if getattr(args, "cost_table", None) else None
    return with_overrides(
        cfg,
        cost_table=table,
        window=getattr(args, "window", None),
        unroll=getattr(args, "unroll", None),
        cluster=False if getattr(args, "no_cluster", False) else None,
        relax=True if getattr(args, "relax", False) else None,
    )


def _write(data: bytes | str, out: str | None) -> None:
    if isinstance(data, str):
        data = data.encode()
    if out:
        Path(out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def cmd_analyze(args) -> int:
    stats = [
        analyzer.collect_stats(Path(f).read_text(encoding="utf-8"), args.loop_weight, Path(f).stem) for f in args.files
    ]
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            analyzer.write_stats_csv(stats, fh)
    else:
        analyzer.write_stats_csv(stats, sys.stdout)
    return EXIT_OK


def cmd_select_sdt(args) -> int:
    stats = analyzer.aggregate(analyzer.read_type_csv(args.stats))
    chosen = analyzer.select_sdt(stats, args.k, args.weighted, args.include_long)
    counts = stats.weighted if args.weighted else stats.type_counts
    for rank, t in enumerate(chosen, 1):
        print(f"{rank}\t{t}\t{float(counts[t]):.4f}")
    return EXIT_OK


def cmd_compile(args) -> int:
    cfg = _config(args)
    result = compile_text(Path(args.source).read_text(encoding="utf-8"), cfg)
    _write(format_assembly(result.program), args.output)
    return EXIT_OK


def cmd_run(args) -> int:
    program = parse_assembly(Path(args.program).read_text(encoding="utf-8"))
    table = CostTable.load(args.cost_table) if args.cost_table else None
    trace = run(program, read_inputs(args.inputs), cost_table=table, relax=args.relax)
    if args.trace:
        trace.dump_jsonl(args.trace)
    print(json.dumps({"outputs": trace.outputs, "cycles": trace.cycles, "heap": trace.heap}, indent=2))
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = _config(args)
    c = compare(Path(args.source).read_text(encoding="utf-8"), read_inputs(args.inputs), cfg, Path(args.source).stem)
    if args.trace:
        c.typeline.dump_jsonl(args.trace)
    _write(export(c.report, args.format), args.output)
    return EXIT_OK


def cmd_bench(args) -> int:
    reports = bench(args.directory, _config(args))
    if reports:
        reports.append(pooled(reports))
    _write(export(reports, args.format), args.output)
    return EXIT_OK


def _add_compiler_flags(p) -> None:
    p.add_argument("--cost-table", metavar="PATH", help="JSON object of mnemonic -> cycles overrides")
    p.add_argument("--window", type=int, metavar="N", help="scheduler lookahead window")
    p.add_argument("--no-cluster", action="store_true", help="emit every op as a scalar issue")
    p.add_argument("--unroll", type=int, metavar="K", help="unroll counted loops by K")
    p.add_argument("--relax", action="store_true", help="let --config caps override the architectural caps")
    p.add_argument("--config", metavar="PATH", help="compiler configuration JSON")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="typeline", description="Datatype-clustered compilation and simulation of MiniC.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="datatype statistics of MiniC sources")
    a.add_argument("files", nargs="+")
    a.add_argument("--loop-weight", type=float, default=analyzer.DEFAULT_LOOP_WEIGHT)
    a.add_argument("--csv", metavar="OUT")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("select-sdt", help="rank significant datatypes from a statistics CSV")
    s.add_argument("stats")
    s.add_argument("-k", type=int, default=4)
    s.add_argument("--weighted", action="store_true", help="rank by loop-weighted counts")
    s.add_argument("--include-long", action="store_true")
    s.set_defaults(func=cmd_select_sdt)

    c = sub.add_parser("compile", help="compile MiniC to assembly")
    c.add_argument("source")
    _add_compiler_flags(c)
    c.add_argument("-o", "--output", metavar="OUT")
    c.set_defaults(func=cmd_compile)

    r = sub.add_parser("run", help="execute an assembly program")
    r.add_argument("program")
    r.add_argument("--inputs", metavar="JSON")
    r.add_argument("--trace", metavar="JSONL")
    r.add_argument("--cost-table", metavar="PATH")
    r.add_argument("--relax", action="store_true")
    r.set_defaults(func=cmd_run)

    m = sub.add_parser("compare", help="compile, run both executors and report metrics")
    m.add_argument("source")
    m.add_argument("--inputs", metavar="JSON")
    m.add_argument("--format", choices=("json", "csv", "table"), default="json")
    m.add_argument("--trace", metavar="JSONL")
    m.add_argument("-o", "--output", metavar="OUT")
    _add_compiler_flags(m)
    m.set_defaults(func=cmd_compare)

    b = sub.add_parser("bench", help="report over a directory of .mc units")
    b.add_argument("directory")
    b.add_argument("--format", choices=("json", "csv", "table"), default="csv")
    b.add_argument("-o", "--output", metavar="OUT")
    _add_compiler_flags(b)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"typeline: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (FrontendError, CompileError, RegisterPressure) as exc:
        print(f"compile error: {exc}", file=sys.stderr)
        return EXIT_COMPILE
    except (Trap, StepLimitExceeded, TraceMismatch) as exc:
        print(f"runtime trap: {exc}", file=sys.stderr)
        return EXIT_TRAP
    except (ValidationFailed, AssemblyError) as exc:
        print(f"invalid program: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (OSError, ValueError, UnboundInput, InvalidCostTable, analyzer.EmptyCorpus) as exc:
        print(f"typeline: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
