"""Datatype statistics over MiniC sources and significant-datatype selection.

Counting rules (declarations, not uses):

* every variable, parameter and struct field adds one to its base type;
  typedef names resolve to the type they stand for;
* ``struct`` and ``enum`` count definitions plus variables of that type,
  ``typedef`` counts typedef declarations;
* a declaration's loop-weighted count is ``loop_weight ** d`` where ``d`` is
  the deepest loop nesting at which the variable is declared or used.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Iterable

from .frontend import ast as A
from .frontend.parser import parse_minic

TYPE_KEYS = ("int", "float", "double", "long", "char", "struct", "enum", "typedef")
FEATURE_KEYS = ("loops", "conditions", "static", "const", "unsigned", "array_ops")
BASE_TYPES = ("int", "float", "double", "char", "long")  # also the tie-break order
COMPOSITE = frozenset({"struct", "enum", "typedef"})
DEFAULT_LOOP_WEIGHT = 10


class EmptyCorpus(ValueError):
    pass


def _zeros(keys) -> dict:
    return dict.fromkeys(keys, 0)


@dataclass
class TypeStats:
    unit: str = ""
    type_counts: dict = field(default_factory=lambda: _zeros(TYPE_KEYS))
    feature_counts: dict = field(default_factory=lambda: _zeros(FEATURE_KEYS))
    weighted: dict = field(default_factory=lambda: _zeros(TYPE_KEYS))

    def score(self) -> float:
        """Loop-weighted count of the base-type declarations."""
        return float(sum(self.weighted[t] for t in BASE_TYPES))


class _Collector:
    def __init__(self, weight):
        self.weight = weight
        self.stats = TypeStats()
        self.typedefs: dict[str, str] = {}
        self.scopes: list[dict] = [{}]
        self.decls: list[list] = []  # [key, deepest loop depth]
        self.depth = 0

    def base_of(self, spec: A.TypeSpec) -> str:
        if spec.is_typedef_name:
            return self.typedefs.get(spec.base, "int")
        return spec.base

    def qualifiers(self, spec: A.TypeSpec) -> None:
        for q in spec.qualifiers:
            if q in self.stats.feature_counts:
                self.stats.feature_counts[q] += 1

    def declare(self, name: str | None, spec: A.TypeSpec) -> None:
        self.qualifiers(spec)
        key = self.base_of(spec)
        if key not in TYPE_KEYS:
            return
        rec = [key, self.depth]
        self.decls.append(rec)
        if name is not None:
            self.scopes[-1][name] = rec

    def use(self, name: str) -> None:
        for scope in reversed(self.scopes):
            if name in scope:
                rec = scope[name]
                rec[1] = max(rec[1], self.depth)
                return

    def expr(self, e) -> None:
        for n in A.walk(e):
            if isinstance(n, A.Name):
                self.use(n.id)
            elif isinstance(n, A.Index):
                self.stats.feature_counts["array_ops"] += 1

    def stmt(self, s) -> None:
        fc = self.stats.feature_counts
        if s is None:
            return
        if isinstance(s, A.DeclStmt):
            for d in s.decls:
                self.stmt(d)
        elif isinstance(s, A.VarDecl):
            init = s.init if isinstance(s.init, list) else [s.init] if s.init is not None else []
            for e in init:
                self.expr(e)
            self.declare(s.name, s.spec)
        elif isinstance(s, A.Block):
            self.scopes.append({})
            for x in s.stmts:
                self.stmt(x)
            self.scopes.pop()
        elif isinstance(s, A.If):
            fc["conditions"] += 1
            self.expr(s.cond)
            self.stmt(s.then)
            self.stmt(s.orelse)
        elif isinstance(s, (A.For, A.While)):
            fc["loops"] += 1
            self.depth += 1
            self.scopes.append({})
            if isinstance(s, A.For):
                self.stmt(s.init)
                self.stmt(s.step)
            if s.cond is not None:
                fc["conditions"] += 1
                self.expr(s.cond)
            self.stmt(s.body)
            self.scopes.pop()
            self.depth -= 1
        elif isinstance(s, A.Return):
            if s.value is not None:
                self.expr(s.value)
        elif isinstance(s, A.ExprStmt):
            self.expr(s.expr)
        elif isinstance(s, A.Assign):
            self.expr(s.target)
            self.expr(s.value)
        elif isinstance(s, (A.IncDec, A.Delete)):
            self.expr(s.target)

    def item(self, it) -> None:
        tc = self.stats.type_counts
        if isinstance(it, A.StructDef):
            tc["struct"] += 1
            self.decls.append(["struct", self.depth])
            self.scopes.append({})
            for f in it.fields:
                self.declare(None, f.spec)
            self.scopes.pop()
        elif isinstance(it, A.EnumDef):
            self.decls.append(["enum", self.depth])
        elif isinstance(it, A.TypedefDecl):
            self.decls.append(["typedef", self.depth])
            self.typedefs[it.name] = self.base_of(it.spec)
            self.qualifiers(it.spec)
        elif isinstance(it, A.FuncDef):
            self.qualifiers(it.ret)
            self.scopes.append({})
            for p in it.params:
                self.declare(p.name, p.spec)
            self.stmt(it.body)
            self.scopes.pop()
        else:
            self.stmt(it)

    def finish(self) -> TypeStats:
        st = self.stats
        st.type_counts = _zeros(TYPE_KEYS)
        for key, d in self.decls:
            st.type_counts[key] += 1
            st.weighted[key] += self.weight**d
        return st


def collect_stats(source: A.Program | str, loop_weight=DEFAULT_LOOP_WEIGHT, unit: str = "") -> TypeStats:
    """Declaration and feature counts of one translation unit."""
    if loop_weight <= 0:
        raise ValueError("loop weight must be positive")
    program = parse_minic(source) if isinstance(source, str) else source
    c = _Collector(loop_weight)
    for it in program.items:
        c.item(it)
    stats = c.finish()
    stats.unit = unit
    return stats


def aggregate(corpus: Iterable[TypeStats], unit: str = "avg") -> TypeStats:
    """Per-key arithmetic mean, kept as exact fractions."""
    items = list(corpus)
    if not items:
        raise EmptyCorpus("cannot average an empty corpus")
    n = len(items)

    def mean(attr, keys):
        return {k: Fraction(sum(Fraction(getattr(s, attr)[k]) for s in items), n) for k in keys}

    return TypeStats(unit, mean("type_counts", TYPE_KEYS), mean("feature_counts", FEATURE_KEYS), mean("weighted", TYPE_KEYS))


def select_sdt(stats: TypeStats, k: int = 4, use_loop_weighting: bool = False, include_long: bool = False) -> list[str]:
    """Top-``k`` base types by score; ties follow int, float, double, char, long."""
    candidates = [t for t in BASE_TYPES if include_long or t != "long"]
    if not 0 <= k <= len(candidates):
        raise ValueError(f"k must be between 0 and {len(candidates)}")
    counts = stats.weighted if use_loop_weighting else stats.type_counts
    ranked = sorted(candidates, key=lambda t: (-counts.get(t, 0), BASE_TYPES.index(t)))
    return ranked[:k]


def ranking(stats: TypeStats, use_loop_weighting: bool = False, include_long: bool = False) -> list[tuple[str, float]]:
    counts = stats.weighted if use_loop_weighting else stats.type_counts
    order = select_sdt(stats, 5 if include_long else 4, use_loop_weighting, include_long)
    return [(t, float(counts.get(t, 0))) for t in order]


# -- CSV fixtures --


def _num(text: str):
    f = Fraction(text)
    return int(f) if f.denominator == 1 else f


def read_type_csv(path: str | Path) -> list[TypeStats]:
    """Rows with the type columns (and optionally feature columns) as TypeStats."""
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            s = TypeStats(row.get("unit", ""))
            for k in TYPE_KEYS:
                if row.get(k) not in (None, ""):
                    s.type_counts[k] = _num(row[k])
            for k in FEATURE_KEYS:
                if row.get(k) not in (None, ""):
                    s.feature_counts[k] = _num(row[k])
            s.weighted = dict(s.type_counts)
            out.append(s)
    return out


def merge_features(stats: list[TypeStats], path: str | Path) -> list[TypeStats]:
    """Fill feature counts from a feature CSV, matching rows by unit."""
    features = {s.unit: s.feature_counts for s in read_type_csv(path)}
    for s in stats:
        if s.unit in features:
            s.feature_counts = dict(features[s.unit])
    return stats


def _cell(v) -> str:
    if isinstance(v, Fraction):
        return str(int(v)) if v.denominator == 1 else f"{float(v):.6g}"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def write_stats_csv(stats: Iterable[TypeStats], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(("unit",) + TYPE_KEYS + FEATURE_KEYS + ("score",))
    for s in stats:
        w.writerow(
            [s.unit]
            + [_cell(s.type_counts[k]) for k in TYPE_KEYS]
            + [_cell(s.feature_counts[k]) for k in FEATURE_KEYS]
            + [_cell(s.score())]
        )


def fixture_path(name: str) -> Path:
    """Path of a bundled data file such as ``figure3a.csv``."""
    return Path(str(resources.files("typeline") / "data" / name))


def figure3_fixture() -> list[TypeStats]:
    return merge_features(read_type_csv(fixture_path("figure3a.csv")), fixture_path("figure3c.csv"))
