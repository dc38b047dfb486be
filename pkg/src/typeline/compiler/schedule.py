"""Greedy windowed clustering of one basic block.

The scan walks the block left to right. At the first unscheduled op it tries
to grow a cluster by pulling later ops forward through a lookahead window;
an op can move up only if it does not depend on anything still waiting
between. Ready loads anywhere in the window are gathered first, so loads
interleaved with arithmetic still share one issue. Conversions the
type-conversion unit can do are folded into an op cluster's leading CONV
when a member consumes them.

Two guards keep clustering profitable. Each cluster must cost less than its
members issued one by one, and the block as a whole, counting the
VEN/VDS and PEN/PDS wrappers, must beat the all-scalar schedule. Clusters are
dissolved (the one whose removal helps most first) until that holds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from ..frontend.ir import IROp
from ..isa import LOAD_CLUSTER_CAP, OP_CLUSTER_CAP, ConvMask, CostTable, Opcode, is_clusterable, is_load, opcode_kind
from .hazards import RAW, predecessors
from .select import ALL_LANES, is_tcu_conversion, is_traditional, mnemonic_cost, select

LOAD_CLUSTER = "LoadCluster"
OP_CLUSTER = "OpCluster"
SCALAR = "Scalar"
TRADITIONAL = "Traditional"


@dataclass(frozen=True)
class ScheduleConfig:
    window: int = 8
    load_cap: int = LOAD_CLUSTER_CAP
    op_cap: int = OP_CLUSTER_CAP
    max_convs: int = 8
    cluster: bool = True
    lanes: frozenset = ALL_LANES
    cost_table: CostTable = field(default_factory=CostTable.default)


@dataclass(frozen=True)
class Cluster:
    kind: str
    members: tuple[int, ...]  # op indices; an op cluster lists its conversions first
    cost: int
    convs: tuple[int, ...] = ()
    mask: ConvMask | None = None

    @property
    def is_group(self) -> bool:
        return self.kind in (LOAD_CLUSTER, OP_CLUSTER)


@dataclass
class Schedule:
    block_id: int
    ops: list
    clusters: list = field(default_factory=list)

    def order(self) -> list[int]:
        return [m for c in self.clusters for m in c.members]

    @property
    def groups(self) -> list[Cluster]:
        return [c for c in self.clusters if c.is_group]


def conversions_for(cluster: Cluster, ops: Sequence[IROp]) -> ConvMask:
    """CONV switches needed by the cluster's folded conversions."""
    return ConvMask.for_directions({(ops[i].src.sdt, ops[i].vtype.sdt) for i in cluster.convs})


def _kinds_ok(kinds: list) -> bool:
    return len(set(kinds)) in (1, len(kinds))


class _Scheduler:
    def __init__(self, ops: Sequence[IROp], cfg: ScheduleConfig):
        self.ops = ops
        self.cfg = cfg
        self.table = cfg.cost_table
        self.mn = [select(o, cfg.lanes) for o in ops]
        self.cost = [mnemonic_cost(m, self.table) for m in self.mn]
        self.preds = predecessors(ops)
        self.done = [False] * len(ops)

    def scalar(self, i: int) -> Cluster:
        kind = TRADITIONAL if is_traditional(self.mn[i]) else SCALAR
        return Cluster(kind, (i,), self.cost[i])

    def ready(self, j: int, allowed=()) -> bool:
        return all(self.done[k] or k in allowed for k in self.preds[j])

    def grow_load(self, i: int) -> Cluster | None:
        mn = self.mn[i]
        members = [i]
        skipped = 0
        for j in range(i + 1, len(self.ops)):
            if len(members) >= self.cfg.load_cap or skipped > self.cfg.window:
                break
            if self.done[j]:
                continue
            if self.mn[j] is mn and self.ready(j):
                members.append(j)
            else:
                skipped += 1
        if len(members) < 2:
            return None
        return Cluster(LOAD_CLUSTER, tuple(members), self.table[mn.value])

    def grow_op(self, i: int) -> Cluster | None:
        cfg = self.cfg
        members: list[int] = []
        kinds: list = []
        convs: list[int] = []
        skipped = 0
        for j in range(i, len(self.ops)):
            if skipped > cfg.window:
                break
            if self.done[j]:
                continue
            if is_tcu_conversion(self.ops[j], cfg.lanes) and isinstance(self.mn[j], Opcode):
                if len(convs) < cfg.max_convs and self.ready(j):
                    convs.append(j)
                    continue
            elif is_clusterable(self.mn[j]) and len(members) < cfg.op_cap:
                kind = opcode_kind(self.mn[j])
                if _kinds_ok(kinds + [kind]) and all(
                    self.done[k] or (k in convs and self.preds[j][k] == {RAW}) for k in self.preds[j]
                ):
                    members.append(j)
                    kinds.append(kind)
                    continue
            if j != i:
                skipped += 1
        if len(members) < 2:
            return None
        consumed = {r for m in members for r in self.ops[m].reads()}
        used = tuple(c for c in convs if self.ops[c].dst in consumed)
        cost = max(self.cost[m] for m in members)
        mask = None
        if used:
            cost += self.table["CONV"]
            mask = ConvMask.for_directions({(self.ops[c].src.sdt, self.ops[c].vtype.sdt) for c in used})
        return Cluster(OP_CLUSTER, used + tuple(members), cost, used, mask)

    def is_typed_load(self, j: int) -> bool:
        mn = self.mn[j]
        return isinstance(mn, Opcode) and is_load(mn) and opcode_kind(mn) is not None

    def profitable(self, c: Cluster | None) -> Cluster | None:
        if c is not None and c.cost >= sum(self.cost[m] for m in c.members):
            return None
        return c

    def hoist_loads(self, i: int) -> Cluster | None:
        """First load cluster that can start anywhere in the window."""
        end = min(len(self.ops), i + self.cfg.window + 1)
        for j in range(i, end):
            if not self.done[j] and self.is_typed_load(j) and self.ready(j):
                c = self.profitable(self.grow_load(j))
                if c is not None:
                    return c
        return None

    def run(self) -> list[Cluster]:
        out: list[Cluster] = []
        n = len(self.ops)
        i = 0
        while i < n:
            if self.done[i]:
                i += 1
                continue
            c = None
            if self.cfg.cluster:
                # loads go first so the ops they feed can later issue together
                c = self.hoist_loads(i)
                mn = self.mn[i]
                if c is None and (is_clusterable(mn) or is_tcu_conversion(self.ops[i], self.cfg.lanes)):
                    c = self.profitable(self.grow_op(i))
            if c is None:
                c = self.scalar(i)
            for m in c.members:
                self.done[m] = True
            out.append(c)
        return out


def wrapper_cost(kind: str, table: CostTable) -> int:
    if kind == LOAD_CLUSTER:
        return table["VEN"] + table["VDS"]
    return table["PEN"] + table["PDS"]


def schedule_cost(clusters: Sequence[Cluster], table: CostTable) -> int:
    """Issue cycles of a block schedule including mode-switch wrappers.

    Every load cluster has its own VEN/VDS pair; adjacent op clusters share
    one PEN/PDS pair.
    """
    total = 0
    prev = None
    for c in clusters:
        total += c.cost
        if c.kind == LOAD_CLUSTER:
            total += wrapper_cost(LOAD_CLUSTER, table)
        elif c.kind == OP_CLUSTER and prev != OP_CLUSTER:
            total += wrapper_cost(OP_CLUSTER, table)
        prev = c.kind
    return total


def dissolve(clusters: list[Cluster], idx: int, sched: _Scheduler) -> list[Cluster]:
    c = clusters[idx]
    return clusters[:idx] + [sched.scalar(m) for m in sorted(c.members)] + clusters[idx + 1 :]


def schedule_block(ops: Sequence[IROp], config: ScheduleConfig | None = None, block_id: int = 0) -> Schedule:
    """Cluster one block's ops; members in schedule order respect every dependence."""
    cfg = config or ScheduleConfig()
    sched = _Scheduler(ops, cfg)
    clusters = sched.run()
    table = cfg.cost_table
    scalar_total = sum(sched.cost)
    while any(c.is_group for c in clusters) and schedule_cost(clusters, table) >= scalar_total:
        best = None
        for idx, c in enumerate(clusters):
            if not c.is_group:
                continue
            trial = schedule_cost(dissolve(clusters, idx, sched), table)
            if best is None or trial < best[0]:
                best = (trial, idx)
        clusters = dissolve(clusters, best[1], sched)
    return Schedule(block_id, list(ops), clusters)


def scalar_schedule(ops: Sequence[IROp], config: ScheduleConfig | None = None, block_id: int = 0) -> Schedule:
    cfg = config or ScheduleConfig()
    sched = _Scheduler(ops, cfg)
    return Schedule(block_id, list(ops), [sched.scalar(i) for i in range(len(ops))])
