"""Dependency and port-contention constraints over stage start cycles.

All constraints are difference bounds `S_later - S_earlier >= bound`.
Dependencies are hard; contention yields groups of alternatives of which one
must hold. Buffers that pack g lines per block are handled in block-index
space: a reader part with offset class k and block-span h behaves like a
stage started at S - k*W scanning rows of length g*W, which folds back into
plain difference bounds on the physical start cycles.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

from .errors import InfeasibleError, PositiveCycleError
from .ir import PartialOrder, StencilDAG


@dataclass(frozen=True)
class DiffConstraint:
    later: str
    earlier: str
    bound: int  # cycles; >= 1
    origin: str = "dependency"  # dependency | contention
    buffer: Optional[str] = None  # producer whose buffer is contended
    later_part: tuple[int, int] = (1, 0)  # (block span h, offset class k)
    earlier_part: tuple[int, int] = (1, 0)
    g: int = 1

    def text(self) -> str:
        return f"S({self.later}) - S({self.earlier}) >= {self.bound}"


OrGroup = tuple[DiffConstraint, ...]


@dataclass(frozen=True)
class ConstraintSystem:
    hard: tuple[DiffConstraint, ...]
    or_groups: tuple[OrGroup, ...]

    def branch_count(self) -> int:
        n = 1
        for g in self.or_groups:
            n *= len(g)
        return n

    def text(self) -> str:
        lines = [c.text() for c in self.hard]
        for g in self.or_groups:
            lines.append("or {")
            lines.extend("  " + c.text() for c in g)
            lines.append("}")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Generation
# ---------------------------------------------------------------------------


def gen_dependency(dag: StencilDAG) -> list[DiffConstraint]:
    """One availability bound per producer/consumer pair.

    A reader part spanning h blocks at offset class k needs (h-1)*g + k full
    lines plus one pixel before it may start; the deepest part of a window of
    SH lines makes that (SH-1)*W + 1 cycles after the producer.
    """
    w = dag.width
    best: dict[tuple[str, str], int] = {}
    order: list[tuple[str, str]] = []
    for e in dag.edges:
        later = dag.schedule_key(e.consumer)
        earlier = dag.schedule_key(e.producer)
        if later == earlier:
            continue
        bound = ((e.sh - 1) * e.g + e.k) * w + 1
        key = (later, earlier)
        if key not in best:
            best[key] = bound
            order.append(key)
        else:
            best[key] = max(best[key], bound)
    return [DiffConstraint(later, earlier, best[(later, earlier)]) for later, earlier in order]


@dataclass(frozen=True)
class _AccessEntry:
    var: str  # canonical schedule variable
    phys: str  # physical stage (for ordering / reporting)
    h: int  # block span
    k: int  # intra-block offset class


def buffer_population(dag: StencilDAG, producer: str) -> tuple[int, list[_AccessEntry]]:
    """Accessors of one buffer: the writer plus each merged reader part.

    Pattern-merged consumers read identical addresses on the same cycle and
    count once. Returns (g, entries)."""
    edges = dag.buffer_edges(producer)
    g = edges[0].g if edges else 1
    assert all(e.g == g for e in edges), "one packing factor per buffer"
    entries = [_AccessEntry(dag.schedule_key(producer), producer, 1, 0)]
    seen = set()
    for e in edges:
        var = dag.schedule_key(e.consumer)
        key = (var, e.sh, e.k)
        if key in seen:
            continue
        seen.add(key)
        entries.append(_AccessEntry(var, dag.physical_name(e.consumer), e.sh, e.k))
    return g, entries


def gen_contention(dag: StencilDAG, mem, po: PartialOrder) -> list[OrGroup]:
    """For every buffer and every (ports+1)-subset of its accessors, emit the
    alternatives that keep some pair of the subset block-disjoint at every
    cycle. Orientations contradicting the dependency order are dropped; pairs
    aliased to one start cycle can never separate and yield nothing."""
    w = dag.width
    p_ports = mem.ports
    groups: list[OrGroup] = []
    seen_groups = set()
    for producer in dag.producers():
        g, entries = buffer_population(dag, producer)
        if len(entries) <= p_ports:
            continue
        for subset in itertools.combinations(range(len(entries)), p_ports + 1):
            disjuncts: list[DiffConstraint] = []
            for ia, ib in itertools.combinations(subset, 2):
                a, b = entries[ia], entries[ib]
                if a.var == b.var:
                    continue
                for x, y in ((a, b), (b, a)):
                    if po.strictly(x.var, y.var):
                        continue  # x precedes y; "x later" is contradictory
                    bound = g * w * x.h + (x.k - y.k) * w
                    d = DiffConstraint(
                        x.var,
                        y.var,
                        bound,
                        origin="contention",
                        buffer=producer,
                        later_part=(x.h, x.k),
                        earlier_part=(y.h, y.k),
                        g=g,
                    )
                    if d not in disjuncts:
                        disjuncts.append(d)
            if not disjuncts:
                raise InfeasibleError(
                    f"buffer of {producer!r}: {p_ports + 1} aliased accessors can never separate"
                )
            key = tuple(disjuncts)
            if key not in seen_groups:
                seen_groups.add(key)
                groups.append(key)
    return groups


# ---------------------------------------------------------------------------
# Entailment oracle and pruning
# ---------------------------------------------------------------------------


def longest_path(
    cons: list[DiffConstraint] | tuple[DiffConstraint, ...], src: str, dst: str
) -> float:
    """Longest path from src to dst in the difference-constraint graph
    (edge earlier -> later weighted by the bound); -inf when unreachable."""
    nodes: list[str] = [src, dst] if src != dst else [src]
    for c in cons:
        for v in (c.later, c.earlier):
            if v not in nodes:
                nodes.append(v)
    dist = {v: float("-inf") for v in nodes}
    dist[src] = 0
    edges = [(c.earlier, c.later, c.bound) for c in cons]
    for _ in range(len(nodes) - 1):
        changed = False
        for u, v, b in edges:
            if dist[u] != float("-inf") and dist[u] + b > dist[v]:
                dist[v] = dist[u] + b
                changed = True
        if not changed:
            break
    else:
        for u, v, b in edges:
            if dist[u] != float("-inf") and dist[u] + b > dist[v]:
                raise PositiveCycleError("positive cycle in constraint graph")
    return dist[dst]


def entails(
    hard: list[DiffConstraint] | tuple[DiffConstraint, ...],
    assumed: DiffConstraint,
    goal: DiffConstraint,
) -> bool:
    """True iff every schedule satisfying hard + assumed satisfies goal,
    decided by the longest path from goal.earlier to goal.later in the
    difference-constraint graph."""
    return longest_path(list(hard) + [assumed], goal.earlier, goal.later) >= goal.bound


def _syntactically_relaxed(d1: DiffConstraint, d2: DiffConstraint, po: PartialOrder) -> bool:
    # d1 is implied by d2 when d1's later stage precedes d2's, d2's earlier
    # stage precedes d1's, and d1's separation span is no taller.
    return (
        po.le(d1.later, d2.later)
        and po.le(d2.earlier, d1.earlier)
        and d1.later_part[0] <= d2.later_part[0]
    )


def prune(cs: ConstraintSystem, po: PartialOrder, dag: StencilDAG) -> ConstraintSystem:
    """Drop alternatives whose satisfaction already guarantees a surviving
    sibling; the optimal objective over branches is unchanged.

    The reachability rule proposes eliminations cheaply; every elimination is
    confirmed by the longest-path oracle, and a full oracle sweep follows, so
    the oracle verdict is authoritative either way.
    """
    topo = {name: i for i, name in enumerate(dag.topo_order())}

    def key_pos(var: str) -> int:
        pos = [topo[s.name] for s in dag.stages if dag.schedule_key(s.name) == var]
        return min(pos) if pos else 1 << 30

    new_groups: list[OrGroup] = []
    for group in cs.or_groups:
        alive = list(group)
        ordered = sorted(
            group,
            key=lambda d: (-d.bound, -key_pos(d.later), -key_pos(d.earlier), d.later, d.earlier),
        )
        # cheap reachability-based candidates first, oracle-confirmed
        for d2 in ordered:
            if d2 not in alive or len(alive) == 1:
                continue
            for d1 in alive:
                if d1 is d2:
                    continue
                if _syntactically_relaxed(d1, d2, po) and entails(cs.hard, d2, d1):
                    alive.remove(d2)
                    break
        # authoritative sweep
        for d2 in ordered:
            if d2 not in alive or len(alive) == 1:
                continue
            for d1 in alive:
                if d1 is d2:
                    continue
                if entails(cs.hard, d2, d1):
                    alive.remove(d2)
                    break
        new_groups.append(tuple(d for d in group if d in alive))
    return ConstraintSystem(cs.hard, tuple(new_groups))


def build_system(dag: StencilDAG, mem, pruned: bool = True) -> ConstraintSystem:
    po = partial_order_of(dag)
    cs = ConstraintSystem(tuple(gen_dependency(dag)), tuple(gen_contention(dag, mem, po)))
    if pruned:
        cs = prune(cs, po, dag)
    return cs


def partial_order_of(dag: StencilDAG) -> PartialOrder:
    from .ir import partial_order

    return partial_order(dag)
