"""Pipeline DAG, reachability, and the two scheduling rewrites:
relay insertion (single-consumer linearization) and line coalescing."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

from .errors import CoalesceUnavailableError


@dataclass(frozen=True)
class Stage:
    name: str
    role: str  # input | interior | output
    expr: object = None  # dsl.Expr; None for the input stage
    virtual_group: Optional[str] = None  # physical stage this virtual alias belongs to
    virtual_k: int = 0  # intra-block row offset class (reads at offset k*W)
    pattern_group: Optional[str] = None  # consumers sharing one read pattern and start


@dataclass(frozen=True)
class Edge:
    producer: str
    consumer: str
    sh: int  # stencil height: lines when g == 1, blocks when g > 1
    sw: int
    g: int = 1  # lines packed per memory block of the producer's buffer
    k: int = 0  # consumer's intra-block row offset class


@dataclass(frozen=True)
class StencilDAG:
    name: str
    stages: tuple[Stage, ...]
    edges: tuple[Edge, ...]
    width: int
    coalesced: bool = False

    # -- lookups ------------------------------------------------------------

    def stage(self, name: str) -> Stage:
        for s in self.stages:
            if s.name == name:
                return s
        # a split stage is addressable by its physical (group) name
        for s in self.stages:
            if s.virtual_group == name:
                return s
        raise KeyError(name)

    def schedule_key(self, name: str) -> str:
        """Canonical schedule variable of a stage: pattern-merged consumers and
        virtual aliases of one physical stage share a single start cycle."""
        s = self.stage(name)
        if s.pattern_group is not None:
            return s.pattern_group
        if s.virtual_group is not None:
            return s.virtual_group
        return s.name

    def physical_name(self, name: str) -> str:
        s = self.stage(name)
        return s.virtual_group if s.virtual_group is not None else s.name

    def physical_names(self) -> list[str]:
        """Physical stage names in declaration order (virtual aliases collapsed)."""
        seen: list[str] = []
        for s in self.stages:
            p = s.virtual_group if s.virtual_group is not None else s.name
            if p not in seen:
                seen.append(p)
        return seen

    @property
    def input_name(self) -> str:
        return next(s.name for s in self.stages if s.role == "input")

    def output_names(self) -> list[str]:
        return [s.name for s in self.stages if s.role == "output"]

    def out_edges(self, producer: str) -> list[Edge]:
        return [e for e in self.edges if e.producer == producer]

    def in_edges(self, consumer: str) -> list[Edge]:
        return [e for e in self.edges if e.consumer == consumer]

    def producers(self) -> list[str]:
        """Physical stages that own a line buffer (have at least one consumer)."""
        out = []
        for p in self.physical_names():
            if any(self.physical_name(e.producer) == p for e in self.edges):
                out.append(p)
        return out

    def buffer_edges(self, producer: str) -> list[Edge]:
        """Edges reading the given physical producer's buffer."""
        return [e for e in self.edges if self.physical_name(e.producer) == producer]

    def find_cycle(self) -> Optional[list[str]]:
        adjacency: dict[str, list[str]] = {s.name: [] for s in self.stages}
        for e in self.edges:
            adjacency[e.producer].append(e.consumer)
        state: dict[str, int] = {}
        path: list[str] = []

        def visit(v: str) -> Optional[list[str]]:
            state[v] = 1
            path.append(v)
            for w in adjacency[v]:
                if state.get(w, 0) == 1:
                    return path[path.index(w) :] + [w]
                if state.get(w, 0) == 0:
                    found = visit(w)
                    if found:
                        return found
            path.pop()
            state[v] = 2
            return None

        for s in self.stages:
            if state.get(s.name, 0) == 0:
                found = visit(s.name)
                if found:
                    return found
        return None

    def topo_order(self) -> list[str]:
        members: dict[str, list[str]] = {}
        for s in self.stages:
            members.setdefault(s.name, []).append(s.name)
            if s.virtual_group is not None:
                members.setdefault(s.virtual_group, []).append(s.name)
        adjacency: dict[str, list[str]] = {s.name: [] for s in self.stages}
        indeg = {s.name: 0 for s in self.stages}
        for e in self.edges:
            for pn in members[e.producer]:
                adjacency[pn].append(e.consumer)
                indeg[e.consumer] += 1
        ready = [s.name for s in self.stages if indeg[s.name] == 0]
        order: list[str] = []
        while ready:
            v = ready.pop(0)
            order.append(v)
            for w in adjacency[v]:
                indeg[w] -= 1
                if indeg[w] == 0:
                    ready.append(w)
        if len(order) != len(self.stages):
            raise AssertionError("cycle in DAG")
        return order


@dataclass(frozen=True)
class PartialOrder:
    """Reachability over canonical schedule variables: le(a, b) iff a == b or
    some dependency path runs from a to b."""

    reach: dict[str, frozenset[str]]

    def le(self, a: str, b: str) -> bool:
        return a == b or b in self.reach.get(a, frozenset())

    def strictly(self, a: str, b: str) -> bool:
        return a != b and b in self.reach.get(a, frozenset())


def partial_order(dag: StencilDAG) -> PartialOrder:
    keys: list[str] = []
    for s in dag.stages:
        k = dag.schedule_key(s.name)
        if k not in keys:
            keys.append(k)
    adjacency: dict[str, set[str]] = {k: set() for k in keys}
    for e in dag.edges:
        a, b = dag.schedule_key(e.producer), dag.schedule_key(e.consumer)
        if a != b:
            adjacency[a].add(b)

    reach: dict[str, set[str]] = {k: set() for k in keys}

    def visit(v: str) -> set[str]:
        if reach[v]:
            return reach[v]
        acc: set[str] = set()
        for w in adjacency[v]:
            acc.add(w)
            acc |= visit(w)
        reach[v] = acc
        return acc

    for k in keys:
        visit(k)
    return PartialOrder({k: frozenset(v) for k, v in reach.items()})


# ---------------------------------------------------------------------------
# Linearization: relay stages so every buffer sees one read pattern
# ---------------------------------------------------------------------------


def _footprint(e: Edge, width: int) -> int:
    return (e.sh - 1) * width + e.sw


def linearize(dag: StencilDAG) -> StencilDAG:
    """Rewrite so every producer's consumers read with one shared pattern.

    One direct consumer (the keeper) is retained per buffer; every other
    consumer is rerouted through a relay stage that mirrors the keeper's read
    pattern cycle-for-cycle (shared start) and re-emits the producer's pixels
    unchanged. The keeper must not depend on any rerouted consumer, so keepers
    are chosen among order-minimal consumers, smallest read footprint first.
    Idempotent: already-grouped buffers are left alone.
    """
    from .dsl import Tap, rename_taps  # local import keeps module dependency one-way

    po = partial_order(dag)
    stages = {s.name: s for s in dag.stages}
    decl_index = {s.name: i for i, s in enumerate(dag.stages)}
    new_stages: list[Stage] = list(dag.stages)
    edges: list[Edge] = list(dag.edges)

    def swap_stage(old: Stage, new: Stage):
        stages[new.name] = new
        new_stages[new_stages.index(old)] = new

    for producer in [s.name for s in dag.stages]:
        outs = [e for e in edges if e.producer == producer]
        if len(outs) <= 1:
            continue
        groups = {stages[e.consumer].pattern_group for e in outs if e.consumer in stages}
        if len(groups) == 1 and None not in groups:
            continue  # already one merged pattern

        def keeper_rank(e: Edge):
            others = [o.consumer for o in outs if o is not e]
            dominated = any(
                po.strictly(dag.schedule_key(c), dag.schedule_key(e.consumer)) for c in others
            )
            return (dominated, _footprint(e, dag.width), decl_index.get(e.consumer, 1 << 30))

        keeper = min(outs, key=keeper_rank)
        keeper_name = keeper.consumer
        group = keeper_name

        replaced: list[Edge] = []
        for e in outs:
            if e is keeper:
                continue
            relay_name = f"{producer}~{e.consumer}"
            relay = Stage(
                relay_name,
                "interior",
                Tap(producer, 0, 0),
                pattern_group=group,
            )
            new_stages.append(relay)
            stages[relay_name] = relay
            replaced.append(e)
            edges.append(Edge(producer, relay_name, keeper.sh, keeper.sw))
            edges.append(Edge(relay_name, e.consumer, e.sh, e.sw))
            consumer = stages[e.consumer]
            swap_stage(
                consumer,
                replace(consumer, expr=rename_taps(consumer.expr, {producer: relay_name})),
            )
        for e in replaced:
            edges.remove(e)

        k = stages[keeper_name]
        swap_stage(k, replace(k, pattern_group=group))

    return StencilDAG(dag.name, tuple(new_stages), tuple(edges), dag.width, dag.coalesced)


# ---------------------------------------------------------------------------
# Line coalescing: pack g adjacent lines per block, split readers into
# per-offset virtual stages
# ---------------------------------------------------------------------------


def coalesce(dag: StencilDAG, mem, strict: bool = False) -> StencilDAG:
    """Rewrite consumers of multi-line-per-block buffers into virtual stages.

    For a buffer packing g lines per block, a reader of height SH is replaced
    by K = min(g, SH) virtual stages; virtual k covers the window rows
    congruent to k mod g, hence spans ceil((SH - k) / g) consecutive blocks
    and reads at a fixed offset of k*W pixels inside each block. All virtual
    stages of one physical stage share its start cycle.
    """
    g_of = {p: mem.g_for(p, dag.width) for p in dag.physical_names()}
    if all(g <= 1 for g in g_of.values()):
        if strict:
            raise CoalesceUnavailableError(
                "no buffer can hold more than one line (ports or block capacity limit)"
            )
        return dag

    split_k: dict[str, int] = {}
    for s in dag.stages:
        k_max = 1
        for e in dag.in_edges(s.name):
            k_max = max(k_max, min(g_of[e.producer], e.sh))
        if k_max > 1:
            split_k[s.name] = k_max

    new_stages: list[Stage] = []
    for s in dag.stages:
        if s.name in split_k:
            for k in range(split_k[s.name]):
                new_stages.append(
                    Stage(
                        f"{s.name}~{k}",
                        s.role,
                        s.expr,
                        virtual_group=s.name,
                        virtual_k=k,
                        pattern_group=s.pattern_group,
                    )
                )
        else:
            new_stages.append(s)

    new_edges: list[Edge] = []
    for e in dag.edges:
        g = g_of[e.producer]
        if e.consumer in split_k:
            k_edge = min(g, e.sh)
            for k in range(k_edge):
                h = math.ceil((e.sh - k) / g)
                new_edges.append(Edge(e.producer, f"{e.consumer}~{k}", h, e.sw, g=g, k=k))
        else:
            h = math.ceil(e.sh / g)
            new_edges.append(Edge(e.producer, e.consumer, h, e.sw, g=g, k=0))

    return StencilDAG(dag.name, tuple(new_stages), tuple(new_edges), dag.width, coalesced=True)


def dump_dag(dag: StencilDAG) -> str:
    """Stable text form of the DAG (for --emit=dag and golden tests)."""
    lines = [f"pipeline {dag.name} width={dag.width}"]
    for s in dag.stages:
        attrs = [f"role={s.role}"]
        if s.virtual_group is not None:
            attrs.append(f"group={s.virtual_group}")
            attrs.append(f"offset_lines={s.virtual_k}")
        if s.pattern_group is not None:
            attrs.append(f"pattern={s.pattern_group}")
        lines.append(f"stage {s.name} " + " ".join(attrs))
    for e in dag.edges:
        extra = f" g={e.g} k={e.k}" if e.g != 1 or e.k != 0 else ""
        lines.append(f"edge {e.producer} -> {e.consumer} sh={e.sh} sw={e.sw}{extra}")
    return "\n".join(lines) + "\n"
