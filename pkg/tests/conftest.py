"""Shared fixtures and independent oracles used across the suite."""

from __future__ import annotations

import math

import numpy as np
import pytest

from stencilc import dsl, models
from stencilc.constraints import ConstraintSystem
from stencilc.ir import StencilDAG


@pytest.fixture
def mem_dp():
    return models.default_memory_spec(ports=2, block_bits=36864, style="dp")


@pytest.fixture
def mem_sp():
    return models.default_memory_spec(ports=1, block_bits=36864, style="sp")


def tiny_mem(width: int, lines_per_block: int = 1, ports: int = 2, style: str = "dp"):
    return models.MemorySpec(
        ports=ports, block_bits=lines_per_block * width * 8, pixel_bits=8, style=style
    )


def program(source: str, width: int, height: int):
    return dsl.parse_program(source, width, height)


# ---------------------------------------------------------------------------
# Independent oracle 1: exhaustive integer search over a constraint system
# ---------------------------------------------------------------------------


def exhaustive_solve(cs: ConstraintSystem, dag: StencilDAG, s_max: int):
    """Minimum total buffered delay by brute force over integer start vectors
    in [0, s_max], one alternative per group enforced at assignment time.
    Independent of the LP path: plain depth-first search with bound pruning.
    Returns (objective, assignment) or (None, None)."""
    variables: list[str] = []
    for s in dag.stages:
        k = dag.schedule_key(s.name)
        if k not in variables:
            variables.append(k)
    anchor = dag.schedule_key(dag.input_name)
    producers = []
    for p in dag.producers():
        consumers = sorted({dag.schedule_key(e.consumer) for e in dag.buffer_edges(p)})
        producers.append((dag.schedule_key(p), consumers))

    idx = {v: i for i, v in enumerate(variables)}
    n = len(variables)
    lower_cons = [[] for _ in range(n)]  # (earlier_idx, bound) rows for var as later
    upper_cons = [[] for _ in range(n)]  # (later_idx, bound) rows for var as earlier
    for c in cs.hard:
        lower_cons[idx[c.later]].append((idx[c.earlier], c.bound))
        upper_cons[idx[c.earlier]].append((idx[c.later], c.bound))
    groups = [
        [(idx[d.later], idx[d.earlier], d.bound) for d in g] for g in cs.or_groups
    ]

    best = {"obj": None, "vec": None}
    vals = [None] * n

    def partial_objective() -> int:
        total = 0
        for p, consumers in producers:
            pi = vals[idx[p]]
            if pi is None:
                continue
            delays = [vals[idx[c]] - pi for c in consumers if vals[idx[c]] is not None]
            if delays:
                total += max(0, max(delays))
        return total

    def groups_alive() -> bool:
        for g in groups:
            sat = False
            open_ = False
            for li, ei, b in g:
                lv, ev = vals[li], vals[ei]
                if lv is None or ev is None:
                    open_ = True
                    continue
                if lv - ev >= b:
                    sat = True
                    break
            if not sat and not open_:
                return False
        return True

    def assign(i: int):
        if i == n:
            obj = partial_objective()
            if best["obj"] is None or obj < best["obj"]:
                best["obj"] = obj
                best["vec"] = {v: vals[idx[v]] for v in variables}
            return
        lo, hi = 0, s_max
        if variables[i] == anchor:
            lo = hi = 0
        for ei, b in lower_cons[i]:
            if vals[ei] is not None:
                lo = max(lo, vals[ei] + b)
        for li, b in upper_cons[i]:
            if vals[li] is not None:
                hi = min(hi, vals[li] - b)
        for v in range(lo, hi + 1):
            vals[i] = v
            if groups_alive():
                obj = partial_objective()
                if best["obj"] is None or obj < best["obj"]:
                    assign(i + 1)
            vals[i] = None

    assign(0)
    return best["obj"], best["vec"]


# ---------------------------------------------------------------------------
# Independent oracle 2: literal per-cycle line/block access counting
# ---------------------------------------------------------------------------


def first_line(t: int, start: int, width: int) -> int:
    return math.ceil((t - start) / width)


def access_lines(t: int, start: int, sh: int, width: int, rows: int):
    """Lines a stage touches at cycle t (1-indexed), empty outside its run."""
    if t <= start or t > start + rows * width:
        return []
    base = first_line(t, start, width)
    return list(range(base, base + sh))


def per_cycle_block_counts(dag, schedule, plan, frames, height):
    """Yield (buffer, cycle, block, count) by literal enumeration of every
    cycle; merged-pattern readers count once."""
    width = dag.width
    rows = frames * height
    t_end = max(schedule.start.values()) + frames * width * height
    gs = {b.stage: b.g for b in plan.buffers}
    for p in dag.producers():
        seen = set()
        readers = []
        for e in dag.buffer_edges(p):
            s = dag.stage(e.consumer)
            key = s.pattern_group or s.name
            if key in seen:
                continue
            seen.add(key)
            readers.append((schedule.start[dag.physical_name(e.consumer)], e.sh))
        g = gs[p]
        sp = schedule.start[dag.physical_name(p)]
        for t in range(1, t_end + 1):
            counts: dict[int, int] = {}
            for line in access_lines(t, sp, 1, width, rows):
                blk = (line - 1) // g + 1
                counts[blk] = counts.get(blk, 0) + 1
            for s_c, sh in readers:
                for line in access_lines(t, s_c, sh, width, rows):
                    blk = (line - 1) // g + 1
                    counts[blk] = counts.get(blk, 0) + 1
            for blk, k in counts.items():
                yield p, t, blk, k


def assert_contention_free(dag, schedule, plan, ports, frames=1, height=8):
    for p, t, blk, k in per_cycle_block_counts(dag, schedule, plan, frames, height):
        assert k <= ports, f"buffer {p}: block {blk} serves {k} accesses at cycle {t}"


def random_image(width: int, height: int, seed: int = 0) -> np.ndarray:
    return np.random.default_rng(seed).integers(0, 256, size=(height, width), dtype=np.uint8)
