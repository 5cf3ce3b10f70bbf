"""Exact schedule optimization over the disjunctive constraint system.

Each branch (one alternative per group) is a difference-constraint program
whose objective, total buffered delay, is linearized with one auxiliary
variable per buffer; its LP optimum sits on an integral vertex and is
certified integral after rounding. Branches are explored depth-first with an
LP lower bound against the incumbent; objective ties are broken by the
lexicographically smallest start vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from .constraints import ConstraintSystem, DiffConstraint, longest_path
from .errors import BlockTooSmallError, InfeasibleError
from .ir import StencilDAG
from .models import MemorySpec


@dataclass(frozen=True)
class Schedule:
    start: dict[str, int]  # physical stage -> start cycle
    branch: tuple[int, ...]  # chosen alternative per group
    objective_cycles: int  # sum over buffers of max consumer delay
    objective_pixels: int  # line-rounded buffered pixel total

    def __getitem__(self, stage: str) -> int:
        return self.start[stage]


@dataclass(frozen=True)
class BufferAlloc:
    stage: str
    delay: int  # max consumer start minus producer start
    lines: int
    g: int
    blocks: int
    pixels: int

    @property
    def capacity_lines(self) -> int:
        return self.blocks * self.g


@dataclass(frozen=True)
class BufferPlan:
    buffers: tuple[BufferAlloc, ...]
    width: int

    @property
    def total_pixels(self) -> int:
        return sum(b.pixels for b in self.buffers)

    @property
    def total_blocks(self) -> int:
        return sum(b.blocks for b in self.buffers)

    def buffer(self, stage: str) -> BufferAlloc:
        for b in self.buffers:
            if b.stage == stage:
                return b
        raise KeyError(stage)


@dataclass
class _Problem:
    variables: list[str]  # canonical schedule variables, declaration order
    anchor: str
    producers: list[tuple[str, list[str]]]  # (buffer var, consumer vars)
    hard: tuple[DiffConstraint, ...]

    @property
    def nvars(self) -> int:
        return len(self.variables)


def _build_problem(cs: ConstraintSystem, dag: StencilDAG) -> _Problem:
    variables: list[str] = []
    for s in dag.stages:
        k = dag.schedule_key(s.name)
        if k not in variables:
            variables.append(k)
    anchor = dag.schedule_key(dag.input_name)
    producers: list[tuple[str, list[str]]] = []
    for p in dag.producers():
        consumers: list[str] = []
        for e in dag.buffer_edges(p):
            v = dag.schedule_key(e.consumer)
            if v not in consumers:
                consumers.append(v)
        producers.append((dag.schedule_key(p), consumers))
    return _Problem(variables, anchor, producers, cs.hard)


def _lp(problem: _Problem, extra: list[DiffConstraint], minimize_var: Optional[int] = None,
        objective_cap: Optional[int] = None, fixed: Optional[dict[int, int]] = None):
    """Solve min(sum of buffer-delay maxima) or min(single variable) over the
    difference constraints. Returns (status_ok, objective, x) with x covering
    schedule variables then one auxiliary per buffer."""
    idx = {v: i for i, v in enumerate(problem.variables)}
    n = problem.nvars
    m = len(problem.producers)
    rows: list[list[float]] = []
    rhs: list[float] = []

    def add_row(coeffs: dict[int, float], ub: float):
        row = [0.0] * (n + m)
        for j, c in coeffs.items():
            row[j] = c
        rows.append(row)
        rhs.append(ub)

    for c in list(problem.hard) + list(extra):
        # S_earlier - S_later <= -bound
        add_row({idx[c.earlier]: 1.0, idx[c.later]: -1.0}, -float(c.bound))
    for bi, (p, consumers) in enumerate(problem.producers):
        for cvar in consumers:
            # S_c - S_p - M_b <= 0
            add_row({idx[cvar]: 1.0, idx[p]: -1.0, n + bi: -1.0}, 0.0)
    if objective_cap is not None:
        row = [0.0] * (n + m)
        for bi in range(m):
            row[n + bi] = 1.0
        rows.append(row)
        rhs.append(float(objective_cap))

    cobj = [0.0] * (n + m)
    if minimize_var is None:
        for bi in range(m):
            cobj[n + bi] = 1.0
    else:
        cobj[minimize_var] = 1.0

    bounds = []
    for i, v in enumerate(problem.variables):
        if fixed is not None and i in fixed:
            bounds.append((float(fixed[i]), float(fixed[i])))
        elif v == problem.anchor:
            bounds.append((0.0, 0.0))
        else:
            bounds.append((0.0, None))
    bounds.extend([(0.0, None)] * m)

    res = linprog(cobj, A_ub=np.array(rows) if rows else None,
                  b_ub=np.array(rhs) if rhs else None, bounds=bounds, method="highs")
    if not res.success:
        return False, None, None
    return True, res.fun, res.x


def _certify_schedule(problem: _Problem, extra: list[DiffConstraint], x) -> Optional[dict[str, int]]:
    """Round the LP point and verify every constraint exactly in integers.

    Vertices of this polytope are integral, so nearest-integer rounding is
    expected to verify; ceiling everything is the fallback (raising all
    starts by the fractional part cannot break an integer lower bound)."""
    cons = list(problem.hard) + list(extra)

    def verify(vals: dict[str, int]) -> bool:
        if vals[problem.anchor] != 0:
            return False
        return all(vals[c.later] - vals[c.earlier] >= c.bound for c in cons)

    nearest = {v: int(round(float(x[i]))) for i, v in enumerate(problem.variables)}
    if verify(nearest):
        return nearest
    ceiled = {v: int(math.ceil(float(x[i]) - 1e-9)) for i, v in enumerate(problem.variables)}
    if verify(ceiled):
        return ceiled
    return None


def _objective_cycles(problem: _Problem, vals: dict[str, int]) -> int:
    total = 0
    for p, consumers in problem.producers:
        total += max(vals[c] - vals[p] for c in consumers)
    return total


def _lex_canonical(problem: _Problem, extra: list[DiffConstraint], opt: int) -> Optional[dict[str, int]]:
    """Lexicographically smallest integer optimum: fix variables one by one."""
    fixed: dict[int, int] = {}
    for i, v in enumerate(problem.variables):
        ok, fun, x = _lp(problem, extra, minimize_var=i, objective_cap=opt, fixed=fixed)
        if not ok:
            return None
        val = int(math.ceil(float(x[i]) - 1e-6))
        fixed[i] = val
    ok, fun, x = _lp(problem, extra, objective_cap=opt, fixed=fixed)
    if not ok:
        return None
    vals = {v: fixed[i] for i, v in enumerate(problem.variables)}
    for c in list(problem.hard) + list(extra):
        if vals[c.later] - vals[c.earlier] < c.bound:
            return None
    if _objective_cycles(problem, vals) > opt:
        return None
    return vals


_TIE_CAP = 64


def solve(cs: ConstraintSystem, dag: StencilDAG, mem: MemorySpec) -> Schedule:
    """Optimal start cycles over all alternative combinations.

    Groups are explored smallest-first with LP lower-bound pruning; ties on
    the objective are resolved toward the lexicographically smallest start
    vector in stage declaration order.
    """
    problem = _build_problem(cs, dag)
    for g in cs.or_groups:
        if not g:
            raise InfeasibleError("empty contention group")

    group_order = sorted(range(len(cs.or_groups)), key=lambda i: (len(cs.or_groups[i]), i))
    groups = [cs.or_groups[i] for i in group_order]

    best_obj: Optional[int] = None
    tied: list[tuple[tuple[int, ...], dict[str, int]]] = []

    def entailed_pick(gi: int, chosen: list[DiffConstraint]) -> Optional[int]:
        # a group whose alternative is already forced by what we hold needs
        # no branching; this collapses the symmetric subsets one buffer spawns
        cons = list(problem.hard) + chosen
        for di, d in enumerate(groups[gi]):
            if longest_path(cons, d.earlier, d.later) >= d.bound:
                return di
        return None

    def dfs(gi: int, chosen: list[DiffConstraint], picks: list[int], lp):
        nonlocal best_obj
        ok, fun, x = lp
        if not ok:
            return
        lower = int(math.ceil(fun - 1e-6))
        if best_obj is not None and lower > best_obj:
            return
        if gi == len(groups):
            vals = _certify_schedule(problem, chosen, x)
            if vals is None:
                return
            obj = _objective_cycles(problem, vals)
            if best_obj is None or obj < best_obj:
                best_obj = obj
                tied.clear()
            if obj == best_obj and len(tied) < _TIE_CAP:
                tied.append((tuple(picks), vals))
            return
        forced = entailed_pick(gi, chosen)
        if forced is not None:
            picks.append(forced)
            dfs(gi + 1, chosen, picks, lp)
            picks.pop()
            return
        for di, d in enumerate(groups[gi]):
            chosen.append(d)
            picks.append(di)
            dfs(gi + 1, chosen, picks, _lp(problem, chosen))
            picks.pop()
            chosen.pop()

    dfs(0, [], [], _lp(problem, []))
    if best_obj is None or not tied:
        raise InfeasibleError("no alternative combination admits a schedule")

    # canonicalize each tied branch, pick the lexicographically smallest
    decl_vars = problem.variables
    best_vals: Optional[dict[str, int]] = None
    best_picks: Optional[tuple[int, ...]] = None
    for picks, rough in tied:
        chosen = [groups[i][picks[i]] for i in range(len(groups))]
        vals = _lex_canonical(problem, chosen, best_obj) or rough
        if _objective_cycles(problem, vals) > best_obj:
            vals = rough
        key = tuple(vals[v] for v in decl_vars)
        if best_vals is None or key < tuple(best_vals[v] for v in decl_vars):
            best_vals = vals
            best_picks = picks
        elif key == tuple(best_vals[v] for v in decl_vars) and picks < best_picks:
            best_picks = picks
    assert best_vals is not None

    # map branch picks back to the original group order
    picks_by_original = [0] * len(cs.or_groups)
    for pos, orig in enumerate(group_order):
        picks_by_original[orig] = best_picks[pos]

    start = {p: best_vals[dag.schedule_key(p)] for p in dag.physical_names()}
    w = dag.width
    pixels = 0
    for p, consumers in problem.producers:
        delay = max(best_vals[c] - best_vals[p] for c in consumers)
        pixels += math.ceil(delay / w) * w

    return Schedule(
        start=start,
        branch=tuple(picks_by_original),
        objective_cycles=best_obj,
        objective_pixels=pixels,
    )


def plan_buffers(schedule: Schedule, dag: StencilDAG, mem: MemorySpec) -> BufferPlan:
    """Per-buffer allocation from the schedule: lines to retain, blocks after
    packing g lines per block, and the resulting pixel capacity."""
    w = dag.width
    if mem.block_bits < w * mem.pixel_bits:
        raise BlockTooSmallError(
            f"block of {mem.block_bits} bits cannot hold one {w}-pixel line"
        )
    allocs = []
    for p in dag.producers():
        s_p = schedule.start[dag.physical_name(p)]
        delay = max(
            schedule.start[dag.physical_name(e.consumer)] - s_p for e in dag.buffer_edges(p)
        )
        lines = math.ceil(delay / w)
        g = mem.g_for(p, w)
        blocks = math.ceil(lines / g)
        allocs.append(
            BufferAlloc(
                stage=p,
                delay=delay,
                lines=lines,
                g=g,
                blocks=blocks,
                pixels=blocks * g * w,
            )
        )
    return BufferPlan(tuple(allocs), w)
