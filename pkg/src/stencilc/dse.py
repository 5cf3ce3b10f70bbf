"""Design space exploration: sweep per-buffer memory styles, keep the
Pareto-optimal (area, power) designs."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

from .compiler import compile_pipeline
from .dsl import StencilProgram, lower_to_dag, parse_program, print_program
from .models import CostReport, MemorySpec, cost

SWEEP_CAP = 16  # buffered stages; 2**cap design points ceiling

_CACHE: dict[tuple, "SweepPoint"] = {}


@dataclass(frozen=True)
class SweepPoint:
    config: int  # style vector, bit i = buffered stage i uses coalescing
    styles: tuple[str, ...]
    valid: bool
    reason: str
    report: Optional[CostReport]


def _style_map(buffered: list[str], config: int) -> dict[str, str]:
    return {s: ("dplc" if (config >> i) & 1 else "dp") for i, s in enumerate(buffered)}


def _evaluate(source: str, width: int, height: int, mem: MemorySpec, clock_hz: float, config: int) -> SweepPoint:
    program = parse_program(source, width, height)
    dag = lower_to_dag(program)
    buffered = dag.producers()
    styles = _style_map(buffered, config)
    style_vec = tuple(styles[s] for s in buffered)
    try:
        design = compile_pipeline(program, mem.with_style(styles), validate=True)
    except Exception as exc:  # per-point failures are data, not crashes
        return SweepPoint(config, style_vec, False, f"{type(exc).__name__}: {exc}", None)
    if not design.valid:
        r = design.report
        return SweepPoint(
            config,
            style_vec,
            False,
            f"simulation: ports={r.port_violations} avail={r.availability_violations} functional={r.functional_match}",
            None,
        )
    report = cost(design.plan, design.report, mem, clock_hz)
    return SweepPoint(config, style_vec, True, "", report)


def sweep(
    program: StencilProgram,
    width: int,
    height: int,
    mem: MemorySpec,
    clock_hz: float = 100e6,
    jobs: int = 1,
) -> list[SweepPoint]:
    """Evaluate every per-buffer style combination; invalid or infeasible
    points are recorded with their reason rather than dropped."""
    program = program.with_size(width, height)
    dag = lower_to_dag(program)
    buffered = dag.producers()
    if len(buffered) > SWEEP_CAP:
        raise ValueError(f"{len(buffered)} buffered stages exceed the sweep cap of {SWEEP_CAP}")
    source = print_program(program)
    configs = list(range(2 ** len(buffered)))

    key_base = (source, width, height, mem.ports, mem.block_bits, clock_hz)
    points: list[Optional[SweepPoint]] = [None] * len(configs)
    todo = []
    for c in configs:
        cached = _CACHE.get(key_base + (c,))
        if cached is not None:
            points[c] = cached
        else:
            todo.append(c)

    if jobs > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(
                pool.map(_evaluate, *zip(*[(source, width, height, mem, clock_hz, c) for c in todo]))
            )
        for c, pt in zip(todo, results):
            points[c] = pt
    else:
        for c in todo:
            points[c] = _evaluate(source, width, height, mem, clock_hz, c)

    for c in configs:
        _CACHE[key_base + (c,)] = points[c]
    return [p for p in points if p is not None]


def pareto(points: list[SweepPoint]) -> list[SweepPoint]:
    """Non-dominated valid points under (area, power), both minimized; a
    dominator must be at least as good on both axes and better on one.
    Deterministic order by ascending area, then power, then config."""
    valid = [p for p in points if p.valid and p.report is not None]

    def dominated(p: SweepPoint) -> bool:
        for q in valid:
            if q is p:
                continue
            if (
                q.report.area_um2 <= p.report.area_um2
                and q.report.power_mw <= p.report.power_mw
                and (
                    q.report.area_um2 < p.report.area_um2
                    or q.report.power_mw < p.report.power_mw
                )
            ):
                return True
        return False

    frontier = [p for p in valid if not dominated(p)]
    frontier.sort(key=lambda p: (p.report.area_um2, p.report.power_mw, p.config))
    return frontier


def points_csv(points: list[SweepPoint]) -> str:
    lines = ["config,pixels,blocks,bits,area,power,valid"]
    for p in sorted(points, key=lambda p: p.config):
        if p.report is None:
            lines.append(f"{p.config},,,,,,{int(p.valid)}")
        else:
            r = p.report
            lines.append(
                f"{p.config},{r.total_pixels},{r.total_blocks},{r.total_bits},"
                f"{r.area_um2:.3f},{r.power_mw:.6f},{int(p.valid)}"
            )
    return "\n".join(lines) + "\n"
