"""End-to-end compile driver shared by the CLI, the baselines, and the DSE."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import constraints as cm
from .dsl import StencilProgram, lower_to_dag
from .ir import StencilDAG, coalesce, linearize, partial_order
from .models import MemorySpec
from .simulator import SimConfig, SimReport, simulate
from .solver import BufferPlan, Schedule, plan_buffers, solve


@dataclass
class CompiledDesign:
    program: StencilProgram
    dag: StencilDAG  # physical stages (relays included when linearized)
    scheduling_dag: StencilDAG  # DAG the constraints were generated from
    system: cm.ConstraintSystem
    unpruned: cm.ConstraintSystem
    schedule: Schedule
    plan: BufferPlan
    report: Optional[SimReport]
    compile_seconds: float

    @property
    def valid(self) -> bool:
        return self.report is not None and self.report.valid


def validation_image(width: int, height: int, seed: int = 0) -> np.ndarray:
    return np.random.default_rng(seed).integers(0, 256, size=(height, width), dtype=np.uint8)


def compile_pipeline(
    program: StencilProgram,
    mem: MemorySpec,
    *,
    linearized: bool = False,
    validate: bool = True,
    frames: int = 1,
    seed: int = 0,
) -> CompiledDesign:
    """Parse-to-plan pipeline: lower, (optionally) linearize, coalesce, build
    and prune constraints, solve, then gate the result through the simulator."""
    if program.width is None or program.height is None:
        raise ValueError("program width/height must be set before compiling")
    t0 = time.perf_counter()
    dag = lower_to_dag(program)
    if linearized:
        dag = linearize(dag)
    sdag = coalesce(dag, mem)
    po = partial_order(sdag)
    hard = tuple(cm.gen_dependency(sdag))
    groups = tuple(cm.gen_contention(sdag, mem, po))
    unpruned = cm.ConstraintSystem(hard, groups)
    system = cm.prune(unpruned, po, sdag)
    schedule = solve(system, sdag, mem)
    plan = plan_buffers(schedule, dag, mem)
    elapsed = time.perf_counter() - t0

    report = None
    if validate:
        imgs = tuple(validation_image(program.width, program.height, seed + i) for i in range(frames))
        report = simulate(SimConfig(dag, schedule, plan, mem, imgs, frames))
    return CompiledDesign(
        program=program,
        dag=dag,
        scheduling_dag=sdag,
        system=system,
        unpruned=unpruned,
        schedule=schedule,
        plan=plan,
        report=report,
        compile_seconds=elapsed,
    )


def schedule_csv(design: CompiledDesign) -> str:
    """stage,start_cycle,buffer_lines,buffer_blocks,buffer_pixels rows in
    declaration order; stages without a buffer report zeros."""
    lines = ["stage,start_cycle,buffer_lines,buffer_blocks,buffer_pixels"]
    plan_by_stage = {b.stage: b for b in design.plan.buffers}
    for name in design.dag.physical_names():
        s = design.schedule.start[name]
        b = plan_by_stage.get(name)
        if b is None:
            lines.append(f"{name},{s},0,0,0")
        else:
            lines.append(f"{name},{s},{b.lines},{b.blocks},{b.pixels}")
    return "\n".join(lines) + "\n"
