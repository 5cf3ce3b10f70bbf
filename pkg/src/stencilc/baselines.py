"""Competitor compilation strategies, all driven through our own optimizer so
differences measure the strategy, not solver quality."""

from __future__ import annotations

from .compiler import CompiledDesign, compile_pipeline
from .dsl import StencilProgram, lower_to_dag
from .errors import UnsupportedMemoryError
from .models import CostReport, MemorySpec, fifo_cost


def compile_ours(
    program: StencilProgram, mem: MemorySpec, *, validate: bool = True, seed: int = 0
) -> CompiledDesign:
    """Our schedule under whatever style the memory spec asks for."""
    return compile_pipeline(program, mem, validate=validate, seed=seed)


def compile_darkroom(
    program: StencilProgram, mem: MemorySpec, *, validate: bool = True, seed: int = 0
) -> CompiledDesign:
    """Relay-linearized pipeline on dual-port blocks, no coalescing: isolates
    the buffering overhead of forcing one read pattern per buffer."""
    if mem.ports < 2:
        raise UnsupportedMemoryError("linearized buffers assume dual-port blocks")
    return compile_pipeline(
        program, mem.with_style("dp"), linearized=True, validate=validate, seed=seed
    )


def compile_fixynn(
    program: StencilProgram, mem: MemorySpec, *, validate: bool = True, seed: int = 0
) -> CompiledDesign:
    """Single-port compile: no two accessors of a buffer may ever overlap."""
    return compile_pipeline(
        program, mem.with_ports(1).with_style("sp"), validate=validate, seed=seed
    )


def compile_soda(program: StencilProgram, mem: MemorySpec, clock_hz: float = 100e6) -> CostReport:
    """Analytic FIFO-based realization (no schedule: FIFOs self-time)."""
    dag = lower_to_dag(program)
    return fifo_cost(dag, program.width, program.height, mem, clock_hz)
