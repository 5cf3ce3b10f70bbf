"""stencilc: stall-free, memory-minimal line-buffered stencil accelerators."""

from .compiler import CompiledDesign, compile_pipeline
from .dsl import StencilProgram, parse_program, print_program, lower_to_dag
from .ir import StencilDAG, coalesce, linearize, partial_order
from .models import CostReport, MemorySpec, cost, default_memory_spec, fifo_cost
from .simulator import SimConfig, SimReport, reference_interpret, simulate, count_energy
from .solver import BufferPlan, Schedule, plan_buffers, solve

__version__ = "0.1.0"

__all__ = [
    "BufferPlan",
    "CompiledDesign",
    "CostReport",
    "MemorySpec",
    "Schedule",
    "SimConfig",
    "SimReport",
    "StencilDAG",
    "StencilProgram",
    "coalesce",
    "compile_pipeline",
    "cost",
    "count_energy",
    "default_memory_spec",
    "fifo_cost",
    "linearize",
    "lower_to_dag",
    "parse_program",
    "partial_order",
    "plan_buffers",
    "print_program",
    "reference_interpret",
    "simulate",
    "solve",
]
