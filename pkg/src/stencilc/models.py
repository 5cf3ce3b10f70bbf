"""On-chip memory description and area/power bookkeeping."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Mapping, Union

from .errors import (
    BlockTooSmallError,
    MissingEnergyTableError,
    UnsupportedMemoryError,
)

STYLES = ("dp", "dplc", "sp", "fifo")


@dataclass(frozen=True)
class MemorySpec:
    """Available memory resources: port count, block capacity, and the
    per-stage buffer style. Energy/area tables are configuration inputs;
    the shipped defaults are illustrative, not measured."""

    ports: int
    block_bits: int
    pixel_bits: int = 8
    style: Union[str, Mapping[str, str]] = "dp"
    energy_pj_per_access: Mapping[int, float] = field(default_factory=lambda: dict(DEFAULT_ENERGY))
    area_um2_per_kb: Mapping[int, float] = field(default_factory=lambda: dict(DEFAULT_AREA))

    def __post_init__(self):
        if self.ports < 1:
            raise UnsupportedMemoryError(f"port count must be >= 1, got {self.ports}")
        if self.block_bits < self.pixel_bits:
            raise BlockTooSmallError("block cannot hold a single pixel")
        for table in (self.energy_pj_per_access, self.area_um2_per_kb):
            if any(v <= 0 for v in table.values()):
                raise ValueError("energy/area table entries must be positive")

    def style_for(self, stage: str) -> str:
        if isinstance(self.style, str):
            s = self.style
        else:
            s = self.style.get(stage, "dp")
        s = s.lower()
        if s not in STYLES:
            raise ValueError(f"unknown memory style {s!r}")
        return s

    def lines_per_block(self, width: int) -> int:
        return self.block_bits // (width * self.pixel_bits)

    def g_for(self, stage: str, width: int) -> int:
        """Lines coalesced per block for this stage's buffer: capped by the
        port count and by block capacity; 1 unless the style asks for it."""
        if self.style_for(stage) != "dplc":
            return 1
        return max(1, min(self.ports, self.lines_per_block(width)))

    def with_ports(self, ports: int) -> "MemorySpec":
        return replace(self, ports=ports)

    def with_style(self, style: Union[str, Mapping[str, str]]) -> "MemorySpec":
        return replace(self, style=style)

    def energy_for(self, ports: int) -> float:
        try:
            return self.energy_pj_per_access[ports]
        except KeyError:
            raise MissingEnergyTableError(f"no per-access energy for {ports}-port blocks")

    def area_for(self, ports: int) -> float:
        try:
            return self.area_um2_per_kb[ports]
        except KeyError:
            raise MissingEnergyTableError(f"no area entry for {ports}-port blocks")


DEFAULT_ENERGY = {1: 1.0, 2: 1.35}  # pJ per access; illustrative only
DEFAULT_AREA = {1: 900.0, 2: 1500.0}  # um^2 per Kbit; illustrative only


def default_memory_spec(ports: int = 2, block_bits: int = 36864, style: str = "dp") -> MemorySpec:
    return MemorySpec(ports=ports, block_bits=block_bits, style=style)


def load_memory_spec(path: str) -> MemorySpec:
    with open(path, "r", encoding="utf-8") as f:
        raw = json.load(f)
    return memory_spec_from_dict(raw)


def memory_spec_from_dict(raw: dict) -> MemorySpec:
    def int_keys(table):
        return {int(k): float(v) for k, v in table.items()}

    return MemorySpec(
        ports=int(raw["ports"]),
        block_bits=int(raw["block_bits"]),
        pixel_bits=int(raw.get("pixel_bits", 8)),
        style=raw.get("style", "dp"),
        energy_pj_per_access=int_keys(raw.get("energy_pj_per_access", DEFAULT_ENERGY)),
        area_um2_per_kb=int_keys(raw.get("area_um2_per_kb", DEFAULT_AREA)),
    )


def memory_spec_to_dict(mem: MemorySpec) -> dict:
    return {
        "ports": mem.ports,
        "block_bits": mem.block_bits,
        "pixel_bits": mem.pixel_bits,
        "style": mem.style if isinstance(mem.style, str) else dict(mem.style),
        "energy_pj_per_access": {str(k): v for k, v in mem.energy_pj_per_access.items()},
        "area_um2_per_kb": {str(k): v for k, v in mem.area_um2_per_kb.items()},
    }


@dataclass(frozen=True)
class CostReport:
    total_pixels: int
    total_blocks: int
    total_bits: int
    register_pixels: int  # DFF-resident pixels, reported apart from SRAM bits
    area_um2: float
    energy_pj_per_frame: float
    power_mw: float
    frames_per_second: float


def frames_per_second(clock_hz: float, width: int, height: int) -> float:
    return clock_hz / (width * height)


def cost(plan, sim, mem: MemorySpec, clock_hz: float) -> CostReport:
    """Aggregate a validated design's plan and simulated access counts."""
    from .simulator import count_energy  # circular-import guard

    total_pixels = sum(b.pixels for b in plan.buffers)
    total_blocks = sum(b.blocks for b in plan.buffers)
    total_bits = total_blocks * mem.block_bits
    area = total_bits / 1024.0 * mem.area_for(mem.ports)
    energy_frame = count_energy(sim, mem) / sim.frames
    fps = frames_per_second(clock_hz, plan.width, sim.height)
    power_mw = energy_frame * fps * 1e-9  # pJ/s -> mW
    return CostReport(
        total_pixels=total_pixels,
        total_blocks=total_blocks,
        total_bits=total_bits,
        register_pixels=0,
        area_um2=area,
        energy_pj_per_frame=energy_frame,
        power_mw=power_mw,
        frames_per_second=fps,
    )


def fifo_cost(dag, width: int, height: int, mem: MemorySpec, clock_hz: float) -> CostReport:
    """Analytic cost of the FIFO realization of each line buffer.

    Each buffer keeps (SH_max - 1) full lines in FIFO blocks, split per
    consumer so every reader gets its own chain; the line under production is
    a DFF register segment (reported separately, sized one stencil row). A
    FIFO block pushes and pops every cycle, so it is charged two accesses per
    active cycle regardless of the stencil shape.
    """
    if mem.ports < 2:
        raise UnsupportedMemoryError("FIFO buffers require dual-port blocks")
    total_pixels = 0
    total_blocks = 0
    register_pixels = 0
    for p in dag.producers():
        edges = dag.buffer_edges(p)
        sh_max = max(e.sh for e in edges)
        sw_max = max(e.sw for e in edges)
        consumers = len({e.consumer for e in edges})
        fifo_lines = sh_max - 1
        total_pixels += fifo_lines * width
        total_blocks += fifo_lines * consumers
        register_pixels += sw_max
    total_bits = total_blocks * mem.block_bits
    area = total_bits / 1024.0 * mem.area_for(2)
    energy_frame = 2.0 * total_blocks * (width * height) * mem.energy_for(2)
    fps = frames_per_second(clock_hz, width, height)
    return CostReport(
        total_pixels=total_pixels,
        total_blocks=total_blocks,
        total_bits=total_bits,
        register_pixels=register_pixels,
        area_um2=area,
        energy_pj_per_frame=energy_frame,
        power_mw=energy_frame * fps * 1e-9,
        frames_per_second=fps,
    )
