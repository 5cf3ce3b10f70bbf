"""Memory spec handling and cost aggregation."""

import json

import pytest

from conftest import tiny_mem

from stencilc import corpus, dsl
from stencilc.compiler import compile_pipeline
from stencilc.errors import BlockTooSmallError, UnsupportedMemoryError
from stencilc.models import (
    MemorySpec,
    cost,
    fifo_cost,
    frames_per_second,
    load_memory_spec,
    memory_spec_from_dict,
    memory_spec_to_dict,
)


def test_memory_spec_json_roundtrip(tmp_path):
    spec = MemorySpec(
        ports=2,
        block_bits=36864,
        pixel_bits=8,
        style={"IN": "dplc"},
        energy_pj_per_access={1: 0.9, 2: 1.2},
        area_um2_per_kb={1: 800.0, 2: 1400.0},
    )
    path = tmp_path / "mem.json"
    path.write_text(json.dumps(memory_spec_to_dict(spec)))
    loaded = load_memory_spec(str(path))
    assert loaded == spec


def test_memory_spec_validations():
    with pytest.raises(UnsupportedMemoryError):
        MemorySpec(ports=0, block_bits=1024)
    with pytest.raises(BlockTooSmallError):
        MemorySpec(ports=2, block_bits=4)
    with pytest.raises(ValueError):
        MemorySpec(ports=2, block_bits=1024, energy_pj_per_access={2: -1.0})


def test_g_for_derives_from_ports_and_capacity():
    spec = MemorySpec(ports=2, block_bits=8 * 8 * 4, style="dplc")
    assert spec.g_for("X", width=8) == 2  # capped by ports, not capacity
    assert spec.g_for("X", width=32) == 1  # one line fits, coalescing off
    assert spec.with_style("dp").g_for("X", width=8) == 1


def test_frames_per_second_1080p():
    fps = frames_per_second(100e6, 1920, 1080)
    assert fps == pytest.approx(48.225, abs=0.01)


def _blur_design(width=8, height=8):
    p = dsl.parse_program(corpus.BLUR, width, height)
    mem = tiny_mem(width)
    return compile_pipeline(p, mem, frames=1), mem


def test_cost_blur():
    d, mem = _blur_design()
    rep = cost(d.plan, d.report, mem, clock_hz=100e6)
    assert rep.total_pixels == 24
    assert rep.total_blocks == 3
    assert rep.total_bits == 3 * mem.block_bits
    assert rep.energy_pj_per_frame == pytest.approx(4 * 64 * mem.energy_for(2))
    assert rep.power_mw == pytest.approx(
        rep.energy_pj_per_frame * rep.frames_per_second * 1e-9
    )


def test_cost_empty_plan_all_zero():
    from stencilc.solver import BufferPlan

    d, mem = _blur_design()
    rep = cost(BufferPlan((), 8), d.report, mem, 100e6)
    assert rep.total_pixels == 0
    assert rep.total_blocks == 0
    assert rep.total_bits == 0
    assert rep.area_um2 == 0.0


def test_idle_block_contributes_no_energy():
    from stencilc.simulator import count_energy

    d, mem = _blur_design()
    base = count_energy(d.report, mem)
    # grafting an always-idle block onto the histogram must not change energy
    d.report.access_histogram["IN"].append({0: d.report.total_cycles})
    assert count_energy(d.report, mem) == base


def test_cost_identity_pipeline_zero_blocks():
    src = "pipeline id { input IN; stage K1 = IN[0,0]; output K1; }"
    p = dsl.parse_program(src, 8, 8)
    mem = tiny_mem(8)
    d = compile_pipeline(p, mem, frames=1)
    rep = cost(d.plan, d.report, mem, 100e6)
    assert d.plan.buffer("IN").lines == 1  # one live line while the reader trails
    assert rep.total_pixels == 8


def test_cost_monotone_in_block_bits():
    p = dsl.parse_program(corpus.DIAMOND, 8, 8)
    prev_blocks = None
    for bits in (64, 128, 256):
        mem = MemorySpec(ports=2, block_bits=bits)
        d = compile_pipeline(p, mem, frames=1)
        blocks = d.plan.total_blocks
        if prev_blocks is not None:
            assert blocks <= prev_blocks
        prev_blocks = blocks


# ---------------------------------------------------------------------------
# FIFO cost model
# ---------------------------------------------------------------------------


def test_fifo_single_consumer_structure():
    dag = dsl.lower_to_dag(dsl.parse_program(corpus.BLUR), width=8)
    rep = fifo_cost(dag, 8, 8, tiny_mem(8), 100e6)
    assert rep.total_blocks == 2  # SH-1 full lines
    assert rep.total_pixels == 2 * 8
    assert rep.register_pixels == 3  # one stencil row held in flops


def test_fifo_two_consumers_split():
    dag = dsl.lower_to_dag(dsl.parse_program(corpus.DIAMOND), width=8)
    rep = fifo_cost(dag, 8, 8, tiny_mem(8), 100e6)
    # K0's two FIFO lines split per consumer; K1/K2 buffers are register-only
    assert rep.total_blocks == 4
    assert rep.total_pixels == 2 * 8


def test_fifo_requires_dual_port():
    dag = dsl.lower_to_dag(dsl.parse_program(corpus.BLUR), width=8)
    with pytest.raises(UnsupportedMemoryError):
        fifo_cost(dag, 8, 8, tiny_mem(8, ports=1), 100e6)


def test_fifo_vs_ours_access_energy_on_blur():
    # both realizations make four block accesses per cycle on a 3-row buffer,
    # so at equal per-access cost the FIFO chain only matches, never beats
    d, mem = _blur_design()
    ours = cost(d.plan, d.report, mem, 100e6)
    dag = dsl.lower_to_dag(dsl.parse_program(corpus.BLUR), width=8)
    fifo = fifo_cost(dag, 8, 8, mem, 100e6)
    assert fifo.energy_pj_per_frame == pytest.approx(ours.energy_pj_per_frame)
    assert fifo.energy_pj_per_frame >= ours.energy_pj_per_frame


def test_dual_vs_single_port_access_totals():
    p = dsl.parse_program(corpus.DIAMOND, 8, 8)
    d2 = compile_pipeline(p, tiny_mem(8, ports=2), frames=1)
    d1 = compile_pipeline(p, tiny_mem(8, ports=1, style="sp"), frames=1)

    def total_accesses(rep):
        return sum(k * v for hists in rep.access_histogram.values() for h in hists for k, v in h.items())

    # the same pixels move regardless of ports; only the spread differs
    assert total_accesses(d2.report) == total_accesses(d1.report)
