"""Style sweeps and Pareto extraction."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import tiny_mem

from stencilc import corpus, dsl
from stencilc.dse import SweepPoint, pareto, points_csv, sweep
from stencilc.models import CostReport


def _point(config, area, power):
    rep = CostReport(
        total_pixels=0,
        total_blocks=0,
        total_bits=0,
        register_pixels=0,
        area_um2=float(area),
        energy_pj_per_frame=0.0,
        power_mw=float(power),
        frames_per_second=0.0,
    )
    return SweepPoint(config, (), True, "", rep)


def test_pareto_simple():
    pts = [_point(0, 1, 2), _point(1, 2, 1), _point(2, 2, 2)]
    front = pareto(pts)
    assert [p.config for p in front] == [0, 1]


def test_pareto_single_point():
    pts = [_point(0, 3, 3)]
    assert pareto(pts) == pts


def test_pareto_skips_invalid():
    pts = [_point(0, 1, 1), SweepPoint(1, (), False, "bad", None)]
    assert [p.config for p in pareto(pts)] == [0]


@given(st.lists(st.tuples(st.integers(1, 5), st.integers(1, 5)), min_size=1, max_size=12))
@settings(max_examples=100, deadline=None)
def test_pareto_order_invariant_and_nondominated(metrics):
    pts = [_point(i, a, p) for i, (a, p) in enumerate(metrics)]
    front = pareto(pts)
    shuffled = list(pts)
    random.Random(0).shuffle(shuffled)
    assert pareto(shuffled) == front
    for p in front:
        for q in pts:
            dominated = (
                q.report.area_um2 <= p.report.area_um2
                and q.report.power_mw <= p.report.power_mw
                and (
                    q.report.area_um2 < p.report.area_um2
                    or q.report.power_mw < p.report.power_mw
                )
            )
            assert not dominated


def test_sweep_four_buffered_stages_sixteen_points():
    p = dsl.parse_program(corpus.DENOISE_M)
    mem = tiny_mem(16, lines_per_block=2)
    points = sweep(p, 16, 12, mem, jobs=1)
    assert len(points) == 16
    assert all(pt.valid for pt in points)
    front = pareto(points)
    assert 1 <= len(front) <= 16


def test_sweep_single_buffered_stage_two_points():
    points = sweep(dsl.parse_program(corpus.BLUR), 8, 8, tiny_mem(8, lines_per_block=2))
    assert len(points) == 2


def test_sweep_all_dp_point_matches_plain_compile():
    from stencilc.compiler import compile_pipeline
    from stencilc.models import cost

    p = dsl.parse_program(corpus.DENOISE_M, 16, 12)
    mem = tiny_mem(16, lines_per_block=2)
    points = sweep(p, 16, 12, mem)
    base = next(pt for pt in points if pt.config == 0)
    plain = compile_pipeline(p, mem.with_style("dp"), frames=1)
    plain_cost = cost(plain.plan, plain.report, mem, 100e6)
    assert base.report.total_pixels == plain_cost.total_pixels
    assert base.report.total_blocks == plain_cost.total_blocks


def test_sweep_csv_shape():
    points = sweep(dsl.parse_program(corpus.BLUR), 8, 8, tiny_mem(8, lines_per_block=2))
    text = points_csv(points)
    lines = text.strip().splitlines()
    assert lines[0] == "config,pixels,blocks,bits,area,power,valid"
    assert len(lines) == 3


def test_sweep_cap():
    p = corpus.scalability_program(20)
    with pytest.raises(ValueError):
        sweep(p, 8, 8, tiny_mem(8))
