"""Acceptance suite: one test per exit criterion, one PASS/FAIL line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines alongside the pytest verdicts.
"""

import sys
import time
from contextlib import contextmanager

import numpy as np
import pytest

from conftest import (
    assert_contention_free,
    exhaustive_solve,
    per_cycle_block_counts,
    random_image,
    tiny_mem,
)

from stencilc import corpus, dsl
from stencilc.baselines import compile_darkroom, compile_fixynn, compile_ours, compile_soda
from stencilc.compiler import compile_pipeline
from stencilc.constraints import ConstraintSystem, gen_contention, gen_dependency, prune
from stencilc.dse import pareto, sweep
from stencilc.ir import partial_order
from stencilc.models import cost
from stencilc.simulator import SimConfig, reference_interpret, simulate
from stencilc.solver import solve


@contextmanager
def criterion(num: int, title: str):
    try:
        yield
    except BaseException:
        print(f"[criterion {num:2d}] FAIL  {title}", file=sys.stderr)
        raise
    print(f"[criterion {num:2d}] PASS  {title}")


ALL_STYLES = (("dp", 2), ("dplc", 2), ("sp", 1))


def _corpus_designs(width, height, styles=ALL_STYLES, block_bits=36864):
    from stencilc.models import MemorySpec

    for name, source in corpus.CORPUS.items():
        p = dsl.parse_program(source, width, height)
        for style, ports in styles:
            mem = MemorySpec(ports=ports, block_bits=block_bits, style=style)
            yield name, style, compile_pipeline(p, mem, frames=1), mem


def test_criterion_1_throughput_contract():
    with criterion(1, "zero violations and 1.0 px/cycle for corpus x {dp,dplc,sp} at 64x48"):
        t0 = time.time()
        for name, style, d, mem in _corpus_designs(64, 48):
            r = d.report
            assert r.port_violations == 0, (name, style)
            assert r.stall_cycles == 0, (name, style)
            assert r.availability_violations == 0, (name, style)
            assert r.functional_match, (name, style)
            assert r.throughput_steady == 1.0, (name, style)
        assert time.time() - t0 < 30.0


def test_criterion_2_oracle_optimality():
    with criterion(2, "solve() equals exhaustive integer search on 20 random pipelines"):
        t0 = time.time()
        checked = 0
        for seed in range(10):
            program = corpus.random_program(seed)
            for ports in (1, 2):
                width = 4 + 2 * (seed % 2)  # 4 or 6, within the W <= 16 box
                dag = dsl.lower_to_dag(program, width=width)
                mem = tiny_mem(width, ports=ports)
                po = partial_order(dag)
                cs = ConstraintSystem(
                    tuple(gen_dependency(dag)), tuple(gen_contention(dag, mem, po))
                )
                sched = solve(cs, dag, mem)
                obj, _ = exhaustive_solve(cs, dag, s_max=12 * width)
                assert obj is not None
                assert sched.objective_cycles == obj, (seed, ports)
                checked += 1
        assert checked >= 20
        assert time.time() - t0 < 120.0


def test_criterion_3_conservative_feasibility():
    with criterion(3, "every solve() schedule passes the exact per-cycle port check"):
        # corpus at a small frame so literal per-cycle counting stays cheap
        for name, style, d, mem in _corpus_designs(16, 24, block_bits=16 * 8 * 2):
            assert_contention_free(d.dag, d.schedule, d.plan, mem.ports, height=24)
        # plus the randomized instances of criterion 2
        for seed in range(6):
            program = corpus.random_program(seed).with_size(4, 6)
            for ports in (1, 2):
                mem = tiny_mem(4, ports=ports)
                d = compile_pipeline(program, mem, validate=False)
                assert_contention_free(d.dag, d.schedule, d.plan, ports, height=6)


def test_criterion_4_pruning_soundness_and_effect():
    with criterion(4, "pruning keeps optima, shrinks the chain group 3->1, cuts branches"):
        # identical optima on the randomized systems
        for seed in range(10):
            program = corpus.random_program(seed)
            width = 4
            dag = dsl.lower_to_dag(program, width=width)
            for ports in (1, 2):
                mem = tiny_mem(width, ports=ports)
                po = partial_order(dag)
                cs = ConstraintSystem(
                    tuple(gen_dependency(dag)), tuple(gen_contention(dag, mem, po))
                )
                pruned = prune(cs, po, dag)
                a, _ = exhaustive_solve(cs, dag, 12 * width)
                b, _ = exhaustive_solve(pruned, dag, 12 * width)
                assert a == b, seed
        # the shared-buffer chain reduces to the single writer/far-reader pair
        dag = dsl.lower_to_dag(dsl.parse_program(corpus.FIG_CHAIN), width=8)
        mem = tiny_mem(8)
        po = partial_order(dag)
        cs = ConstraintSystem(tuple(gen_dependency(dag)), tuple(gen_contention(dag, mem, po)))
        assert len(cs.or_groups[0]) == 3
        pruned = prune(cs, po, dag)
        assert len(pruned.or_groups[0]) == 1
        assert (pruned.or_groups[0][0].later, pruned.or_groups[0][0].earlier) == ("K2", "K0")
        # branch count strictly decreases on every multi-consumer pipeline
        for name in corpus.multi_consumer_names():
            p = dsl.parse_program(corpus.CORPUS[name], 32, 24)
            d = compile_pipeline(p, tiny_mem(32), validate=False)
            assert d.system.branch_count() < d.unpruned.branch_count(), name


def test_criterion_5_functional_correctness():
    with criterion(5, "emitted designs match the reference on >= 10 random images"):
        width, height = 32, 24
        for name, source in corpus.CORPUS.items():
            p = dsl.parse_program(source, width, height)
            d = compile_pipeline(p, tiny_mem(width), validate=False)
            for seed in range(10):
                img = random_image(width, height, seed=seed)
                rep = simulate(
                    SimConfig(d.dag, d.schedule, d.plan, d_mem(width), (img,), 1)
                )
                expected = reference_interpret(p, img)
                assert rep.functional_match, (name, seed)
                for out, frames in rep.outputs.items():
                    assert np.array_equal(frames[0], expected[out]), (name, out, seed)


def d_mem(width):
    return tiny_mem(width)


def test_criterion_6_coalescing():
    with criterion(6, "two blocks instead of three, valid, and never more blocks per stage"):
        # the two-line-block instance
        p = dsl.parse_program(corpus.BLUR, 8, 6)
        lc = compile_pipeline(p, tiny_mem(8, lines_per_block=2, style="dplc"), frames=1)
        dp = compile_pipeline(p, tiny_mem(8, lines_per_block=2, style="dp"), frames=1)
        assert lc.plan.buffer("IN").blocks == 2
        assert dp.plan.buffer("IN").blocks == 3
        assert lc.report.valid
        # corpus at small width: coalescing never costs blocks where it applies
        width, height = 16, 24
        for name, source in corpus.CORPUS.items():
            p = dsl.parse_program(source, width, height)
            mem_lc = tiny_mem(width, lines_per_block=2, style="dplc")
            mem_dp = tiny_mem(width, lines_per_block=2, style="dp")
            d_lc = compile_pipeline(p, mem_lc, frames=1)
            d_dp = compile_pipeline(p, mem_dp, frames=1)
            assert d_lc.report.valid, name
            for b_lc in d_lc.plan.buffers:
                if b_lc.g >= 2:
                    b_dp = d_dp.plan.buffer(b_lc.stage)
                    assert b_lc.blocks <= b_dp.blocks, (name, b_lc.stage)


def test_criterion_7_baseline_directions():
    with criterion(7, "strategy inequalities hold; diamond reproduces 40 vs 88 px"):
        width, height = 32, 24
        clock = 100e6
        for name in corpus.multi_consumer_names():
            p = dsl.parse_program(corpus.CORPUS[name], width, height)
            mem = tiny_mem(width, lines_per_block=2)
            ours = compile_ours(p, mem)
            dk = compile_darkroom(p, mem)
            fx = compile_fixynn(p, mem)
            soda = compile_soda(p, mem, clock)
            ours_cost = cost(ours.plan, ours.report, mem, clock)
            assert ours.plan.total_pixels < dk.plan.total_pixels, name
            assert fx.plan.total_pixels >= ours.plan.total_pixels, name
            assert soda.total_pixels <= ours.plan.total_pixels, name
            assert soda.energy_pj_per_frame > ours_cost.energy_pj_per_frame, name
        diamond = dsl.parse_program(corpus.DIAMOND, 8, 6)
        assert compile_ours(diamond, tiny_mem(8), validate=False).plan.total_pixels == 40
        assert compile_fixynn(diamond, tiny_mem(8), validate=False).plan.total_pixels == 88


def test_criterion_8_dse():
    with criterion(8, "16 swept designs on 4 buffered stages, frontier non-dominated"):
        p = dsl.parse_program(corpus.DENOISE_M)
        mem = tiny_mem(16, lines_per_block=2)
        points = sweep(p, 16, 12, mem)
        assert len(points) == 16
        front = pareto(points)
        assert front
        for f in front:
            for q in points:
                if not q.valid:
                    continue
                assert not (
                    q.report.area_um2 <= f.report.area_um2
                    and q.report.power_mw <= f.report.power_mw
                    and (
                        q.report.area_um2 < f.report.area_um2
                        or q.report.power_mw < f.report.power_mw
                    )
                )
        # all-coalesced need not be on the frontier, but must have been swept
        assert any(pt.config == 15 for pt in points)


def test_criterion_9_compilation_speed():
    with criterion(9, "corpus pipelines < 1 s each; 60-stage synthetic < 60 s"):
        for name, source in corpus.CORPUS.items():
            p = dsl.parse_program(source, 64, 48)
            t0 = time.time()
            compile_pipeline(p, tiny_mem(64, lines_per_block=2), validate=False)
            assert time.time() - t0 < 1.0, name
        big = corpus.scalability_program(60).with_size(32, 24)
        t0 = time.time()
        d = compile_pipeline(big, tiny_mem(32), frames=1)
        assert time.time() - t0 < 60.0
        assert d.report.valid


def test_criterion_10_determinism(tmp_path):
    with criterion(10, "byte-identical CSV and Verilog across repeated runs"):
        import json

        from stencilc.cli import main
        from stencilc.models import default_memory_spec, memory_spec_to_dict

        src = tmp_path / "denoise_m.stencil"
        src.write_text(corpus.DENOISE_M)
        memf = tmp_path / "m.json"
        memf.write_text(json.dumps(memory_spec_to_dict(default_memory_spec(block_bits=512))))
        blobs = []
        for d in ("a", "b"):
            out = tmp_path / d
            rc = main(
                [
                    "compile", str(src),
                    "--width", "16", "--height", "12",
                    "--mem", str(memf),
                    "--out", str(out),
                ]
            )
            assert rc == 0
            rc = main(
                [
                    "dse", str(src),
                    "--width", "16", "--height", "12",
                    "--mem", str(memf),
                    "--out", str(out),
                ]
            )
            assert rc == 0
            blobs.append(
                (
                    (out / "schedule.csv").read_bytes(),
                    (out / "denoise_m.v").read_bytes(),
                    (out / "points.csv").read_bytes(),
                    (out / "frontier.csv").read_bytes(),
                )
            )
        assert blobs[0] == blobs[1]
