"""Randomized end-to-end stress: every compiled design must validate."""

import pytest

from stencilc import corpus
from stencilc.compiler import compile_pipeline
from stencilc.models import MemorySpec

CONFIGS = (
    (2, 1, "dp"),
    (1, 1, "sp"),
    (2, 2, "dplc"),
    (2, 3, "dplc"),
)


@pytest.mark.parametrize("seed", range(15))
def test_random_pipelines_always_validate(seed):
    width, height = 6, 8
    program = corpus.random_program(seed, max_stages=5).with_size(width, height)
    for ports, lines_per_block, style in CONFIGS:
        mem = MemorySpec(ports=ports, block_bits=lines_per_block * width * 8, style=style)
        d = compile_pipeline(program, mem, frames=1)
        r = d.report
        assert r.port_violations == 0, (seed, style, ports)
        assert r.availability_violations == 0, (seed, style, ports)
        assert r.functional_match, (seed, style, ports)
