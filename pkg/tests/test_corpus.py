"""Shipped pipelines: structural contracts and frozen plan totals."""

import pytest

from stencilc import corpus, dsl
from stencilc.compiler import compile_pipeline
from stencilc.models import MemorySpec

EXPECTED_SHAPE = {
    # name: (stage count, multi-consumer stage count)
    "canny_s": (9, 0),
    "canny_m": (10, 1),
    "harris_s": (7, 0),
    "harris_m": (7, 1),
    "unsharp_m": (7, 1),
    "xcorr_m": (3, 1),
    "denoise_m": (5, 2),
}


@pytest.mark.parametrize("name", list(corpus.CORPUS))
def test_corpus_shape(name):
    p = dsl.parse_program(corpus.CORPUS[name], 32, 24)
    dag = dsl.lower_to_dag(p)
    stages, mc = EXPECTED_SHAPE[name]
    assert len(p.stages) == stages
    multi = [q for q in dag.physical_names() if len({e.consumer for e in dag.out_edges(q)}) > 1]
    assert len(multi) == mc
    assert name.endswith("_m") == (mc > 0)


def test_xcorr_has_tall_column_window():
    dag = dsl.lower_to_dag(dsl.parse_program(corpus.XCORR_M), width=32)
    e = next(e for e in dag.edges if e.consumer == "CS")
    assert (e.sh, e.sw) == (18, 1)


def test_denoise_has_four_buffered_stages():
    dag = dsl.lower_to_dag(dsl.parse_program(corpus.DENOISE_M), width=32)
    assert len(dag.producers()) == 4


# Frozen plan totals at 64x48 with 36 Kbit dual-port blocks. These are
# regression pins for the whole schedule/plan path: a change here means the
# optimizer's answers moved, which must be deliberate.
SNAPSHOT = {
    ("canny_s", "dp"): (1088, 17),
    ("canny_s", "dplc"): (1536, 12),
    ("canny_s", "sp"): (1088, 17),
    ("canny_m", "dp"): (1728, 27),
    ("canny_m", "dplc"): (2560, 20),
    ("canny_m", "sp"): (2112, 33),
    ("harris_s", "dp"): (768, 12),
    ("harris_s", "dplc"): (1024, 8),
    ("harris_s", "sp"): (768, 12),
    ("harris_m", "dp"): (1152, 18),
    ("harris_m", "dplc"): (1792, 14),
    ("harris_m", "sp"): (1536, 24),
    ("unsharp_m", "dp"): (1664, 26),
    ("unsharp_m", "dplc"): (2304, 18),
    ("unsharp_m", "sp"): (1920, 30),
    ("xcorr_m", "dp"): (1216, 19),
    ("xcorr_m", "dplc"): (1408, 11),
    ("xcorr_m", "sp"): (1280, 20),
    ("denoise_m", "dp"): (960, 15),
    ("denoise_m", "dplc"): (1280, 10),
    ("denoise_m", "sp"): (1152, 18),
}


@pytest.mark.parametrize("name", list(corpus.CORPUS))
def test_corpus_plan_snapshot(name):
    p = dsl.parse_program(corpus.CORPUS[name], 64, 48)
    for style, ports in (("dp", 2), ("dplc", 2), ("sp", 1)):
        mem = MemorySpec(ports=ports, block_bits=36864, style=style)
        d = compile_pipeline(p, mem, validate=False)
        assert (d.plan.total_pixels, d.plan.total_blocks) == SNAPSHOT[(name, style)], (
            name,
            style,
        )


def test_random_program_generator_is_stable():
    a = corpus.random_program(11)
    b = corpus.random_program(11)
    assert a == b
    assert corpus.random_program(12) != a


def test_scalability_program_third_multi_consumer():
    p = corpus.scalability_program(60)
    dag = dsl.lower_to_dag(p, width=32)
    multi = [q for q in dag.physical_names() if len({e.consumer for e in dag.out_edges(q)}) > 1]
    assert len(multi) == pytest.approx(60 / 3, abs=2)
