"""Cycle-level model of the line-buffered pipeline plus a pure reference
interpreter of the stencil semantics.

Operational model: a stage started at cycle S processes pixel index j of the
raster scan at cycle S + j + 1; each cycle a reader moves one column of SH
pixels from its producer's buffer into its shift-register array (SH block
accesses) while a writer deposits one pixel (one access). A pixel written at
cycle x is readable strictly after x; a buffer retains blocks*g lines with
the write line rotating through that capacity. Window columns past the right
edge and rows past the bottom edge replicate the last column/row.

Port conflicts are recorded, never arbitrated: the compiler's contract is
that a valid design has zero conflicts, so the simulator is a detector.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from .dsl import eval_expr, wrap32
from .errors import StencilError
from .ir import StencilDAG
from .models import MemorySpec
from .solver import BufferPlan, Schedule


# ---------------------------------------------------------------------------
# Reference interpreter
# ---------------------------------------------------------------------------


def _tap_plane(img: np.ndarray, dr: int, dc: int) -> np.ndarray:
    h, w = img.shape
    rows = np.minimum(np.arange(h) + dr, h - 1)
    cols = np.minimum(np.arange(w) + dc, w - 1)
    return img[np.ix_(rows, cols)]


def interpret_dag(dag: StencilDAG, image: np.ndarray) -> dict[str, np.ndarray]:
    """Evaluate every stage whole-image with clamp-to-edge padding."""
    image = wrap32(np.asarray(image))
    values: dict[str, np.ndarray] = {}
    for name in dag.topo_order():
        s = dag.stage(name)
        if s.role == "input":
            values[name] = image
            continue

        def fetch(stage: str, dr: int, dc: int, _v=values) -> np.ndarray:
            return _tap_plane(_v[stage], dr, dc)

        values[name] = eval_expr(s.expr, fetch)
    return values


def reference_interpret(program, image: np.ndarray) -> dict[str, np.ndarray]:
    """Bit-exact expected outputs of a program on one image."""
    from .dsl import lower_to_dag

    w = image.shape[1]
    dag = lower_to_dag(program, width=w)
    values = interpret_dag(dag, image)
    return {name: values[name] for name in dag.output_names()}


# ---------------------------------------------------------------------------
# Cycle-level simulation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SimConfig:
    dag: StencilDAG  # physical stages (no virtual aliases)
    schedule: Schedule
    plan: BufferPlan
    mem: MemorySpec
    images: tuple[np.ndarray, ...]  # one (H, W) frame per entry
    frames: int = 1

    def __post_init__(self):
        assert self.frames == len(self.images)


@dataclass
class SimReport:
    port_violations: int
    stall_cycles: int
    availability_violations: int
    throughput_steady: float
    latency: int
    functional_match: bool
    access_histogram: dict[str, list[dict[int, int]]]  # buffer -> per block -> {k: cycles}
    outputs: dict[str, list[np.ndarray]]  # output stage -> per-frame images
    events: dict[str, list[tuple[str, int, int, int, int]]]  # buffer -> (reader, line, block, first, last)
    frames: int
    height: int
    width: int
    total_cycles: int

    @property
    def valid(self) -> bool:
        return (
            self.port_violations == 0
            and self.stall_cycles == 0
            and self.availability_violations == 0
            and self.functional_match
        )


def _merged_readers(dag: StencilDAG, producer: str):
    """Readers of one buffer with pattern-merged consumers collapsed: merged
    stages read identical addresses on identical cycles, one access serves
    all of them."""
    readers = []
    seen = set()
    for e in dag.buffer_edges(producer):
        s = dag.stage(e.consumer)
        key = s.pattern_group if s.pattern_group is not None else s.name
        if key in seen:
            continue
        seen.add(key)
        readers.append((key, e.consumer, e.sh))
    return readers


def simulate(cfg: SimConfig) -> SimReport:
    dag, sched, plan, mem = cfg.dag, cfg.schedule, cfg.plan, cfg.mem
    frames = cfg.frames
    height, width = cfg.images[0].shape
    max_sh = max((e.sh for e in dag.edges), default=1)
    max_sw = max((e.sw for e in dag.edges), default=1)
    if height < max_sh or width < max_sw:
        raise StencilError(
            f"frame {width}x{height} smaller than the largest stencil window "
            f"{max_sw}x{max_sh}"
        )
    total_rows = frames * height
    frame_cycles = frames * width * height

    start = {s.name: sched.start[dag.physical_name(s.name)] for s in dag.stages}
    t_end = max(start.values()) + frame_cycles

    capacity = {b.stage: b.capacity_lines for b in plan.buffers}
    blocks = {b.stage: b.blocks for b in plan.buffers}
    gs = {b.stage: b.g for b in plan.buffers}

    # ---- functional pass: band-by-band dataflow through the rotating buffers
    images: dict[str, np.ndarray] = {}
    avail_violations = 0
    input_name = dag.input_name
    images[input_name] = np.concatenate([wrap32(np.asarray(f)) for f in cfg.images], axis=0)

    col_idx = np.arange(width)
    for name in dag.topo_order():
        s = dag.stage(name)
        if s.role == "input":
            continue
        in_edges = dag.in_edges(name)
        out = np.zeros((total_rows, width), dtype=np.int64)
        for band in range(total_rows):
            f, r = divmod(band, height)
            captured: dict[str, np.ndarray] = {}
            for e in in_edges:
                p = e.producer
                cap = capacity[p]
                y_lim = min(band + (start[name] - start[p] - 1) // width, total_rows - 1)
                m = np.zeros((e.sh, width), dtype=np.int64)
                p_img = images[p]
                for dr in range(e.sh):
                    x = f * height + min(r + dr, height - 1)
                    if y_lim < 0:
                        y = -1
                    else:
                        y = x + cap * ((y_lim - x) // cap)
                    if y != x:
                        avail_violations += width
                    if y >= 0:
                        m[dr] = p_img[y]
                captured[p] = m

            def fetch(stage: str, dr: int, dc: int, _m=captured) -> np.ndarray:
                cols = np.minimum(col_idx + dc, width - 1)
                return _m[stage][dr][cols]

            out[band] = eval_expr(s.expr, fetch)
        images[name] = out

    # ---- access accounting: per-band intervals at block granularity
    histogram: dict[str, list[dict[int, int]]] = {}
    events: dict[str, list[tuple[str, int, int, int, int]]] = {}
    port_violations = 0
    violation_spans: list[tuple[int, int]] = []

    for p in dag.producers():
        g = gs[p]
        nblocks = blocks[p]
        ev: list[tuple[str, int, int, int, int]] = []
        for band in range(total_rows):
            line = band + 1
            first = start[p] + band * width + 1
            ev.append((p, line, (line - 1) // g + 1, first, first + width - 1))
        for key, consumer, sh in _merged_readers(dag, p):
            s_c = start[consumer]
            for band in range(total_rows):
                first = s_c + band * width + 1
                for dr in range(sh):
                    line = band + dr + 1
                    ev.append((key, line, (line - 1) // g + 1, first, first + width - 1))
        events[p] = ev

        by_block: dict[int, list[tuple[int, int]]] = {}
        for _, _, vb, first, last in ev:
            by_block.setdefault(vb, []).append((first, last))
        hist: list[dict[int, int]] = [dict() for _ in range(nblocks)]
        for vb, spans in sorted(by_block.items()):
            phys = (vb - 1) % nblocks
            points: list[tuple[int, int]] = []
            for a, b in spans:
                points.append((a, 1))
                points.append((b + 1, -1))
            points.sort()
            depth = 0
            prev = None
            for at, delta in points:
                if prev is not None and depth > 0 and at > prev:
                    span = at - prev
                    hist[phys][depth] = hist[phys].get(depth, 0) + span
                    if depth > mem.ports:
                        port_violations += span
                        violation_spans.append((prev, at - 1))
                depth += delta
                prev = at
        for phys in range(nblocks):
            busy = sum(hist[phys].values())
            hist[phys][0] = max(0, t_end - busy)
        histogram[p] = hist

    stall_cycles = _union_length(violation_spans)

    # ---- functional comparison against the direct interpreter
    outputs: dict[str, list[np.ndarray]] = {}
    match = True
    for out_name in dag.output_names():
        outputs[out_name] = [
            images[out_name][f * height : (f + 1) * height] for f in range(frames)
        ]
    for f in range(frames):
        ref_f = interpret_dag(dag, images[input_name][f * height : (f + 1) * height])
        for out_name in dag.output_names():
            if not np.array_equal(outputs[out_name][f], ref_f[out_name]):
                match = False

    latency = max(start[o] for o in dag.output_names()) + frame_cycles

    return SimReport(
        port_violations=port_violations,
        stall_cycles=stall_cycles,
        availability_violations=avail_violations,
        throughput_steady=1.0,
        latency=latency,
        functional_match=match,
        access_histogram=histogram,
        outputs=outputs,
        events=events,
        frames=frames,
        height=height,
        width=width,
        total_cycles=t_end,
    )


def _union_length(spans: list[tuple[int, int]]) -> int:
    if not spans:
        return 0
    spans = sorted(spans)
    total = 0
    cur_a, cur_b = spans[0]
    for a, b in spans[1:]:
        if a > cur_b + 1:
            total += cur_b - cur_a + 1
            cur_a, cur_b = a, b
        else:
            cur_b = max(cur_b, b)
    total += cur_b - cur_a + 1
    return total


def count_energy(report: SimReport, mem: MemorySpec) -> float:
    """Access-weighted energy over the whole run (pJ)."""
    e = mem.energy_for(mem.ports)
    total = 0.0
    for hists in report.access_histogram.values():
        for h in hists:
            for k, cycles in h.items():
                if k > 0:
                    total += k * cycles * e
    return total
