"""Command-line entry point: compile, simulate, compare, dse, examples."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import codegen, corpus, dse as dse_mod
from .baselines import compile_darkroom, compile_fixynn, compile_ours, compile_soda
from .compiler import compile_pipeline, schedule_csv
from .dsl import parse_program
from .errors import InfeasibleError, StencilError
from .ir import dump_dag
from .models import (
    CostReport,
    cost,
    default_memory_spec,
    load_memory_spec,
    memory_spec_to_dict,
)
from .simulator import SimConfig, simulate

EXIT_OK = 0
EXIT_USER = 1
EXIT_INFEASIBLE = 2


def read_pgm(path: str) -> np.ndarray:
    with open(path, "rb") as f:
        data = f.read()
    fields: list[bytes] = []
    i = 0
    while len(fields) < 4:
        while i < len(data) and data[i] in b" \t\r\n":
            i += 1
        if i < len(data) and data[i : i + 1] == b"#":
            while i < len(data) and data[i] not in b"\r\n":
                i += 1
            continue
        start = i
        while i < len(data) and data[i] not in b" \t\r\n":
            i += 1
        fields.append(data[start:i])
    if fields[0] != b"P5":
        raise StencilError("only binary PGM (P5) images are supported")
    w, h, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    if maxval > 255:
        raise StencilError("16-bit PGM not supported")
    i += 1
    pixels = np.frombuffer(data[i : i + w * h], dtype=np.uint8)
    return pixels.reshape(h, w)


def write_pgm(path: str, img: np.ndarray) -> None:
    arr = np.clip(img, 0, 255).astype(np.uint8)
    h, w = arr.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode())
        f.write(arr.tobytes())


def _load_program(args) -> "StencilProgram":
    with open(args.source, "r", encoding="utf-8") as f:
        source = f.read()
    return parse_program(source, args.width, args.height)


def _load_mem(args):
    if args.mem is None:
        raise StencilError("--mem <spec.json> is required")
    return load_memory_spec(args.mem)


def _report_csv(report, ports: int) -> str:
    lines = ["block," + ",".join(f"cycles_{k}_access" for k in range(ports + 1)) + ",violations"]
    for buf in sorted(report.access_histogram):
        for bi, h in enumerate(report.access_histogram[buf]):
            counts = [str(h.get(k, 0)) for k in range(ports + 1)]
            over = sum(v for k, v in h.items() if k > ports)
            lines.append(f"{buf}.b{bi + 1}," + ",".join(counts) + f",{over}")
    return "\n".join(lines) + "\n"


def _emit(design, mem, what: str) -> int:
    if what == "dag":
        sys.stdout.write(dump_dag(design.scheduling_dag))
    elif what == "constraints":
        sys.stdout.write(design.system.text())
    elif what == "schedule":
        sys.stdout.write(schedule_csv(design))
    elif what == "verilog":
        sys.stdout.write(
            codegen.emit_verilog(design.dag, design.schedule, design.plan, mem, design.report)
        )
    return EXIT_OK


def cmd_compile(args) -> int:
    program = _load_program(args)
    mem = _load_mem(args)
    design = compile_pipeline(program, mem, frames=1)
    print(f"compile time: {design.compile_seconds * 1000.0:.1f} ms", file=sys.stderr)

    if args.emit:
        return _emit(design, mem, args.emit)

    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "schedule.csv"), "w") as f:
        f.write(schedule_csv(design))
    verilog = codegen.emit_verilog(design.dag, design.schedule, design.plan, mem, design.report)
    with open(os.path.join(args.out, f"{program.name}.v"), "w") as f:
        f.write(verilog)
    r = design.report
    print(
        f"{program.name}: pixels={design.plan.total_pixels} blocks={design.plan.total_blocks} "
        f"valid={r.valid} latency={r.latency}"
    )
    return EXIT_OK


def cmd_simulate(args) -> int:
    program = _load_program(args)
    mem = _load_mem(args)
    design = compile_pipeline(program, mem, validate=bool(args.emit))
    if args.emit:
        return _emit(design, mem, args.emit)
    if args.random is not None:
        if not args.random.startswith("seed="):
            raise StencilError("--random expects seed=<int>")
        args.seed = int(args.random.split("=", 1)[1])
        args.image = None
    if args.image:
        frames = [read_pgm(args.image)]
        if frames[0].shape != (args.height, args.width):
            raise StencilError(
                f"image is {frames[0].shape[1]}x{frames[0].shape[0]}, "
                f"expected {args.width}x{args.height}"
            )
    else:
        rng = np.random.default_rng(args.seed)
        frames = [
            rng.integers(0, 256, size=(args.height, args.width), dtype=np.uint8)
            for _ in range(args.frames)
        ]
    report = simulate(
        SimConfig(design.dag, design.schedule, design.plan, mem, tuple(frames), len(frames))
    )
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "sim_report.csv"), "w") as f:
        f.write(_report_csv(report, mem.ports))
    for name, per_frame in report.outputs.items():
        for fi, img in enumerate(per_frame):
            suffix = f"_f{fi}" if len(per_frame) > 1 else ""
            write_pgm(os.path.join(args.out, f"{name}{suffix}.pgm"), img)
    from .plots import render_access_histogram

    render_access_histogram(
        report, os.path.join(args.out, "sim_report.png"), mem.ports, title=program.name
    )
    print(
        f"valid={report.valid} port_violations={report.port_violations} "
        f"availability={report.availability_violations} functional={report.functional_match} "
        f"latency={report.latency}"
    )
    return EXIT_OK


def _cost_row(strategy: str, rep: CostReport, valid: bool = True) -> dict:
    return {
        "strategy": strategy,
        "total_pixels": rep.total_pixels,
        "total_blocks": rep.total_blocks,
        "total_bits": rep.total_bits,
        "register_pixels": rep.register_pixels,
        "energy_pj_per_frame": rep.energy_pj_per_frame,
        "power_mw": rep.power_mw,
        "valid": int(valid),
    }


def cmd_compare(args) -> int:
    program = _load_program(args)
    mem = _load_mem(args)
    if args.emit:
        return _emit(compile_pipeline(program, mem, frames=1), mem, args.emit)
    clock = args.clock
    rows = []

    ours = compile_ours(program, mem.with_style("dp"))
    rows.append(_cost_row("ours_dp", cost(ours.plan, ours.report, mem, clock), ours.valid))
    lc = compile_ours(program, mem.with_style("dplc"))
    rows.append(_cost_row("ours_dplc", cost(lc.plan, lc.report, mem, clock), lc.valid))
    dr = compile_darkroom(program, mem)
    rows.append(_cost_row("darkroom", cost(dr.plan, dr.report, mem, clock), dr.valid))
    fx = compile_fixynn(program, mem)
    fx_mem = mem.with_ports(1)
    rows.append(_cost_row("fixynn", cost(fx.plan, fx.report, fx_mem, clock), fx.valid))
    rows.append(_cost_row("soda", compile_soda(program, mem, clock)))

    os.makedirs(args.out, exist_ok=True)
    header = list(rows[0].keys())
    lines = [",".join(header)]
    for r in rows:
        lines.append(
            ",".join(
                f"{r[k]:.6f}" if isinstance(r[k], float) else str(r[k]) for k in header
            )
        )
    with open(os.path.join(args.out, "compare.csv"), "w") as f:
        f.write("\n".join(lines) + "\n")
    from .plots import render_compare_bars

    render_compare_bars(rows, os.path.join(args.out, "compare.png"), title=program.name)
    for r in rows:
        print(
            f"{r['strategy']:>9}: pixels={r['total_pixels']} blocks={r['total_blocks']} "
            f"energy={r['energy_pj_per_frame']:.0f} pJ/frame"
        )
    return EXIT_OK


def cmd_dse(args) -> int:
    program = _load_program(args)
    mem = _load_mem(args)
    if args.emit:
        return _emit(compile_pipeline(program, mem, frames=1), mem, args.emit)
    points = dse_mod.sweep(program, args.width, args.height, mem, args.clock, jobs=args.jobs)
    frontier = dse_mod.pareto(points)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "points.csv"), "w") as f:
        f.write(dse_mod.points_csv(points))
    with open(os.path.join(args.out, "frontier.csv"), "w") as f:
        f.write(dse_mod.points_csv(frontier))
    from .plots import render_dse_scatter

    render_dse_scatter(points, frontier, os.path.join(args.out, "pareto.png"), title=program.name)
    print(f"{len(points)} designs, {len(frontier)} on the frontier")
    return EXIT_OK


def cmd_examples(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    for name, source in {**corpus.CORPUS, **corpus.FIXTURES}.items():
        with open(os.path.join(args.out, f"{name}.stencil"), "w") as f:
            f.write(source.strip() + "\n")
    for fname, ports, style in (("dp.json", 2, "dp"), ("dplc.json", 2, "dplc"), ("sp.json", 1, "sp")):
        spec = default_memory_spec(ports=ports, style=style)
        with open(os.path.join(args.out, fname), "w") as f:
            json.dump(memory_spec_to_dict(spec), f, indent=2)
            f.write("\n")
    print(f"wrote example pipelines and memory specs to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stencilc", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, needs_source=True):
        if needs_source:
            p.add_argument("source", help="pipeline source file (.stencil)")
            p.add_argument("--width", type=int, required=True)
            p.add_argument("--height", type=int, required=True)
            p.add_argument("--mem", help="memory spec JSON")
            p.add_argument(
                "--emit",
                choices=["dag", "constraints", "schedule", "verilog"],
                help="print one artifact to stdout instead of writing files",
            )
        p.add_argument("--out", default=".", help="output directory")

    c = sub.add_parser("compile", help="schedule, plan, validate, and emit Verilog")
    common(c)
    c.set_defaults(func=cmd_compile)

    s = sub.add_parser("simulate", help="cycle-level simulation and report CSV")
    common(s)
    s.add_argument("--image", help="input PGM (P5); random frames if omitted")
    s.add_argument("--random", metavar="seed=K", help="seeded random input frames")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--frames", type=int, default=1)
    s.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="cost one pipeline under every strategy")
    common(p)
    p.add_argument("--clock", type=float, default=100e6)
    p.set_defaults(func=cmd_compare)

    d = sub.add_parser("dse", help="sweep per-buffer styles, extract the Pareto frontier")
    common(d)
    d.add_argument("--clock", type=float, default=100e6)
    d.add_argument("--jobs", type=int, default=1)
    d.set_defaults(func=cmd_dse)

    e = sub.add_parser("examples", help="write bundled pipelines and memory specs")
    common(e, needs_source=False)
    e.set_defaults(func=cmd_examples)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (StencilError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER


if __name__ == "__main__":
    sys.exit(main())
