"""Synthesizable Verilog emission for a validated design.

Emission is a mechanical translation: one compute module per stage with its
shift-register window, one memory wrapper per buffer (one behavioral block
instance per planned SRAM), and a top module sequencing stage starts against
a global cycle counter. Output is byte-deterministic, and every numeric
literal is traceable to the schedule or the buffer plan via the header.
"""

from __future__ import annotations

from .dsl import BinOp, Call, Const, Expr, Tap
from .errors import UnsupportedExprError, UnvalidatedDesignError
from .ir import StencilDAG
from .models import MemorySpec
from .simulator import SimReport
from .solver import BufferPlan, Schedule


def _vname(name: str) -> str:
    return name.replace("~", "__")


def _expr_verilog(expr: Expr, sr_name) -> str:
    if isinstance(expr, Const):
        return f"32'sd{expr.value}" if expr.value >= 0 else f"(-32'sd{-expr.value})"
    if isinstance(expr, Tap):
        return sr_name(expr.stage, expr.dr, expr.dc)
    if isinstance(expr, BinOp):
        a = _expr_verilog(expr.left, sr_name)
        b = _expr_verilog(expr.right, sr_name)
        op = {"+": "+", "-": "-", "*": "*", "/": "/", ">>": ">>>", "<<": "<<<"}.get(expr.op)
        if op is None:
            raise UnsupportedExprError(expr.op)
        return f"({a} {op} {b})"
    if isinstance(expr, Call):
        args = [_expr_verilog(a, sr_name) for a in expr.args]
        if expr.fn == "abs":
            return f"f_abs({args[0]})"
        if expr.fn in ("min", "max"):
            out = args[0]
            for a in args[1:]:
                out = f"f_{expr.fn}({out}, {a})"
            return out
        if expr.fn == "clamp":
            return f"f_min(f_max({args[0]}, {args[1]}), {args[2]})"
        raise UnsupportedExprError(expr.fn)
    raise UnsupportedExprError(repr(expr))


def _header(dag: StencilDAG, schedule: Schedule, plan: BufferPlan) -> list[str]:
    lines = ["// generated by stencilc", f"// pipeline: {dag.name} width={dag.width}"]
    starts = " ".join(f"{n}={schedule.start[n]}" for n in dag.physical_names())
    lines.append(f"// schedule: {starts}")
    for b in plan.buffers:
        lines.append(
            f"// buffer: {b.stage} lines={b.lines} blocks={b.blocks} g={b.g} pixels={b.pixels}"
        )
    return lines


def parse_header(text: str) -> tuple[dict[str, int], dict[str, dict[str, int]]]:
    """Recover the embedded schedule and plan numbers from emitted Verilog."""
    starts: dict[str, int] = {}
    buffers: dict[str, dict[str, int]] = {}
    for line in text.splitlines():
        if line.startswith("// schedule:"):
            for part in line.split(":", 1)[1].split():
                name, val = part.split("=")
                starts[name] = int(val)
        elif line.startswith("// buffer:"):
            fields = line.split(":", 1)[1].split()
            buffers[fields[0]] = {k: int(v) for k, v in (f.split("=") for f in fields[1:])}
    return starts, buffers


_FUNCS = [
    "  function automatic signed [31:0] f_min(input signed [31:0] a, input signed [31:0] b);",
    "    f_min = (a < b) ? a : b;",
    "  endfunction",
    "  function automatic signed [31:0] f_max(input signed [31:0] a, input signed [31:0] b);",
    "    f_max = (a > b) ? a : b;",
    "  endfunction",
    "  function automatic signed [31:0] f_abs(input signed [31:0] a);",
    "    f_abs = (a < 0) ? -a : a;",
    "  endfunction",
]


def emit_verilog(
    dag: StencilDAG,
    schedule: Schedule,
    plan: BufferPlan,
    mem: MemorySpec,
    report: SimReport,
) -> str:
    """Emit the design as Verilog text. Emission refuses designs the
    simulator has not marked valid."""
    if report is None or not report.valid:
        raise UnvalidatedDesignError("refusing to emit Verilog for an unvalidated design")

    w = dag.width
    px = mem.pixel_bits
    out = _header(dag, schedule, plan)
    out.append("")

    out.append(f"module lb_block #(parameter DEPTH = {w}, WIDTH = {px}, PORTS = {mem.ports}) (")
    out.append("  input  wire              clk,")
    out.append("  input  wire              we,")
    out.append("  input  wire [31:0]       waddr,")
    out.append("  input  wire [WIDTH-1:0]  wdata,")
    out.append("  input  wire [31:0]       raddr,")
    out.append("  output reg  [WIDTH-1:0]  rdata")
    out.append(");")
    out.append("  reg [WIDTH-1:0] cells [0:DEPTH-1];")
    out.append("  always @(posedge clk) begin")
    out.append("    if (we) cells[waddr] <= wdata;")
    out.append("    rdata <= cells[raddr];")
    out.append("  end")
    out.append("endmodule")
    out.append("")

    # one wrapper per buffer; reads are per (consumer, window row)
    for b in plan.buffers:
        readers = []
        for e in dag.buffer_edges(b.stage):
            for dr in range(e.sh):
                readers.append((e.consumer, dr))
        cap = b.capacity_lines
        mod = f"buf_{_vname(b.stage)}"
        out.append(f"module {mod} (")
        out.append("  input  wire         clk,")
        out.append("  input  wire         we,")
        out.append("  input  wire [31:0]  wline,")
        out.append("  input  wire [31:0]  wcol,")
        out.append(f"  input  wire [{px - 1}:0]   wdata,")
        for consumer, dr in readers:
            cn = _vname(consumer)
            out.append(f"  input  wire [31:0]  rline_{cn}_{dr},")
            out.append(f"  input  wire [31:0]  rcol_{cn}_{dr},")
            out.append(f"  output wire [{px - 1}:0]   rdata_{cn}_{dr},")
        out.append("  input  wire         tie_off")
        out.append(");")
        out.append(f"  // {b.lines} live lines, {b.blocks} block(s) of {b.g} line(s); capacity {cap} lines")
        if b.g > 1:
            for e in dag.buffer_edges(b.stage):
                parts = min(b.g, e.sh)
                for k in range(parts):
                    out.append(
                        f"  // reader {e.consumer} part {k}: fixed offset {k * w} inside its block"
                    )
        out.append(f"  localparam integer G = {b.g};")
        out.append(f"  localparam integer BLOCKS = {b.blocks};")
        out.append(f"  localparam integer WPIX = {w};")
        out.append("  wire [31:0] wslot = (wline - 1) % (G * BLOCKS);")
        out.append("  wire [31:0] wblk  = wslot / G;")
        out.append("  wire [31:0] woff  = (wslot % G) * WPIX + wcol;")
        for blk in range(b.blocks):
            out.append(f"  wire [{px - 1}:0] q{blk};")
        for consumer, dr in readers:
            cn = _vname(consumer)
            out.append(f"  wire [31:0] rslot_{cn}_{dr} = (rline_{cn}_{dr} - 1) % (G * BLOCKS);")
            out.append(f"  wire [31:0] rblk_{cn}_{dr}  = rslot_{cn}_{dr} / G;")
            out.append(
                f"  wire [31:0] roff_{cn}_{dr}  = (rslot_{cn}_{dr} % G) * WPIX + rcol_{cn}_{dr};"
            )
        for blk in range(b.blocks):
            # single shared read address per block (contention-free by schedule)
            sel = " | ".join(
                f"((rblk_{_vname(c)}_{dr} == 32'd{blk}) ? roff_{_vname(c)}_{dr} : 32'd0)"
                for c, dr in readers
            )
            out.append(
                f"  lb_block #(.DEPTH({b.g * w}), .WIDTH({px}), .PORTS({mem.ports})) block{blk} ("
            )
            out.append(f"    .clk(clk), .we(we && (wblk == 32'd{blk})), .waddr(woff), .wdata(wdata),")
            out.append(f"    .raddr({sel}), .rdata(q{blk})")
            out.append("  );")
        for consumer, dr in readers:
            cn = _vname(consumer)
            terms = " : ".join(
                [f"(rblk_{cn}_{dr} == 32'd{blk}) ? q{blk}" for blk in range(b.blocks)] + ["{WIDTH{1'b0}}"]
            ).replace("{WIDTH{1'b0}}", f"{{{px}{{1'b0}}}}")
            out.append(f"  assign rdata_{cn}_{dr} = {terms};")
        out.append("endmodule")
        out.append("")

    # compute module per stage
    for name in dag.physical_names():
        stage = dag.stage(name)
        if stage.role == "input":
            continue
        in_edges = dag.in_edges(stage.name)
        out.append(f"module stage_{_vname(name)} (")
        out.append("  input  wire        clk,")
        out.append("  input  wire        en,")
        for e in in_edges:
            pn = _vname(e.producer)
            for dr in range(e.sh):
                out.append(f"  input  wire signed [31:0] col_{pn}_{dr},")
        out.append("  output reg  signed [31:0] pixel_out")
        out.append(");")
        for e in in_edges:
            out.append(f"  // shift-register window {e.sh}x{e.sw} over {e.producer}")
            out.append(
                f"  reg signed [31:0] sr_{_vname(e.producer)} [0:{e.sh - 1}][0:{e.sw - 1}];"
            )
        out.extend(_FUNCS)
        out.append("  integer r, c;")
        out.append("  always @(posedge clk) begin")
        out.append("    if (en) begin")
        for e in in_edges:
            pn = _vname(e.producer)
            out.append(f"      for (r = 0; r < {e.sh}; r = r + 1) begin")
            if e.sw > 1:
                out.append(f"        for (c = 0; c < {e.sw - 1}; c = c + 1)")
                out.append(f"          sr_{pn}[r][c] <= sr_{pn}[r][c+1];")
            out.append(f"        case (r)")
            for dr in range(e.sh):
                out.append(f"          {dr}: sr_{pn}[r][{e.sw - 1}] <= col_{pn}_{dr};")
            out.append("        endcase")
            out.append("      end")

        def sr_name(prod, dr, dc):
            return f"sr_{_vname(prod)}[{dr}][{dc}]"

        out.append(f"      pixel_out <= {_expr_verilog(stage.expr, sr_name)};")
        out.append("    end")
        out.append("  end")
        out.append("endmodule")
        out.append("")

    # top module: counters, start comparators, buffer and stage instances
    out.append(f"module {dag.name}_top (")
    out.append("  input  wire        clk,")
    out.append("  input  wire        rst,")
    out.append(f"  input  wire [{px - 1}:0] pixel_in,")
    for o in dag.output_names():
        out.append(f"  output wire signed [31:0] out_{_vname(o)},")
    out.append("  output wire        frame_done")
    out.append(");")
    out.append("  reg [63:0] cycle;")
    out.append("  always @(posedge clk) begin")
    out.append("    if (rst) cycle <= 64'd0; else cycle <= cycle + 64'd1;")
    out.append("  end")
    for name in dag.physical_names():
        s = schedule.start[name]
        n = _vname(name)
        out.append(f"  wire en_{n} = (cycle > 64'd{s});  // start cycle {s}")
        out.append(f"  wire [63:0] k_{n} = en_{n} ? (cycle - 64'd{s} - 64'd1) : 64'd0;")
        out.append(f"  wire [31:0] line_{n} = k_{n} / 64'd{w} + 64'd1;")
        out.append(f"  wire [31:0] col_idx_{n} = k_{n} % 64'd{w};")
    for name in dag.physical_names():
        stage = dag.stage(name)
        if stage.role == "input":
            continue
        n = _vname(name)
        for e in dag.in_edges(stage.name):
            pn = _vname(e.producer)
            for dr in range(e.sh):
                out.append(f"  wire [{px - 1}:0] rd_{n}_{pn}_{dr};")
    out.append(f"  wire [{px - 1}:0] wpix_{_vname(dag.input_name)} = pixel_in;")
    for name in dag.physical_names():
        stage = dag.stage(name)
        if stage.role == "input":
            continue
        n = _vname(name)
        in_edges = dag.in_edges(stage.name)
        ports = [".clk(clk)", f".en(en_{n})"]
        for e in in_edges:
            pn = _vname(e.producer)
            for dr in range(e.sh):
                ports.append(f".col_{pn}_{dr}($signed({{24'd0, rd_{n}_{pn}_{dr}}}))")
        ports.append(f".pixel_out(px_{n})")
        out.append(f"  wire signed [31:0] px_{n};")
        out.append(f"  stage_{n} u_{n} (" + ", ".join(ports) + ");")
    for b in plan.buffers:
        bn = _vname(b.stage)
        ports = [".clk(clk)", f".we(en_{bn})", f".wline(line_{bn})", f".wcol(col_idx_{bn})"]
        if dag.stage(b.stage).role == "input":
            ports.append(f".wdata(wpix_{bn})")
        else:
            ports.append(f".wdata(px_{bn}[{px - 1}:0])")
        for e in dag.buffer_edges(b.stage):
            cn = _vname(e.consumer)
            for dr in range(e.sh):
                ports.append(f".rline_{cn}_{dr}(line_{cn} + 32'd{dr})")
                ports.append(f".rcol_{cn}_{dr}(col_idx_{cn})")
                ports.append(f".rdata_{cn}_{dr}(rd_{cn}_{bn}_{dr})")
        ports.append(".tie_off(1'b0)")
        out.append(f"  buf_{bn} u_buf_{bn} (" + ", ".join(ports) + ");")
    for o in dag.output_names():
        out.append(f"  assign out_{_vname(o)} = px_{_vname(o)};")
    out.append(f"  assign frame_done = (cycle >= 64'd{report.latency});  // latency {report.latency}")
    out.append("endmodule")
    return "\n".join(out) + "\n"
