"""Stencil pipeline DSL: tokenizer, parser, expression AST, and DAG lowering."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Union

import numpy as np

from . import ir
from .errors import (
    CycleDetectedError,
    DslSyntaxError,
    DuplicateStageError,
    NegativeOffsetError,
    NoInputError,
    NoOutputError,
    UnknownStageError,
)

CALL_FNS = ("min", "max", "abs", "clamp")

_MASK32 = (1 << 32) - 1


def wrap32(a):
    """Reduce an integer scalar/array into two's-complement 32-bit range (int64 dtype)."""
    return ((np.asarray(a, dtype=np.int64) + (1 << 31)) & _MASK32) - (1 << 31)


# ---------------------------------------------------------------------------
# Expression AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: int


@dataclass(frozen=True)
class Tap:
    stage: str
    dr: int
    dc: int


@dataclass(frozen=True)
class BinOp:
    op: str  # + - * / >> <<
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    fn: str  # min max abs clamp
    args: tuple["Expr", ...]


Expr = Union[Const, Tap, BinOp, Call]

TapFetch = Callable[[str, int, int], np.ndarray]


def expr_taps(expr: Expr):
    """Yield every Tap node in the expression tree, left to right."""
    if isinstance(expr, Tap):
        yield expr
    elif isinstance(expr, BinOp):
        yield from expr_taps(expr.left)
        yield from expr_taps(expr.right)
    elif isinstance(expr, Call):
        for a in expr.args:
            yield from expr_taps(a)


def rename_taps(expr: Expr, mapping: dict[str, str]) -> Expr:
    """Retarget taps to renamed producers (used when rerouting through relays)."""
    if isinstance(expr, Tap):
        if expr.stage in mapping:
            return Tap(mapping[expr.stage], expr.dr, expr.dc)
        return expr
    if isinstance(expr, BinOp):
        return BinOp(expr.op, rename_taps(expr.left, mapping), rename_taps(expr.right, mapping))
    if isinstance(expr, Call):
        return Call(expr.fn, tuple(rename_taps(a, mapping) for a in expr.args))
    return expr


def eval_expr(expr: Expr, fetch: TapFetch):
    """Evaluate with 32-bit wrapping semantics.

    Division truncates toward zero (x/0 evaluates to 0); shift counts are
    clipped to [0, 31]. `fetch` supplies tap values as int64 arrays already
    inside int32 range; scalars broadcast.
    """
    if isinstance(expr, Const):
        return wrap32(expr.value)
    if isinstance(expr, Tap):
        return fetch(expr.stage, expr.dr, expr.dc)
    if isinstance(expr, BinOp):
        a = eval_expr(expr.left, fetch)
        b = eval_expr(expr.right, fetch)
        op = expr.op
        if op == "+":
            return wrap32(a + b)
        if op == "-":
            return wrap32(a - b)
        if op == "*":
            return wrap32(a * b)
        if op == "/":
            safe = np.where(b == 0, 1, b)
            q = np.abs(a) // np.abs(safe)
            q = np.where((a < 0) != (safe < 0), -q, q)
            return wrap32(np.where(b == 0, 0, q))
        if op == ">>":
            return wrap32(np.asarray(a) >> np.clip(b, 0, 31))
        if op == "<<":
            return wrap32(np.asarray(a) << np.clip(b, 0, 31))
        raise AssertionError(f"unknown operator {op!r}")
    if isinstance(expr, Call):
        vals = [eval_expr(a, fetch) for a in expr.args]
        if expr.fn == "min":
            out = vals[0]
            for v in vals[1:]:
                out = np.minimum(out, v)
            return out
        if expr.fn == "max":
            out = vals[0]
            for v in vals[1:]:
                out = np.maximum(out, v)
            return out
        if expr.fn == "abs":
            return wrap32(np.abs(vals[0]))
        if expr.fn == "clamp":
            lo, hi = vals[1], vals[2]
            return np.minimum(np.maximum(vals[0], lo), hi)
        raise AssertionError(f"unknown call {expr.fn!r}")
    raise AssertionError(f"unknown expression node {expr!r}")


# ---------------------------------------------------------------------------
# Program structure
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StageDecl:
    name: str
    role: str  # input | interior | output
    expr: Optional[Expr]  # None for the input stage
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class StencilProgram:
    name: str
    stages: tuple[StageDecl, ...]
    width: Optional[int] = None
    height: Optional[int] = None

    def stage(self, name: str) -> StageDecl:
        for s in self.stages:
            if s.name == name:
                return s
        raise UnknownStageError(name)

    @property
    def input_stage(self) -> StageDecl:
        return next(s for s in self.stages if s.role == "input")

    @property
    def output_stages(self) -> tuple[StageDecl, ...]:
        return tuple(s for s in self.stages if s.role == "output")

    def windows(self, stage: StageDecl) -> dict[str, tuple[int, int]]:
        """Per-producer (height, width) bounding box of the stage's taps."""
        boxes: dict[str, tuple[int, int]] = {}
        if stage.expr is None:
            return boxes
        for t in expr_taps(stage.expr):
            sh, sw = boxes.get(t.stage, (0, 0))
            boxes[t.stage] = (max(sh, t.dr + 1), max(sw, t.dc + 1))
        return boxes

    def with_size(self, width: int, height: int) -> "StencilProgram":
        return replace(self, width=width, height=height)


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Token:
    kind: str  # name | int | symbol | eof
    value: str
    line: int
    col: int


_SYMBOLS = (">>", "<<", "{", "}", "(", ")", "[", "]", ",", ";", "=", "+", "-", "*", "/")


def _tokenize(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and source[i] != "\n":
                i += 1
            continue
        if ch.isalpha() or ch == "_":
            start = i
            while i < n and (source[i].isalnum() or source[i] == "_"):
                i += 1
            tokens.append(_Token("name", source[start:i], line, col))
            col += i - start
            continue
        if ch.isdigit():
            start = i
            while i < n and source[i].isdigit():
                i += 1
            tokens.append(_Token("int", source[start:i], line, col))
            col += i - start
            continue
        two = source[i : i + 2]
        if two in (">>", "<<"):
            tokens.append(_Token("symbol", two, line, col))
            i += 2
            col += 2
            continue
        if ch in "{}()[],;=+-*/":
            tokens.append(_Token("symbol", ch, line, col))
            i += 1
            col += 1
            continue
        raise DslSyntaxError(f"unexpected character {ch!r}", line, col)
    tokens.append(_Token("eof", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# Parser (recursive descent over the grammar in the README)
# ---------------------------------------------------------------------------


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def expect(self, kind: str, value: Optional[str] = None) -> _Token:
        t = self.peek()
        if t.kind != kind or (value is not None and t.value != value):
            want = value if value is not None else kind
            raise DslSyntaxError(f"expected {want!r}, found {t.value!r}", t.line, t.col)
        return self.next()

    def parse_program(self):
        self.expect("name", "pipeline")
        name = self.expect("name").value
        self.expect("symbol", "{")
        decls = []
        while not (self.peek().kind == "symbol" and self.peek().value == "}"):
            decls.append(self.parse_decl())
        self.expect("symbol", "}")
        self.expect("eof")
        return name, decls

    def parse_decl(self):
        t = self.peek()
        if t.kind == "name" and t.value in ("input", "output"):
            self.next()
            ident = self.expect("name")
            self.expect("symbol", ";")
            return (t.value, ident.value, None, ident.line, ident.col)
        if t.kind == "name" and t.value == "stage":
            self.next()
            ident = self.expect("name")
            self.expect("symbol", "=")
            expr = self.parse_expr()
            self.expect("symbol", ";")
            return ("stage", ident.value, expr, ident.line, ident.col)
        raise DslSyntaxError(f"expected declaration, found {t.value!r}", t.line, t.col)

    def parse_expr(self) -> Expr:
        node = self.parse_term()
        while self.peek().kind == "symbol" and self.peek().value in ("+", "-"):
            op = self.next().value
            node = BinOp(op, node, self.parse_term())
        return node

    def parse_term(self) -> Expr:
        node = self.parse_factor()
        while self.peek().kind == "symbol" and self.peek().value in ("*", "/", ">>", "<<"):
            op = self.next().value
            node = BinOp(op, node, self.parse_factor())
        return node

    def parse_factor(self) -> Expr:
        t = self.peek()
        if t.kind == "int":
            self.next()
            return Const(int(t.value))
        if t.kind == "symbol" and t.value == "(":
            self.next()
            node = self.parse_expr()
            self.expect("symbol", ")")
            return node
        if t.kind == "name":
            if t.value in CALL_FNS:
                self.next()
                self.expect("symbol", "(")
                args = [self.parse_expr()]
                while self.peek().kind == "symbol" and self.peek().value == ",":
                    self.next()
                    args.append(self.parse_expr())
                self.expect("symbol", ")")
                self._check_arity(t, len(args))
                return Call(t.value, tuple(args))
            self.next()
            self.expect("symbol", "[")
            dr = self.parse_signed_int()
            self.expect("symbol", ",")
            dc = self.parse_signed_int()
            self.expect("symbol", "]")
            if dr < 0 or dc < 0:
                raise NegativeOffsetError(
                    f"tap {t.value}[{dr},{dc}] has a negative offset (line {t.line})"
                )
            return Tap(t.value, dr, dc)
        raise DslSyntaxError(f"expected expression, found {t.value!r}", t.line, t.col)

    def parse_signed_int(self) -> int:
        sign = 1
        if self.peek().kind == "symbol" and self.peek().value == "-":
            self.next()
            sign = -1
        t = self.expect("int")
        return sign * int(t.value)

    def _check_arity(self, tok: _Token, n: int):
        want = {"min": (2, None), "max": (2, None), "abs": (1, 1), "clamp": (3, 3)}[tok.value]
        lo, hi = want
        if n < lo or (hi is not None and n > hi):
            raise DslSyntaxError(f"{tok.value} takes {lo if hi == lo else f'>= {lo}'} argument(s)", tok.line, tok.col)


# ---------------------------------------------------------------------------
# Public frontend operations
# ---------------------------------------------------------------------------


def parse_program(source: str, width: Optional[int] = None, height: Optional[int] = None) -> StencilProgram:
    """Parse DSL text into a validated StencilProgram.

    Image width/height are compile-invocation parameters, not source tokens.
    """
    name, decls = _Parser(_tokenize(source)).parse_program()

    stage_exprs: dict[str, Expr] = {}
    order: list[tuple[str, int, int]] = []
    inputs: list[str] = []
    outputs: list[str] = []
    for kind, ident, expr, line, col in decls:
        if kind in ("input", "stage"):
            if ident in stage_exprs or ident in inputs:
                raise DuplicateStageError(f"stage {ident!r} declared twice (line {line})")
            order.append((ident, line, col))
            if kind == "input":
                inputs.append(ident)
            else:
                stage_exprs[ident] = expr
        else:  # output marker
            outputs.append(ident)

    if len(inputs) == 0:
        raise NoInputError(f"pipeline {name!r} declares no input stage")
    if len(inputs) > 1:
        raise DslSyntaxError(f"pipeline {name!r} declares more than one input stage", 1, 1)
    if not outputs:
        raise NoOutputError(f"pipeline {name!r} declares no output stage")

    declared = {ident for ident, _, _ in order}
    for out in outputs:
        if out not in declared:
            raise UnknownStageError(f"output marks undeclared stage {out!r}")
        if out in inputs:
            raise DslSyntaxError(f"input stage {out!r} cannot be an output", 1, 1)

    stages = []
    for ident, line, col in order:
        if ident in inputs:
            role = "input"
            expr = None
        else:
            role = "output" if ident in outputs else "interior"
            expr = stage_exprs[ident]
            taps = list(expr_taps(expr))
            if not taps:
                raise DslSyntaxError(f"stage {ident!r} reads no producers", line, col)
            for t in taps:
                if t.stage not in declared:
                    raise UnknownStageError(
                        f"stage {ident!r} reads undeclared stage {t.stage!r} (line {line})"
                    )
        stages.append(StageDecl(ident, role, expr, line, col))

    return StencilProgram(name, tuple(stages), width, height)


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, ">>": 2, "<<": 2}


def _print_expr(expr: Expr, parent_prec: int = 0, right_side: bool = False) -> str:
    if isinstance(expr, Const):
        return str(expr.value)
    if isinstance(expr, Tap):
        return f"{expr.stage}[{expr.dr},{expr.dc}]"
    if isinstance(expr, Call):
        return f"{expr.fn}(" + ", ".join(_print_expr(a) for a in expr.args) + ")"
    prec = _PREC[expr.op]
    text = (
        _print_expr(expr.left, prec, False)
        + f" {expr.op} "
        + _print_expr(expr.right, prec, True)
    )
    if prec < parent_prec or (prec == parent_prec and right_side):
        return f"({text})"
    return text


def print_program(p: StencilProgram) -> str:
    """Canonical source text; parse(print(p)) reproduces p."""
    lines = [f"pipeline {p.name} {{"]
    for s in p.stages:
        if s.role == "input":
            lines.append(f"  input {s.name};")
        else:
            lines.append(f"  stage {s.name} = {_print_expr(s.expr)};")
    for s in p.stages:
        if s.role == "output":
            lines.append(f"  output {s.name};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def lower_to_dag(p: StencilProgram, width: Optional[int] = None) -> ir.StencilDAG:
    """Lower a validated program to the scheduling DAG. Edges carry the per-edge
    stencil window derived from the consumer's tap bounding box."""
    w = width if width is not None else p.width
    if w is None:
        raise ValueError("image width must be supplied before lowering")

    stages = tuple(ir.Stage(s.name, s.role, s.expr) for s in p.stages)
    edges = []
    for s in p.stages:
        for producer, (sh, sw) in sorted(p.windows(s).items(), key=lambda kv: kv[0]):
            edges.append(ir.Edge(producer=producer, consumer=s.name, sh=sh, sw=sw))
    dag = ir.StencilDAG(p.name, stages, tuple(edges), w)

    cycle = dag.find_cycle()
    if cycle:
        raise CycleDetectedError(cycle)
    return dag
