"""Exception types shared across the compiler."""


class StencilError(Exception):
    """Base class for all compiler errors."""


class DslSyntaxError(StencilError):
    """Malformed source text; carries the 1-based line/column of the offending token."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, col {col})")
        self.line = line
        self.col = col


class UnknownStageError(StencilError):
    pass


class DuplicateStageError(StencilError):
    pass


class NegativeOffsetError(StencilError):
    pass


class NoInputError(StencilError):
    pass


class NoOutputError(StencilError):
    pass


class CycleDetectedError(StencilError):
    def __init__(self, cycle):
        super().__init__("dependency cycle: " + " -> ".join(cycle))
        self.cycle = tuple(cycle)


class CoalesceUnavailableError(StencilError):
    pass


class PositiveCycleError(StencilError):
    """Inconsistent difference-constraint system; indicates a compiler bug."""


class InfeasibleError(StencilError):
    """No disjunction branch admits a schedule."""


class BlockTooSmallError(StencilError):
    pass


class UnsupportedMemoryError(StencilError):
    pass


class UnvalidatedDesignError(StencilError):
    pass


class UnsupportedExprError(StencilError):
    pass


class MissingEnergyTableError(StencilError):
    pass
