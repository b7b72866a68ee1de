"""Exception hierarchy shared across the engine."""


class AsrfError(Exception):
    """Base class for all engine errors."""


class DomainError(AsrfError, ValueError):
    """Argument outside the mathematical domain of a function."""


class BracketError(AsrfError, ValueError):
    """Root finder bracket does not straddle a sign change."""


class ConvergenceError(AsrfError, RuntimeError):
    """Iterative method ran out of iterations."""


class ParameterError(AsrfError, ValueError):
    """Supervisory parameters cannot be resolved for a grade."""


class ValidationError(AsrfError, ValueError):
    """Input data violates a type invariant."""

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class CoverageError(AsrfError, LookupError):
    """A computation needs quarters the series does not carry."""


class InfeasibleError(AsrfError, ValueError):
    """Target loss lies outside the attainable range of conditional loss.

    ``attainable`` holds the (low, high) interval of conditional loss over
    the solver bracket.
    """

    def __init__(self, message, target, attainable):
        self.target = target
        self.attainable = attainable
        lo, hi = attainable
        super().__init__(f"{message}: target {target:.10g} outside attainable ({lo:.10g}, {hi:.10g})")


class ParseError(AsrfError, ValueError):
    """Malformed CSV input; carries the file, 1-based line and column."""

    def __init__(self, path, line, column, message):
        self.path, self.line, self.column = path, line, column
        super().__init__(f"{path}:{line}:{column}: {message}")
