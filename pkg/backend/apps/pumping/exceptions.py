"""
Exceptions raised by the pumping numerics and the batch front end.

Parameter invariants are reported through Django's ValidationError (see
validators.py); everything here signals a numerical or regime failure.
"""


class PumpingError(Exception):
    """Base class for all pumping-statistics failures."""


class DomainError(PumpingError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class DegenerateSpectrumError(PumpingError):
    """The two eigenvalues of the tilted generator coincide."""


class ConvergenceError(PumpingError):
    """Richardson extrapolation or adaptive quadrature failed to settle."""


class ReferenceZeroError(PumpingError):
    """The unsqueezed, undriven reference cumulant vanishes."""


class UndefinedCorrectionError(PumpingError):
    """The geometric TUR correction g(Omega) is not defined at zero affinity."""


class StencilMismatchError(PumpingError):
    """Propagation runs do not form a consistent symmetric lambda stencil."""


class RegimeError(PumpingError):
    """A limiting-regime check was requested outside its regime."""


class ConfigParseError(PumpingError):
    """The run configuration file could not be parsed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class CrossCheckFailure(PumpingError):
    """
    An unflagged cross-check disagreed beyond its tolerance.

    Raised after every output file is written; ``result`` is the finished run.
    """

    def __init__(self, result):
        self.result = result
        super().__init__(f"{len(result.failures)} cross-check failure(s)")
