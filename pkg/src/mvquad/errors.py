"""Exception hierarchy shared by every stage of the synthesis pipeline."""

from __future__ import annotations


class MVQError(Exception):
    """Base class for all package errors."""


class ParseError(MVQError):
    """Malformed expression text.

    ``position`` is the character offset into the source string at which
    the problem was detected.
    """

    def __init__(self, message: str, position: int, source: str = ""):
        super().__init__(f"{message} at position {position}")
        self.message = message
        self.position = position
        self.source = source


class EvalError(MVQError):
    """An expression could not be evaluated (log of nonpositive, 1/0, ...)."""

    def __init__(self, message: str, point=None):
        where = "" if point is None else f" at point {list(point)}"
        super().__init__(f"{message}{where}")
        self.message = message
        self.point = None if point is None else tuple(float(c) for c in point)


class ConfigError(MVQError):
    """Invalid measure, domain or configuration input."""


class IntegrationError(MVQError):
    """Adaptive integration ran out of budget.

    Carries the best available estimate and its error bound.
    """

    def __init__(self, message: str, estimate=None, error=None, evaluations: int = 0):
        super().__init__(message)
        self.estimate = estimate
        self.error = error
        self.evaluations = evaluations


class DiscretizationError(MVQError):
    """Riemann discretization could not reach its residual target."""

    def __init__(self, message: str, residual: float, resolution: int, best=None):
        super().__init__(message)
        self.residual = residual
        self.resolution = resolution
        self.best = best


class PruneError(MVQError):
    """Carathéodory elimination failed to find an affine dependence."""


class ReductionError(MVQError):
    """A single path-walk attempt failed (singular frame, no crossing, ...)."""


class StageError(MVQError):
    """Wraps a failure with the name of the pipeline stage that raised it."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause
