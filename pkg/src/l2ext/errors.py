"""Exception hierarchy shared by all l2ext modules."""

from __future__ import annotations


class L2ExtError(Exception):
    """Base class for every error raised by the library."""


class DomainError(L2ExtError, ValueError):
    """An argument lies outside the set where an operation is defined."""


class ConstructionError(L2ExtError, ValueError):
    """An object failed validation while being built."""


class IndeterminateMembership(L2ExtError):
    """Conformal inversion did not converge, so membership is undecided."""

    def __init__(self, point, message=None):
        self.point = point
        super().__init__(message or f"membership of {point!r} is indeterminate")


class UnsupportedError(L2ExtError):
    """The requested operation is not available for this kind of input."""


class QuadratureFailure(L2ExtError):
    """An adaptive quadrature stopped before reaching its error target."""

    def __init__(self, message, error_estimate=float("nan")):
        self.error_estimate = error_estimate
        super().__init__(f"{message} (achieved error estimate {error_estimate:.3e})")


class NonConvergence(L2ExtError):
    """An iterative solver hit its iteration cap."""

    def __init__(self, message, diagnostics=None):
        self.diagnostics = dict(diagnostics or {})
        super().__init__(message)


class NumericError(L2ExtError, FloatingPointError):
    """NaN or inf appeared where finite values are required."""


class PreconditionError(L2ExtError):
    """A mathematical precondition failed on a sample point."""

    def __init__(self, message, witness=None):
        self.witness = witness
        super().__init__(message)


class ConfigError(L2ExtError, ValueError):
    """The run configuration does not validate."""
