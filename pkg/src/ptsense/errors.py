"""Exception hierarchy for ptsense.

Numerical guards raise rather than return ill-conditioned values; callers
that scan over parameter grids catch these and record per-point markers.
"""


class PtsenseError(Exception):
    """Base class for all ptsense errors."""


class EPProximityError(PtsenseError):
    """Parameters are inside the exceptional-point guard band (1 - beta^2 too small)."""


class BrokenRegimeError(PtsenseError):
    """Operation requires the real-spectrum regime but J <= gamma."""


class SelfOrthogonalError(PtsenseError):
    """Vector has (near-)zero self inner product under the current metric."""


class OutOfWindowError(PtsenseError):
    """Time argument lies outside the protocol window [0, T]."""


class ZeroCoefficientError(PtsenseError):
    """Conversion requires a nonzero coefficient."""


class DegenerateInputError(PtsenseError):
    """Inputs are degenerate and the requested quantity is undefined."""


class ZeroStateError(PtsenseError):
    """A nonzero state vector is required."""


class StepUnderflowError(PtsenseError):
    """Adaptive step control was forced below the configured minimum step.

    Carries the integration time at which control failed.
    """

    def __init__(self, message: str, t_fail: float):
        super().__init__(message)
        self.t_fail = t_fail


class StepTooLargeError(PtsenseError):
    """Finite-difference stencil spans a gauge discontinuity; reduce the step."""


class GridTooSmallError(PtsenseError):
    """At least three grid points are required."""


class AsymmetricGridError(PtsenseError):
    """Detuning grid cannot be paired into (+delta, -delta) couples."""
