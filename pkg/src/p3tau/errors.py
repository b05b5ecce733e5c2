"""Exception types shared across the toolkit.

The CLI maps :class:`ValidationError` to exit status 1 and
:class:`ConvergenceError` to exit status 2.
"""

from __future__ import annotations


class ValidationError(ValueError):
    """Parameters fall outside the domain where a formula applies.

    ``condition`` names the failed inequality so diagnostics can report it.
    """

    def __init__(self, message: str, condition: str | None = None, margin: float | None = None):
        super().__init__(message)
        self.condition = condition
        self.margin = margin


class PoleError(ValidationError):
    """Argument sits on a pole of Gamma or a zero of Barnes G."""


class SingularValueError(ValidationError):
    """A logarithm or ratio is evaluated at its singular point."""


class ConvergenceError(RuntimeError):
    """A numerical procedure failed to reach its stated tolerance."""

    def __init__(self, message: str, tolerance: float | None = None, achieved: float | None = None):
        super().__init__(message)
        self.tolerance = tolerance
        self.achieved = achieved


class SingularityError(ConvergenceError):
    """Integration ran into the neighbourhood of a movable singularity."""


class IllConditionedError(ConvergenceError):
    """A least-squares system is too ill-conditioned to trust."""
