"""Exception hierarchy shared across the solver toolkit."""


class MHSolverError(Exception):
    """Base class for all toolkit errors."""


class NonFinite(MHSolverError):
    """An integrand or objective returned NaN/inf on a non-negligible set."""


class NoConvergence(MHSolverError):
    """An iterative routine hit its refinement or iteration limit."""


class NoBracket(MHSolverError):
    """Geometric expansion failed to bracket a sign change."""


class OutOfSupport(MHSolverError):
    """Outcome value outside the distribution's support."""


class ScoreNotInvertible(MHSolverError):
    """The family's score is not monotone in the outcome."""


class ScoreOutOfRange(MHSolverError):
    """Requested score value lies outside the score's image.

    ``side`` is ``"below"`` or ``"above"`` so callers can clamp to the
    support boundary.
    """

    def __init__(self, side: str, message: str = ""):
        self.side = side
        super().__init__(message or f"score value out of range ({side})")


class BelowLimitedLiability(MHSolverError):
    """Utility level below u(0); no nonnegative wage attains it."""


class Infeasible(MHSolverError):
    """No contract satisfies the constraints at this reservation utility."""


class Diverged(MHSolverError):
    """Expected wage integral exceeded the overflow guard."""


class GridFallbackFailed(MHSolverError):
    """Both the active-set path and the grid fallback failed."""


class NoTransition(MHSolverError):
    """Validity does not differ between the two bracket endpoints."""


class ParseError(MHSolverError):
    """Config file is not well-formed."""


class ValidationError(MHSolverError):
    """Config parsed but violates an invariant."""
