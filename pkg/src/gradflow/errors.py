"""Exception hierarchy for gradflow.

Everything raised on purpose by this package derives from GradFlowError,
so callers can catch one type at the boundary.
"""


class GradFlowError(Exception):
    """Base class for all gradflow errors."""


class ZeroPolynomial(GradFlowError):
    """Root finding was asked for the identically-zero polynomial."""


class InvalidInterval(GradFlowError):
    """A curvature interval [mu, L] violates 0 < mu <= L."""


class InfeasibleHhat(GradFlowError):
    """Normalized step size outside the open feasibility window."""


class NonFiniteIterate(GradFlowError):
    """An iterate overflowed or became NaN during a run."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class InnerSolveFailure(GradFlowError):
    """An implicit per-step solve did not reach its tolerance."""


class DomainViolation(GradFlowError):
    """A point left the domain of a mirror-map geometry."""


class PolicyUnavailable(GradFlowError):
    """A bootstrap policy cannot be applied to the given method/problem."""


class MissingMinimizer(GradFlowError):
    """A computation needs a minimizer the problem cannot provide."""


class EigenFailure(GradFlowError):
    """Eigendecomposition unavailable (e.g. matrix not symmetric)."""


class NoConvergence(GradFlowError):
    """An adaptive refinement loop hit its budget before its tolerance."""


class InsufficientData(GradFlowError):
    """Too few usable points for a requested fit."""


class NonPositiveValue(GradFlowError):
    """A quantity that must be positive was not (step size, gap, ...)."""


class UnknownAlgorithm(GradFlowError):
    """An algorithm name outside the supported identification table."""
