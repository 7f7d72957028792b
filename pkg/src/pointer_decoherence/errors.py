"""Exception hierarchy.

Every degenerate configuration surfaces as a typed error instead of a NaN.
"""


class PointerDecoherenceError(Exception):
    """Base class for all package errors."""


class ConfigurationError(PointerDecoherenceError, ValueError):
    """Invalid parameters or mismatched shapes."""


class DegeneratePostSelectionError(PointerDecoherenceError, ZeroDivisionError):
    """Conditional expectation denominator sum |alpha_j beta_j|^2 vanishes."""


class OrthogonalSelectionError(PointerDecoherenceError, ZeroDivisionError):
    """Weak-value denominator <psi_f|psi_i> vanishes."""


class DegenerateTransitionError(PointerDecoherenceError, ZeroDivisionError):
    """Transition-value denominator <psi_f|rho'|psi_f> vanishes."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class PostSelectionAnnihilationError(PointerDecoherenceError, ZeroDivisionError):
    """The post-selected pointer state has (numerically) zero norm."""


class IncompatibleBranchError(PointerDecoherenceError, ValueError):
    """Branches built with different complex widths cannot be paired."""


class NumericalFailure(PointerDecoherenceError, RuntimeError):
    """Grid propagation could not be trusted (boundary, non-convergence)."""


class BoundaryContaminationError(NumericalFailure):
    """A wavepacket approached the edge of the periodic grid."""


class ConvergenceError(NumericalFailure):
    """A refinement ladder did not converge monotonically."""
