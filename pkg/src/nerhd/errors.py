"""Exception types shared across the package."""


class NerhdError(Exception):
    """Base class for all package errors."""


class DomainError(NerhdError):
    """State left the admissible set (rho, theta, eta must stay positive)."""


class HypothesisViolation(NerhdError):
    """An equation of state failed one of the pointwise admissibility
    inequalities p > 0, p_rho > 0, p_theta > 0, e_theta > 0."""


class DimensionError(NerhdError):
    """Vector or matrix dimensions inconsistent with the state's dimension."""


class SymmetryError(NerhdError):
    """A matrix family that must be symmetric is not; usually signals a
    state off the equilibrium manifold eta = theta**4."""


class NumericalError(NerhdError):
    """A linear-algebra kernel failed (non-definite mass matrix, eigensolver
    breakdown)."""


class SearchFailure(NerhdError):
    """The compensating-matrix search exhausted its budget without finding a
    positive-definite combination."""


class CFLViolation(NerhdError):
    """Explicit step called with dt above the advective stability limit."""


class PositivityLoss(NerhdError):
    """A solver substep produced nonpositive density, temperature, or
    radiation energy."""


class NewtonDivergence(NerhdError):
    """Pointwise implicit relaxation solve failed to converge."""


class ContinuationError(NerhdError):
    """Eigenvalue branch continuation could not proceed."""


class InsufficientData(NerhdError):
    """Too few usable samples in a fit window."""


class ConfigError(NerhdError):
    """Malformed or inconsistent configuration input."""
