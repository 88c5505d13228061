class OverdampedError(ValueError):
    """Coupling too weak relative to the damping asymmetry (imaginary lambda)."""


class DegenerateError(ValueError):
    """A ratio-type estimator has a vanishing denominator."""


class TruncationError(RuntimeError):
    """Fock-space truncation does not hold the state to the required tolerance."""


class OracleBudgetError(RuntimeError):
    """The requested Fock-space simulation exceeds the memory budget."""
