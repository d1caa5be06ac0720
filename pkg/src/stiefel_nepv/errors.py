"""Exception types shared across the package."""


class StiefelNepvError(Exception):
    """Base class for all package errors."""


class DimensionError(StiefelNepvError, ValueError):
    """Operand shapes are incompatible."""


class NonSymmetricError(StiefelNepvError, ValueError):
    """A matrix expected to be symmetric is not, within tolerance."""


class NonFiniteError(StiefelNepvError, ValueError):
    """Input contains NaN or Inf."""


class RankDeficientError(StiefelNepvError, ArithmeticError):
    """A retraction was asked to orthonormalize a rank-deficient matrix."""


class FeasibilityError(StiefelNepvError, ValueError):
    """A matrix is too far from the Stiefel manifold to be repaired."""


class NumericalBreakdown(StiefelNepvError, ArithmeticError):
    """The objective became non-finite during a solver run."""


class ConfigError(StiefelNepvError, ValueError):
    """An experiment configuration is invalid."""
