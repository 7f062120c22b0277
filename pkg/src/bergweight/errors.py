"""Exception types shared across the package."""


class BergweightError(Exception):
    """Base class for all package-specific errors."""


class NotHermitian(BergweightError):
    """Matrix expected to be Hermitian is not, beyond tolerance."""


class NotPositiveDefinite(BergweightError):
    """Gram matrix has a non-positive eigenvalue."""


class DimensionMismatch(BergweightError):
    """Operands live on spaces of different dimensions."""


class DegenerateFlag(BergweightError):
    """Flag subspace dimensions are not strictly increasing."""


class RankDeficient(BergweightError):
    """Surjection matrix does not have full row rank."""


class InvalidP(BergweightError):
    """Schatten exponent outside [1, inf]."""


class InvalidParams(BergweightError):
    """Constructor parameters out of the allowed range."""


class NotDiagonal(BergweightError):
    """Operation requires a monomial-diagonal object."""


class NotConvex(BergweightError):
    """Potential fails the convexity check in the log coordinate."""


class NotRotationInvariant(BergweightError):
    """Operation requires a rotation-invariant potential."""


class NonPositiveVolume(BergweightError):
    """Curvature volume density is non-positive at a quadrature node."""


class QuadratureUnderResolved(BergweightError):
    """Self-test against a refined rule exceeded the requested tolerance."""


class ZeroKernel(BergweightError):
    """Bergman kernel vanishes at the requested point."""


class ConfigInvalid(BergweightError):
    """Experiment configuration failed validation."""


class ExperimentUnknown(BergweightError):
    """Requested experiment name is not in the catalog."""
