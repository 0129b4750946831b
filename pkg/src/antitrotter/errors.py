"""Exception types shared across the package."""


class AntitrotterError(Exception):
    """Base class for all errors raised by this package."""


class NotHermitian(AntitrotterError):
    """Input matrix is not Hermitian within tolerance."""


class MateriallyNegative(AntitrotterError):
    """A matrix expected to be positive semidefinite has a significantly negative eigenvalue."""


class DimensionMismatch(AntitrotterError):
    """Operands have incompatible dimensions."""


class DimensionTooLarge(AntitrotterError):
    """Dimension or binomial workspace exceeds the supported cap."""


class BadCardinality(AntitrotterError):
    """Subset cardinality is outside 1..d or members are invalid."""


class CardinalityMismatch(AntitrotterError):
    """Subset cardinalities disagree where equal cardinalities are required."""


class NotDecomposable(AntitrotterError):
    """Wedge-coordinate vector is not decomposable (kernel dimension is wrong)."""


class EtaZero(AntitrotterError):
    """Requested level has a vanishing eta value, so the construction is undefined."""


class QNotRankOne(AntitrotterError):
    """Principal eigenvalue of the boundary Gram matrix is not simple within tolerance."""


class MaximalityFails(AntitrotterError):
    """Maximality criterion does not hold, so the shortcut construction is unavailable."""


class RegularizationDiverged(AntitrotterError):
    """Epsilon-regularized evaluations did not settle within the acceptance rule."""


class NotConverged(AntitrotterError):
    """Power-schedule extrapolation did not meet its convergence criterion."""


class NotDensity(AntitrotterError):
    """Matrix is not a density matrix (unit trace, positive semidefinite)."""


class AlphaOne(AntitrotterError):
    """Renyi order alpha = 1 is excluded."""


class ZZero(AntitrotterError):
    """Renyi parameter z = 0 is excluded."""


class RankMismatch(AntitrotterError):
    """Projections or frames have different ranks."""


class NotProjection(AntitrotterError):
    """Matrix is not an orthogonal projection within tolerance."""


class ShapeMismatch(AntitrotterError):
    """Array has the wrong shape."""


class LengthMismatch(AntitrotterError):
    """Sequences have inconsistent lengths."""


class InsufficientPoints(AntitrotterError):
    """Too few schedule points for the requested extrapolation."""


class BadSpectrum(AntitrotterError):
    """Spectrum specification is invalid."""
