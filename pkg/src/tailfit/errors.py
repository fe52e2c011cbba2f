"""Exception types shared across the package."""


class TailfitError(Exception):
    """Base class for all package-specific errors."""


class ThetaOutOfDomain(TailfitError):
    """Parameter vector lies outside the family's parameter space."""


class ParamOutOfRange(TailfitError):
    """Stable tail dependence function parameters out of range."""


class NonFiniteInput(TailfitError):
    """Input data contains NaN or infinite entries."""


class ZeroDenominator(TailfitError):
    """No joint exceedance at the requested threshold level."""


class Unreachable(TailfitError):
    """Requested effective sample size cannot be reached at any k."""


class ZeroModelVector(TailfitError):
    """Model moment vector vanishes; scale profile undefined."""


class NoTailData(TailfitError):
    """Empirical moment vector is identically zero."""


class SingularJ(TailfitError):
    """Jacobian cross-product is numerically singular."""


class UnsupportedFamily(TailfitError):
    """Operation not available for this tail family."""


class Underidentified(TailfitError):
    """Spatial parameters not identifiable from the available pairs."""


class SpatialNoData(TailfitError):
    """Every location pair was dropped; nothing to aggregate."""


class NonPositiveZeta(TailfitError):
    """Ratio-of-sums scale profile produced a non-positive value."""


class BisectionFailure(TailfitError):
    """Conditional copula inversion failed to converge."""


class CholeskyFailure(TailfitError):
    """Spatial covariance factorization failed (degenerate geometry)."""


class DegenerateRectangle(TailfitError):
    """Rectangle with negative side length."""
