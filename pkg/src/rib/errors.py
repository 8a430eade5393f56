"""Exception hierarchy shared across the library."""


class RibError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(RibError):
    """Inconsistent array shapes between covariance blocks, encoders or data."""


class NotIdentityCovariance(RibError):
    """Input covariance is not a scalar multiple of the identity."""


class RankDeficient(RibError):
    """A matrix required to have full rank is numerically rank deficient."""


class BetaTooLarge(RibError):
    """Regularization weight violates the small-beta validity condition."""


class DegenerateObjective(RibError):
    """A scalar minimizer collapsed onto the clamped lower bound."""


class SingularCovariance(RibError):
    """Covariance matrix is not positive definite."""


class NonFinite(RibError):
    """A computation produced NaN or infinity."""


class ZeroFisher(RibError):
    """Fisher information is zero where a ratio against it is requested."""


class ZeroProbe(RibError):
    """A linear probe with zero weights has no defined decision direction."""


class ConfigError(RibError):
    """Malformed experiment configuration."""
