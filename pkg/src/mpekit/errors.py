"""Exception hierarchy shared across the package."""


class MpeError(ValueError):
    """Base class for all package-specific errors."""


class DimensionError(MpeError):
    """Inputs that must share a support or feature dimension do not."""


class DomainError(MpeError):
    """A scalar argument lies outside its admissible range."""


class InfeasibleError(MpeError):
    """A requested decomposition does not exist for the given inputs."""


class InconsistentMixtureError(MpeError):
    """The claimed component weight is incompatible with the mixture."""


class DegenerateAcceptanceError(MpeError):
    """An acceptance function rejects (almost) everything."""


class InsufficientDataError(MpeError):
    """Not enough observations to evaluate an estimator."""


class DegenerateDataError(MpeError):
    """Training data contains a single class."""


class AnchorError(MpeError):
    """Interpolation anchors around a peak region carry no counts."""


class ConsistencyError(MpeError):
    """Components of a decomposition do not reconstruct the whole."""


class ConfigError(MpeError):
    """An experiment configuration fails schema validation."""
