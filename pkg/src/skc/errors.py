"""Exception hierarchy shared by every module."""


class ModelError(ValueError):
    """Base class for invalid model parameters or degenerate configurations."""


class NonPositiveChannelVariance(ModelError):
    pass


class CorrelationOutOfRange(ModelError):
    pass


class NegativeNoise(ModelError):
    pass


class NonFinite(ModelError):
    pass


class NegativeArgument(ModelError):
    pass


class InfiniteMI(ModelError):
    """The requested mutual information diverges (noise-free limit)."""


class DegenerateCovariance(ModelError):
    pass


class DegeneratePdf(ModelError):
    """A joint density is unbounded because its covariance is (near) singular."""


class AsymptoticUndefined(ModelError):
    pass


class TooFewSamples(ModelError):
    pass


class NonFiniteLogDensity(ModelError):
    pass


class NumericalError(ArithmeticError):
    """Base class for failures of the numerical engines."""


class NonFiniteIntegrand(NumericalError):
    pass


class ToleranceNotReached(NumericalError):
    """Evaluation budget exhausted; ``result`` holds the best estimate."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result
