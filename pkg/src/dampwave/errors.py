"""Exception hierarchy shared by all modules."""


class DampwaveError(Exception):
    """Base class for all library errors."""


class ShapeError(DampwaveError, ValueError):
    """Fields live on different grids or have incompatible shapes."""


class ParameterError(DampwaveError, ValueError):
    """A numeric parameter is outside its admissible range."""


class DerivativeOrderError(ParameterError):
    """Requested derivative order exceeds the configured maximum."""


class DomainError(ParameterError):
    """A support radius or evaluation point falls outside the lattice."""


class StepSizeError(DampwaveError):
    """The time step violates the stability (CFL) budget."""


class BlowUpError(DampwaveError):
    """The discrete solution became non-finite."""

    def __init__(self, message: str, time: float):
        super().__init__(message)
        self.time = time


class FitError(DampwaveError):
    """A decay fit cannot be performed on the given series."""


class HypothesisError(DampwaveError):
    """Initial data does not satisfy the claimed integrability hypothesis."""


class ConfigError(DampwaveError):
    """Experiment configuration is malformed; ``key`` names the offender."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key
