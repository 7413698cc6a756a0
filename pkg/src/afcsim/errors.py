"""Exception types shared across the package."""


class AfcsimError(Exception):
    """Base class for package errors."""


class ConfigError(AfcsimError):
    """Invalid, missing, or unknown configuration input."""


class GridError(AfcsimError):
    """A velocity/detuning/time grid does not resolve the required scale."""


class NumericalError(AfcsimError):
    """An integration produced non-finite values or failed to converge."""


class PeakDetectionError(AfcsimError):
    """No usable peaks found in a comb profile."""


class FitError(AfcsimError):
    """Nonlinear model fit failed or the model is unidentifiable."""
