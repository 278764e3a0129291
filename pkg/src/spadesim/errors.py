"""Exception types shared across the package."""


class SpadesimError(Exception):
    """Base class for all package errors."""


class ParameterError(SpadesimError, ValueError):
    """An argument is outside its documented range."""


class DataError(SpadesimError, ValueError):
    """Input data (samples, counts, files) is malformed or degenerate."""


class ModelError(SpadesimError, ValueError):
    """Inputs are individually valid but mutually inconsistent."""


class BracketError(ParameterError):
    """A root-finding bracket does not enclose a sign change."""


class DegenerateModeError(ModelError):
    """A projection mode cannot be constructed (vanishing derivative)."""


class NumericalError(SpadesimError, RuntimeError):
    """A numerical routine failed to converge.

    Carries the best available estimate and its error bound so callers
    can decide whether the partial result is usable.
    """

    def __init__(self, message, best_estimate=None, error_bound=None):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.error_bound = error_bound
