"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument is outside the domain an operation is defined on."""


class ConfigError(ValueError):
    """A scenario configuration is missing or malformed (CLI exit code 2)."""


class NumericalError(RuntimeError):
    """A numerical procedure failed to reach its accuracy target (CLI exit code 3)."""


class QuadratureError(NumericalError):
    """Adaptive quadrature ran out of subdivisions.

    Carries the best estimate obtained so far and the accumulated error bound.
    """

    def __init__(self, message, best_estimate, error_bound):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.error_bound = error_bound


class InsufficientBasisError(NumericalError):
    """A truncated eigenbasis cannot represent a state accurately enough."""
