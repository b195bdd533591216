"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Unsupported context or malformed experiment configuration."""


class ConstructionError(ValueError):
    """Parameters violate the hypotheses of a construction."""


class PrecisionError(ArithmeticError):
    """A fixed-point computation would exceed its error budget."""


class BudgetError(ValueError):
    """A requested enumeration exceeds the configured size budget."""


class ConvergenceError(ArithmeticError):
    """An iterative numeric routine did not converge within its cap."""
