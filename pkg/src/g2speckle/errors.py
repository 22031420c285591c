"""Exception types shared across the package."""


class InvalidArgumentError(ValueError):
    """An argument violates a documented precondition."""


class ResourceLimitError(RuntimeError):
    """A brute-force evaluation would exceed its size guard."""


class DegenerateInputError(ValueError):
    """Inputs make a normalized quantity undefined (zero variance, zero intensity)."""


class ConfigParseError(ValueError):
    """A geometry or run-configuration file could not be parsed."""


class FitError(RuntimeError):
    """A nonlinear fit failed to converge."""
