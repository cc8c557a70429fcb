"""Exception types shared across the toolkit."""


class ValidationError(ValueError):
    """Input rejected before any numerics run."""


class NumericalError(RuntimeError):
    """A numerical routine could not produce a trustworthy result."""
