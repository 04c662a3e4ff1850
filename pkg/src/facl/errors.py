"""Exception types shared across the toolkit."""


class ShapeError(ValueError):
    """Raised when array dimensions or shapes do not match a contract."""


class DegenerateInputError(ValueError):
    """Raised when an input makes a quantity undefined (e.g. a 0/0 ratio)."""


class DivergenceError(RuntimeError):
    """Raised when an iterative optimization produces non-finite values."""
