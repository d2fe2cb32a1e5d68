"""Exception types raised across the package."""


class InvalidInputError(ValueError):
    """Raised when arguments violate an operation's preconditions."""


class UnsupportedDimensionError(InvalidInputError):
    """Raised for multivariate inputs outside the supported dimension range."""
