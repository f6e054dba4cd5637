"""Exception types shared across the package."""


class GalsError(Exception):
    """Base class for all errors raised by this package."""


class DataError(GalsError):
    """Invalid input data: dimension mismatches, non-finite values,
    rank-deficient designs, malformed CSV files."""


class NumericalError(GalsError):
    """Numerical failure: singular or degenerate linear systems."""
