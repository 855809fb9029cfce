"""Exception types shared across the package.

Anything raised as (a subclass of) DataError means the *input data or
requested parameters* violate a documented contract.  The command line
front end maps DataError to exit code 2; any other exception is treated
as an internal error (exit code 3).
"""


class DataError(ValueError):
    """Input data or parameters violate a documented contract."""


class DegenerateSeriesError(DataError):
    """Sign series has zero variance (all signs equal)."""


class InsufficientSupportError(DataError):
    """Too few positive autocorrelation values inside the fit range."""
