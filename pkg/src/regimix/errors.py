"""Exception types shared across the package.

The CLI maps exceptions onto exit codes: ``ValueError`` (bad configuration
or infeasible request) -> 2, ``DataError``/``OSError`` (malformed or
incompatible inputs) -> 3, ``NumericalError`` -> 4.
"""


class DataError(Exception):
    """Malformed or incompatible external data (files, grids, labels)."""


class NumericalError(Exception):
    """Numerical breakdown that invalidates a computation."""
