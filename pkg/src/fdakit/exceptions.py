"""Exception hierarchy shared across the toolkit.

The CLI maps these onto exit codes: bad arguments (ValueError) -> 2,
data problems -> 3, numerical failures -> 4.
"""


class FdaError(Exception):
    """Base class for all toolkit errors."""


class DomainError(FdaError):
    """An evaluation point lies outside the basis domain."""


class DataError(FdaError):
    """Input data is malformed, degenerate, or otherwise unusable."""


class RankError(DataError):
    """A least-squares design matrix is rank deficient."""


class NumericalError(FdaError):
    """A numerical routine produced an unusable result."""


class ConvergenceError(NumericalError):
    """An iterative fit hit its iteration limit without converging."""
