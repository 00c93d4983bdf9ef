"""Exception types raised across the package."""


class CopulaError(Exception):
    """Base class for all package errors."""

    code = "error"


class DomainError(CopulaError, ValueError):
    """Copula parameters outside the admissible range of the family."""

    code = "domain"


class TauRangeError(DomainError):
    """Kendall's tau not attainable by the requested family."""

    code = "tau-range"


class DensityOverflowError(CopulaError, FloatingPointError):
    """An intermediate quantity overflowed while evaluating a density."""

    code = "overflow"


class ConvergenceError(CopulaError, RuntimeError):
    """An iterative solver or quadrature failed to converge."""

    code = "convergence"


class DegenerateError(CopulaError, ValueError):
    """Input has zero variance or otherwise carries no information."""

    code = "degenerate"


class DataError(CopulaError, ValueError):
    """Malformed or inconsistent input data."""

    code = "data"
