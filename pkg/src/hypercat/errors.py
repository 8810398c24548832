"""Exception hierarchy shared by every module."""


class HypercatError(ValueError):
    """Base class for all library errors."""


class InvalidParameters(HypercatError):
    """Family parameters that cannot describe a hypergeometric family."""


class PoleError(InvalidParameters):
    """f(n) or rho(n) hits a pole inside the requested range."""


class DomainError(HypercatError):
    """Argument lies outside the convergence domain of the family."""


class IllDefinedFamily(DomainError):
    """Family whose series has zero radius of convergence (p > q + 1)."""


class ConvergenceError(HypercatError):
    """Series did not reach the termination criterion within the term cap."""


class DegenerateSectorError(HypercatError):
    """Gram eigenvalue too small to normalize a kitten sector."""
