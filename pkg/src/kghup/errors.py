"""Exception hierarchy shared by all kghup modules."""


class KGHupError(Exception):
    """Base class for kghup errors."""


class DomainError(KGHupError, ValueError):
    """An argument lies outside the domain of the operation."""


class ParameterError(KGHupError, ValueError):
    """A model parameter (beta, alpha, grid size, ...) is out of range."""


class DegeneracyError(KGHupError, ValueError):
    """The requested construction degenerates for these parameters."""


class AccuracyError(KGHupError, ArithmeticError):
    """A numerical routine could not reach the requested accuracy."""


class ConvergenceError(KGHupError, ArithmeticError):
    """An iterative solver failed to converge."""
