"""Even continued fractions, the Gauss-type map U(x) = {-1/x}_2 and its
compressed variants, their transfer operators, the Moebius group generated
by z -> z + 2 and z -> beta z / (beta - 2z), and Heisenberg uniqueness pair
numerics for the hyperbola with a lattice-cross.
"""

from kghup.errors import (
    AccuracyError,
    ConvergenceError,
    DegeneracyError,
    DomainError,
    KGHupError,
    ParameterError,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "ConvergenceError",
    "DegeneracyError",
    "DomainError",
    "KGHupError",
    "ParameterError",
]
