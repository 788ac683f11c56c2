"""Arithmetic on R/2Z, represented by the half-open interval ]-1, 1].

Two representations live side by side: plain floats, and exact rationals
(``fractions.Fraction``).  The right-closed convention means -1 is stored
as 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Optional, Union

from kghup.errors import DomainError

Number = Union[int, float, Fraction]


@dataclass(frozen=True)
class IntervalPoint:
    """A point of ]-1, 1], optionally carrying its exact rational value."""

    value: float
    exact: Optional[Fraction] = None

    def __post_init__(self):
        if not (-1.0 < self.value <= 1.0):
            raise DomainError(f"{self.value!r} is not in ]-1, 1]")
        if self.exact is not None:
            if not (-1 < self.exact <= 1):
                raise DomainError(f"{self.exact} is not in ]-1, 1]")
            if abs(self.value - float(self.exact)) > math.ulp(self.value):
                raise DomainError("float and exact parts disagree")

    @property
    def is_exact(self) -> bool:
        return self.exact is not None

    @classmethod
    def from_fraction(cls, r: Fraction) -> "IntervalPoint":
        return cls(float(r), r)

    def __float__(self):
        return self.value

    def __str__(self):
        if self.exact is not None:
            return str(self.exact)
        return repr(self.value)


def mod2_reduce(x) -> IntervalPoint:
    """Return the representative ``{x}_2`` of ``x`` modulo 2Z in ]-1, 1].

    Rational inputs (``int``, ``Fraction``) take the exact path; floats are
    reduced by subtracting ``2 * round(x / 2)`` and correcting into range.

    >>> mod2_reduce(3.5).value
    -0.5
    >>> mod2_reduce(-1).exact
    Fraction(1, 1)
    """
    if isinstance(x, IntervalPoint):
        return x
    if isinstance(x, Rational):
        r = Fraction(x)
        return mod2_reduce_exact(r.numerator, r.denominator)
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"cannot reduce non-finite value {x!r}")
    r = x - 2.0 * round(x / 2.0)
    if r <= -1.0:
        r += 2.0
    elif r > 1.0:
        r -= 2.0
    return IntervalPoint(r)


def reduce_fraction(r: Fraction) -> Fraction:
    """Exact ``{r}_2`` for a rational ``r``."""
    # r - 2*ceil((r - 1)/2) lands in ]-1, 1]
    n, d = r.numerator - r.denominator, 2 * r.denominator
    k = -((-n) // d)
    return r - 2 * k


def mod2_reduce_exact(p: int, q: int) -> IntervalPoint:
    """Exact representative of ``p/q`` in ]-1, 1]."""
    if q == 0:
        raise DomainError("denominator must be nonzero")
    if q < 0:
        p, q = -p, -q
    return IntervalPoint.from_fraction(reduce_fraction(Fraction(p, q)))


def reduce_float(x: float) -> float:
    """Float-only ``{x}_2`` without the IntervalPoint wrapper (hot loops)."""
    r = x - 2.0 * round(x / 2.0)
    if r <= -1.0:
        r += 2.0
    elif r > 1.0:
        r -= 2.0
    return r


def parse_point(text: str) -> Union[float, Fraction]:
    """Parse ``"p/q"`` or an integer string as a Fraction, anything else as float."""
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        den_i = int(den)
        if den_i == 0:
            raise DomainError("denominator must be nonzero")
        return Fraction(int(num), den_i)
    try:
        return Fraction(int(text))
    except ValueError:
        return float(text)
