"""The Gauss-type map U_beta(x) = {-beta/x}_2 on ]-1, 1] and its branches.

For beta = 1 this is the map behind continued fractions with even partial
quotients: on the branch interval ]1/(2j+1), 1/(2j-1)] it acts as
x -> -1/x + 2j, and the inverse branch is t -> 1/(2j - t).  For general
beta the branch intervals scale by beta and points outside [-beta, beta]
fall into the j = 0 branch.

Orbits are computed in one of three modes:

* exact rational arithmetic (automatic for ``int``/``Fraction`` starts),
* IEEE doubles (``precision_bits <= 53``),
* mpmath multiprecision (``precision_bits > 53``).

Float and multiprecision orbits carry the running product of |U'| so that
the caller can tell when rounding errors have been amplified past the
working precision.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Callable, NamedTuple, Optional, Sequence, Union

import mpmath
import numpy as np

from kghup.circle_arith import IntervalPoint, mod2_reduce, reduce_fraction, reduce_float
from kghup.errors import DomainError, ParameterError

__all__ = [
    "EvenCF",
    "IntervalUnion",
    "OrbitRecord",
    "Termination",
    "branch_index",
    "derivative",
    "even_cf_expand",
    "even_cf_reconstruct",
    "exact_termination",
    "gauss_step",
    "inverse_branch",
    "orbit",
    "survivor_set",
]


class Termination(str, enum.Enum):
    NONE = "none"
    HIT_ZERO = "hit_zero"
    HIT_ONE = "hit_one"


def _check_beta(beta, upper_open=False):
    b = float(beta)
    if not (0.0 < b <= 1.0) or (upper_open and b >= 1.0):
        rng = "]0,1[" if upper_open else "]0,1]"
        raise ParameterError(f"beta={beta!r} outside {rng}")


def _exact_beta(beta) -> Fraction:
    return Fraction(beta) if not isinstance(beta, Fraction) else beta


def _as_value(x):
    """Unwrap an IntervalPoint to a Fraction (if exact) or float."""
    if isinstance(x, IntervalPoint):
        return x.exact if x.exact is not None else x.value
    return x


def _is_exact(x) -> bool:
    return isinstance(x, Rational)


def branch_index(x, beta=1) -> int:
    """Index j of the branch containing ``x``: ``2j - 1 <= beta/x < 2j + 1``.

    For beta = 1 this is the unique j with 1/(2j+1) < x <= 1/(2j-1).  Points
    with |x| > beta (only possible for beta < 1) have j = 0.
    """
    x = _as_value(x)
    if x == 0:
        raise DomainError("0 is a fixed point and lies on no branch")
    if _is_exact(x):
        y = _exact_beta(beta) / Fraction(x)
        # j = floor((y + 1) / 2)
        num = y.numerator + y.denominator
        return num // (2 * y.denominator)
    y = float(beta) / float(x)
    r = reduce_float(-y)
    return int(round((r + y) / 2.0))


def gauss_step(x, beta=1) -> IntervalPoint:
    """One step of U_beta; 0 maps to 0 and rational inputs stay rational."""
    _check_beta(beta)
    x = _as_value(x)
    if x == 0:
        return IntervalPoint(0.0, Fraction(0)) if _is_exact(x) else IntervalPoint(0.0)
    if _is_exact(x):
        return IntervalPoint.from_fraction(reduce_fraction(-_exact_beta(beta) / Fraction(x)))
    return mod2_reduce(-float(beta) / float(x))


def derivative(x, beta=1) -> float:
    """Local expansion factor beta / x**2."""
    x = float(_as_value(x))
    if x == 0.0:
        raise DomainError("U_beta is not differentiable at 0")
    return float(beta) / (x * x)


def inverse_branch(t, j: int, beta=1) -> IntervalPoint:
    """The branch inverse t -> beta / (2j - t)."""
    if j == 0:
        raise DomainError("branch index must be nonzero")
    t = _as_value(t)
    if _is_exact(t):
        return IntervalPoint.from_fraction(_exact_beta(beta) / (2 * j - Fraction(t)))
    return IntervalPoint(float(beta) / (2 * j - float(t)))


@dataclass(frozen=True)
class OrbitRecord:
    """Iterates of U_beta from ``start`` together with branch digits.

    ``digits[k]`` is the branch index used to go from ``iterates[k-1]`` (or
    ``start``) to ``iterates[k]``.  ``log2_derivative`` is the base-2 log
    of the product of beta / x_k**2 over the steps taken.
    """

    start: IntervalPoint
    iterates: tuple
    digits: tuple
    log2_derivative: float
    terminated: Termination
    trusted: bool
    precision_bits: Optional[int]
    beta: float = 1.0

    @property
    def derivative_product(self) -> float:
        try:
            return 2.0 ** self.log2_derivative
        except OverflowError:
            return math.inf

    @property
    def steps(self) -> int:
        return len(self.digits)


def _orbit_exact(x: Fraction, n: int, beta: Fraction):
    iterates, digits = [], []
    log2d = 0.0
    term = Termination.NONE
    if x == 1 and beta == 1:
        term = Termination.HIT_ONE
    for _ in range(n):
        if x == 0:
            term = Termination.HIT_ZERO
            break
        y = beta / x
        r = reduce_fraction(-y)
        digits.append(int((r + y) / 2))
        log2d += math.log2(float(beta)) - 2.0 * math.log2(abs(float(x)))
        x = r
        iterates.append(IntervalPoint.from_fraction(x))
        if x == 0:
            term = Termination.HIT_ZERO
            break
        if x == 1 and beta == 1:
            term = Termination.HIT_ONE
    return iterates, digits, log2d, term


def _orbit_float(x: float, n: int, beta: float):
    iterates, digits = [], []
    log2d = 0.0
    term = Termination.NONE
    log2b = math.log2(beta)
    for _ in range(n):
        if x == 0.0:
            term = Termination.HIT_ZERO
            break
        y = beta / x
        if math.isfinite(y):
            r = reduce_float(-y)
            digits.append(int(round((r + y) / 2.0)))
        else:
            # beta/x overflows for subnormal x; the double x is an exact
            # dyadic rational, so take this step exactly
            ye = Fraction(beta) / Fraction(x)
            re = reduce_fraction(-ye)
            r = float(re)
            digits.append(int((re + ye) / 2))
        log2d += log2b - 2.0 * math.log2(abs(x))
        x = r
        iterates.append(IntervalPoint(x))
        if x == 0.0:
            term = Termination.HIT_ZERO
            break
    return iterates, digits, log2d, term


def _to_mpf(v):
    # mpmath has no Fraction constructor; p/q rounds once at working precision
    if isinstance(v, Fraction):
        return mpmath.mpf(v.numerator) / v.denominator
    return mpmath.mpf(v)


def _orbit_mp(x, n: int, beta, prec: int, keep_iterates=True):
    """Multiprecision orbit; ``x`` may be a callable producing an mpf."""
    iterates, digits = [], []
    values = []
    log2d = 0.0
    term = Termination.NONE
    with mpmath.workprec(prec):
        xm = x() if callable(x) else _to_mpf(x)
        bm = _to_mpf(beta)
        two = mpmath.mpf(2)
        log2b = math.log2(float(beta))
        for _ in range(n):
            if xm == 0:
                term = Termination.HIT_ZERO
                break
            y = bm / xm
            r = -y - two * mpmath.nint(-y / two)
            if r <= -1:
                r += two
            elif r > 1:
                r -= two
            digits.append(int(mpmath.nint((r + y) / two)))
            xf = float(xm)
            lx = math.log2(abs(xf)) if xf != 0.0 else float(mpmath.log(abs(xm), 2))
            log2d += log2b - 2.0 * lx
            xm = r
            fx = float(xm)
            values.append(fx)
            if keep_iterates:
                iterates.append(IntervalPoint(fx if fx > -1.0 else 1.0))
            if xm == 0:
                term = Termination.HIT_ZERO
                break
    return iterates, digits, log2d, term, values


def orbit(x, n: int, beta=1, precision_bits: Optional[int] = 53, guard_bits: int = 0) -> OrbitRecord:
    """Iterate U_beta ``n`` times from ``x`` (or until the orbit hits 0).

    Rational starts are iterated exactly regardless of ``precision_bits``.
    Otherwise ``precision_bits <= 53`` uses doubles and larger values use
    mpmath at that precision; ``x`` may then be a zero-argument callable
    returning an mpf, evaluated at the working precision.  The orbit is
    ``trusted`` while the derivative product stays below
    ``2**(precision_bits - guard_bits)``.
    """
    if n < 0:
        raise ParameterError("step count must be nonnegative")
    _check_beta(beta)
    x = _as_value(x)
    if _is_exact(x):
        xf = Fraction(x)
        start = IntervalPoint.from_fraction(reduce_fraction(xf) if xf != 0 else xf)
        b = _exact_beta(beta)
        its, digs, log2d, term = _orbit_exact(start.exact, n, b)
        return OrbitRecord(start, tuple(its), tuple(digs), log2d, term, True, None, float(beta))

    prec = 53 if precision_bits is None else int(precision_bits)
    if prec <= 53:
        start = mod2_reduce(float(x))
        its, digs, log2d, term = _orbit_float(start.value, n, float(beta))
    else:
        if callable(x):
            with mpmath.workprec(prec):
                x0 = float(x())
        else:
            x0 = float(x)
        start = IntervalPoint(x0)
        its, digs, log2d, term, _ = _orbit_mp(x, n, beta, prec)
    trusted = log2d <= prec - guard_bits
    return OrbitRecord(start, tuple(its), tuple(digs), log2d, term, trusted, prec, float(beta))


def exact_termination(p: int, q: int, max_steps: Optional[int] = None):
    """Run the exact U-orbit of p/q (beta = 1) with integer arithmetic.

    Returns ``(Termination, steps)``.  Each step p/q -> (2jp - q)/p keeps the
    fraction reduced and strictly lowers the denominator, so at most q
    steps are needed.
    """
    if q <= 0:
        raise DomainError("denominator must be positive")
    r = reduce_fraction(Fraction(p, q))
    p, q = r.numerator, r.denominator
    limit = q + 1 if max_steps is None else max_steps
    steps = 0
    while steps <= limit:
        if p == 0:
            return Termination.HIT_ZERO, steps
        if p == q:
            return Termination.HIT_ONE, steps
        # new value -q/p + 2j with j = floor((q/p + 1)/2)
        sgn = 1 if p > 0 else -1
        a = abs(p)
        j = (sgn * q + a) // (2 * a)
        p, q = 2 * j * a - sgn * q, a
        steps += 1
    return Termination.NONE, steps


class EvenCF(NamedTuple):
    """Branch digits j_1, j_2, ... and the remaining tail iterate."""

    digits: tuple
    tail: IntervalPoint
    terminated: Termination


def even_cf_expand(x, max_depth: int, beta=1) -> EvenCF:
    """Even continued fraction digits of ``x``.

    With beta = 1, ``x = 1/(2 j_1 - 1/(2 j_2 - ... - tail))``; the partial
    quotients are the even numbers 2 j_k.  Stops early at 0.
    """
    if max_depth < 0:
        raise ParameterError("max_depth must be nonnegative")
    rec = orbit(x, max_depth, beta=beta, precision_bits=53)
    tail = rec.iterates[-1] if rec.iterates else rec.start
    return EvenCF(rec.digits, tail, rec.terminated)


def even_cf_reconstruct(digits: Sequence[int], tail, beta=1) -> IntervalPoint:
    """Evaluate beta/(2 j_1 - beta/(2 j_2 - ... - tail)) from the inside out."""
    t = _as_value(tail)
    exact = _is_exact(t) and not isinstance(beta, float)
    if exact:
        t = Fraction(t)
        b = _exact_beta(beta)
    else:
        t = float(t)
        b = float(beta)
    for j in reversed(tuple(digits)):
        if j == 0:
            raise DomainError("digits must be nonzero integers")
        try:
            den = 2 * j - t
        except OverflowError:
            # |2j| beyond the double range: the level contributes beta/inf
            den = math.inf if j > 0 else -math.inf
        if den == 0:
            raise DomainError("malformed digit sequence: division by zero")
        t = b / den
    if exact:
        return IntervalPoint.from_fraction(t)
    return IntervalPoint(t)


# --------------------------------------------------------------------------
# survivor sets


@dataclass(frozen=True)
class IntervalUnion:
    """Outer enclosure of a subset of ]-1, 1] with rigorous measure bounds.

    ``intervals`` is an (m, 2) array of sorted, merged closed intervals
    covering the set.  ``measure`` is ``(lower, upper)``; the gap between the
    two is ``tail_measure_bound`` (pruned cylinders, branches |j| > J and
    outward rounding).
    """

    intervals: np.ndarray
    measure: tuple
    tail_measure_bound: float
    beta: float = 1.0
    depth: int = 1
    branch_cutoff: int = 0
    cylinders: int = 0

    def contains(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        lo, hi = self.intervals[:, 0], self.intervals[:, 1]
        k = np.searchsorted(lo, t, side="right") - 1
        ok = k >= 0
        kk = np.clip(k, 0, None)
        return ok & (t <= hi[kk])


_up = lambda a: np.nextafter(a, np.inf)  # noqa: E731
_down = lambda a: np.nextafter(a, -np.inf)  # noqa: E731


def _phi_lo(j, t_lo, beta):
    # lower bound of beta / (2j - t_lo); beta/d is decreasing in d
    return _down(beta / _up(2.0 * j - t_lo))


def _phi_hi(j, t_hi, beta):
    return _up(beta / _down(2.0 * j - t_hi))


def _apply_word(word, lo, hi, beta):
    """Enclosure of phi_{w_1} o ... o phi_{w_k} applied to [lo, hi]."""
    for j in reversed(word):
        lo, hi = _phi_lo(j, lo, beta), _phi_hi(j, hi, beta)
    return lo, hi


def _apply_word_inner(word, lo, hi, beta):
    """Inner approximation: rounding pulls both endpoints inward."""
    for j in reversed(word):
        lo = _up(beta / _down(2.0 * j - lo))
        hi = _down(beta / _up(2.0 * j - hi))
    return lo, hi


def _merge(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    if lo.size == 0:
        return np.empty((0, 2))
    order = np.argsort(lo, kind="stable")
    lo, hi = lo[order], hi[order]
    run_hi = np.maximum.accumulate(hi)
    starts = np.ones(lo.size, dtype=bool)
    starts[1:] = lo[1:] > run_hi[:-1]
    idx = np.flatnonzero(starts)
    ends = np.append(idx[1:], lo.size) - 1
    return np.column_stack([lo[idx], run_hi[ends]])


def survivor_set(beta, n: int, branch_cutoff: int = 64, min_length: float = 1e-5) -> IntervalUnion:
    """Rigorous enclosure of E_beta(n) = {t : U_beta^k(t) in [-beta, beta], k < n}.

    E_beta(n) is the disjoint union over words (j_1, ..., j_{n-1}) of the
    cylinders phi_{j_1} o ... o phi_{j_{n-1}}([-beta, beta]) with
    phi_j(t) = beta / (2j - t).  Cylinders are enumerated depth first with
    outward-rounded endpoints; a cylinder shorter than ``min_length`` is kept
    whole (it contains every deeper cylinder below it) and its length goes
    into the upper bound only, as do the branches |j| > ``branch_cutoff``,
    whose union at any node is the image of [-beta/(2J+1), beta/(2J+1)].
    """
    _check_beta(beta, upper_open=True)
    if n < 1:
        raise ParameterError("depth n must be >= 1")
    if branch_cutoff < 1:
        raise ParameterError("branch cutoff must be >= 1")
    b = float(beta)
    if n == 1:
        return IntervalUnion(np.array([[-b, b]]), (2 * b, 2 * b), 0.0, b, 1, branch_cutoff, 1)

    J = int(branch_cutoff)
    js = np.concatenate([np.arange(-J, 0), np.arange(1, J + 1)]).astype(float)
    child_lo = _phi_lo(js, -b, b)
    child_hi = _phi_hi(js, b, b)
    inner_lo = _up(b / _down(2.0 * js + b))
    inner_hi = _down(b / _up(2.0 * js - b))
    tail_edge = _up(b / (2 * J + 1))

    lower = 0.0
    upper = 0.0
    kept_lo, kept_hi = [], []
    slack_lo, slack_hi = [], []
    count = 0

    stack = [()]
    while stack:
        word = stack.pop()
        depth = len(word)
        # children at depth + 1
        lo, hi = _apply_word(word, child_lo, child_hi, b)
        t_lo, t_hi = _apply_word(word, np.array([-tail_edge]), np.array([tail_edge]), b)
        slack_lo.append(t_lo)
        slack_hi.append(t_hi)
        upper += float(t_hi[0] - t_lo[0])
        if depth + 1 == n - 1:
            ilo, ihi = _apply_word_inner(word, inner_lo, inner_hi, b)
            lower += float(np.sum(np.maximum(ihi - ilo, 0.0)))
            upper += float(np.sum(hi - lo))
            kept_lo.append(lo)
            kept_hi.append(hi)
            count += lo.size
            continue
        big = (hi - lo) >= min_length
        if not np.all(big):
            small = ~big
            slack_lo.append(lo[small])
            slack_hi.append(hi[small])
            upper += float(np.sum(hi[small] - lo[small]))
        for j in js[big][::-1]:
            stack.append(word + (int(j),))

    # interval sums are exact only to rounding; pad outward
    lower = max(0.0, float(_down(lower * (1 - 1e-15))))
    upper = float(_up(upper * (1 + 1e-15)))
    all_lo = np.concatenate(kept_lo + slack_lo) if kept_lo or slack_lo else np.empty(0)
    all_hi = np.concatenate(kept_hi + slack_hi) if kept_hi or slack_hi else np.empty(0)
    ivs = _merge(all_lo, all_hi)
    return IntervalUnion(ivs, (lower, min(upper, 2 * b)), upper - lower, b, n, J, count)
