"""Finite-rank proxy for weak-star density of {e_n, e_n(beta/x)}.

The proxy is the least-squares distance from a target to
span{e_n(x), e_n(beta/x) : |n| <= N} in L^2(R, w dx), w(x) = (1/pi)/(1 + x^2).
It only probes the infinite-dimensional statement; a small residual is
evidence, not proof, of density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from kghup.errors import ParameterError
from kghup.hup_lab.quadrature import (
    DEFAULT_TOL,
    HyperbolaMeasure,
    fourier_transform_detail,
    _quad_real,
    poisson_kernel,
)
from scipy import integrate

__all__ = [
    "DensityGapResult",
    "ExpTarget",
    "basis_labels",
    "classify_projection",
    "density_gap",
    "annihilator_target",
    "duality_bound",
    "poisson_difference_target",
    "gram_matrix",
    "weight",
]


MIXED_TOL = 1e-12


def weight(x):
    return (1.0 / math.pi) / (1.0 + x * x)


def basis_labels(N: int) -> List[Tuple[str, int]]:
    """('e', n) for e_n(x) = e^{pi i n x} and ('b', n) for e^{pi i beta n/x};
    the constant appears once, as ('e', 0)."""
    lab = [("e", n) for n in range(-N, N + 1)]
    lab += [("b", n) for n in range(-N, N + 1) if n != 0]
    return lab


@lru_cache(maxsize=None)
def _mixed(m: int, b: float) -> float:
    """<e_m, e^beta_n> with b = beta |n| and mn < 0 (after sign symmetry):
    the real number int_R cos(pi (|m| x + b/x)) w(x) dx.

    By evenness this is twice the integral over (0, inf).  Splitting at the
    stationary point c = sqrt(b/m) and substituting x = c^2/u on (0, c]
    reproduces the phase m u + b/u, so both halves fold into one QAWF
    integral over [c, inf) with amplitude e^{pi i b/u} (w(u) + w(c^2/u) c^2/u^2),
    whose phase moves no faster than the weight.
    """
    m = abs(m)
    pi = math.pi
    c = math.sqrt(b / m)
    c2 = c * c

    def amp(u):
        return np.exp(1j * pi * b / u) * (weight(u) + weight(c2 / u) * c2 / (u * u))

    re_c, _ = _quad_real(lambda u: amp(u).real, c, pi * m, "cos", MIXED_TOL)
    im_s, _ = _quad_real(lambda u: amp(u).imag, c, pi * m, "sin", MIXED_TOL)
    return 2.0 * (re_c - im_s)


def _inner(lab1, lab2, beta) -> complex:
    """<f, g> = int f conj(g) w dx for two basis functions."""
    (k1, n1), (k2, n2) = lab1, lab2
    if k1 == k2:
        d = n1 - n2
        return math.exp(-math.pi * abs(d) * (1.0 if k1 == "e" else beta))
    if k1 == "b":
        return complex(_inner(lab2, lab1, beta)).conjugate()
    m, n = n1, n2  # <e_m, e^beta_n> = int e^{pi i m x} e^{-pi i beta n/x} w
    if m == 0 or n == 0 or (m > 0) == (n > 0):
        # both factors extend boundedly to the same half plane; evaluate at i
        return math.exp(-math.pi * (abs(m) + beta * abs(n)))
    return _mixed(m, round(beta * abs(n), 15))


def gram_matrix(beta, N: int) -> np.ndarray:
    labs = basis_labels(N)
    G = np.empty((len(labs), len(labs)), dtype=complex)
    for i, a in enumerate(labs):
        for j in range(i, len(labs)):
            v = _inner(a, labs[j], beta)
            G[i, j] = v
            G[j, i] = np.conj(v)
    return G


@dataclass(frozen=True)
class ExpTarget:
    """A target inside the span: sum of coefficients over basis labels."""

    coeffs: Tuple[Tuple[Tuple[str, int], complex], ...]

    @classmethod
    def e(cls, n: int) -> "ExpTarget":
        return cls(((("e", n), 1.0 + 0j),))

    def __call__(self, x, beta):
        tot = 0j
        for (k, n), c in self.coeffs:
            arg = n * x if k == "e" else beta * n / x
            tot += c * np.exp(1j * math.pi * arg)
        return tot


def _target_products(target: Callable, beta: float, labs, tol: float):
    """<target, b> for each basis label, and ||target||^2, by quadrature."""
    mu = HyperbolaMeasure(1.0, lambda t: target(t) * weight(t))
    r = np.empty(len(labs), dtype=complex)
    err = 0.0
    for i, (k, n) in enumerate(labs):
        xi = (-n, 0.0) if k == "e" else (0.0, -beta * n)
        q = fourier_transform_detail(mu, xi, tol)
        r[i] = q.value
        err = max(err, q.error)
    nrm2 = integrate.quad(lambda t: abs(target(t)) ** 2 * weight(t), -np.inf, np.inf,
                          epsabs=1e-13, epsrel=1e-13, limit=400)[0]
    return r, nrm2, err


@dataclass(frozen=True)
class DensityGapResult:
    beta: float
    N: int
    residual: float
    gram_condition: float
    flagged: bool
    quadrature_error: float

    def as_row(self):
        return (self.beta, self.N, self.residual, self.gram_condition)


def density_gap(beta, N: int, target: Union[Callable, ExpTarget], tol: float = DEFAULT_TOL,
                reg: float = 1e-12) -> DensityGapResult:
    """Least-squares distance from ``target`` to the span of the 4N + 1 basis
    functions in L^2(w); a finite-rank proxy for weak-star density.

    Gram entries use closed forms (e^{-pi|m-n|}, e^{-pi beta|m-n|}, and
    e^{-pi(|m| + beta|n|)} for same-sign cross terms) and oscillatory
    quadrature for the mixed-sign cross terms.  The normal equations carry
    Tikhonov regularization reg * trace(G); the result is flagged when the
    Gram condition number exceeds 1/reg.  For an :class:`ExpTarget` the
    residual is evaluated as sqrt((c - a)^H G (c - a)) to avoid cancellation.
    """
    beta = float(beta)
    if not beta > 0:
        raise ParameterError("beta must be positive")
    if N < 1:
        raise ParameterError("N must be >= 1")
    labs = basis_labels(N)
    G = gram_matrix(beta, N)
    ev = np.linalg.eigvalsh(G)
    cond = float(ev[-1] / max(ev[0], np.finfo(float).tiny))
    delta = reg * float(np.trace(G).real)
    A = G + delta * np.eye(len(labs))
    if isinstance(target, ExpTarget):
        a = np.zeros(len(labs), dtype=complex)
        index = {lab: i for i, lab in enumerate(labs)}
        rhs = np.zeros(len(labs), dtype=complex)
        for lab, c in target.coeffs:
            if lab not in index:
                raise ParameterError(f"{lab} outside the span for N={N}")
            a[index[lab]] += c
        r = G.T @ a
        c = np.linalg.solve(A.T, r)
        d = c - a
        res2 = float(np.real(d @ G @ np.conj(d)))
        qerr = 0.0
    else:
        r, nrm2, qerr = _target_products(target, beta, labs, tol)
        # G[i, j] = <b_i, b_j>, r_i = <t, b_i>; the normal equations read
        # sum_j <b_j, b_i> c_j = r_i, i.e. G^T c = r
        c = np.linalg.solve(A.T, r)
        res2 = nrm2 - 2.0 * float(np.real(np.conj(c) @ r)) + float(np.real(c @ G @ np.conj(c)))
    residual = math.sqrt(max(res2, 0.0))
    return DensityGapResult(beta, N, residual, cond, cond > 1.0 / reg, qerr)


def annihilator_target(beta_ac: float = 2.0):
    """K_w(t) = pi (1 + t^2) f(t), f the Poisson-difference annihilator for
    ``beta_ac``, normalized in L^2(w).  Since int g f dt = 0 for every g in the
    span, K_w is orthogonal to the span in L^2(w)."""
    s = math.sqrt(beta_ac - 1.0)
    z1, z2 = complex(1.0, s), complex(-1.0, s)

    def K(t):
        return math.pi * (1.0 + t * t) * (poisson_kernel(t, z1) - poisson_kernel(t, z2))

    nrm = math.sqrt(integrate.quad(lambda t: K(t) ** 2 * weight(t), -np.inf, np.inf,
                                   epsabs=1e-14, epsrel=1e-13, limit=400)[0])
    return lambda t: K(t) / nrm, K


def poisson_difference_target(beta_ac: float = 2.0):
    """The annihilator density P(t, z1) - P(t, z2) itself, used as a generic target."""
    s = math.sqrt(beta_ac - 1.0)
    z1, z2 = complex(1.0, s), complex(-1.0, s)
    return lambda t: poisson_kernel(t, z1) - poisson_kernel(t, z2)


def duality_bound(target: Callable, K: Callable, tol: float = DEFAULT_TOL) -> Tuple[float, float]:
    """|<target, K>| / ||K|| in L^2(w) when K is orthogonal to the span:
    a lower bound for the distance from target to the span.  Returns the
    bound and its quadrature error estimate."""
    ip, e1 = integrate.quad(lambda t: target(t) * K(t) * weight(t), -np.inf, np.inf,
                            epsabs=1e-14, epsrel=1e-13, limit=400)
    nk, e2 = integrate.quad(lambda t: K(t) ** 2 * weight(t), -np.inf, np.inf,
                            epsabs=1e-14, epsrel=1e-13, limit=400)
    return abs(ip) / math.sqrt(nk), e1 + e2


def classify_projection(points: Iterable[Sequence]) -> Tuple[list, list]:
    """Partition the distinct first coordinates of a finite set.

    t goes to the first list when two points over t have second coordinates
    differing by a non-even-integer amount; otherwise to the second list.
    Coordinates are handled as exact fractions (floats via their exact
    binary value).
    """
    groups: Dict[Fraction, set] = {}
    for p in points:
        t, y = Fraction(p[0]), Fraction(p[1])
        groups.setdefault(t, set()).add(y)
    a_set, b_set = [], []
    for t in sorted(groups):
        ys = sorted(groups[t])
        lifted = any((y2 - y1) % 2 != 0 for i, y1 in enumerate(ys) for y2 in ys[i + 1:])
        (a_set if lifted else b_set).append(t)
    conv = lambda v: int(v) if v.denominator == 1 else v
    return [conv(v) for v in a_set], [conv(v) for v in b_set]
