"""Measures on the hyperbola whose Fourier transforms vanish on a lattice-cross.

Two constructions: the singular pair delta_u - delta_v (real roots of a
quadratic, any alpha, beta), and the absolutely continuous Poisson-kernel
difference P(t, z1) - P(t, z2), which exists only when the normalized
parameter exceeds 1.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import mpmath
import numpy as np

from kghup.errors import DegeneracyError, DomainError, ParameterError
from kghup.hup_lab.quadrature import (
    DEFAULT_TOL,
    HyperbolaMeasure,
    dilate,
    fourier_transform_detail,
    poisson_kernel,
)

__all__ = [
    "AnnihilatorCertificate",
    "CertificateKind",
    "LatticeCross",
    "LatticeResidual",
    "ac_annihilator",
    "ac_closed_form",
    "lattice_residual",
    "singular_annihilator",
]


@dataclass(frozen=True)
class LatticeCross:
    """(alpha Z x {0}) u ({0} x beta Z), truncated to |j| <= j_max, |k| <= k_max."""

    alpha: float
    beta: float
    j_max: int = 50
    k_max: int = 50

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ParameterError("alpha and beta must be positive")
        if self.j_max < 0 or self.k_max < 0:
            raise ParameterError("ranges must be nonnegative")

    def points(self) -> List[Tuple[str, int, Tuple[float, float]]]:
        """(axis, index, xi) for every lattice point; the origin is listed once."""
        pts = [("x1", j, (self.alpha * j, 0.0)) for j in range(-self.j_max, self.j_max + 1)]
        pts += [("x2", k, (0.0, self.beta * k)) for k in range(-self.k_max, self.k_max + 1) if k != 0]
        return pts


@dataclass(frozen=True)
class LatticeResidual:
    max_residual: float
    argmax: Tuple[float, float]
    rows: Tuple[Tuple[int, str, complex], ...]
    quadrature_error: float = 0.0

    def table(self):
        """Rows (j_or_k, axis, re, im, abs) for CSV output."""
        return [(i, ax, v.real, v.imag, abs(v)) for i, ax, v in self.rows]


def _exact_atom_ft(mu: HyperbolaMeasure, xi, dps: int = 50) -> complex:
    with mpmath.workdps(dps):
        x1, x2 = mpmath.mpf(xi[0]), mpmath.mpf(xi[1])
        tot = mpmath.mpc(0)
        for t, m in mu.exact_atoms:
            tot += mpmath.mpc(m) * mpmath.expjpi(x1 * t + x2 * mu.eps / t)
        return complex(tot)


def lattice_residual(mu: HyperbolaMeasure, lattice: LatticeCross, exact: bool = False,
                     tol: float = DEFAULT_TOL) -> LatticeResidual:
    """max |mu^| over the truncated lattice-cross.

    With ``exact=True`` an atomic measure carrying ``exact_atoms`` is
    evaluated with 50-digit phases; otherwise the density part uses the
    oscillatory quadrature and its error estimate is accumulated.
    """
    rows = []
    best, arg, qerr = -1.0, (0.0, 0.0), 0.0
    for axis, idx, xi in lattice.points():
        if exact:
            if mu.density is not None or not mu.exact_atoms:
                raise ParameterError("exact evaluation needs a purely atomic measure with exact atoms")
            v = _exact_atom_ft(mu, xi)
        else:
            q = fourier_transform_detail(mu, xi, tol)
            v, qerr = q.value, max(qerr, q.error)
        rows.append((idx, axis, v))
        if abs(v) > best:
            best, arg = abs(v), xi
    return LatticeResidual(best, arg, tuple(rows), qerr)


class CertificateKind(str, enum.Enum):
    singular_pair = "singular_pair"
    poisson_difference = "poisson_difference"


@dataclass(frozen=True)
class AnnihilatorCertificate:
    kind: CertificateKind
    parameters: dict
    max_lattice_residual: float
    witness_point: Tuple[float, float]
    witness_value: float
    lattice: LatticeCross

    @property
    def valid(self) -> bool:
        return self.witness_value > 10.0 * self.max_lattice_residual

    def as_dict(self):
        return {
            "kind": self.kind.value,
            "parameters": self.parameters,
            "lattice": {"alpha": self.lattice.alpha, "beta": self.lattice.beta,
                        "j_max": self.lattice.j_max, "k_max": self.lattice.k_max},
            "max_lattice_residual": self.max_lattice_residual,
            "nontriviality_witness": {"xi": list(self.witness_point), "abs": self.witness_value},
            "valid": self.valid,
        }


def singular_annihilator(alpha, beta, m: int, n: int, j_max: int = 50, k_max: int = 50):
    """delta_u - delta_v on x1 x2 = 1 with u1 - v1 = 2m/alpha and
    1/u1 - 1/v1 = 2n/beta, so mu^ vanishes on the lattice-cross.

    u1 = (m/alpha)(1 + sqrt(1 - alpha beta/(mn))), v1 = u1 - 2m/alpha.
    Real roots need mn >= alpha beta; at equality u1 = m/alpha and
    v1 = -m/alpha are still distinct.  The certificate evaluates phases at
    50 digits; the witness xi = (alpha/(2m), 0) gives |mu^| = 2.
    """
    alpha, beta = float(alpha), float(beta)
    if not (alpha > 0 and beta > 0):
        raise ParameterError("alpha and beta must be positive")
    if int(m) != m or int(n) != n or m < 1 or n < 1:
        raise ParameterError("m and n must be positive integers")
    m, n = int(m), int(n)
    if m * n < alpha * beta:
        raise DomainError(f"no real solution: mn = {m * n} < alpha beta = {alpha * beta}")
    with mpmath.workdps(60):
        a, b = mpmath.mpf(alpha), mpmath.mpf(beta)
        u1 = (m / a) * (1 + mpmath.sqrt(max(mpmath.mpf(0), 1 - a * b / (m * n))))
        v1 = u1 - 2 * m / a
        if v1 == 0 or u1 == v1:
            raise DegeneracyError("the two points coincide")
        exact_atoms = ((u1, 1), (v1, -1))
    mu = HyperbolaMeasure(1.0, None, ((float(u1), 1.0), (float(v1), -1.0)),
                          exact_atoms=exact_atoms, label="singular_pair")
    lat = LatticeCross(alpha, beta, j_max, k_max)
    res = lattice_residual(mu, lat, exact=True)
    xi_w = (alpha / (2.0 * m), 0.0)
    w = abs(_exact_atom_ft(mu, xi_w))
    cert = AnnihilatorCertificate(
        CertificateKind.singular_pair,
        {"alpha": alpha, "beta": beta, "m": m, "n": n, "u1": float(u1), "v1": float(v1)},
        res.max_residual, xi_w, w, lat)
    return mu, cert


def ac_closed_form(n: int, z: complex) -> complex:
    """int e^{pi i n t} P(t, z) dt = pi e_n(z): e^{pi i n z} for n >= 0 and
    e^{pi i n conj(z)} for n < 0."""
    zz = z if n >= 0 else z.conjugate()
    return math.pi * complex(np.exp(1j * math.pi * n * zz))


def _separated_points(beta: float) -> Tuple[complex, complex]:
    s = math.sqrt(beta - 1.0)
    z1, z2 = complex(1.0, s), complex(-1.0, s)
    d1 = z1 - z2
    d2 = 1.0 / z1.conjugate() - 1.0 / z2.conjugate()
    if abs(d1 - 2.0) > 1e-14 or abs(d2 - 2.0 / beta) > 1e-14 * max(1.0, 2.0 / beta):
        raise ArithmeticError(f"separated points fail self-check: {d1}, {d2}")
    return z1, z2


def ac_annihilator(beta, alpha: float = 1.0, eps: float = 1.0, j_max: int = 20, k_max: int = 20,
                   tol: float = DEFAULT_TOL, check: bool = True):
    """Absolutely continuous annihilator for the normalized parameter
    beta' = alpha beta |eps| > 1.

    On x1 x2 = 1 with lattice Z x {0} u {0} x beta' Z the density is
    f(t) = P(t, z1) - P(t, z2), z1,2 = +-1 + i sqrt(beta' - 1); then
    z1 - z2 = 2 and 1/conj(z1) - 1/conj(z2) = 2/beta', so every e_n and
    e_n(beta'/t) takes equal values at z1 and z2.  For general (alpha, eps)
    the measure is dilated back by t -> t/alpha onto x1 x2 = eps.

    With ``check=True`` the lattice residuals are computed by quadrature
    over |j| <= j_max, |k| <= k_max; the witness is xi = (alpha/2, 0) where
    |mu^| = 2 pi e^{-pi s/2}.
    """
    alpha, beta, eps = float(alpha), float(beta), float(eps)
    if not (alpha > 0 and beta > 0) or eps == 0:
        raise ParameterError("need alpha, beta > 0 and eps != 0")
    bp = alpha * beta * abs(eps)
    if bp <= 1.0:
        raise DomainError(f"no annihilator: normalized parameter {bp} <= 1 gives a uniqueness pair")
    z1, z2 = _separated_points(bp)

    def f(t):
        return poisson_kernel(t, z1) - poisson_kernel(t, z2)

    mu = HyperbolaMeasure(1.0, f, label="poisson_difference")
    if alpha != 1.0 or eps != 1.0:
        # x -> (x1/alpha, alpha |eps| x2) turns Z x beta'Z into the requested
        # cross; for eps < 0 first reflect x1 -> -x1 onto x1 x2 = -1
        if eps < 0:
            g = f
            mu = HyperbolaMeasure(-1.0, lambda t: g(-t), label="poisson_difference")
            mu = dilate(mu, 1.0 / alpha, alpha * abs(eps))
        else:
            mu = dilate(mu, 1.0 / alpha, alpha * eps)
    lat = LatticeCross(alpha, beta, j_max, k_max)
    s = math.sqrt(bp - 1.0)
    params = {"beta": beta, "alpha": alpha, "eps": eps, "beta_normalized": bp,
              "z1": [z1.real, z1.imag], "z2": [z2.real, z2.imag], "s": s}
    xi_w = (alpha / 2.0, 0.0)
    if check:
        res = lattice_residual(mu, lat, tol=tol)
        w = abs(fourier_transform_detail(mu, xi_w, tol).value)
        max_res = res.max_residual
    else:
        max_res = float("nan")
        w = 2.0 * math.pi * math.exp(-math.pi * s / 2.0)
    cert = AnnihilatorCertificate(CertificateKind.poisson_difference, params, max_res, xi_w, w, lat)
    return mu, cert
