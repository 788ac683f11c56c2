"""Complex measures on ]-1, 1]: branch pullbacks, (U, lambda)-invariance
residuals, the invariant density 1/(1 - t^2), and Birkhoff averages.

A :class:`GridMeasure` is a cell-wise measure on the uniform partition of
]-1, 1] into ``N`` half-open cells plus finitely many atoms.  Inside a cell
mass is spread uniformly, so measuring a subinterval takes the proportional
share (linear interpolation of the cumulative distribution).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence, Tuple

import mpmath
import numpy as np
from scipy.special import digamma, zeta

from kghup.errors import DomainError, ParameterError
from kghup.gauss_map import _orbit_float, _orbit_mp, _to_mpf, Termination

__all__ = [
    "BirkhoffResult",
    "GridMeasure",
    "birkhoff_average",
    "birkhoff_profile",
    "branch_tail_bound",
    "invariance_residual",
    "omega_branch_sum",
    "omega_density",
    "pullback_branch",
    "split_abs_singular",
]


def _edges(n: int) -> np.ndarray:
    return np.linspace(-1.0, 1.0, n + 1)


@dataclass(frozen=True)
class GridMeasure:
    """Cell masses on the uniform partition of ]-1, 1] plus atoms.

    ``atoms`` holds (location, mass) pairs away from 0; the atom at 0 has its
    own slot ``zero_mass`` because the origin is a fixed point of every
    U_beta and is carried through pullbacks separately.
    """

    cell_weights: np.ndarray
    atoms: Tuple[Tuple[float, complex], ...] = ()
    zero_mass: complex = 0j

    def __post_init__(self):
        w = np.asarray(self.cell_weights, dtype=complex)
        if w.ndim != 1 or w.size < 1:
            raise ParameterError("cell_weights must be a nonempty vector")
        object.__setattr__(self, "cell_weights", w)
        atoms = []
        for x, m in self.atoms:
            x = float(x)
            if not (-1.0 < x <= 1.0):
                raise DomainError(f"atom at {x} outside ]-1, 1]")
            if x == 0.0:
                raise DomainError("use zero_mass for the atom at 0")
            atoms.append((x, complex(m)))
        object.__setattr__(self, "atoms", tuple(atoms))
        object.__setattr__(self, "zero_mass", complex(self.zero_mass))

    @property
    def grid_size(self) -> int:
        return self.cell_weights.size

    @property
    def edges(self) -> np.ndarray:
        return _edges(self.grid_size)

    @property
    def midpoints(self) -> np.ndarray:
        e = self.edges
        return 0.5 * (e[1:] + e[:-1])

    @property
    def total_variation(self) -> float:
        return float(np.sum(np.abs(self.cell_weights)) + sum(abs(m) for _, m in self.atoms)
                     + abs(self.zero_mass))

    # constructors -----------------------------------------------------

    @classmethod
    def zero(cls, n: int) -> "GridMeasure":
        return cls(np.zeros(n, dtype=complex))

    @classmethod
    def lebesgue(cls, n: int) -> "GridMeasure":
        return cls(np.full(n, 2.0 / n, dtype=complex))

    @classmethod
    def from_antiderivative(cls, F: Callable, n: int, support=(-1.0, 1.0)) -> "GridMeasure":
        """Exact cell masses F(b) - F(a), clipped to ``support``."""
        e = np.clip(_edges(n), support[0], support[1])
        vals = np.asarray(F(e), dtype=complex)
        return cls(np.diff(vals))

    @classmethod
    def point_mass(cls, x, n: int, mass=1.0) -> "GridMeasure":
        x = float(x)
        if x == 0.0:
            return cls(np.zeros(n, dtype=complex), zero_mass=mass)
        return cls(np.zeros(n, dtype=complex), atoms=((x, mass),))

    # arithmetic ------------------------------------------------------

    def cdf(self, x) -> np.ndarray:
        """Cell part of nu(]-1, x]) with proportional attribution inside cells."""
        cum = np.concatenate([[0.0], np.cumsum(self.cell_weights)])
        e = self.edges
        x = np.asarray(x, dtype=float)
        return np.interp(x, e, cum.real) + 1j * np.interp(x, e, cum.imag)

    def abs_cdf(self, x) -> np.ndarray:
        cum = np.concatenate([[0.0], np.cumsum(np.abs(self.cell_weights))])
        return np.interp(np.asarray(x, dtype=float), self.edges, cum)

    def __add__(self, other: "GridMeasure") -> "GridMeasure":
        if other.grid_size != self.grid_size:
            raise ParameterError("grid sizes differ")
        return GridMeasure(self.cell_weights + other.cell_weights,
                           _combine_atoms(self.atoms, other.atoms),
                           self.zero_mass + other.zero_mass)

    def scale(self, c) -> "GridMeasure":
        return GridMeasure(c * self.cell_weights, tuple((x, c * m) for x, m in self.atoms),
                           c * self.zero_mass)

    def density(self) -> np.ndarray:
        """Cell averages of the density (mass / cell length)."""
        return self.cell_weights * (self.grid_size / 2.0)


def _atom_key(x: float) -> float:
    return round(x, 13)


def _combine_atoms(*groups, coeffs=None):
    acc = {}
    coeffs = coeffs or [1.0] * len(groups)
    for c, g in zip(coeffs, groups):
        for x, m in g:
            k = _atom_key(x)
            acc[k] = acc.get(k, 0j) + c * m
    return tuple(sorted((x, m) for x, m in acc.items() if m != 0))


def omega_density(t):
    """Density 1/(1 - t^2) of the infinite invariant measure of U."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(np.abs(t_arr) >= 1.0):
        raise DomainError("omega has poles at t = +-1")
    out = 1.0 / (1.0 - t_arr * t_arr)
    return float(out) if out.ndim == 0 else out


def omega_branch_sum(t, J: int = 512, terms: int = 6):
    """Sum over j != 0 of 1/((2j - t)^2 - 1), branches |j| > J in closed form.

    The tail is expanded as sum_k (2j - t)^(-2k-2) and each power sum is a
    Hurwitz zeta value, so the result is accurate to rounding for |t| < 1.
    """
    t = np.asarray(t, dtype=float)
    js = np.concatenate([np.arange(-J, 0), np.arange(1, J + 1)]).astype(float)
    # sum from the smallest terms upward
    order = np.argsort(-np.abs(js))
    d = 2.0 * js[order][:, None] - t[None, :] if t.ndim else 2.0 * js[order] - t
    head = np.sum(1.0 / (d * d - 1.0), axis=0)
    tail = 0.0
    for k in range(terms):
        s = 2 * k + 2
        tail = tail + (zeta(s, J + 1 - t / 2) + zeta(s, J + 1 + t / 2)) / 2.0 ** s
    return head + tail


def _phi(j, t, beta):
    return beta / (2.0 * j - t)


def pullback_branch(nu: GridMeasure, j: int, beta=1.0) -> GridMeasure:
    """The measure nu_j(A) = nu(phi_j(A)), phi_j(t) = beta / (2j - t).

    Cell masses measure nu on each image interval phi_j(cell); atoms move to
    t = 2j - beta/x when that lies in ]-1, 1].  The atom at 0 has no preimage
    under a nonzero branch and is dropped.
    """
    if j == 0:
        raise DomainError("branch index must be nonzero")
    beta = float(beta)
    e = nu.edges
    img = _phi(j, e, beta)
    cells = np.diff(nu.cdf(img))
    atoms = []
    for x, m in nu.atoms:
        t = 2.0 * j - beta / x
        if -1.0 < t <= 1.0:
            atoms.append((t, m))
    return GridMeasure(cells, tuple(atoms))


def _tail_cells(nu: GridMeasure, beta: float, J: int) -> np.ndarray:
    """Branches |j| > J in closed form, assuming nu has constant density on
    each side of 0 over the tiny images beta/(2j - t), |j| > J.

    The summed lengths of the images of a cell ]a, b] are digamma
    differences; they are weighted by nu's mean density on ]0, r] and
    [-r, 0[, r = beta/(2J - 1).
    """
    e = nu.edges
    r = beta / (2 * J - 1)
    rho_pos = (nu.cdf(r) - nu.cdf(0.0)) / r
    rho_neg = (nu.cdf(0.0) - nu.cdf(-r)) / r
    a, b = e[:-1], e[1:]
    pos = 0.5 * beta * (digamma(J + 1 - a / 2) - digamma(J + 1 - b / 2))
    neg = 0.5 * beta * (digamma(J + 1 + b / 2) - digamma(J + 1 + a / 2))
    return rho_pos * pos + rho_neg * neg


def _branch_sum(nu: GridMeasure, beta: float, J: int, tail: bool = False):
    """Cells and atoms of sum_{0 < |j| <= J} nu_j, vectorized over j."""
    e = nu.edges
    total = np.zeros(nu.grid_size, dtype=complex)
    # chunk over j to bound memory
    js = np.concatenate([np.arange(-J, 0), np.arange(1, J + 1)]).astype(float)
    for chunk in np.array_split(js, max(1, js.size // 128)):
        img = beta / (2.0 * chunk[:, None] - e[None, :])
        total += np.diff(nu.cdf(img), axis=1).sum(axis=0)
    if tail:
        total += _tail_cells(nu, beta, J)
    atoms = []
    for x, m in nu.atoms:
        if abs(x) > beta:
            continue
        y = beta / x
        # the unique branch containing x
        j = math.floor((y + 1.0) / 2.0)
        if 0 < abs(j) <= J:
            t = 2.0 * j - y
            if -1.0 < t <= 1.0:
                atoms.append((t, m))
    return total, tuple(atoms)


def branch_tail_bound(nu: GridMeasure, beta=1.0, J: int = 512) -> float:
    """Total variation of nu on the branches |j| > J (excluding the atom at 0)."""
    r = float(beta) / (2 * J + 1)
    cells = float(nu.abs_cdf(r) - nu.abs_cdf(-r))
    atoms = sum(abs(m) for x, m in nu.atoms if -r < x <= r)
    return cells + atoms


def invariance_residual(nu: GridMeasure, lam=1.0, beta=1.0, J: int = 512,
                        window: Optional[float] = None, tail: bool = True) -> float:
    """Total variation of lam*nu - (nu({0}) delta_0 + sum_{|j|<=J} nu_j).

    A residual near zero certifies (U_beta, lam)-invariance at grid
    resolution.  ``window`` restricts the cell part of the norm to cells
    inside [-window, window]; use it for truncated densities whose cut-off
    edges are not invariant.  With ``tail=True`` the branches |j| > J are
    added in closed form (see ``_tail_cells``); with ``tail=False`` they are
    dropped and contribute at most :func:`branch_tail_bound`.
    """
    lam = complex(lam)
    if abs(lam) > 1.0 + 1e-12:
        raise ParameterError("|lambda| > 1 admits only the zero measure")
    beta = float(beta)
    if not 0.0 < beta <= 1.0:
        raise ParameterError("beta must lie in ]0, 1]")
    cells, atoms = _branch_sum(nu, beta, J, tail=tail)
    diff_cells = lam * nu.cell_weights - cells
    diff_atoms = _combine_atoms(nu.atoms, atoms, coeffs=[lam, -1.0])
    diff_zero = lam * nu.zero_mass - nu.zero_mass
    if window is not None:
        e = nu.edges
        inside = (e[:-1] >= -window - 1e-15) & (e[1:] <= window + 1e-15)
        diff_cells = diff_cells[inside]
        diff_atoms = tuple((x, m) for x, m in diff_atoms if abs(x) <= window)
    return float(np.sum(np.abs(diff_cells)) + sum(abs(m) for _, m in diff_atoms) + abs(diff_zero))


def split_abs_singular(nu: GridMeasure) -> Tuple[GridMeasure, GridMeasure]:
    """(cells-only part, atoms-only part); the two sum back to ``nu``."""
    n = nu.grid_size
    return (GridMeasure(nu.cell_weights.copy()),
            GridMeasure(np.zeros(n, dtype=complex), nu.atoms, nu.zero_mass))


# --------------------------------------------------------------------------
# Birkhoff averages


class BirkhoffResult(NamedTuple):
    value: float
    trusted: bool
    steps: int
    precision_bits: int
    log2_derivative: float
    terminated: Termination


def _default_phi(x):
    return 1.0 - x * x


def _orbit_values(t, N, beta, precision_bits, guard_bits, max_bits):
    """Float values of the first N points of the orbit of t, with trust data."""
    if precision_bits is None:
        x0 = float(t() if callable(t) else t)
        its, digs, log2d, term = _orbit_float(x0, N - 1, beta)
        vals = [x0] + [p.value for p in its]
        prec = 53
        trusted = log2d <= prec - guard_bits
    else:
        prec = int(precision_bits)
        while True:
            _, digs, log2d, term, values = _orbit_mp(t, N - 1, beta, prec, keep_iterates=False)
            trusted = log2d <= prec - guard_bits
            if trusted or prec >= max_bits:
                break
            # jump straight to a sufficient precision now that the need is known
            prec = min(max(2 * prec, int(log2d) + 2 * guard_bits), max_bits)
        with mpmath.workprec(prec):
            x0 = float(t() if callable(t) else _to_mpf(t))
        vals = [x0] + values
    arr = np.asarray(vals, dtype=float)
    if arr.size < N:
        # the orbit stopped at the fixed point 0
        arr = np.concatenate([arr, np.zeros(N - arr.size)])
    return arr, bool(trusted), len(digs), prec, float(log2d), term


def birkhoff_average(t, N: int, phi: Callable = _default_phi, beta=1.0,
                     precision_bits: Optional[int] = None, guard_bits: int = 32,
                     max_bits: int = 1 << 16) -> BirkhoffResult:
    """Cesaro average (1/N) sum_{k<N} phi(U_beta^k(t)).

    With ``precision_bits=None`` the orbit runs in doubles.  Otherwise the
    orbit runs in mpmath starting at ``precision_bits`` and the precision is
    raised until the derivative product stays ``guard_bits`` below it (or
    ``max_bits`` is reached, in which case the result is flagged untrusted).
    ``t`` may be a zero-argument callable returning an mpf, so irrational
    starting points are resolved to the working precision.  ``phi`` is
    applied to a numpy array of iterates.
    """
    if N < 1:
        raise ParameterError("N must be >= 1")
    arr, trusted, steps, prec, log2d, term = _orbit_values(
        t, N, float(beta), precision_bits, guard_bits, max_bits)
    return BirkhoffResult(float(np.sum(phi(arr))) / N, trusted, steps, prec, log2d, term)


def birkhoff_profile(t, Ns: Sequence[int], phi: Callable = _default_phi, beta=1.0,
                     precision_bits: Optional[int] = None, guard_bits: int = 32,
                     max_bits: int = 1 << 16) -> dict:
    """Averages for several horizons from one orbit of length max(Ns).

    Trust is decided for the longest orbit, so every prefix shares it.
    """
    Ns = sorted({int(n) for n in Ns})
    if not Ns or Ns[0] < 1:
        raise ParameterError("horizons must be >= 1")
    arr, trusted, steps, prec, log2d, term = _orbit_values(
        t, Ns[-1], float(beta), precision_bits, guard_bits, max_bits)
    csum = np.cumsum(phi(arr))
    return {n: BirkhoffResult(float(csum[n - 1]) / n, trusted, min(steps, n - 1), prec, log2d, term)
            for n in Ns}
