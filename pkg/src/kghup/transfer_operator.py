"""Transfer (Perron-Frobenius) operator of U_beta and its discretizations.

The compressed composition operator is C f(x) = f(U_beta(x)) 1_{]-beta, beta]}(x);
its L^1 adjoint acts on densities by the branch sum

    (C* g)(t) = sum_{j != 0} g(beta/(2j - t)) * beta/(2j - t)^2.

Two discretizations are provided.  The Ulam matrix M has entries
M[i, k] = |A_i ∩ ]-beta, beta] ∩ U^{-1}(A_k)| / |A_i| on the uniform cells A_i
of ]-1, 1]; cell masses evolve by M.T.  The collocation matrix evaluates the
branch sum at cell midpoints with g linearly interpolated between midpoints.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np
import scipy.linalg
import scipy.sparse.linalg
from scipy.special import digamma, zeta

from kghup.errors import ConvergenceError, DomainError, ParameterError

__all__ = [
    "Discretization",
    "SpectrumReport",
    "TransferMatrix",
    "apply_transfer",
    "collocation_matrix",
    "composed_ulam_matrix",
    "composition_consistency",
    "sampled_composed_ulam_matrix",
    "factorization_check",
    "spectrum",
    "stationary_mass_probe",
    "transfer_tail_bound",
    "ulam_matrix",
]

DENSE_LIMIT = 2048


class Discretization(str, enum.Enum):
    ulam = "ulam"
    collocation = "collocation"
    composed = "composed"


@dataclass(frozen=True)
class TransferMatrix:
    """An assembled N x N discretization; ``tail_bound`` is the largest row
    mass that may have been lost to the branch cutoff."""

    beta: float
    N: int
    entries: np.ndarray
    branch_cutoff: int
    discretization: Discretization
    tail_bound: float = 0.0

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=float)
        if e.shape != (self.N, self.N):
            raise ParameterError(f"entries must be {self.N}x{self.N}, got {e.shape}")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def row_sums(self) -> np.ndarray:
        return self.entries.sum(axis=1)

    def push_masses(self, masses) -> np.ndarray:
        """Cell masses of the transferred measure (Ulam: M.T @ masses)."""
        return self.entries.T @ np.asarray(masses)

    def with_zero_atom(self) -> np.ndarray:
        """The (N+1) x (N+1) matrix with an extra coordinate for the atom at 0.

        The origin is fixed by U_beta, so the extra coordinate maps to itself
        with weight 1.  This block always contributes the eigenvalue 1, which
        is why :func:`spectrum` works on the cell block alone.
        """
        out = np.zeros((self.N + 1, self.N + 1))
        out[: self.N, : self.N] = self.entries
        out[self.N, self.N] = 1.0
        return out


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray
    spectral_radius: float
    peripheral_gap: float
    solver: str = "dense"

    def as_dict(self):
        return {
            "eigenvalues": [complex(z) for z in self.eigenvalues],
            "spectral_radius": self.spectral_radius,
            "peripheral_gap": self.peripheral_gap,
            "solver": self.solver,
        }


def _check_beta(beta):
    beta = float(beta)
    if not (0.0 < beta <= 1.0):
        raise ParameterError(f"beta must lie in ]0, 1], got {beta}")
    return beta


# ---------------------------------------------------------------------------
# pointwise transfer


def transfer_tail_bound(t, beta=1.0, J: int = 512, gmax: float = 1.0):
    """Bound sup|g| * (total length of the branch images with |j| > J)."""
    t = np.abs(np.asarray(t, dtype=float))
    return gmax * (beta / (2 * J + 1 - t) + beta / (2 * J + 1 - t))


_GL_X, _GL_W = np.polynomial.legendre.leggauss(12)


def _as_callable(g, grid, interp="linear", degree=None, need=None):
    if callable(g):
        return g
    vals = np.asarray(g, dtype=float)
    if grid is None:
        n = vals.size
        grid = -1.0 + (2.0 * np.arange(n) + 1.0) / n
    grid = np.asarray(grid, dtype=float)
    if grid.shape != vals.shape or grid.ndim != 1 or grid.size < 2:
        raise ParameterError("samples and grid must be 1-d arrays of equal length >= 2")
    lo, hi = float(grid.min()), float(grid.max())
    if need is not None:
        slack = 2.0 * float(np.max(np.diff(np.sort(grid))))
        if need[0] < lo - slack or need[1] > hi + slack:
            raise DomainError(f"samples on [{lo:g}, {hi:g}] do not cover the branch images "
                              f"[{need[0]:g}, {need[1]:g}]")
    if interp == "linear":
        order = np.argsort(grid)
        xs, ys = grid[order], vals[order]
        return lambda y: np.interp(y, xs, ys)
    if interp == "chebyshev":
        deg = min(grid.size - 1, 160) if degree is None else int(degree)
        P = np.polynomial.Chebyshev.fit(grid, vals, deg, domain=[lo, hi])
        return P
    raise ParameterError(f"unknown interpolation {interp!r}")


def apply_transfer(g: Union[Callable, Sequence[float]], t, beta=1.0, J: int = 512,
                   grid=None, tail: bool = True, interp: str = "linear",
                   degree: Optional[int] = None):
    """Evaluate (C_beta^* g)(t) by the branch sum over 0 < |j| <= J.

    ``g`` is a vectorized callable, or samples on ``grid`` (default: the
    midpoints of N uniform cells).  Samples are interpolated linearly, or
    with ``interp="chebyshev"`` by a least-squares Chebyshev fit of
    ``degree`` (spectrally accurate for analytic g sampled at Chebyshev
    nodes).  The samples must cover the branch images, which reach
    beta/(2 - |t|); nothing is extrapolated.  With ``tail=True`` the
    branches |j| > J are added by the midpoint Euler-Maclaurin formula: half
    the integral of g over [-beta/(2J+1+t), beta/(2J+1-t)] plus the first
    derivative correction.  What remains is O(J^-5).
    """
    beta = _check_beta(beta)
    if J < 1:
        raise ParameterError("J must be >= 1")
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if t_arr.size:
        need = (-beta / (2.0 + t_arr.min()), beta / (2.0 - t_arr.max()))
    else:
        need = None
    g = _as_callable(g, grid, interp, degree, need)
    out = np.zeros(t_arr.shape)
    js = np.concatenate([np.arange(J, 0, -1), np.arange(-J, 0)]).astype(float)
    chunk = max(1, 2 ** 20 // max(t_arr.size, 1))
    for s in range(0, js.size, chunk):
        d = 2.0 * js[s:s + chunk, None] - t_arr[None, :]
        y = beta / d
        out += np.sum(g(y) * (y * y / beta), axis=0)
    if tail:
        out += _transfer_tail(g, t_arr, beta, J)
    return out if np.ndim(t) else float(out[0])


def _transfer_tail(g, t, beta, J):
    hi = beta / (2 * J + 1 - t)
    lo = -beta / (2 * J + 1 + t)
    # 1/2 * integral of g over [lo, hi], Gauss-Legendre on each side of 0
    tot = np.zeros_like(t)
    for a, b in ((lo, np.zeros_like(t)), (np.zeros_like(t), hi)):
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        y = mid[None, :] + half[None, :] * _GL_X[:, None]
        tot += half * np.sum(_GL_W[:, None] * g(y), axis=0)
    integral = 0.5 * tot

    def gprime(y):
        h = 1e-4 * beta / J
        return (g(y + h) - g(y - h)) / (2 * h)

    # f(x) = g(y) y^2 / beta with y = +-beta/(2x -+ t); derivative at x = J + 1/2
    yp, ym = hi, lo
    fp = -2 * yp ** 2 / beta ** 2 * (gprime(yp) * yp ** 2 + 2 * yp * g(yp))
    fm = 2 * ym ** 2 / beta ** 2 * (gprime(ym) * ym ** 2 + 2 * ym * g(ym))
    return integral + (fp + fm) / 24.0


# ---------------------------------------------------------------------------
# Ulam assembly


def _cell_of_left(y, edges):
    # cell ]e_i, e_{i+1}] containing (y, y + eps)
    return np.clip(np.searchsorted(edges, y, side="right") - 1, 0, edges.size - 2)


def _cell_of_right(y, edges):
    # cell containing (y - eps, y]
    return np.clip(np.searchsorted(edges, y, side="left") - 1, 0, edges.size - 2)


def _deposit(M, edges, lo, hi, cols):
    """Add the length of each segment [lo, hi] to M[cell, col], splitting
    segments that straddle one cell edge."""
    i0 = _cell_of_left(lo, edges)
    i1 = _cell_of_right(hi, edges)
    same = i0 == i1
    np.add.at(M, (i0[same], cols[same]), hi[same] - lo[same])
    two = ~same
    if np.any(i1[two] - i0[two] > 1):
        raise AssertionError("segment spans more than two cells")
    cut = edges[i1[two]]
    np.add.at(M, (i0[two], cols[two]), cut - lo[two])
    np.add.at(M, (i1[two], cols[two]), hi[two] - cut)


def ulam_matrix(beta, N: int, J: int = 512) -> TransferMatrix:
    """Ulam matrix of C_beta on N uniform cells, branches 0 < |j| <= J.

    Preimages are the exact images phi_j(A_k) = ]beta/(2j - e_k), beta/(2j - e_{k+1})]
    of the cell edges.  Every branch image lies in ]-beta, beta], so the
    indicator only removes |x| > beta (the j = 0 strip).  Branches |j| > J have
    images inside ]-r, r], r = beta/(2J - 1); when r is at most one cell
    width they are added in closed form to the two cells next to 0,
    otherwise their mass leaks and is reported in ``tail_bound``.
    """
    beta = _check_beta(beta)
    if N < 2:
        raise ParameterError("N must be >= 2")
    if J < 1:
        raise ParameterError("J must be >= 1")
    edges = np.linspace(-1.0, 1.0, N + 1)
    h = 2.0 / N
    M = np.zeros((N, N))
    cols_all = np.arange(N)
    js = np.concatenate([np.arange(1, J + 1), -np.arange(1, J + 1)])
    per = max(1, 2 ** 21 // N)
    for s in range(0, js.size, per):
        jj = js[s:s + per].astype(float)
        img = beta / (2.0 * jj[:, None] - edges[None, :])
        lo = img[:, :-1].ravel()
        hi = img[:, 1:].ravel()
        cols = np.broadcast_to(cols_all, (jj.size, N)).ravel()
        _deposit(M, edges, lo, hi, cols)
    r = beta / (2 * J - 1)
    tail_bound = 0.0
    if r <= h and N % 2 == 0:
        a, b = edges[:-1], edges[1:]
        pos = 0.5 * beta * (digamma(J + 1 - a / 2) - digamma(J + 1 - b / 2))
        neg = 0.5 * beta * (digamma(J + 1 + b / 2) - digamma(J + 1 + a / 2))
        M[N // 2] += pos
        M[N // 2 - 1] += neg
    else:
        tail_bound = min(1.0, 2 * beta / (2 * J + 1) / h)
    return TransferMatrix(beta, N, M / h, J, Discretization.ulam, tail_bound)


def collocation_matrix(beta, N: int, J: int = 512) -> TransferMatrix:
    """Matrix K with (K g)_i = (C* g)(t_i) at cell midpoints t_i, where g is
    interpolated linearly between midpoints (held constant beyond the end
    midpoints).  Branches |j| > J are dropped; ``tail_bound`` is the
    resulting bound per unit sup|g|."""
    beta = _check_beta(beta)
    if N < 2:
        raise ParameterError("N must be >= 2")
    h = 2.0 / N
    mids = -1.0 + h * (np.arange(N) + 0.5)
    K = np.zeros((N, N))
    rows_all = np.arange(N)
    for j in np.concatenate([np.arange(1, J + 1), -np.arange(1, J + 1)]):
        y = beta / (2.0 * j - mids)
        w = y * y / beta
        pos = np.clip((y - mids[0]) / h, 0.0, N - 1.0)
        i0 = np.minimum(np.floor(pos).astype(int), N - 2)
        f = pos - i0
        np.add.at(K, (rows_all, i0), w * (1 - f))
        np.add.at(K, (rows_all, i0 + 1), w * f)
    tb = float(np.max(transfer_tail_bound(mids, beta, J)))
    return TransferMatrix(beta, N, K, J, Discretization.collocation, tb)


def _composed_map(x, beta):
    """x -> {beta / {beta/x}_2}_2, vectorized; nan where undefined."""
    with np.errstate(divide="ignore", invalid="ignore"):
        y = beta / x
        y = y - 2.0 * np.round(y / 2.0)
        y = np.where(y <= -1.0, y + 2.0, np.where(y > 1.0, y - 2.0, y))
        z = beta / y
        z = z - 2.0 * np.round(z / 2.0)
        z = np.where(z <= -1.0, z + 2.0, np.where(z > 1.0, z - 2.0, z))
    return z, y


def sampled_composed_ulam_matrix(beta, N: int, samples_per_cell: int = 256,
                                 rng: Optional[np.random.Generator] = None) -> TransferMatrix:
    """Monte Carlo version of :func:`composed_ulam_matrix`.

    Each cell is sampled at
    ``samples_per_cell`` stratified points (the subcell midpoints unless a
    generator is given for jittered sampling) and entries are hit
    frequencies.  The second image agrees with U_beta^2 except on a null set.
    """
    beta = _check_beta(beta)
    if N < 2:
        raise ParameterError("N must be >= 2")
    K = int(samples_per_cell)
    h = 2.0 / N
    offs = (np.arange(K) + 0.5) / K
    M = np.zeros((N, N))
    rows_per = max(1, 2 ** 20 // K)
    for s in range(0, N, rows_per):
        rows = np.arange(s, min(N, s + rows_per))
        if rng is None:
            u = np.broadcast_to(offs, (rows.size, K))
        else:
            u = (np.arange(K) + rng.random((rows.size, K))) / K
        x = -1.0 + h * (rows[:, None] + u)
        z, y = _composed_map(x, beta)
        # first image of x is -y (or 1 when y = 1); both must stay in ]-beta, beta]
        keep = (np.abs(x) <= beta) & (np.abs(y) <= beta) & (x != 0) & (y != 0) & np.isfinite(z)
        cells = np.clip(np.ceil((z + 1.0) / h).astype(int) - 1, 0, N - 1)
        rr = np.broadcast_to(rows[:, None], x.shape)
        np.add.at(M, (rr[keep], cells[keep]), 1.0 / K)
    return TransferMatrix(beta, N, M, 0, Discretization.composed, 0.0)


# ---------------------------------------------------------------------------
# spectra and identities


def _deposit_flat(acc, edges, lo, hi, cols, N):
    """Like :func:`_deposit` but accumulating into a flat N*N buffer with bincount."""
    i0 = _cell_of_left(lo, edges)
    i1 = _cell_of_right(hi, edges)
    same = i0 == i1
    cut = edges[np.where(same, i0 + 1, i1)]
    first = np.where(same, hi, cut) - lo
    acc += np.bincount(i0 * N + cols, weights=first, minlength=N * N)
    two = ~same
    if np.any(i1[two] - i0[two] > 1):
        raise AssertionError("segment spans more than two cells")
    acc += np.bincount(i1[two] * N + cols[two], weights=hi[two] - cut[two], minlength=N * N)


def _second_level_segments(beta, N, J):
    """The intervals phi_j(A_l), 0 < |j| <= J, as (lo, hi, l) arrays, plus one
    pseudo-segment per column and side of 0 carrying the branches |j| > J."""
    edges = np.linspace(-1.0, 1.0, N + 1)
    js = np.concatenate([np.arange(1, J + 1), -np.arange(1, J + 1)]).astype(float)
    img = beta / (2.0 * js[:, None] - edges[None, :])
    lo = img[:, :-1].ravel()
    hi = img[:, 1:].ravel()
    cols = np.tile(np.arange(N), js.size)
    a, b = edges[:-1], edges[1:]
    pos = 0.5 * beta * (digamma(J + 1 - a / 2) - digamma(J + 1 - b / 2))
    neg = 0.5 * beta * (digamma(J + 1 + b / 2) - digamma(J + 1 + a / 2))
    # centre the pseudo-segments on the centroid of the tail images so the
    # outer branch sees them where they really are (to first order)
    c = 0.5 * beta * zeta(3.0, J + 1) / zeta(2.0, J + 1)
    lo_pos = np.maximum(c - pos / 2, 0.0)
    lo_neg = np.minimum(-c - neg / 2, 0.0)
    lo = np.concatenate([lo, lo_pos, lo_neg])
    hi = np.concatenate([hi, lo_pos + pos, lo_neg + neg])
    cols = np.concatenate([cols, np.arange(N), np.arange(N)])
    return lo, hi, cols


def composed_ulam_matrix(beta, N: int, J: int = 512, order: int = 8) -> TransferMatrix:
    """Ulam matrix of the composed map x -> {beta/{beta/x}_2}_2 on the set
    where x and its first image both lie in ]-beta, beta].

    Entry (i, l) is |A_i ∩ V^{-1}(A_l)| / |A_i|, V the composed map, with
    V^{-1}(A_l) the union of phi_{j1}(phi_{j2}(A_l)).  The inner images are
    exact segments.  Outer branches whose image interval is long or straddles
    a cell edge push every segment explicitly.  Each remaining outer branch
    sits inside one cell, where

        |phi_j([a, b])| = beta (b - a) / ((2j - a)(2j - b))
                        = beta (b - a)/(4j^2) * sum_{p,q} (a/2j)^p (b/2j)^q,

    so only per-column moments of the segments are needed, truncated at
    total degree ``order``.  The branches beyond the last cell edge are summed
    with Hurwitz zeta values.  No intermediate projection onto cells occurs,
    so this is independent of squaring :func:`ulam_matrix`.
    """
    beta = _check_beta(beta)
    if N < 2 or N % 2:
        raise ParameterError("N must be even and >= 2")
    edges = np.linspace(-1.0, 1.0, N + 1)
    h = 2.0 / N
    lo, hi, cols = _second_level_segments(beta, N, J)
    length = hi - lo
    acc = np.zeros(N * N)

    # moments sum_seg len * sum_{p+q=r} a^p b^q, separately for each sign of j
    pw_lo = [np.ones_like(lo)]
    pw_hi = [np.ones_like(hi)]
    for _ in range(order):
        pw_lo.append(pw_lo[-1] * lo)
        pw_hi.append(pw_hi[-1] * hi)
    mom = np.zeros((order + 1, N))
    for r in range(order + 1):
        c = sum(pw_lo[p] * pw_hi[r - p] for p in range(r + 1))
        mom[r] = np.bincount(cols, weights=length * c, minlength=N)
    del pw_lo, pw_hi
    sgn = (-1.0) ** np.arange(order + 1)
    rows = np.zeros((N, N))

    jz = int(np.ceil((beta / h + 1.0) / 2.0))  # beta/(2j - 1) <= h from here on
    for side in (1, -1):
        mom_s = mom if side > 0 else mom * sgn[:, None]
        zero_cell = N // 2 if side > 0 else N // 2 - 1
        for j in range(1, jz):
            top, bot = beta / (2 * j - 1), beta / (2 * j + 1)
            c_top = _cell_of_right(np.array([side * top if side > 0 else -bot]), edges)[0]
            c_bot = _cell_of_left(np.array([side * bot if side > 0 else -top]), edges)[0]
            if c_top != c_bot or top - bot >= h:
                img_lo = beta / (2.0 * side * j - lo)
                img_hi = beta / (2.0 * side * j - hi)
                _deposit_flat(acc, edges, img_lo, img_hi, cols, N)
            else:
                w = beta / (4.0 * j * j) * (2.0 * j) ** -np.arange(order + 1.0)
                rows[c_top] += w @ mom_s
        w = np.array([beta * 2.0 ** (-r - 2) * zeta(r + 2.0, jz) for r in range(order + 1)])
        rows[zero_cell] += w @ mom_s
    M = acc.reshape(N, N) + rows
    return TransferMatrix(beta, N, M / h, J, Discretization.composed, 0.0)


def _order(ev: np.ndarray) -> np.ndarray:
    mod = np.round(np.abs(ev), 12)
    arg = np.round(np.angle(ev), 12)
    idx = np.lexsort((arg, -mod))
    return ev[idx]


def spectrum(M: Union[TransferMatrix, np.ndarray], k: Optional[int] = None,
             solver: str = "auto") -> SpectrumReport:
    """Top-k eigenvalues by modulus (ties broken by ascending argument).

    ``solver="auto"`` uses dense LAPACK for N <= 2048 and ARPACK above;
    ``"dense"`` and ``"arpack"`` force one of them.  A non-converged ARPACK
    run raises :class:`ConvergenceError`.
    """
    A = M.entries if isinstance(M, TransferMatrix) else np.asarray(M, dtype=float)
    n = A.shape[0]
    k = n if k is None else int(k)
    if not (1 <= k <= n):
        raise ParameterError(f"k must lie in [1, {n}]")
    if solver not in ("auto", "dense", "arpack"):
        raise ParameterError(f"unknown solver {solver!r}")
    use_dense = solver == "dense" or (solver == "auto" and n <= DENSE_LIMIT)
    if use_dense or k >= n - 1:
        ev = scipy.linalg.eigvals(A)
        if not np.all(np.isfinite(ev)):
            raise ConvergenceError("dense eigensolver returned non-finite values")
        solver = "dense"
    else:
        try:
            ev = scipy.sparse.linalg.eigs(A, k=k, which="LM", return_eigenvectors=False)
        except scipy.sparse.linalg.ArpackNoConvergence as exc:
            raise ConvergenceError(f"ARPACK did not converge: {exc}") from exc
        solver = "arpack"
    ev = _order(np.asarray(ev, dtype=complex))[:k]
    rho = float(np.abs(ev[0])) if ev.size else 0.0
    return SpectrumReport(ev, rho, 1.0 - rho, solver)


def factorization_check(M: Union[TransferMatrix, np.ndarray]) -> float:
    """Frobenius norm of (I - M^2) - (I + M)(I - M); zero up to roundoff."""
    A = M.entries if isinstance(M, TransferMatrix) else np.asarray(M, dtype=float)
    I = np.eye(A.shape[0])
    return float(np.linalg.norm((I - A @ A) - (I + A) @ (I - A)))


def l1_operator_norm(D: np.ndarray) -> float:
    """Norm of D^T on cell masses in total variation: the largest absolute row sum."""
    return float(np.max(np.sum(np.abs(D), axis=1)))


def composition_consistency(beta, N: int, J: int = 512, norm: str = "l1") -> float:
    """Discrepancy between ulam(beta, N)^2 and the Ulam matrix of the composed map.

    ``norm`` selects how the difference D is measured:

    * ``"l1"``: the matrix 1-norm (largest absolute column sum);
    * ``"tv"``: the total-variation operator norm on cell masses
      (largest absolute row sum);
    * ``"smooth"``: the total variation of D^T applied to the cell masses
      of the normalized density 1/(1 + t^2) restricted to ]-beta, beta].

    Squaring the Ulam matrix projects onto cells between the two steps, which
    is an O(1) perturbation in operator norm near points of small expansion;
    only the ``"smooth"`` measure is expected to go to 0 with N.
    """
    A = ulam_matrix(beta, N, J).entries
    B = composed_ulam_matrix(beta, N, J).entries
    D = A @ A - B
    if norm == "l1":
        return float(np.linalg.norm(D, 1))
    if norm == "tv":
        return l1_operator_norm(D)
    if norm == "smooth":
        mids = -1.0 + (2.0 / N) * (np.arange(N) + 0.5)
        w = np.where(np.abs(mids) <= beta, 1.0 / (1.0 + mids * mids), 0.0)
        w /= w.sum()
        return float(np.abs(D.T @ w).sum())
    raise ParameterError(f"unknown norm {norm!r}")


def stationary_mass_probe(N: int, window: float = 0.9, J: int = 512, iterations: int = 4000):
    """Mass of the normalized leading eigenvector of the beta = 1 Ulam matrix
    inside |t| <= window.  The invariant measure of U is infinite with
    density 1/(1 - t^2), so this mass drifts toward the endpoints as N grows."""
    T = ulam_matrix(1.0, N, J)
    v = np.full(N, 1.0 / N)
    MT = T.entries.T
    for _ in range(iterations):
        v = MT @ v
        v /= v.sum()
    mids = -1.0 + (2.0 / N) * (np.arange(N) + 0.5)
    return float(v[np.abs(mids) <= window].sum())
