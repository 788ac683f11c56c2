"""Oscillatory integrals on half-lines, Fourier transforms of measures on the
hyperbola x1 x2 = eps, and Poisson extension.

Everything reduces to integrals of the form int_a^inf A(u) e^{i w u} du with a
non-oscillating (or mildly oscillating) amplitude A.  Those are handed to
QUADPACK's QAWF (``scipy.integrate.quad`` with ``weight='cos'/'sin'`` and an
infinite upper limit) and QAGI when w = 0.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from kghup.errors import AccuracyError, DomainError, ParameterError

DEFAULT_TOL = 1e-9
SLOW_OMEGA = 1e-20
SPLIT_OMEGA = 1.0


@dataclass(frozen=True)
class QuadValue:
    value: complex
    error: float

    def __add__(self, other: "QuadValue") -> "QuadValue":
        return QuadValue(self.value + other.value, self.error + other.error)

    def scale(self, c) -> "QuadValue":
        return QuadValue(c * self.value, abs(c) * self.error)


def _quad_real(fun, a, omega, kind, epsabs, b=np.inf):
    """int_a^b fun(u) * cos/sin(omega u) du (kind 'cos', 'sin' or None)."""
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            if kind is None:
                val, err = integrate.quad(fun, a, b, epsabs=epsabs, epsrel=0.0, limit=400)
            else:
                val, err = integrate.quad(fun, a, b, weight=kind, wvar=omega,
                                          epsabs=epsabs, limlst=200, limit=400)
        except integrate.IntegrationWarning as exc:
            raise AccuracyError(f"QUADPACK could not reach {epsabs:g}: {exc}") from None
    return val, err


def _plain_complex(g, a, b, epsabs, real_amp=False) -> QuadValue:
    re, e1 = _quad_real(lambda u: complex(g(u)).real, a, 0.0, None, epsabs, b)
    if real_amp:
        return QuadValue(complex(re), e1)
    im, e2 = _quad_real(lambda u: complex(g(u)).imag, a, 0.0, None, epsabs, b)
    return QuadValue(complex(re, im), e1 + e2)


def _qawf(amp, omega, a, epsabs, real_amp) -> QuadValue:
    w = abs(omega)
    s = 1.0 if omega > 0 else -1.0
    # e^{i omega u} = cos(w u) + i s sin(w u)
    rc, e1 = _quad_real(lambda u: amp(u).real, a, w, "cos", epsabs)
    rs, e2 = _quad_real(lambda u: amp(u).real, a, w, "sin", epsabs)
    val = complex(rc, s * rs)
    err = e1 + e2
    if not real_amp:
        ic, e3 = _quad_real(lambda u: amp(u).imag, a, w, "cos", epsabs)
        is_, e4 = _quad_real(lambda u: amp(u).imag, a, w, "sin", epsabs)
        # i * Im A * (cos + i s sin) = i Im A cos - s Im A sin
        val += complex(-s * is_, ic)
        err += e3 + e4
    return QuadValue(val, err)


def osc_half_line(amp: Callable[[float], complex], omega: float, a: float,
                  epsabs: float = 1e-12, real_amp: bool = False) -> QuadValue:
    """int_a^inf amp(u) e^{i omega u} du for a decaying amplitude ``amp``.

    QAWF handles |omega| >= 1 directly.  Its first cycle has length pi/|omega|
    and fails silently once that dwarfs the amplitude's scale, so slower
    frequencies are split at B = a + 1/|omega|: [a, B] carries less than one
    radian of phase and goes to plain QAG over geometrically growing pieces,
    and the tail is rescaled by v = |omega| u to unit frequency.  Below
    ``SLOW_OMEGA`` the phase is folded into the amplitude and QAGI is used.
    """
    if abs(omega) < SLOW_OMEGA:
        if omega == 0.0:
            return _plain_complex(amp, a, np.inf, epsabs, real_amp)
        return _plain_complex(lambda u: amp(u) * complex(math.cos(omega * u), math.sin(omega * u)),
                              a, np.inf, epsabs)
    if abs(omega) >= SPLIT_OMEGA:
        return _qawf(amp, omega, a, epsabs, real_amp)
    w = abs(omega)
    B = a + 1.0 / w
    edges = [a]
    step = min(1.0, B - a)
    while edges[-1] < B:
        edges.append(min(B, edges[-1] + step))
        step *= 16.0
    piece_tol = epsabs / (2 * len(edges))
    phased = lambda u: amp(u) * complex(math.cos(omega * u), math.sin(omega * u))
    out = QuadValue(0j, 0.0)
    for lo, hi in zip(edges, edges[1:]):
        out = out + _plain_complex(phased, lo, hi, piece_tol)
    tail = _qawf(lambda v: amp(v / w), math.copysign(1.0, omega), w * B, 0.5 * epsabs * w, real_amp)
    return out + tail.scale(1.0 / w)


def osc_real_line(amp: Callable[[float], complex], omega: float, x0: float = 0.0,
                  epsabs: float = 1e-12, real_amp: bool = False) -> QuadValue:
    """int_R amp(t) e^{i omega t} dt, split at x0 into two half lines."""
    right = osc_half_line(lambda u: amp(x0 + u), omega, 0.0, epsabs, real_amp)
    left = osc_half_line(lambda u: amp(x0 - u), -omega, 0.0, epsabs, real_amp)
    phase = complex(math.cos(omega * x0), math.sin(omega * x0))
    return (right + left).scale(phase)


@dataclass(frozen=True)
class HyperbolaMeasure:
    """A finite complex measure on x1 x2 = eps, parametrized by t -> (t, eps/t).

    ``density`` is a scalar callable in t (complex values allowed) integrable
    on the real line; ``atoms`` are (t, mass) pairs.  ``exact_atoms`` may carry
    the same atom locations as mpmath numbers for exact-phase evaluation.
    ``window`` is the half-width outside which the density's mass is below
    ``tail_mass`` (``inf`` when the quadrature runs over the whole line).
    """

    eps: float
    density: Optional[Callable[[float], complex]] = None
    atoms: Tuple[Tuple[float, complex], ...] = ()
    exact_atoms: Tuple = ()
    window: float = math.inf
    tail_mass: float = 0.0
    label: str = ""

    def __post_init__(self):
        if self.eps == 0 or not math.isfinite(self.eps):
            raise ParameterError("eps must be a nonzero finite real")
        for t, _ in self.atoms:
            if t == 0 or not math.isfinite(t):
                raise DomainError("atoms must sit at finite t != 0")

    def point(self, t: float) -> Tuple[float, float]:
        return (t, self.eps / t)


def zero_measure(eps: float = 1.0) -> HyperbolaMeasure:
    return HyperbolaMeasure(eps, None, (), label="zero")


def dilate(mu: HyperbolaMeasure, s1: float, s2: float) -> HyperbolaMeasure:
    """Push-forward under x -> (s1 x1, s2 x2) with s1, s2 > 0; the image lives
    on x1 x2 = eps s1 s2 and its Fourier transform is mu^(s1 xi1, s2 xi2)."""
    if not (s1 > 0 and s2 > 0):
        raise ParameterError("dilation factors must be positive")
    f = mu.density
    dens = None if f is None else (lambda tau: f(tau / s1) / s1)
    atoms = tuple((s1 * t, m) for t, m in mu.atoms)
    return HyperbolaMeasure(mu.eps * s1 * s2, dens, atoms, window=s1 * mu.window,
                            tail_mass=mu.tail_mass, label=mu.label)


def _atom_part(mu: HyperbolaMeasure, xi1: float, xi2: float) -> complex:
    tot = 0j
    for t, m in mu.atoms:
        ph = math.pi * (xi1 * t + xi2 * mu.eps / t)
        tot += m * complex(math.cos(ph), math.sin(ph))
    return tot


def fourier_transform_detail(mu: HyperbolaMeasure, xi: Sequence[float],
                             tol: float = DEFAULT_TOL) -> QuadValue:
    """int e^{pi i (xi1 t + xi2 eps/t)} dmu(t) with an error estimate.

    When both frequencies are nonzero the density part is split at
    c = sqrt|xi2 eps/xi1|, the stationary point of the phase when it has one.
    On |t| >= c the phase xi1 t is handled by QAWF with the factor
    e^{pi i xi2 eps/t} kept in the amplitude; on |t| <= c the substitution
    t = +-c^2/u (u >= c) turns xi2 eps/t into the linear phase
    +-xi2 eps u/c^2 and moves xi1 t into the amplitude.  Either way the
    amplitude's phase moves no faster than the weight's.  When one frequency
    vanishes a single substitution over each half line suffices.
    """
    xi1, xi2 = float(xi[0]), float(xi[1])
    out = QuadValue(_atom_part(mu, xi1, xi2), 0.0)
    f = mu.density
    if f is None:
        return out
    eps = mu.eps
    sg = 1.0 if eps > 0 else -1.0
    epsabs = tol / 16.0
    pi = math.pi
    if xi2 == 0.0:
        part = osc_real_line(f, pi * xi1, 0.0, epsabs)
    elif xi1 == 0.0:
        # t = c^2/u on each half line; dt = c^2/u^2 du
        c = math.sqrt(abs(eps))

        def amp_pos(u):
            return f(c * c / u) * c * c / (u * u) if u > 0 else 0.0

        def amp_neg(u):
            return f(-c * c / u) * c * c / (u * u) if u > 0 else 0.0

        part = (osc_half_line(amp_pos, pi * xi2 * sg, 0.0, epsabs)
                + osc_half_line(amp_neg, -pi * xi2 * sg, 0.0, epsabs))
    else:
        # any split point is exact; the stationary point is merely the
        # efficient one, so keep it away from 0 and inf
        c = min(max(math.sqrt(abs(xi2 * eps / xi1)), 1e-2), 1e2)
        w_in = pi * xi2 * eps / (c * c)

        def outer_pos(t):
            return f(t) * np.exp(1j * pi * xi2 * eps / t)

        def outer_neg(s):
            return f(-s) * np.exp(-1j * pi * xi2 * eps / s)

        def inner_pos(u):
            return f(c * c / u) * np.exp(1j * pi * xi1 * c * c / u) * c * c / (u * u)

        def inner_neg(u):
            return f(-c * c / u) * np.exp(-1j * pi * xi1 * c * c / u) * c * c / (u * u)

        part = (osc_half_line(outer_pos, pi * xi1, c, epsabs)
                + osc_half_line(outer_neg, -pi * xi1, c, epsabs)
                + osc_half_line(inner_pos, w_in, c, epsabs)
                + osc_half_line(inner_neg, -w_in, c, epsabs))
    total = out + part
    if total.error > tol:
        raise AccuracyError(f"quadrature error {total.error:.3g} exceeds {tol:.3g} at xi={xi}")
    return total


def fourier_transform(mu: HyperbolaMeasure, xi: Sequence[float], tol: float = DEFAULT_TOL) -> complex:
    """mu^(xi) = int e^{pi i <x, xi>} dmu(x) for mu on the hyperbola."""
    return fourier_transform_detail(mu, xi, tol).value


def poisson_kernel(t, z: complex):
    """P(t, z) = y/((x - t)^2 + y^2)."""
    x, y = z.real, z.imag
    return y / ((x - t) ** 2 + y * y)


def poisson_extend(f: Callable[[float], complex], z: complex, frequency: float = 0.0,
                   tol: float = DEFAULT_TOL) -> QuadValue:
    """(1/pi) int P(t, z) f(t) e^{pi i frequency t} dt with an error estimate.

    ``frequency`` lets oscillating boundary data e^{pi i n t} be integrated by
    QAWF instead of through the amplitude.
    """
    z = complex(z)
    if not z.imag > 0:
        raise DomainError("z must lie in the upper half plane")
    res = osc_real_line(lambda t: poisson_kernel(t, z) * f(t), math.pi * frequency, z.real,
                        tol / 8.0)
    res = res.scale(1.0 / math.pi)
    if res.error > tol:
        raise AccuracyError(f"quadrature error {res.error:.3g} exceeds {tol:.3g}")
    return res
