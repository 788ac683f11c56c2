"""The Moebius group generated by z -> z + 2 and z -> beta z/(beta - 2z).

Includes the fundamental-domain test and greedy reduction for 0 < beta <= 1,
the discreteness classifier for general beta > 0, the cusp inventory and the
one-parameter normalization of the hyperbola/lattice-cross problem.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import mpmath
import numpy as np

from kghup.errors import DomainError, ParameterError

__all__ = [
    "DomainVerdict",
    "MoebiusMap",
    "ReductionResult",
    "Status",
    "apply",
    "cusps",
    "discreteness_classify",
    "generators",
    "in_fundamental_domain",
    "normalize_pair",
    "reduce_to_domain",
    "tiling_overlap_probe",
    "word_map",
]


@dataclass(frozen=True)
class MoebiusMap:
    """Real 2x2 matrix [[a, b], [c, d]] normalized to determinant 1."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if not det > 0:
            raise ParameterError(f"determinant must be positive, got {det}")
        s = math.sqrt(det)
        for name in "abcd":
            object.__setattr__(self, name, float(getattr(self, name)) / s)

    @classmethod
    def _unimodular(cls, a, b, c, d) -> "MoebiusMap":
        # products of determinant-1 maps: skip ad - bc, which cancels badly
        # once the entries grow
        out = object.__new__(cls)
        for name, v in zip("abcd", (a, b, c, d)):
            object.__setattr__(out, name, float(v))
        return out

    @classmethod
    def identity(cls) -> "MoebiusMap":
        return cls(1.0, 0.0, 0.0, 1.0)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def __matmul__(self, other: "MoebiusMap") -> "MoebiusMap":
        m = self.matrix @ other.matrix
        return MoebiusMap._unimodular(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    def inverse(self) -> "MoebiusMap":
        return MoebiusMap._unimodular(self.d, -self.b, -self.c, self.a)

    def __call__(self, z: complex) -> complex:
        return apply(self, z)


def apply(M: MoebiusMap, z: complex) -> complex:
    """(a z + b)/(c z + d) for z in the upper half plane."""
    z = complex(z)
    if not z.imag > 0:
        raise DomainError(f"{z} is not in the upper half plane")
    # with ad - bc = 1, Im = y/|cz + d|^2; this form avoids the cancellation
    # in (az + b)/(cz + d) when the entries are large
    x, y = z.real, z.imag
    den = (M.c * x + M.d) ** 2 + (M.c * y) ** 2
    re = ((M.a * x + M.b) * (M.c * x + M.d) + M.a * M.c * y * y) / den
    return complex(re, y / den)


def generators(beta) -> Tuple[MoebiusMap, MoebiusMap]:
    """A: z -> z + 2 and B: z -> beta z/(beta - 2z) = z/(1 - 2z/beta)."""
    beta = float(beta)
    if not beta > 0:
        raise ParameterError("beta must be positive")
    return MoebiusMap(1.0, 2.0, 0.0, 1.0), MoebiusMap(1.0, 0.0, -2.0 / beta, 1.0)


def word_map(word: Iterable[str], beta) -> MoebiusMap:
    """The map of a word over {A, a, B, b} (lower case = inverse), letters
    applied left to right: 'AB' means first A, then B."""
    A, B = generators(beta)
    table = {"A": A, "a": A.inverse(), "B": B, "b": B.inverse()}
    M = MoebiusMap.identity()
    for ch in word:
        try:
            M = table[ch] @ M
        except KeyError:
            raise ParameterError(f"unknown letter {ch!r}") from None
    return M


def in_fundamental_domain(z: complex, beta) -> bool:
    """Strict membership: |Re z| < 1 and z outside both closed disks
    |z -+ beta/2| <= beta/2."""
    z = complex(z)
    if not z.imag > 0:
        raise DomainError(f"{z} is not in the upper half plane")
    r = beta / 2.0
    return abs(z.real) < 1.0 and abs(z - r) > r and abs(z + r) > r


@dataclass(frozen=True)
class ReductionResult:
    z: complex
    word: str
    reduced: bool
    cusp_proximity: bool

    def __iter__(self):
        return iter((self.z, self.word))


def _in_closure(z: complex, beta: float, tol: float) -> bool:
    r = beta / 2.0
    return abs(z.real) <= 1.0 + tol and abs(z - r) >= r - tol and abs(z + r) >= r - tol


def reduce_to_domain(z: complex, beta, max_steps: int = 10_000,
                     tol: float = 1e-12) -> ReductionResult:
    """Greedy reduction into the closure of the fundamental domain.

    Each round first translates Re z into ]-1, 1] with a power of A, then, if
    z lies in one of the disks |z -+ beta/2| < beta/2, applies the power of B
    that moves u = Re(-beta/z) into ]-1, 1] (B acts on u as u -> u + 2).  The
    word records letters in the order they were applied, so
    ``word_map(word)`` sends the input to the output.  When ``max_steps``
    runs out the result is flagged, with ``cusp_proximity`` set if z has
    drifted towards a cusp on the real axis.
    """
    beta = float(beta)
    if not (0.0 < beta <= 1.0):
        raise ParameterError("reduction is implemented for 0 < beta <= 1")
    z = complex(z)
    if not z.imag > 0:
        raise DomainError(f"{z} is not in the upper half plane")
    letters: List[str] = []
    A, B = generators(beta)
    for _ in range(max_steps):
        k = round(z.real / 2.0)
        if z.real - 2 * k <= -1.0:
            k -= 1
        if k:
            z = complex(z.real - 2 * k, z.imag)
            letters.append(("a" if k > 0 else "A") * abs(k))
        r = beta / 2.0
        if abs(z - r) < r or abs(z + r) < r:
            u = (-beta / z).real
            m = round(-u / 2.0)
            if m == 0:
                m = 1 if u < 0 else -1
            step = B if m > 0 else B.inverse()
            for _ in range(abs(m)):
                z = apply(step, z)
            letters.append(("B" if m > 0 else "b") * abs(m))
            continue
        if _in_closure(z, beta, tol):
            return ReductionResult(z, "".join(letters), True, False)
    near_cusp = z.imag < 1e-6 or abs(z) < 1e-6 or (beta == 1.0 and min(abs(z - 1), abs(z + 1)) < 1e-6)
    return ReductionResult(z, "".join(letters), False, bool(near_cusp))


class Status(str, enum.Enum):
    discrete_free = "discrete_free"
    discrete_pq = "discrete_pq"
    non_discrete = "non_discrete"


@dataclass(frozen=True)
class DomainVerdict:
    beta: float
    status: Status
    p: Optional[int] = None
    q: Optional[int] = None
    q_max: Optional[int] = None

    def __post_init__(self):
        if self.status is Status.discrete_pq:
            p, q = self.p, self.q
            if p not in (1, 2) or q is None or not p < q or math.gcd(p, q) != 1:
                raise ParameterError(f"invalid (p, q) = ({p}, {q})")

    def as_dict(self):
        return {"beta": self.beta, "status": self.status.value, "p": self.p,
                "q": self.q, "q_max": self.q_max}


def _beta_pq(p, q):
    return 1.0 / math.cos(p * math.pi / (2 * q)) ** 2


def discreteness_classify(beta, q_max: int = 10_000) -> DomainVerdict:
    """Discrete and free for beta <= 1; for beta > 1 discrete exactly when
    beta = 1/cos^2(p pi/(2q)) with p in {1, 2}, p < q, gcd(p, q) = 1.

    Instead of scanning q, the equation is inverted: q = p pi/(2 theta) with
    theta = arccos(1/sqrt(beta)), and only the neighbouring integers are
    tested against the tolerance 1e-12 (1 + beta^2).  A hit is confirmed at
    50 significant digits.  ``non_discrete`` means no representation with
    q <= q_max.
    """
    beta = float(beta)
    if not beta > 0:
        raise ParameterError("beta must be positive")
    if q_max < 2:
        raise ParameterError("q_max must be >= 2")
    if beta <= 1.0:
        return DomainVerdict(beta, Status.discrete_free, q_max=q_max)
    tol = 1e-12 * (1.0 + beta * beta)
    theta = math.acos(1.0 / math.sqrt(beta))
    for p in (1, 2):
        q0 = p * math.pi / (2.0 * theta)
        for q in sorted({math.floor(q0), math.ceil(q0), round(q0)}):
            if q <= p or q > q_max or math.gcd(p, q) != 1:
                continue
            if abs(beta - _beta_pq(p, q)) < tol and _confirm(beta, p, q, tol):
                return DomainVerdict(beta, Status.discrete_pq, p, q, q_max)
    return DomainVerdict(beta, Status.non_discrete, q_max=q_max)


def _confirm(beta, p, q, tol) -> bool:
    with mpmath.workdps(50):
        exact = 1 / mpmath.cos(p * mpmath.pi / (2 * q)) ** 2
        return abs(mpmath.mpf(beta) - exact) < tol


def cusps(beta) -> list:
    """Cusps of the quotient for 0 < beta <= 1 (``math.inf`` stands for infinity)."""
    beta = float(beta)
    if not (0.0 < beta <= 1.0):
        raise ParameterError("cusps are only listed for 0 < beta <= 1")
    if beta < 1.0:
        return [math.inf, 0.0]
    return [math.inf, 0.0, 1.0, -1.0]


def normalize_pair(alpha, beta, eps) -> Tuple[float, bool]:
    """Reduce (hyperbola x1 x2 = eps, lattice-cross alpha Z x {0} u {0} x beta Z)
    to the single parameter beta' = alpha beta |eps|; the pair is a Heisenberg
    uniqueness pair exactly when beta' <= 1."""
    alpha, beta, eps = float(alpha), float(beta), float(eps)
    if not (alpha > 0 and beta > 0):
        raise ParameterError("alpha and beta must be positive")
    if eps == 0:
        raise ParameterError("eps = 0 (the cross x1 x2 = 0) is not supported")
    b = alpha * beta * abs(eps)
    return b, bool(b <= 1.0)


def _reduced_words(max_len: int) -> List[str]:
    inv = {"A": "a", "a": "A", "B": "b", "b": "B"}
    words = [""]
    frontier = [""]
    for _ in range(max_len):
        nxt = []
        for w in frontier:
            for ch in "AaBb":
                if w and inv[w[-1]] == ch:
                    continue
                nxt.append(w + ch)
        words.extend(nxt)
        frontier = nxt
    return words


def _sample_domain(beta, n, rng):
    pts = []
    while len(pts) < n:
        z = complex(rng.uniform(-1, 1), math.exp(rng.uniform(math.log(1e-3), math.log(10.0))))
        if in_fundamental_domain(z, beta):
            pts.append(z)
    return pts


def tiling_overlap_probe(beta, max_len: int = 4, samples: int = 200, seed: int = 0) -> int:
    """Count sampled overlaps between images of the domain under distinct
    reduced words of length <= max_len.

    w(D) and w'(D) meet iff w'^{-1} w (D) meets D, so it suffices to check that
    no nontrivial reduced word maps a sample point of D back into D.  A
    sampled probe, not a proof; returns the number of offending (word, point)
    pairs.
    """
    beta = float(beta)
    rng = np.random.default_rng(seed)
    pts = _sample_domain(beta, samples, rng)
    bad = 0
    for w in _reduced_words(max_len)[1:]:
        M = word_map(w, beta)
        for z in pts:
            if in_fundamental_domain(apply(M, z), beta):
                bad += 1
    return bad
