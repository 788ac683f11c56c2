import cmath
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kghup import hup_lab as hl
from kghup.errors import AccuracyError, DegeneracyError, DomainError, ParameterError
from kghup.moebius import normalize_pair

SQPI = math.sqrt(math.pi)


def gaussian(eps=1.0):
    return hl.HyperbolaMeasure(eps, lambda t: np.exp(-t * t), label="gauss")


def poisson(z):
    return hl.HyperbolaMeasure(1.0, lambda t: hl.poisson_kernel(t, z))


# --- Fourier transform -------------------------------------------------------

@given(st.floats(-5, 5), st.floats(-5, 5), st.sampled_from([1.0, -0.5, 3.0]))
def test_single_atom(x1, x2, eps):
    mu = hl.HyperbolaMeasure(eps, atoms=((1.0, 1.0),))
    expected = cmath.exp(1j * math.pi * (x1 + eps * x2))
    assert abs(hl.fourier_transform(mu, (x1, x2)) - expected) < 1e-13


def test_gaussian_mass_and_axis_value():
    assert hl.fourier_transform(gaussian(), (0, 0)) == pytest.approx(SQPI, abs=1e-10)
    # int e^{-t^2} e^{2 pi i t} dt = sqrt(pi) e^{-pi^2}
    assert abs(hl.fourier_transform(gaussian(), (2, 0)) - SQPI * math.exp(-math.pi ** 2)) < 1e-10


@pytest.mark.parametrize("z", [0.3 + 0.8j, -1.2 + 2j])
@pytest.mark.parametrize("xi", [(1.5, -0.7), (0.4, -3.0), (-2.0, 0.6), (0.0, -1.3), (2.5, 0.0)])
def test_poisson_kernel_transform_closed_form(z, xi):
    """Oracle: t -> e^{pi i (a t + b/t)} is bounded holomorphic in the upper
    half plane when a >= 0 >= b (lower when a <= 0 <= b), so its Poisson
    integral is pi times its value at z (or at conj z)."""
    a, b = xi
    w = z if (a >= 0 >= b) else z.conjugate()
    expected = math.pi * cmath.exp(1j * math.pi * (a * w + b / w))
    assert abs(hl.fourier_transform(poisson(z), xi) - expected) < 1e-9


def test_mixed_phase_reference_value():
    """Oracle: mpmath quadosc on each half line after t -> 1/t on (0, 1)."""
    xi1, xi2 = 1.3, 0.7
    f = lambda t: mpmath.exp(-t * t)
    with mpmath.workdps(20):
        def half(sign):
            outer = mpmath.quadosc(lambda t: f(sign * t) * mpmath.expjpi(sign * (xi1 * t + xi2 / t)),
                                   [1, mpmath.inf], omega=math.pi * xi1)
            inner = mpmath.quadosc(lambda u: f(sign / u) * mpmath.expjpi(sign * (xi1 / u + xi2 * u)) / u ** 2,
                                   [1, mpmath.inf], omega=math.pi * xi2)
            return outer + inner
        ref = complex(half(1) + half(-1))
    assert abs(hl.fourier_transform(gaussian(), (xi1, xi2)) - ref) < 1e-9


@given(st.floats(0.3, 3.0), st.floats(0.3, 3.0), st.floats(-2, 2), st.floats(-2, 2))
@settings(max_examples=15)
def test_dilation_covariance(s1, s2, x1, x2):
    mu = poisson(0.4 + 1j)
    lhs = hl.fourier_transform(hl.dilate(mu, s1, s2), (x1, x2))
    rhs = hl.fourier_transform(mu, (s1 * x1, s2 * x2))
    assert abs(lhs - rhs) < 1e-8


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
def test_translation_covariance_atomic(a1, a2, x1, x2):
    atoms = ((0.7, 1.0), (-2.0, 0.5j))
    mu = hl.HyperbolaMeasure(1.0, atoms=atoms)
    base = hl.fourier_transform(mu, (x1, x2))
    shifted = sum(m * cmath.exp(1j * math.pi * ((t + a1) * x1 + (1 / t + a2) * x2)) for t, m in atoms)
    assert abs(shifted - cmath.exp(1j * math.pi * (a1 * x1 + a2 * x2)) * base) < 1e-12


def test_riemann_lebesgue_decay_along_ray():
    bump = lambda t: np.where((t > 0.5) & (t < 2.0),
                              np.exp(-1.0 / np.clip((t - 0.5) * (2.0 - t), 1e-300, None)), 0.0)
    mu = hl.HyperbolaMeasure(1.0, bump)
    d = np.array([0.8, 0.6])
    peaks = [max(abs(hl.fourier_transform(mu, r * d, tol=1e-8)) for r in np.linspace(R, 2 * R, 7))
             for R in (2.0, 8.0, 32.0)]
    assert peaks[0] > peaks[1] > peaks[2]


def test_accuracy_failure_is_explicit():
    with pytest.raises(AccuracyError):
        hl.fourier_transform(gaussian(), (1.0, 1.0), tol=1e-30)


def test_hyperbola_measure_validation():
    with pytest.raises(ParameterError):
        hl.HyperbolaMeasure(0.0)
    with pytest.raises(DomainError):
        hl.HyperbolaMeasure(1.0, atoms=((0.0, 1.0),))


# --- Poisson extension ---------------------------------------------------------

def test_poisson_extend_examples():
    assert hl.poisson_extend(lambda t: 1.0, 0.3 + 2j).value == pytest.approx(1.0, abs=1e-10)
    e = hl.poisson_extend(lambda t: 1.0, 1j, frequency=1).value
    assert abs(e - math.exp(-math.pi)) < 1e-10
    e = hl.poisson_extend(lambda t: 1.0, 1j, frequency=-1).value
    assert abs(e - math.exp(-math.pi)) < 1e-10
    with pytest.raises(DomainError):
        hl.poisson_extend(lambda t: 1.0, 1.0 + 0j)


@given(st.integers(-6, 6), st.builds(complex, st.floats(-3, 3), st.floats(0.2, 3)))
@settings(max_examples=20)
def test_ac_closed_form_matches_poisson_extension(n, z):
    q = hl.poisson_extend(lambda t: 1.0, z, frequency=n)
    assert abs(math.pi * q.value - hl.ac_closed_form(n, z)) < 1e-8


# --- annihilators ----------------------------------------------------------------

def test_lattice_residual_of_zero_measure():
    res = hl.lattice_residual(hl.zero_measure(), hl.LatticeCross(1, 1, 5, 5))
    assert res.max_residual == 0.0
    assert len(res.table()) == 11 + 10


def test_singular_pair_values():
    mu, cert = hl.singular_annihilator(1, 1, 2, 2)
    u, v = cert.parameters["u1"], cert.parameters["v1"]
    with mpmath.workdps(40):
        s3 = mpmath.sqrt(3)
        assert abs(u - float(2 + s3)) < 1e-15 and abs(v - float(s3 - 2)) < 1e-15
        u_, v_ = 2 + s3, s3 - 2
        assert abs(u_ - v_ - 4) < mpmath.mpf(10) ** -35
        assert abs(1 / u_ - 1 / v_ - 4) < mpmath.mpf(10) ** -35
    assert cert.max_lattice_residual < 1e-12 and cert.valid


def test_singular_boundary_case_is_a_valid_pair():
    _, cert = hl.singular_annihilator(1, 1, 1, 1)
    assert cert.parameters["u1"] == 1.0 and cert.parameters["v1"] == -1.0
    assert cert.max_lattice_residual < 1e-12 and cert.valid


def test_singular_rejects_complex_roots():
    with pytest.raises(DomainError):
        hl.singular_annihilator(2, 1, 1, 1)
    with pytest.raises(ParameterError):
        hl.singular_annihilator(1, 1, 0, 1)


@given(st.floats(0.2, 3), st.floats(0.2, 3), st.integers(1, 6), st.integers(1, 6))
@settings(max_examples=25)
def test_singular_certificates_valid(alpha, beta, m, n):
    if m * n < alpha * beta:
        with pytest.raises(DomainError):
            hl.singular_annihilator(alpha, beta, m, n, 10, 10)
        return
    _, cert = hl.singular_annihilator(alpha, beta, m, n, 10, 10)
    assert cert.valid and cert.witness_value > 10 * cert.max_lattice_residual


def test_ac_annihilator_beta_two():
    mu, cert = hl.ac_annihilator(2.0, j_max=6, k_max=6)
    z1 = complex(*cert.parameters["z1"])
    assert z1 == 1 + 1j
    assert abs((1 / z1.conjugate() - 1 / complex(*cert.parameters["z2"]).conjugate()) - 1) < 1e-15
    # e_3(z1) - e_3(z2) = 0
    assert abs(hl.ac_closed_form(3, z1) - hl.ac_closed_form(3, complex(*cert.parameters["z2"]))) < 1e-15
    assert cert.max_lattice_residual < 1e-6
    assert cert.witness_value == pytest.approx(2 * math.pi * math.exp(-math.pi / 2), abs=1e-9)
    assert cert.valid


def test_ac_lattice_values_against_closed_form():
    mu, cert = hl.ac_annihilator(3.0, check=False)
    z1, z2 = (complex(*cert.parameters[k]) for k in ("z1", "z2"))
    for j in (-3, 1, 4):
        q = hl.fourier_transform(mu, (j, 0.0))
        assert abs(q - (hl.ac_closed_form(j, z1) - hl.ac_closed_form(j, z2))) < 1e-9


@pytest.mark.parametrize("alpha, beta, eps", [(2.0, 1.0, 1.0), (1.0, 3.0, -1.0), (0.5, 2.0, 3.0)])
def test_ac_annihilator_general_parameters(alpha, beta, eps):
    _, cert = hl.ac_annihilator(beta, alpha=alpha, eps=eps, j_max=4, k_max=4)
    assert cert.valid and cert.max_lattice_residual < 1e-6


@given(st.floats(0.1, 3), st.floats(0.1, 3), st.floats(-3, 3).filter(lambda e: abs(e) > 0.05))
def test_threshold_consistency(alpha, beta, eps):
    _, hup = normalize_pair(alpha, beta, eps)
    if hup:
        with pytest.raises(DomainError):
            hl.ac_annihilator(beta, alpha=alpha, eps=eps, check=False)
    else:
        mu, cert = hl.ac_annihilator(beta, alpha=alpha, eps=eps, check=False)
        assert cert.witness_value > 0


def test_certificate_json():
    _, cert = hl.singular_annihilator(1, 1, 2, 2, 3, 3)
    d = cert.as_dict()
    assert d["kind"] == "singular_pair" and d["valid"] is True
    assert d["nontriviality_witness"]["abs"] == pytest.approx(2.0)


# --- density gap ------------------------------------------------------------------

def test_gram_closed_forms_against_quadrature():
    G = hl.gram_matrix(0.5, 2)
    labs = hl.basis_labels(2)
    w = hl.weight

    def basis(lab, x):
        k, n = lab
        return np.exp(1j * math.pi * (n * x if k == "e" else 0.5 * n / x))

    # same-sign cross term and a pure term by brute force with mpmath
    for i, j in [(labs.index(("e", 1)), labs.index(("b", 2))), (labs.index(("e", -1)), labs.index(("e", 2))),
                 (labs.index(("e", 2)), labs.index(("b", -1)))]:
        f = lambda x: complex(basis(labs[i], x) * np.conj(basis(labs[j], x)) * w(x))
        with mpmath.workdps(15):
            ref = mpmath.quad(lambda x: mpmath.mpc(f(float(x))), mpmath.linspace(-200, 200, 4001))
        # tails beyond |x| = 200 carry weight at most 2/(200 pi)
        assert abs(G[i, j] - complex(ref)) < 5e-3


def test_gram_is_hermitian_positive():
    G = hl.gram_matrix(0.7, 3)
    assert np.allclose(G, G.conj().T)
    assert np.linalg.eigvalsh(G)[0] > 0


def test_density_gap_member_of_span():
    for beta in (0.5, 2.0):
        assert hl.density_gap(beta, 2, hl.ExpTarget.e(1)).residual < 1e-8


def test_density_gap_fixture_sequence():
    target = hl.poisson_difference_target(2.0)
    res = [hl.density_gap(0.5, n, target).residual for n in (4, 8, 16)]
    assert res == pytest.approx([0.278644, 0.265562, 0.249392], abs=2e-6)


@given(st.floats(0.3, 1.0))
@settings(max_examples=5)
def test_density_gap_nonincreasing(beta):
    target = hl.poisson_difference_target(2.0)
    res = [hl.density_gap(beta, n, target).residual for n in (1, 2, 3)]
    assert res[0] >= res[1] - 1e-9 >= res[2] - 2e-9


def test_duality_bound_at_beta_two():
    target, K = hl.annihilator_target(2.0)
    bound, err = hl.duality_bound(target, K)
    r = hl.density_gap(2.0, 4, target)
    assert bound > 0.99 and r.residual >= bound - err - r.quadrature_error


def test_density_gap_validation():
    with pytest.raises(ParameterError):
        hl.density_gap(0.5, 0, hl.ExpTarget.e(0))
    with pytest.raises(ParameterError):
        hl.density_gap(0.5, 1, hl.ExpTarget.e(5))


@pytest.mark.parametrize("pts, a, b", [([(1, 0), (1, 1)], [1], []), ([(1, 0), (1, 2)], [], [1]),
                                       ([(1, 0), (2, 5)], [], [1, 2])])
def test_classify_projection_examples(pts, a, b):
    assert hl.classify_projection(pts) == (a, b)


@given(st.lists(st.tuples(st.integers(-4, 4), st.fractions(-5, 5, max_denominator=3)), max_size=12))
def test_classify_projection_partitions(points):
    a, b = hl.classify_projection(points)
    firsts = {Fraction(p[0]) for p in points}
    assert set(map(Fraction, a)) | set(map(Fraction, b)) == firsts
    assert not set(map(Fraction, a)) & set(map(Fraction, b))
