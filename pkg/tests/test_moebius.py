import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from kghup import moebius as mb
from kghup.errors import DomainError, ParameterError

upper = st.builds(complex, st.floats(-20, 20), st.floats(1e-3, 20))
words = st.text(alphabet="AaBb", max_size=12)
betas = st.floats(0.05, 1.0)


def test_generator_examples():
    A, B = mb.generators(1.0)
    assert mb.apply(A, 1j) == 2 + 1j
    assert abs(mb.apply(B, 1j) - (-2 + 1j) / 5) < 1e-15
    for beta in (0.3, 1.0, 3.0):
        _, B = mb.generators(beta)
        assert abs(B(1e-9j)) < 1e-8
    with pytest.raises(ParameterError):
        mb.generators(0.0)


def test_apply_rejects_lower_half_plane():
    with pytest.raises(DomainError):
        mb.apply(mb.MoebiusMap.identity(), -1j)


@given(upper)
def test_identity_and_inverse(z):
    A, _ = mb.generators(0.7)
    assert mb.MoebiusMap.identity()(z) == z
    assert abs((A.inverse() @ A)(z) - z) < 1e-14 * max(1, abs(z))


@given(words, words, words, upper)
def test_associativity(w1, w2, w3, z):
    m1, m2, m3 = (mb.word_map(w, 0.8) for w in (w1, w2, w3))
    lhs, rhs = ((m1 @ m2) @ m3).matrix, (m1 @ (m2 @ m3)).matrix
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12 * max(1, np.abs(lhs).max()))


@given(words, upper, betas)
def test_upper_half_plane_preserved(w, z, beta):
    out = mb.word_map(w, beta)(z)
    assert out.imag > 0


def test_word_order_is_application_order():
    A, B = mb.generators(0.5)
    z = 0.1 + 0.3j
    assert abs(mb.word_map("AB", 0.5)(z) - B(A(z))) < 1e-15


def test_fundamental_domain_examples():
    assert mb.in_fundamental_domain(1j, 1.0)
    for beta in (0.2, 0.7, 1.0):
        assert not mb.in_fundamental_domain(2 + 1j, beta)
        assert not mb.in_fundamental_domain(beta / 2 + 0.01j, beta)


def test_reduce_examples():
    z0 = 0.3 + 1.2j
    r = mb.reduce_to_domain(z0, 0.5)
    assert r.word == "" and r.z == z0
    r = mb.reduce_to_domain(z0 + 2, 0.5)
    assert r.word == "a" and abs(r.z - z0) < 1e-15


@given(upper, st.floats(0.1, 1.0))
def test_reduction_round_trip(z, beta):
    r = mb.reduce_to_domain(z, beta)
    assert r.reduced
    back = mb.word_map(r.word, beta).inverse()(r.z)
    assert abs(back - z) < 1e-10 * max(1.0, abs(z))
    assert abs(mb.word_map(r.word, beta)(z) - r.z) < 1e-10 * max(1.0, abs(r.z))


def test_reduction_budget_flag():
    z = math.sqrt(2) - 1 + 1e-12j
    r = mb.reduce_to_domain(z, 1.0, max_steps=2)
    assert not r.reduced and r.cusp_proximity
    assert mb.reduce_to_domain(z, 1.0).reduced


@pytest.mark.parametrize("beta, pq", [(2.0, (1, 2)), (4 / 3, (1, 3))])
def test_classifier_examples(beta, pq):
    v = mb.discreteness_classify(beta)
    assert v.status is mb.Status.discrete_pq and (v.p, v.q) == pq


def test_classifier_non_discrete_against_exhaustive_search():
    qs = np.arange(2, 10_001)
    for p in (1, 2):
        vals = 1 / np.cos(p * np.pi / (2 * qs)) ** 2
        ok = (np.gcd(p, qs) == 1) & (qs > p)
        assert not np.any(ok & (np.abs(vals - 1.5) < 1e-12 * (1 + 1.5 ** 2)))
    assert mb.discreteness_classify(1.5, q_max=10_000).status is mb.Status.non_discrete


@given(st.floats(1e-6, 1.0))
def test_classifier_small_beta_free(beta):
    assert mb.discreteness_classify(beta).status is mb.Status.discrete_free


def test_classifier_exact_on_constructed_inputs():
    for p in (1, 2):
        for q in range(p + 1, 51):
            if math.gcd(p, q) != 1:
                continue
            v = mb.discreteness_classify(1 / math.cos(p * math.pi / (2 * q)) ** 2)
            assert (v.status, v.p, v.q) == (mb.Status.discrete_pq, p, q)


def test_verdict_json_shape():
    d = mb.discreteness_classify(2.0).as_dict()
    assert set(d) == {"beta", "status", "p", "q", "q_max"} and d["status"] == "discrete_pq"


def test_cusps():
    assert mb.cusps(0.5) == [math.inf, 0.0]
    assert mb.cusps(0.99) == [math.inf, 0.0]
    assert sorted(mb.cusps(1.0)) == [-1.0, 0.0, 1.0, math.inf]
    with pytest.raises(ParameterError):
        mb.cusps(2.0)


@pytest.mark.parametrize("args, expected", [((1, 1, 1), (1.0, True)), ((2, 1, 1), (2.0, False)),
                                            ((2, 1, 0.25), (0.5, True)), ((1, 1.0001, 1), (1.0001, False)),
                                            ((1, 1, -1), (1.0, True))])
def test_normalize_pair(args, expected):
    b, v = mb.normalize_pair(*args)
    assert v == expected[1] and b == pytest.approx(expected[0])


def test_normalize_pair_rejects_cross():
    with pytest.raises(ParameterError):
        mb.normalize_pair(1, 1, 0)


@pytest.mark.parametrize("beta", [0.5, 1.0])
def test_tiling_overlap_probe(beta):
    assert mb.tiling_overlap_probe(beta, max_len=4, samples=100) == 0
