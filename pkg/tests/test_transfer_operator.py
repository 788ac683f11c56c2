import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from kghup import transfer_operator as tro
from kghup.errors import DomainError, ParameterError

FIXTURES = json.loads((Path(__file__).parent / "fixtures" / "spectra.json").read_text())


def test_apply_transfer_zero_and_constant():
    t = np.linspace(-0.9, 0.9, 11)
    assert np.all(tro.apply_transfer(lambda y: 0.0 * y, t) == 0.0)
    # sum over j != 0 of 1/(2j)^2 = pi^2/12
    assert tro.apply_transfer(lambda y: np.ones_like(y), 0.0) == pytest.approx(math.pi ** 2 / 12, abs=1e-13)


def test_apply_transfer_eigenfunction_callable():
    t = np.linspace(-0.9, 0.9, 401)
    out = tro.apply_transfer(lambda y: 1 / (1 - y * y), t)
    assert np.max(np.abs(out * (1 - t * t) - 1)) < 1e-12


def test_apply_transfer_tail_is_high_order():
    g = lambda y: np.cos(3 * y) + y
    t = np.array([-0.5, 0.2, 0.8])
    ref = tro.apply_transfer(g, t, J=4096)
    err = [np.max(np.abs(tro.apply_transfer(g, t, J=J) - ref)) for J in (16, 32)]
    assert err[1] < err[0] / 16


def test_apply_transfer_samples_must_cover_images():
    grid = np.linspace(-0.5, 0.5, 100)
    with pytest.raises(DomainError):
        tro.apply_transfer(np.ones(100), 0.9, grid=grid)


def test_linear_interpolation_default_grid():
    n = 4096
    mids = -1 + (2 * np.arange(n) + 1) / n
    out = tro.apply_transfer(np.cos(mids), 0.1)
    ref = tro.apply_transfer(np.cos, 0.1)
    assert abs(out - ref) < 1e-6


def test_ulam_n2_against_closed_form():
    """Cell ]0,1] maps into ]-1,0] on the union of ]1/(2j+1), 1/(2j)], j >= 1,
    of total length sum 1/(2j(2j+1)) = 1 - log 2."""
    M = tro.ulam_matrix(1.0, 2).entries
    c = 1 - math.log(2)
    assert np.allclose(M, [[1 - c, c], [c, 1 - c]], atol=1e-12)


def test_ulam_row_sums_and_support():
    M = tro.ulam_matrix(1.0, 256)
    assert np.allclose(M.row_sums, 1.0, atol=1e-12)
    M = tro.ulam_matrix(0.5, 64)
    mids = -1 + (2 * np.arange(64) + 1) / 64
    outside = np.abs(mids) > 0.5
    assert not M.entries[outside].any()
    assert np.allclose(M.row_sums[~outside], 1.0, atol=1e-12)


def test_ulam_entries_against_monte_carlo():
    """Oracle: proportion of sampled points of cell i landing in cell k."""
    N, beta = 16, 0.7
    M = tro.ulam_matrix(beta, N).entries
    rng = np.random.default_rng(2)
    i = 9
    a = -1 + 2 * i / N
    x = a + (2 / N) * rng.random(200_000)
    y = -beta / x
    y = y - 2 * np.round(y / 2)
    y[y <= -1] += 2
    y = np.where(np.abs(x) <= beta, y, np.nan)
    k = np.clip(np.ceil((y + 1) * N / 2).astype(int) - 1, 0, N - 1)
    est = np.bincount(k, minlength=N) / x.size
    assert np.max(np.abs(est - M[i])) < 5e-3


def test_push_masses_is_transpose_action():
    M = tro.ulam_matrix(0.8, 32)
    m = np.random.default_rng(0).random(32)
    assert np.allclose(M.push_masses(m), M.entries.T @ m)
    Z = M.with_zero_atom()
    assert Z.shape == (33, 33) and Z[32, 32] == 1.0


def test_entries_read_only():
    M = tro.ulam_matrix(1.0, 8)
    with pytest.raises(ValueError):
        M.entries[0, 0] = 1.0


def test_spectrum_beta_one_power_iteration_oracle():
    M = tro.ulam_matrix(1.0, 1024)
    rep = tro.spectrum(M)
    v = np.ones(1024)
    for _ in range(500):
        w = M.entries.T @ v
        lam = w.sum() / v.sum()
        v = w / w.sum()
    assert abs(rep.spectral_radius - 1.0) < 1e-2
    assert abs(rep.spectral_radius - lam) < 1e-10


@pytest.mark.parametrize("beta", [0.3, 0.5, 0.7, 0.9])
def test_spectrum_regression_fixtures(beta):
    rep = tro.spectrum(tro.ulam_matrix(beta, 1024))
    fx = FIXTURES[repr(beta)]
    assert rep.spectral_radius < 1 and rep.peripheral_gap > 0
    assert rep.spectral_radius == pytest.approx(fx["spectral_radius"], abs=1e-9)


def test_spectrum_zero_matrix():
    rep = tro.spectrum(np.zeros((5, 5)))
    assert np.all(rep.eigenvalues == 0) and rep.spectral_radius == 0


def test_spectrum_sparse_path_matches_dense():
    M = tro.ulam_matrix(0.6, 300).entries
    dense = tro.spectrum(M)
    sparse = tro.spectrum(M, k=6, solver="arpack")
    assert sparse.solver != "dense"
    assert sparse.spectral_radius == pytest.approx(dense.spectral_radius, rel=1e-8)


@given(st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_factorization_identity(n, seed):
    M = np.random.default_rng(seed).normal(size=(n, n))
    assert tro.factorization_check(M) <= 1e-12 * max(np.linalg.norm(M) ** 2, 1.0)


def test_factorization_trivial_cases():
    assert tro.factorization_check(np.zeros((4, 4))) == 0
    assert tro.factorization_check(np.eye(4)) == 0


def test_composed_matrix_row_sums():
    B = tro.composed_ulam_matrix(1.0, 128)
    assert np.allclose(B.row_sums, 1.0, atol=1e-8)


def test_composed_matrix_against_sampled_construction():
    """Independent oracle: Ulam matrix of U o U by sampling."""
    exact = tro.composed_ulam_matrix(0.5, 32).entries
    sampled = tro.sampled_composed_ulam_matrix(0.5, 32, samples_per_cell=20_000,
                                               rng=np.random.default_rng(1)).entries
    assert np.max(np.abs(exact - sampled).sum(axis=1)) < 0.05


def test_composition_smooth_action_converges():
    vals = [tro.composition_consistency(1.0, n, norm="smooth") for n in (128, 256, 512)]
    assert vals[0] > vals[1] > vals[2]


def test_composition_coarse_grid_is_finite():
    assert math.isfinite(tro.composition_consistency(0.5, 2))


def test_invalid_parameters():
    with pytest.raises(ParameterError):
        tro.ulam_matrix(1.5, 16)
    with pytest.raises(ParameterError):
        tro.apply_transfer(np.cos, 0.0, J=0)
