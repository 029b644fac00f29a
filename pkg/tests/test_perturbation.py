"""Randomised and hand-built checks of the matrix perturbation estimates."""
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from o2est.errors import ConstructionFailedError, InputError
from o2est.linalg import haar_unitary, random_positive_contraction
from o2est.perturbation import (
    apply_choi,
    cb_perturbation_check,
    corner_split_values,
    corner_splitting_bound,
    greedy_peak_projections,
    kasparov_dilation,
    random_compression_instance,
    random_corner_instance,
    random_polar_instance,
    random_ucp_choi,
    random_unit_pair,
    rotation_pair,
    run_property_suite,
    spectral_conjugation_floor,
    torus_monomials,
    verify_compression,
    verify_polar,
    verify_unit_vector_identity,
)

seeds = st.integers(0, 2**63 - 1)


# compression ----------------------------------------------------------------

def test_compression_unit_case(rng):
    q = np.diag([1.0, 0.0, 1.0])
    r = verify_compression(np.eye(3), np.eye(3), q)
    assert r.measured == pytest.approx(0.0, abs=1e-15) and r.passed


def test_compression_zero_projection(rng):
    a = random_positive_contraction(4, rng)
    r = verify_compression(a, a, np.zeros((4, 4)))
    assert r.measured == 0.0 and r.bound == 0.0 and r.passed


def test_compression_rejects_non_contraction():
    with pytest.raises(InputError):
        verify_compression(2 * np.eye(2), np.eye(2), np.eye(2))


@given(seeds)
def test_compression_random(seed):
    assert verify_compression(*random_compression_instance(np.random.default_rng(seed))).passed


def test_compression_eight_dimensional_sweep():
    for s in range(200):
        g = np.random.default_rng([8, s])
        a, h = random_positive_contraction(8, g), random_positive_contraction(8, g)
        u = haar_unitary(8, g)[:, : int(g.integers(0, 9))]
        assert verify_compression(a, h, u @ u.conj().T).passed


# polar ----------------------------------------------------------------------

@given(seeds)
def test_polar_random(seed):
    assert verify_polar(*random_polar_instance(np.random.default_rng(seed))).passed


# peak projections -----------------------------------------------------------

def test_peak_projection_single():
    a = np.diag([1.0, 0.1, 0.05])
    res = greedy_peak_projections([a], 0.05)
    np.testing.assert_allclose(res.projections[0], np.diag([1.0, 0.0, 0.0]), atol=1e-12)
    assert res.measured == pytest.approx(0.0, abs=1e-12)


def test_peak_projection_orthogonal_pair():
    res = greedy_peak_projections([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])], 0.1)
    np.testing.assert_allclose(res.projections[0], np.diag([1.0, 0.0]), atol=1e-12)
    np.testing.assert_allclose(res.projections[1], np.diag([0.0, 1.0]), atol=1e-12)


def _spread_positive(n, rng):
    u = haar_unitary(n, rng)
    w = np.concatenate([[1.0, 0.99, 0.97, 0.96], rng.uniform(0.0, 0.5, n - 4)])
    return (u * w) @ u.conj().T


def test_peak_projections_random_spread(rng):
    mats = [_spread_positive(12, rng) for _ in range(3)]
    res = greedy_peak_projections(mats, 0.05)
    assert res.measured < 12 * 0.1 ** (1 / 3)
    v = res.vectors
    np.testing.assert_allclose(v.conj().T @ v, np.eye(3), atol=1e-10)


def test_peak_projection_blocked():
    a = np.diag([1.0, 0.0])
    with pytest.raises(ConstructionFailedError) as exc:
        greedy_peak_projections([a, a], 0.1)
    assert exc.value.index == 1


# corner splitting -----------------------------------------------------------

def test_corner_block_diagonal(rng):
    s = np.eye(4)[:, :2]
    u = np.zeros((4, 4), dtype=complex)
    u[:2, :2], u[2:, 2:] = haar_unitary(2, rng), haar_unitary(2, rng)
    lhs, rhs = corner_split_values(u, s, s.conj().T @ u @ s)
    assert lhs == pytest.approx(0.0, abs=1e-12) and rhs == pytest.approx(0.0, abs=1e-7)


def test_corner_square_isometry(rng):
    s, u, v = haar_unitary(5, rng), haar_unitary(5, rng), haar_unitary(5, rng)
    lhs, _ = corner_split_values(u, s, v)
    assert lhs == pytest.approx(0.0, abs=1e-12)


def test_corner_small_offdiagonal(rng):
    eps = 1e-3
    s = np.eye(4)[:, :2]
    v, w = haar_unitary(2, rng), haar_unitary(2, rng)
    g = np.zeros((4, 4))
    g[0, 2] = g[2, 0] = 1.0
    from scipy.linalg import expm

    u = expm(1j * eps * g) @ np.block([[v, np.zeros((2, 2))], [np.zeros((2, 2)), w]])
    r = corner_splitting_bound(u, s, v)
    assert r.passed
    assert r.measured == pytest.approx(2 * math.sin(eps / 2) * 1.0, rel=0.5)
    assert r.bound > r.measured


@given(seeds)
def test_corner_random(seed):
    assert corner_splitting_bound(*random_corner_instance(np.random.default_rng(seed))).passed


# spectral floor -------------------------------------------------------------

def test_spectral_floor_examples():
    u = haar_unitary(3, np.random.default_rng(1))
    assert spectral_conjugation_floor(u, u) == pytest.approx(0.0, abs=1e-12)
    assert spectral_conjugation_floor(np.eye(2), -np.eye(2)) == pytest.approx(2.0)


@pytest.mark.parametrize("alpha", [0.3, 1.0, 2.5])
def test_spectral_floor_rotation(alpha):
    u, v = rotation_pair(alpha)
    u3 = np.eye(3, dtype=complex)
    u3[:2, :2] = u
    u3[2, 2] = np.exp(1j * alpha)  # same size as v, spectrum {e^ia, e^-ia}
    expected = math.sqrt(2) * math.sqrt(1 - math.cos(alpha))
    assert spectral_conjugation_floor(u3, v) == pytest.approx(expected, abs=1e-12)
    assert abs(np.exp(1j * alpha) - 1) == pytest.approx(expected, abs=1e-12)


def test_spectral_floor_never_exceeds_sampled_conjugations(rng):
    for _ in range(5):
        u, v = haar_unitary(4, rng), haar_unitary(4, rng)
        floor = spectral_conjugation_floor(u, v)
        for _ in range(100):
            z = haar_unitary(4, rng)
            assert floor <= np.linalg.norm(z.conj().T @ u @ z - v, 2) + 1e-9


# cb perturbation ------------------------------------------------------------

def test_cb_identity_perturbation(rng):
    a = [np.eye(3), haar_unitary(3, rng), random_positive_contraction(3, rng)]
    res = cb_perturbation_check(a, a, k_max=2, samples=10, restarts=2)
    assert res.bound == pytest.approx(1.0)
    assert res.measured[-1] == pytest.approx(1.0, abs=1e-9)


def test_cb_torus_monomials_constant_is_one():
    res = cb_perturbation_check(torus_monomials(8), torus_monomials(8), k_max=1, samples=5, restarts=3)
    assert res.M == pytest.approx(1.0, abs=1e-4)


def test_cb_small_perturbation(rng):
    a = [np.eye(4), haar_unitary(4, rng), haar_unitary(4, rng)]
    b = [x + 0.01 * (rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))) / 3 for x in a]
    res = cb_perturbation_check(a, b, k_max=3, samples=20, restarts=3)
    assert all(r.passed for r in res.reports)
    assert all(x <= y + 1e-12 for x, y in zip(res.measured, res.measured[1:]))


# dilation -------------------------------------------------------------------

def test_dilation_one_dimensional_source():
    d = kasparov_dilation(np.eye(3), 1, 3)
    np.testing.assert_allclose(d.t, np.eye(3), atol=1e-12)
    assert d.holds


def test_dilation_identity_map():
    n = 3
    e = np.eye(n)
    choi = sum(np.kron(np.outer(e[i], e[j]), np.outer(e[i], e[j])) for i in range(n) for j in range(n))
    d = kasparov_dilation(choi, n, n)
    assert d.holds
    np.testing.assert_allclose(apply_choi(choi, np.diag([1.0, 2.0, 3.0]), n, n), np.diag([1.0, 2.0, 3.0]))


def test_dilation_random(rng):
    choi = random_ucp_choi(3, 4, rng)
    assert kasparov_dilation(choi, 3, 4).holds


def test_dilation_rejects_non_unital(rng):
    with pytest.raises(InputError):
        kasparov_dilation(2 * random_ucp_choi(2, 2, rng), 2, 2)


# unit vectors ---------------------------------------------------------------

def test_unit_vector_examples():
    xi = np.array([1.0, 0.0])
    assert verify_unit_vector_identity(xi, xi).passed
    assert verify_unit_vector_identity(xi, -xi).passed


@given(seeds)
def test_unit_vector_random(seed):
    assert verify_unit_vector_identity(*random_unit_pair(np.random.default_rng(seed))).passed


# suite ----------------------------------------------------------------------

def test_small_suite_is_clean_and_seeded():
    a = run_property_suite(count=20, seed=3, dilations=5)
    b = run_property_suite(count=20, seed=3, dilations=5)
    assert all(s.passed for s in a.values())
    assert {k: v.worst_slack for k, v in a.items()} == {k: v.worst_slack for k, v in b.items()}
