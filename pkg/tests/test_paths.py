"""Sectional distances, unitary paths, gluing, subdivision and refinement."""
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from o2est.errors import InputError, OracleError, PreconditionError
from o2est.linalg import haar_unitary, is_unitary
from o2est.paths import (
    PATH_TARGETS,
    FiberFamily,
    Rep,
    UnitarySection,
    block_ends,
    commutator_controlled_path,
    doubling_path,
    doubling_target,
    glue_over_interval,
    holder_schedule_constant,
    lip_certificate,
    log_path,
    modulus_constant,
    nominal_certificate,
    refine_to_modulus,
    sectional_distance,
    subdivide_embeddings,
    subdivision_eps,
)
from o2est.synthetic import make_glue_pair, make_synthetic


def _rep(t, images):
    return Rep(t, np.asarray(images, dtype=complex))


# sectional distance ---------------------------------------------------------

def test_distance_to_self_is_zero(rng):
    r = _rep(0.0, np.stack([[haar_unitary(3, rng)]]))
    assert sectional_distance(r, r) == 0.0


def test_distance_single_point_sign_flip():
    a = _rep(0.0, np.eye(2)[None, None])
    b = _rep(0.0, -np.eye(2)[None, None])
    assert sectional_distance(a, b) == pytest.approx(2.0)


def test_distance_matches_brute_force(rng):
    phis = [_rep(0.0, np.stack([[haar_unitary(4, rng) for _ in range(2)] for _ in range(10)]))]
    psis = [_rep(0.0, np.stack([[haar_unitary(4, rng) for _ in range(2)] for _ in range(10)]))]
    brute = max(np.linalg.norm(phis[0].images[x, l] - psis[0].images[x, l], 2) for x in range(10) for l in range(2))
    assert sectional_distance(phis, psis) == pytest.approx(brute, abs=1e-12)


def test_distance_grid_mismatch():
    a = _rep(0.0, np.eye(2)[None, None])
    with pytest.raises(InputError):
        sectional_distance([a], [a, a])
    with pytest.raises(InputError):
        sectional_distance(a, _rep(0.0, np.eye(3)[None, None]))


# paths ----------------------------------------------------------------------

def test_constant_path_for_identity():
    u, rep = commutator_controlled_path(np.eye(3), t_samples=9)
    np.testing.assert_allclose(u, np.broadcast_to(np.eye(3), u.shape), atol=1e-12)
    assert rep.derivative_sup == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("phi", [-3.0, -1.0, 0.5, 3.1])
def test_scalar_log_path_speed(phi):
    v = np.exp(1j * phi) * np.eye(2)
    _, rep = commutator_controlled_path(v, t_samples=65)
    assert rep.derivative_sup <= abs(phi) + 1e-9
    assert rep.derivative_sup <= math.pi
    assert rep.target_met["derivative"]


def test_log_path_with_gap_meets_derivative_target(rng):
    w = np.exp(1j * rng.uniform(-2.5, 2.5, 5))
    q = haar_unitary(5, rng)
    v = (q * w) @ q.conj().T
    probes = [haar_unitary(5, rng) for _ in range(3)]
    u, rep = commutator_controlled_path(v, "log", t_samples=33, probes=probes)
    assert rep.derivative_sup <= PATH_TARGETS["derivative"]
    assert max(rep.endpoint_errors) < 1e-9
    assert all(is_unitary(x) for x in u[:, 0])
    # commutator ratios are recorded as measurements
    assert set(rep.target_met) == set(PATH_TARGETS)


def test_doubling_path_endpoints(rng):
    v = haar_unitary(3, rng)
    ts = np.linspace(0, 1, 17)
    p = doubling_path(v, ts)
    np.testing.assert_allclose(p[0], np.eye(9), atol=1e-12)
    np.testing.assert_allclose(p[-1], doubling_target(v), atol=1e-12)
    _, rep = commutator_controlled_path(v, "doubling", t_samples=17, probes=[haar_unitary(3, rng)])
    assert rep.construction == "doubling" and rep.commutator_ratio <= 2 + 1e-9


@given(st.integers(0, 2**31))
def test_log_path_hits_endpoint(seed):
    v = haar_unitary(4, np.random.default_rng(seed))
    p = log_path(v, np.array([0.0, 1.0]))
    assert np.abs(p[-1] - v).max() < 1e-9


def test_unknown_construction():
    with pytest.raises(InputError):
        commutator_controlled_path(np.eye(2), "spline")


# gluing ---------------------------------------------------------------------

def test_glue_identical_families():
    fam = make_synthetic(3, 1, 1.0, 0.5, 0.0, 1)
    alpha = lambda t: Rep(t, fam.canonical(t))  # noqa: E731
    ones = lambda t: np.stack([np.eye(3)] * fam.nx)  # noqa: E731
    g = glue_over_interval(alpha, alpha, 0.3, ones, t_samples=9)
    assert g.measured == pytest.approx(0.0, abs=1e-12)
    assert g.holds


def test_glue_recovers_fixed_conjugation(rng):
    fam = make_synthetic(3, 2, 1.0, 0.5, 0.0, 2)
    w = np.stack([haar_unitary(3, rng) for _ in range(fam.nx)])
    alpha = lambda t: Rep(t, fam.canonical(t))  # noqa: E731
    beta = lambda t: alpha(t).conjugate(w)  # noqa: E731
    g = glue_over_interval(alpha, beta, 0.05, lambda t: w, t_samples=9)
    for k in range(g.w.points.size):
        np.testing.assert_allclose(g.w.values[k], w, atol=1e-9)
    assert g.measured < 1e-9


def test_glue_rotating_family():
    pair = make_glue_pair(4, 2, 0.2, 5, constant=0.5, rotation_speed=1.0)
    g = glue_over_interval(pair.alpha, pair.beta, 0.2, pair.oracle, t_samples=17)
    assert g.measured < 2.0
    assert g.neighbour_max < 0.2 / 21


def test_glue_endpoints_respect_supplied_sections(rng):
    fam = make_synthetic(3, 1, 1.0, 0.2, 0.0, 3)
    w = np.stack([haar_unitary(3, rng) for _ in range(fam.nx)])
    alpha = lambda t: Rep(t, fam.canonical(t))  # noqa: E731
    beta = lambda t: alpha(t).conjugate(w)  # noqa: E731
    c0 = w * np.exp(0.01j)
    g = glue_over_interval(alpha, beta, 0.1, lambda t: w, c0=c0, c1=w, t_samples=5)
    np.testing.assert_array_equal(g.w.at(0.0), c0)
    np.testing.assert_array_equal(g.w.at(1.0), w)


def test_glue_rejects_bad_oracle():
    fam = make_synthetic(3, 1, 1.0, 0.2, 0.0, 3)
    alpha = lambda t: Rep(t, fam.canonical(t))  # noqa: E731
    beta = lambda t: Rep(t, -fam.canonical(t))  # noqa: E731
    with pytest.raises(OracleError):
        glue_over_interval(alpha, beta, 0.1, lambda t: np.stack([np.eye(3)] * fam.nx), t_samples=5)


# subdivision ----------------------------------------------------------------

@pytest.mark.parametrize("n, n_prime", [(8, 4), (9, 4), (6, 6), (5, 2)])
def test_block_ends(n, n_prime):
    ends = block_ends(n, n_prime)
    assert ends[0] == 0 and ends[-1] == n
    widths = np.diff(ends)
    assert all(n_prime <= w < 2 * n_prime for w in widths)


def test_eps_uses_gap_when_rho_vanishes():
    assert subdivision_eps(0.0, 0.0, 1.0, 4) == pytest.approx(0.5 / 9)


def _aligned_endpoints(fam, t1=1.0):
    p0, p1 = fam.embed(0.0), fam.embed(t1)
    z, _ = fam.equivalence(p0, p1)
    return p0, p1.conjugate(z)


def test_subdivision_constant_family():
    fam = make_synthetic(3, 2, 1.0, 0.0, 0.0, 4)
    p0, p1 = _aligned_endpoints(fam)
    sub = subdivide_embeddings(p0, p1, fam, 4, 2, d0=0.1)
    assert max(sub.step_distances) == pytest.approx(0.0, abs=1e-9)
    assert sub.step_bound == pytest.approx(90 / 2 * 0.1)
    assert sub.holds


def test_subdivision_lipschitz_family():
    fam = make_synthetic(4, 2, 1.0, 1.0, 1e-6, 6)
    p0, p1 = _aligned_endpoints(fam)
    sub = subdivide_embeddings(p0, p1, fam, 8, 4, d0=1.1 * fam.rho(1.0))
    assert sub.holds
    assert sub.gammas[0] is p0 and sub.gammas[-1] is p1
    assert len(sub.gammas) == 9


def test_subdivision_preconditions():
    fam = make_synthetic(3, 1, 1.0, 1.0, 0.0, 7)
    p0, p1 = _aligned_endpoints(fam)
    with pytest.raises(PreconditionError):
        subdivide_embeddings(p0, p1, fam, 4, 2, d0=0.5 * fam.rho(1.0))


# refinement and certificates ------------------------------------------------

def test_lip_certificate_cases():
    a = _rep(0.0, np.eye(2)[None, None])
    b = _rep(1.0, -np.eye(2)[None, None])
    assert lip_certificate([a, b], 1.0) == pytest.approx(2.0)
    assert lip_certificate([a, _rep(0.5, np.eye(2)[None, None])], 0.5) == 0.0


def test_refine_constant_field():
    fam = make_synthetic(3, 1, 1.0, 0.0, 0.0, 8)
    ref = refine_to_modulus(fam.family(), 1.0, depth=3)
    assert ref.certificate == 0.0
    assert lip_certificate(ref.reps, 0.5) == pytest.approx(0.0, abs=1e-9)


def test_refine_half_exponent_family():
    fam = make_synthetic(3, 2, 0.5, 1.0, 1e-9, 9)
    ref = refine_to_modulus(fam.family(), 1.0, depth=3, schedule="lipschitz-half")
    assert len(ref.reps) == 2**3 + 1
    np.testing.assert_allclose(ref.grid, np.linspace(0, 1, 9))
    c = lip_certificate(ref.reps, 0.5)
    assert c <= ref.certificate
    assert c <= ref.desk_certificate
    assert ref.certificate <= 30000 * 11 * ref.details["c1"] / 11


def test_holder_schedule_certificate():
    fam = make_synthetic(3, 1, 0.25, 1.0, 1e-9, 10)
    ref = refine_to_modulus(fam.family(), 0.5, depth=2, schedule="holder")
    assert lip_certificate(ref.reps, 0.25) <= ref.certificate
    assert ref.certificate == pytest.approx(holder_schedule_constant(0.5) * ref.details["c1"] / 11)


def test_nominal_certificate_values():
    assert nominal_certificate(1.0, 11.0, "lipschitz-half") == pytest.approx(29440 * 11)
    assert nominal_certificate(1.0, 11.0, "lipschitz-half") <= 330000
    with pytest.raises(InputError):
        nominal_certificate(0.5, 1.0, "lipschitz-half")


def test_modulus_constant():
    assert modulus_constant(lambda r: 3 * r, 1.0) == pytest.approx(3.0)


def test_family_contract_checks(rng):
    class Bad:
        def rho(self, r):
            return 1.0

    with pytest.raises(InputError):
        FiberFamily(np.linspace(0, 1, 3), Bad())
    with pytest.raises(InputError):
        FiberFamily(np.array([0.0, 0.0]), make_synthetic(2, 1, 1, 1, 0, 0))
    with pytest.raises(InputError):
        UnitarySection(np.array([0.0]), np.ones((1, 1, 2, 2)))
