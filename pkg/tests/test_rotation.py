"""Clock/shift representations, the tent vector chain, twisted norms and ucp checks."""
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from o2est.errors import InputError, OutOfRangeError, ResourceError
from o2est.rotation import (
    CoefficientTriple,
    WeylPair,
    clock_shift_rep,
    measure_test_vector,
    multiplier_choi,
    multiplier_coefficients,
    multiplier_map_on_basis,
    rho0_ledger_bound,
    rho0_upper_search,
    t_theta_norm,
    t_theta_trivial,
    tent_norm_sq,
    test_vector,
    test_vector_certificate,
    twisted_norm,
    ucp_choi_check,
    universal_norm_floor,
)


@pytest.mark.parametrize("n, m, q, theta", [(1, 1, 9, Fraction(1, 9)), (2, 1, 25, Fraction(1, 25)), (6, 1, 169, Fraction(1, 169))])
def test_rep_parameters(n, m, q, theta):
    rep = clock_shift_rep(n, m)
    assert rep.q == q and rep.theta == theta
    y, z = rep.y(), rep.z()
    np.testing.assert_allclose(y @ z, rep.zeta ** (m * m) * z @ y, atol=1e-12)


def test_order_thirteen_periodicity():
    rep = clock_shift_rep(6, 1)
    pair = rep.pair
    y13 = pair.y_monomial().power(13)
    z13 = pair.z_monomial().power(13)
    # y^13 and z^13 commute although y and z do not
    assert pair.powers_commute(13) and not pair.powers_commute(1)
    assert (y13 @ z13).equals(z13 @ y13)


def test_dim_cap_enforced():
    with pytest.raises(ResourceError):
        clock_shift_rep(50, 1)
    with pytest.raises(InputError):
        clock_shift_rep(0, 1)


@given(st.integers(1, 12), st.integers(1, 9))
def test_relation_exact_for_all_reps(n, m):
    rep = clock_shift_rep(n, m)
    assert rep.pair.relation_holds_exactly()
    assert rep.pair.relation_defect() <= 1e-12


def test_twisted_norm_trivial_rep():
    assert twisted_norm(CoefficientTriple(1 / 3, 1 / 3, 1 / 3), None) == pytest.approx(1.0)


def test_twisted_norm_two_by_two():
    assert twisted_norm(CoefficientTriple(0, 1, 1), WeylPair(2, 1)) == pytest.approx(math.sqrt(2), abs=1e-12)


def test_twisted_norm_barycentre_range():
    rep = clock_shift_rep(2, 1)
    v = twisted_norm(CoefficientTriple(1 / 3, 1 / 3, 1 / 3), rep)
    assert math.sqrt(1 - 25 * (1 / 25) / 2) - 1e-12 <= v <= 1 + 1e-12


def test_twisted_norm_needs_unimodular_scalars():
    with pytest.raises(InputError):
        twisted_norm(CoefficientTriple(1, 0, 0), WeylPair(3, 1), lam=2.0)


def test_power_iteration_matches_dense():
    # q = 625 exceeds the dense threshold, so this goes through the matrix-free kernel
    rep = clock_shift_rep(12, 1)
    c = CoefficientTriple(0.2, 0.5, 0.3)
    est = twisted_norm(c, rep, np.exp(0.3j), np.exp(-0.1j))
    q = rep.q
    mat = np.diag(0.2 + 0.5 * np.exp(0.3j) * rep.ydiag) + 0.3 * np.exp(-0.1j) * np.roll(np.eye(q), rep.shift, axis=0)
    assert est == pytest.approx(np.linalg.norm(mat, 2), rel=1e-9)


def test_universal_floor_trivial_case():
    c = CoefficientTriple(0.2, 0.3, 0.5)
    assert universal_norm_floor(c, 8) == pytest.approx(1.0)


def test_universal_floor_unit_alpha():
    assert universal_norm_floor(CoefficientTriple(1, 0, 0), 8, clock_shift_rep(1, 1)) == pytest.approx(1.0)


def test_universal_floor_lower_bound():
    rep = clock_shift_rep(2, 1)
    v = universal_norm_floor(CoefficientTriple(1 / 3, 1 / 3, 1 / 3), 32, rep)
    assert v >= math.sqrt(1 - 12.5 / 25) - 1e-9


def test_tent_vector_small_cases():
    m = measure_test_vector(clock_shift_rep(1, 1))
    assert m.d_y0 == pytest.approx(0.0, abs=1e-12)
    assert m.d_z0 == pytest.approx(math.sqrt(2), abs=1e-12)
    assert tent_norm_sq(2) == Fraction(3, 2)
    assert test_vector(2).norm_sq == Fraction(3, 2)


@given(st.integers(1, 80))
def test_tent_norm_closed_form(n):
    assert tent_norm_sq(n) == 1 + Fraction((n - 1) * (2 * n - 1), 3 * n)
    assert tent_norm_sq(n) >= Fraction(2, 3) * n


def test_threshold_for_simplified_constant():
    ok = [n for n in range(1, 200) if 2 * math.sqrt(3) * (1 + 1 / (2 * n)) <= 3.5]
    assert ok[0] == 49


@pytest.mark.parametrize("n, m", [(1, 1), (2, 1), (6, 1), (3, 2), (12, 1)])
def test_certificate_never_fails(n, m):
    reps = test_vector_certificate(n, m)
    assert not [r.claim_id for r in reps if r.status == "fail"]
    must_pass = {"tent/y0-displacement", "tent/z0-displacement", "tent/relation-exact", "tent/norm-sq-lower"}
    assert all(r.status == "pass" for r in reps if r.claim_id in must_pass)


def test_t_theta_trivial_limit():
    r = t_theta_trivial()
    assert r.measured == pytest.approx(1.0) and r.bound == pytest.approx(1.0)


def test_t_theta_one_over_25():
    r = t_theta_norm(2, 1, simplex_points=16)
    assert r.bound == pytest.approx(math.sqrt(2))
    assert r.holds and r.measured >= 1.0


def test_t_theta_out_of_range():
    with pytest.raises(OutOfRangeError):
        t_theta_norm(1, 1)


def _identity_map(pair):
    return {(j, k): pair.monomial_dense(j, k) for j in range(pair.q) for k in range(pair.q)}


def test_identity_map_is_ucp():
    pair = WeylPair(3, 1)
    res = ucp_choi_check(_identity_map(pair), pair, 3)
    assert res.ucp and res.min_eigenvalue == pytest.approx(0.0, abs=1e-12)


def test_transpose_is_not_cp():
    pair = WeylPair(2, 1)
    images = {(j, k): pair.monomial_dense(j, k).T for j in range(2) for k in range(2)}
    res = ucp_choi_check(images, pair, 2)
    assert not res.ucp
    assert res.min_eigenvalue == pytest.approx(-1.0, abs=1e-12)


def test_depolarising_map_is_ucp():
    pair = WeylPair(3, 1)
    images = {(j, k): (np.trace(pair.monomial_dense(j, k)) / 3) * np.eye(3) for j in range(3) for k in range(3)}
    assert ucp_choi_check(images, pair, 3).ucp


def test_structured_choi_matches_dense():
    # the block decomposition must agree with the dense Choi spectrum
    src, tgt = WeylPair(9, 1), WeylPair(9, 2)
    for r in (1.0, 0.6, 0.2):
        phi = multiplier_coefficients("gaussian", r, src, tgt)
        dense = ucp_choi_check(multiplier_map_on_basis(phi, src, tgt), src, 9)
        block = multiplier_choi(phi, src, tgt)
        assert dense.ucp == block.ucp
        assert block.min_eigenvalue == pytest.approx(dense.min_eigenvalue, abs=1e-9)


def test_rho0_same_rep_is_zero():
    rep = clock_shift_rep(2, 1)
    assert rho0_upper_search(rep, rep).value == pytest.approx(0.0, abs=1e-12)


def test_rho0_integer_shift_is_zero():
    # m = 5 on q = 25 gives theta = 1: the commutative algebra, same as itself
    rep = clock_shift_rep(2, 5)
    assert rho0_upper_search(rep, rep).value == pytest.approx(0.0, abs=1e-12)


def test_rho0_monotone_in_budget():
    a, b = clock_shift_rep(2, 1), clock_shift_rep(2, 2)
    values = [rho0_upper_search(a, b, budget=k).value for k in (1, 3, 6, 12)]
    assert all(x >= y for x, y in zip(values, values[1:]))
    assert math.isfinite(values[-1])


def test_rho0_result_is_ucp_and_reported_against_ledger():
    a, b = clock_shift_rep(6, 1), clock_shift_rep(6, 3)
    res = rho0_upper_search(a, b, budget=10)
    assert math.isfinite(res.value) and res.min_eigenvalue >= -1e-9
    assert rho0_ledger_bound(a.theta, b.theta) == Fraction(25, 4) * Fraction(8, 169)
