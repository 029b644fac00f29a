"""Truncated Fock model and the rearranging unitary built from two isometries."""
import math

import numpy as np
import pytest

from o2est.cuntz import (
    Carrier,
    depth_regression,
    engineered_instance,
    fock_carrier,
    fock_dim,
    full_carrier,
    internal_chain,
    rearranger,
    truncated_cuntz,
)
from o2est.errors import InputError, ResourceError
from o2est.linalg import haar_unitary


@pytest.mark.parametrize("d, depth, dim", [(2, 1, 3), (2, 3, 15), (3, 1, 4), (2, 5, 63)])
def test_fock_dimensions(d, depth, dim):
    assert fock_dim(d, depth) == dim
    assert truncated_cuntz(d, depth).dim == dim


def test_depth_one_relations():
    f = truncated_cuntz(2, 1)
    s1 = f.S[0]
    g = s1.T @ s1
    assert np.linalg.matrix_rank(g) == 1
    np.testing.assert_allclose(g, f.layer_projection(0), atol=0)


def test_range_projection_rank():
    f = truncated_cuntz(2, 3)
    total = sum(s @ s.T for s in f.S)
    assert np.linalg.matrix_rank(total) == 14
    np.testing.assert_allclose(total, np.eye(15) - f.layer_projection(0), atol=0)


def test_isometry_defect_confined_to_top_layer():
    f = truncated_cuntz(2, 4)
    for i, si in enumerate(f.S):
        for j, sj in enumerate(f.S):
            expected = (np.eye(f.dim) - f.layer_projection(4)) if i == j else 0
            np.testing.assert_allclose(si.T @ sj, expected, atol=0)


def test_prefix_projection_and_index():
    f = truncated_cuntz(2, 3)
    p = f.prefix_projection([0])
    assert int(round(np.trace(p))) == 1 + 2 + 4
    assert f.words[f.index((1, 0))] == (1, 0)


def test_dim_cap():
    with pytest.raises(ResourceError):
        truncated_cuntz(2, 12, dim_cap=1000)
    with pytest.raises(InputError):
        fock_carrier(2)


def test_collapsed_unitary_case(rng):
    # square isometries collapse the projection families: z = 1 (x) t*
    s, t, u = haar_unitary(3, rng), haar_unitary(3, rng), haar_unitary(3, rng)
    res = rearranger(full_carrier(s, t), u, u, truncated_cuntz(2, 2))
    z = res.z()
    np.testing.assert_allclose(z, np.kron(np.eye(res.o2.dim), t.conj().T), atol=1e-12)
    assert res.achieved == pytest.approx(np.linalg.norm(t.conj().T @ u @ t - u, 2), abs=1e-12)
    assert res.holds
    p = res.parts
    np.testing.assert_allclose(p.p[2], np.eye(3), atol=1e-12)
    np.testing.assert_allclose(p.q[3], np.eye(3), atol=1e-12)


def test_collapsed_chain_intermediates_vanish(rng):
    s, t = haar_unitary(3, rng), haar_unitary(3, rng)
    u = np.eye(3, dtype=complex)
    res = rearranger(full_carrier(s, t), u, u, truncated_cuntz(2, 2))
    reports = internal_chain(res, u, u)
    assert all(r.measured == pytest.approx(0.0, abs=1e-12) for r in reports)
    assert all(r.passed for r in reports)


@pytest.mark.parametrize("same", [False, True])
def test_identity_case_on_truncated_shifts(same):
    c = fock_carrier(4)
    carrier = Carrier(c.s, c.s if same else c.t, c.interior, c.region)
    one = np.eye(c.dim)
    res = rearranger(carrier, one, one, truncated_cuntz(2, 3))
    assert res.delta == pytest.approx(0.0, abs=1e-12)
    assert res.achieved <= res.budget.accumulated + 1e-12


def test_engineered_four_percent_instance():
    inst = engineered_instance(0.04, seed=1)
    assert inst.delta == pytest.approx(0.04, rel=1e-5)
    res = rearranger(inst.carrier, inst.u, inst.v, truncated_cuntz(2, 4))
    assert res.achieved <= 11 * 0.2 + res.budget.accumulated + 1e-9
    assert res.budget.accumulated < 1e-9
    assert [step for step, _ in res.budget.trace][-1] == "z unitarity on interior"


def test_engineered_cascade_nine_percent():
    inst = engineered_instance(0.09, seed=2)
    res = rearranger(inst.carrier, inst.u, inst.v, truncated_cuntz(2, 3))
    reports = {r.claim_id: r for r in internal_chain(res, inst.u, inst.v, seed=2)}
    for cid in ("split-e1", "split-e2", "split-f1", "split-f2", "split-f3", "aggregate"):
        assert reports[f"rearranger/{cid}"].passed, cid
    assert reports["rearranger/split-f3"].bound == pytest.approx(math.sqrt(6 * inst.delta), abs=1e-9)


def test_aggregate_constant_below_eleven():
    assert 3 * math.sqrt(2) + 4 + math.sqrt(6) <= 11


def test_achieved_nondecreasing_in_depth():
    inst = engineered_instance(0.1, seed=4)
    reg = depth_regression(inst.carrier, inst.u, inst.v, depths=(3, 4))
    assert reg.excess[1] >= reg.excess[0] - 1e-12
    assert all(b < 1e-9 for b in reg.budgets)


def test_engineered_rejects_bad_delta():
    with pytest.raises(InputError):
        engineered_instance(1.5)
