"""The compiled kernels agree with the numpy fallback."""
import os
import subprocess
import sys

import numpy as np
import pytest

from o2est import _accel
from o2est.linalg import haar_unitary


def test_pairwise_matches_fallback(rng):
    imgs = np.stack([np.stack([haar_unitary(4, rng) for _ in range(3)]) for _ in range(7)])
    np.testing.assert_allclose(_accel.pairwise_sectional(imgs), _accel._pairwise_np(imgs), atol=1e-12)


def test_finite_difference_matches_fallback(rng):
    path = np.stack([haar_unitary(5, rng) for _ in range(9)])
    assert _accel.finite_difference_sup(path, 0.125) == pytest.approx(_accel._fd_sup_np(path, 0.125), abs=1e-12)
    assert _accel.finite_difference_sup(path[:1], 0.1) == 0.0


def test_abc_norm_matches_dense(rng):
    q = 49
    ydiag = np.exp(2j * np.pi * np.arange(q) / q)
    x0 = rng.standard_normal(q) + 0j
    est, _ = _accel.abc_operator_norm(0.3, 0.5, 0.2, ydiag, 1, x0)
    dense = np.diag(0.3 + 0.5 * ydiag) + 0.2 * np.roll(np.eye(q), 1, axis=0)
    assert est == pytest.approx(np.linalg.norm(dense, 2), rel=1e-10)
    assert _accel._abc_power_np(0.3, 0.5, 0.2, ydiag, 1, x0, 1e-12, 100000)[0] == pytest.approx(est, rel=1e-10)


def test_pairwise_rejects_bad_rank():
    with pytest.raises(ValueError):
        _accel.pairwise_sectional(np.zeros((2, 2, 2)))


def test_env_flag_selects_numpy():
    env = dict(os.environ, O2EST_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", "from o2est import _accel; print(_accel.backend())"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
