"""Hot numeric kernels with a numba path and a pure-numpy fallback.

Set ``O2EST_DISABLE_NUMBA=1`` in the environment before import to force the
numpy implementations (useful for debugging and for the benchmark).  When
numba cannot be imported the fallback is used automatically.

Both paths implement exactly the same arithmetic; the test-suite compares
them on random inputs.
"""

from __future__ import annotations

import os

import numpy as np

ENV_FLAG = "O2EST_DISABLE_NUMBA"


def _numba_requested() -> bool:
    return os.environ.get(ENV_FLAG, "").strip().lower() not in {"1", "true", "yes", "on"}


try:  # pragma: no cover - exercised implicitly by whichever path is active
    if not _numba_requested():
        raise ImportError("numba disabled by environment")
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover
    HAS_NUMBA = False

    def njit(*args, **kwargs):  # type: ignore[no-redef]
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(fn):
            return fn

        return wrap


# ---------------------------------------------------------------------------
# alpha*1 + beta*Y + gamma*Z acting on C^q, Y diagonal, Z a cyclic shift
# ---------------------------------------------------------------------------


def _abc_apply_np(x, alpha, beta, gamma, ydiag, shift):
    return alpha * x + beta * (ydiag * x) + gamma * np.roll(x, shift)


def _abc_apply_adj_np(x, alpha, beta, gamma, ydiag, shift):
    return (
        np.conj(alpha) * x
        + np.conj(beta) * (np.conj(ydiag) * x)
        + np.conj(gamma) * np.roll(x, -shift)
    )


def _abc_power_np(alpha, beta, gamma, ydiag, shift, x0, tol, maxiter):
    x = x0 / np.linalg.norm(x0)
    prev = -1.0
    est = 0.0
    it = 0
    for it in range(1, maxiter + 1):
        w = _abc_apply_np(x, alpha, beta, gamma, ydiag, shift)
        est = float(np.sqrt(np.vdot(w, w).real))
        g = _abc_apply_adj_np(w, alpha, beta, gamma, ydiag, shift)
        gn = np.linalg.norm(g)
        if gn == 0.0:
            return 0.0, it
        x = g / gn
        if abs(est - prev) <= tol * max(est, 1e-300):
            break
        prev = est
    return est, it


@njit(cache=True)
def _abc_power_nb(alpha, beta, gamma, ydiag, shift, x0, tol, maxiter):  # pragma: no cover
    q = x0.shape[0]
    shift = shift % q
    # diagonal part of M and of M^*, precomputed
    dm = alpha + beta * ydiag
    dma = np.conj(dm)
    cg = np.conj(gamma)
    x = x0 / np.sqrt(np.sum(np.abs(x0) ** 2))
    w = np.empty(q, dtype=np.complex128)
    g = np.empty(q, dtype=np.complex128)
    prev = -1.0
    est = 0.0
    it = 0
    for it in range(1, maxiter + 1):
        s2 = 0.0
        for i in range(q):
            j = i - shift
            if j < 0:
                j += q
            wi = dm[i] * x[i] + gamma * x[j]
            w[i] = wi
            s2 += wi.real * wi.real + wi.imag * wi.imag
        est = np.sqrt(s2)
        gn = 0.0
        for i in range(q):
            j = i + shift
            if j >= q:
                j -= q
            gi = dma[i] * w[i] + cg * w[j]
            g[i] = gi
            gn += gi.real * gi.real + gi.imag * gi.imag
        gn = np.sqrt(gn)
        if gn == 0.0:
            return 0.0, it
        inv = 1.0 / gn
        for i in range(q):
            x[i] = g[i] * inv
        if abs(est - prev) <= tol * max(est, 1e-300):
            break
        prev = est
    return est, it


def abc_operator_norm(alpha, beta, gamma, ydiag, shift, x0, tol=1e-12, maxiter=100_000):
    """Largest singular value of ``alpha + beta*diag(ydiag) + gamma*roll(., shift)``.

    Power iteration on ``M^* M``; returns ``(estimate, iterations)``.  The
    estimate is a lower bound for the true norm (Rayleigh quotients never
    overshoot).
    """
    ydiag = np.ascontiguousarray(ydiag, dtype=np.complex128)
    x0 = np.ascontiguousarray(x0, dtype=np.complex128)
    args = (complex(alpha), complex(beta), complex(gamma), ydiag, int(shift), x0, float(tol), int(maxiter))
    if HAS_NUMBA:
        est, it = _abc_power_nb(*args)
    else:
        est, it = _abc_power_np(*args)
    return float(est), int(it)


# ---------------------------------------------------------------------------
# pairwise sectional distances: D[i, j] = max_l || A[i, l] - A[j, l] ||
# ---------------------------------------------------------------------------


def _pairwise_np(images):
    t = images.shape[0]
    out = np.zeros((t, t))
    for i in range(t):
        diff = images[i][None, ...] - images[i + 1 :]
        if diff.shape[0] == 0:
            continue
        norms = np.linalg.norm(diff, ord=2, axis=(-2, -1))
        row = norms.max(axis=1)
        out[i, i + 1 :] = row
        out[i + 1 :, i] = row
    return out


@njit(cache=True)
def _pairwise_nb(images):  # pragma: no cover
    t = images.shape[0]
    m = images.shape[1]
    out = np.zeros((t, t))
    for i in range(t):
        for j in range(i + 1, t):
            best = 0.0
            for l in range(m):
                d = images[i, l] - images[j, l]
                s = np.linalg.svd(d)[1]
                if s[0] > best:
                    best = s[0]
            out[i, j] = best
            out[j, i] = best
    return out


def pairwise_sectional(images: np.ndarray) -> np.ndarray:
    """Symmetric matrix of max-over-sections operator-norm distances.

    ``images`` has shape ``(points, sections, N, N)``.
    """
    images = np.ascontiguousarray(images, dtype=np.complex128)
    if images.ndim != 4:
        raise ValueError("images must have shape (points, sections, N, N)")
    if HAS_NUMBA:
        return _pairwise_nb(images)
    return _pairwise_np(images)


# ---------------------------------------------------------------------------
# finite-difference sup of || d/dt U(t) || along a sampled path
# ---------------------------------------------------------------------------


def _fd_sup_np(path, dt):
    diff = (path[1:] - path[:-1]) / dt
    return float(np.linalg.norm(diff, ord=2, axis=(-2, -1)).max()) if diff.shape[0] else 0.0


@njit(cache=True)
def _fd_sup_nb(path, dt):  # pragma: no cover
    best = 0.0
    for i in range(path.shape[0] - 1):
        d = (path[i + 1] - path[i]) / dt
        s = np.linalg.svd(d)[1]
        if s[0] > best:
            best = s[0]
    return best


def finite_difference_sup(path: np.ndarray, dt: float) -> float:
    """Max operator norm of forward differences of a sampled matrix path."""
    path = np.ascontiguousarray(path, dtype=np.complex128)
    if path.shape[0] < 2:
        return 0.0
    if HAS_NUMBA:
        return float(_fd_sup_nb(path, float(dt)))
    return _fd_sup_np(path, float(dt))


def backend() -> str:
    return "numba" if HAS_NUMBA else "numpy"
