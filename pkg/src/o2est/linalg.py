"""Dense complex linear algebra primitives.

Everything downstream (rotation algebras, Cuntz truncations, unitary paths)
is built from the handful of functions here: operator norms, spectra of
normal matrices, Hermitian functional calculus and the polar partial
isometry.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg as sla

from .errors import DegenerateSpectrumError, InputError, NotInvertibleError, PreconditionError

EQ_TOL = 1e-10
INEQ_SLACK = 1e-9


def as_matrix(m, *, square: bool = False, name: str = "matrix") -> np.ndarray:
    """Return ``m`` as a 2-d complex128 array, rejecting non-finite entries."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.size == 0:
        raise InputError(f"{name} must be a nonempty 2-d array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError(f"{name} has non-finite entries")
    if square and a.shape[0] != a.shape[1]:
        raise InputError(f"{name} must be square, got shape {a.shape}")
    return a


def adjoint(m) -> np.ndarray:
    return np.conj(np.asarray(m)).T


def operator_norm(m) -> float:
    """Largest singular value."""
    a = as_matrix(m)
    return float(np.linalg.norm(a, 2))


def power_norm(
    matvec: Callable[[np.ndarray], np.ndarray],
    rmatvec: Callable[[np.ndarray], np.ndarray],
    dim: int,
    *,
    tol: float = 1e-12,
    maxiter: int = 100_000,
    seed: int = 0,
) -> float:
    """Operator norm of a matrix-free map by power iteration on ``M^* M``.

    The returned value is a Rayleigh-quotient lower bound for the norm.
    """
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    x /= np.linalg.norm(x)
    prev = -1.0
    est = 0.0
    for _ in range(maxiter):
        w = matvec(x)
        est = float(np.linalg.norm(w))
        g = rmatvec(w)
        gn = np.linalg.norm(g)
        if gn == 0.0:
            return 0.0
        x = g / gn
        if abs(est - prev) <= tol * max(est, 1e-300):
            break
        prev = est
    return est


def is_hermitian(m, tol: float = EQ_TOL) -> bool:
    a = np.asarray(m)
    scale = max(1.0, float(np.abs(a).max(initial=0.0)))
    return a.shape[0] == a.shape[1] and float(np.abs(a - adjoint(a)).max(initial=0.0)) <= tol * scale


def is_unitary(m, tol: float = 1e-9) -> bool:
    a = np.asarray(m)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    return float(np.abs(a.conj().T @ a - np.eye(a.shape[0])).max()) <= tol


def is_projection(m, tol: float = EQ_TOL) -> bool:
    a = np.asarray(m)
    if not is_hermitian(a, tol):
        return False
    return float(np.abs(a @ a - a).max(initial=0.0)) <= tol * max(1.0, float(np.abs(a).max(initial=0.0)))


def hermitize(m) -> np.ndarray:
    a = np.asarray(m)
    return 0.5 * (a + adjoint(a))


@dataclass(frozen=True)
class HermitianEigen:
    """Eigen-decomposition ``M = U diag(eigenvalues) U^*`` with ascending eigenvalues."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T

    def apply(self, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        u = self.eigenvectors
        return (u * f(self.eigenvalues)) @ u.conj().T


def hermitian_eigen(m, tol: float = EQ_TOL) -> HermitianEigen:
    a = as_matrix(m, square=True)
    if not is_hermitian(a, tol):
        raise PreconditionError("matrix is not Hermitian")
    w, u = np.linalg.eigh(hermitize(a))
    return HermitianEigen(w, u)


def spectrum_normal(m, tol: float = EQ_TOL) -> np.ndarray:
    """Eigenvalues (with multiplicity) of a normal matrix.

    Uses the complex Schur form, which is diagonal for normal input, so the
    Schur vectors are an orthonormal eigenbasis.  The output is sorted by
    argument and then modulus for reproducibility.
    """
    a = as_matrix(m, square=True)
    scale = max(1.0, operator_norm(a)) ** 2
    comm = operator_norm(a @ adjoint(a) - adjoint(a) @ a)
    if comm > tol * scale:
        raise PreconditionError(f"matrix is not normal (||MM* - M*M|| = {comm:.3e})")
    t, z = sla.schur(a, output="complex")
    lam = np.diag(t).copy()
    resid = np.linalg.norm(a @ z - z * lam, axis=0)
    if resid.size and float(resid.max()) > 1e3 * tol * max(1.0, operator_norm(a)):
        raise PreconditionError("eigen-residual too large for a normal matrix")
    order = np.lexsort((np.round(np.abs(lam), 12), np.round(np.angle(lam), 12)))
    return lam[order]


def _normal_eig(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    t, z = sla.schur(u, output="complex")
    return np.diag(t).copy(), z


def hermitian_function(m, f: str, *, t: float = 1.0, phi: float | None = None, tol: float = EQ_TOL) -> np.ndarray:
    """Apply a scalar function through the spectral theorem.

    ``f`` is one of ``"sqrt"``, ``"inv_sqrt"``, ``"exp_i_t"`` (needs ``t``)
    for Hermitian input, or ``"log_branch"`` (needs ``phi``) for unitary
    input.  ``log_branch`` returns the Hermitian ``h`` with ``exp(i h) = m``
    and spectrum inside the open interval ``(phi - 2 pi, phi)``.
    """
    a = as_matrix(m, square=True)
    if f == "log_branch":
        if phi is None:
            raise InputError("log_branch needs an explicit branch point phi")
        if not is_unitary(a, 1e-9):
            raise PreconditionError("log_branch needs a unitary input")
        lam, z = _normal_eig(a)
        branch = np.exp(1j * phi)
        dist = np.abs(lam - branch)
        k = int(np.argmin(dist))
        if dist[k] <= tol:
            raise DegenerateSpectrumError(
                f"eigenvalue {lam[k]:.12g} sits on the branch point exp(i*{phi:.6g})", complex(lam[k])
            )
        low = phi - 2.0 * np.pi
        ang = low + np.mod(np.angle(lam) - low, 2.0 * np.pi)
        h = (z * ang) @ z.conj().T
        return hermitize(h)

    eig = hermitian_eigen(a, tol)
    w = eig.eigenvalues
    scale = max(1.0, float(np.abs(w).max(initial=0.0)))
    if f == "sqrt":
        if w.size and w[0] < -tol * scale:
            raise PreconditionError(f"sqrt of a matrix with negative eigenvalue {w[0]:.3e}")
        return eig.apply(lambda x: np.sqrt(np.clip(x, 0.0, None)))
    if f == "inv_sqrt":
        if w.size and w[0] <= 0.0:
            raise NotInvertibleError(f"inv_sqrt needs a positive definite matrix (min eigenvalue {w[0]:.3e})")
        return eig.apply(lambda x: 1.0 / np.sqrt(x))
    if f == "exp_i_t":
        return eig.apply(lambda x: np.exp(1j * t * x))
    raise InputError(f"unknown function tag {f!r}")


def unitary_from_hermitian(h, t: float = 1.0) -> np.ndarray:
    return hermitian_function(h, "exp_i_t", t=t)


@dataclass(frozen=True)
class PolarResult:
    v: np.ndarray
    delta: float
    bound: float
    distance: float

    @property
    def holds(self) -> bool:
        return self.distance <= self.bound + INEQ_SLACK and self.bound <= self.delta + INEQ_SLACK


def polar_partial_isometry(x, p, tol: float = EQ_TOL) -> PolarResult:
    """``v = x (x^* x)^{-1/2}`` with the inverse square root taken in ``pAp``.

    Returns ``v`` together with ``delta = ||x^* x - p||``, the bound
    ``1 - (1 - delta)^{1/2}`` and the measured ``||v - x||``.
    """
    x = as_matrix(x, name="x")
    p = as_matrix(p, square=True, name="p")
    if x.shape[1] != p.shape[0]:
        raise InputError("x and p have incompatible shapes")
    if not is_projection(p, 1e-9):
        raise PreconditionError("p is not a projection")
    xn = max(1.0, operator_norm(x))
    if operator_norm(x @ p - x) > tol * xn:
        raise PreconditionError("x p != x")
    xx = hermitize(adjoint(x) @ x)
    delta = operator_norm(xx - p)
    if delta >= 1.0:
        raise NotInvertibleError(f"||x*x - p|| = {delta:.6g} >= 1, x*x not invertible in pAp")
    pw, pu = np.linalg.eigh(hermitize(p))
    q = pu[:, pw > 0.5]
    if q.shape[1] == 0:
        v = np.zeros_like(x)
    else:
        corner = hermitize(adjoint(q) @ xx @ q)
        cw, cu = np.linalg.eigh(corner)
        inv_sqrt = (cu / np.sqrt(cw)) @ adjoint(cu)
        v = x @ q @ inv_sqrt @ adjoint(q)
    bound = 1.0 - np.sqrt(1.0 - delta)
    dist = operator_norm(v - x)
    vv = adjoint(v) @ v
    if operator_norm(vv - p) > 1e-8:
        raise NotInvertibleError("polar part failed to be a partial isometry (ill-conditioned corner)")
    return PolarResult(v=v, delta=float(delta), bound=float(bound), distance=float(dist))


def nearest_unitary(x) -> np.ndarray:
    """Unitary polar factor of an invertible square matrix."""
    a = as_matrix(x, square=True)
    u, _, vh = np.linalg.svd(a)
    return u @ vh


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian matrix."""
    g = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    qm, r = np.linalg.qr(g)
    d = np.diag(r)
    return qm * (d / np.abs(d))


def random_hermitian(n: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    h = hermitize(g)
    return scale * h / max(operator_norm(h), 1e-300)


def random_positive_contraction(n: int, rng: np.random.Generator) -> np.ndarray:
    """Random ``0 <= a <= 1`` built from ``G^* G`` rescaled to norm at most one."""
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    a = hermitize(adjoint(g) @ g)
    return a / (operator_norm(a) * rng.uniform(1.0, 1.5))


def commutator(a, b) -> np.ndarray:
    return a @ b - b @ a
