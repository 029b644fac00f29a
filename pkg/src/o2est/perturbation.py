"""Verifiers and constructions for the finite-dimensional perturbation estimates.

Every ``verify_*`` function checks its operands' preconditions, evaluates
both sides of one inequality on the concrete matrices and returns a
:class:`~o2est.report.VerificationReport`.  The ``random_*`` helpers
generate instances that satisfy the preconditions, and
:func:`run_property_suite` sweeps many of them.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import ConstructionFailedError, InputError
from .linalg import (
    INEQ_SLACK,
    adjoint,
    as_matrix,
    haar_unitary,
    hermitize,
    hermitian_function,
    is_hermitian,
    is_projection,
    is_unitary,
    operator_norm,
    polar_partial_isometry,
    random_positive_contraction,
    spectrum_normal,
)
from .report import VerificationReport, make_report

PSD_TOL = 1e-10


@dataclass
class PerturbationInstance:
    dim: int
    operands: dict = field(default_factory=dict)
    seed: int | None = None


# ---------------------------------------------------------------------------
# precondition helpers
# ---------------------------------------------------------------------------


def _require_contraction(name: str, a: np.ndarray) -> None:
    if not is_hermitian(a, PSD_TOL):
        raise InputError(f"{name} is not Hermitian")
    w = np.linalg.eigvalsh(hermitize(a))
    if w[0] < -PSD_TOL or w[-1] > 1 + PSD_TOL:
        raise InputError(f"{name} does not satisfy 0 <= {name} <= 1 (spectrum in [{w[0]:.3e}, {w[-1]:.3e}])")


def _require_projection(name: str, p: np.ndarray) -> None:
    if not is_projection(p, PSD_TOL):
        raise InputError(f"{name} is not a projection")


def _require_isometry(name: str, s: np.ndarray) -> None:
    k = s.shape[1]
    if float(np.abs(adjoint(s) @ s - np.eye(k)).max()) > PSD_TOL:
        raise InputError(f"{name} is not an isometry")


# ---------------------------------------------------------------------------
# compression estimate 12 ||q h a h - q||^(1/3)
# ---------------------------------------------------------------------------


def verify_compression(a, h, q, *, seed: int | None = None) -> VerificationReport:
    """``||q a - q|| <= 12 ||q h a h - q||^(1/3)`` for ``0 <= a, h <= 1`` and a projection ``q``."""
    a, h, q = (as_matrix(x, square=True, name=nm) for x, nm in ((a, "a"), (h, "h"), (q, "q")))
    _require_contraction("a", a)
    _require_contraction("h", h)
    _require_projection("q", q)
    lhs = operator_norm(q @ a - q)
    inner = operator_norm(q @ h @ a @ h - q)
    rhs = 12.0 * inner ** (1.0 / 3.0)
    return make_report("compression", "compressed approximate unit", lhs, rhs, inputs={"dim": a.shape[0], "seed": seed},
                       seed=seed, tol=INEQ_SLACK, details={"inner": inner})


def verify_polar(x, p, *, seed: int | None = None) -> VerificationReport:
    res = polar_partial_isometry(x, p)
    ok = res.holds
    return make_report("polar", "polar partial isometry", res.distance, res.bound, inputs={"dim": res.v.shape, "seed": seed},
                       seed=seed, tol=INEQ_SLACK, status=None if ok else "fail", details={"delta": res.delta})


# ---------------------------------------------------------------------------
# greedy orthogonal peak projections
# ---------------------------------------------------------------------------


@dataclass
class PeakProjections:
    projections: list
    vectors: np.ndarray
    measured: float
    bound: float


def greedy_peak_projections(a_list: Sequence[np.ndarray], delta: float) -> PeakProjections:
    """Mutually orthogonal rank-one ``p_j`` with ``p_j`` under the top of ``a_j``.

    Step ``j`` picks a unit vector in the spectral subspace of ``a_j`` for
    ``[1 - delta, 1]`` that is orthogonal to the vectors already chosen.
    In finite dimensions that intersection can be empty, in which case
    :class:`ConstructionFailedError` reports the blocking index.
    """
    if not a_list:
        return PeakProjections([], np.zeros((0, 0)), 0.0, 12.0 * (2 * delta) ** (1 / 3))
    mats = [as_matrix(a, square=True, name=f"a[{i}]") for i, a in enumerate(a_list)]
    dim = mats[0].shape[0]
    if len(mats) > dim:
        raise InputError("more operators than the dimension")
    if not 0 < delta < 1:
        raise InputError("delta must lie in (0, 1)")
    chosen: list[np.ndarray] = []
    for j, a in enumerate(mats):
        if a.shape != (dim, dim):
            raise InputError("all operators must have the same size")
        if not is_hermitian(a, PSD_TOL):
            raise InputError(f"a[{j}] is not Hermitian")
        w, u = np.linalg.eigh(hermitize(a))
        if w[0] < -PSD_TOL or abs(w[-1] - 1.0) > 1e-9:
            raise InputError(f"a[{j}] must be positive with norm 1")
        sub = u[:, w >= 1.0 - delta]
        if chosen:
            prev = np.column_stack(chosen)
            # coefficients c with prev^* (sub c) = 0
            g = adjoint(prev) @ sub
            _, sv, vh = np.linalg.svd(g)
            rank = int(np.sum(sv > 1e-10))
            null = adjoint(vh)[:, rank:]
            if null.shape[1] == 0:
                raise ConstructionFailedError(
                    f"spectral subspace of a[{j}] lies inside the span of the previous vectors", index=j
                )
            vec = sub @ null[:, 0]
        else:
            vec = sub[:, -1]
        vec = vec / np.linalg.norm(vec)
        chosen.append(vec)
    vecs = np.column_stack(chosen)
    projs = [np.outer(v, v.conj()) for v in chosen]
    measured = max(operator_norm(p @ a - p) for p, a in zip(projs, mats))
    return PeakProjections(projs, vecs, measured, 12.0 * (2 * delta) ** (1 / 3))


# ---------------------------------------------------------------------------
# corner splitting
# ---------------------------------------------------------------------------


def corner_splitting_bound(u, s, v, *, seed: int | None = None) -> VerificationReport:
    """``||u - (e u e + (1-e) u (1-e))|| <= (2 ||s^* u s - v||)^(1/2)`` with ``e = s s^*``."""
    u = as_matrix(u, square=True, name="u")
    s = as_matrix(s, name="s")
    v = as_matrix(v, square=True, name="v")
    if s.shape[0] != u.shape[0] or s.shape[1] != v.shape[0]:
        raise InputError("shapes of u, s, v are incompatible")
    _require_isometry("s", s)
    lhs, rhs = corner_split_values(u, s, v)
    return make_report("corner-split", "corner splitting", lhs, rhs, inputs={"dims": u.shape + v.shape, "seed": seed},
                       seed=seed, tol=INEQ_SLACK)


def corner_split_values(u: np.ndarray, s: np.ndarray, v: np.ndarray) -> tuple[float, float]:
    e = s @ adjoint(s)
    f = np.eye(u.shape[0]) - e
    lhs = operator_norm(u - (e @ u @ e + f @ u @ f))
    rhs = math.sqrt(2.0 * operator_norm(adjoint(s) @ u @ s - v))
    return lhs, rhs


# ---------------------------------------------------------------------------
# spectral lower bound for unitary conjugation distance
# ---------------------------------------------------------------------------


def _one_sided(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.min(np.abs(b[:, None] - a[None, :]), axis=1)))


def spectral_conjugation_floor(u, v) -> float:
    """Lower bound for ``inf_z ||z^* u z - v||`` from eigenvalue distances.

    For normal ``A, B`` every eigenvalue of ``B`` lies within ``||A - B||``
    of the spectrum of ``A`` and vice versa; conjugation by a unitary does
    not move the spectrum.
    """
    su = spectrum_normal(as_matrix(u, square=True, name="U"))
    sv = spectrum_normal(as_matrix(v, square=True, name="V"))
    return max(_one_sided(su, sv), _one_sided(sv, su))


def rotation_pair(alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """``U`` with spectrum ``{e^(ia), e^(-ia)}`` and ``V`` with ``{e^(ia), 1, e^(-ia)}``."""
    c, s = math.cos(alpha), math.sin(alpha)
    u = np.array([[c, -s], [s, c]], dtype=np.complex128)
    v = np.eye(3, dtype=np.complex128)
    v[:2, :2] = u
    return u, v


# ---------------------------------------------------------------------------
# completely bounded perturbation
# ---------------------------------------------------------------------------


def _amplified_norm(x_list: Sequence[np.ndarray], ops: Sequence[np.ndarray]) -> float:
    total = sum(np.kron(x, a) for x, a in zip(x_list, ops))
    return operator_norm(total)


def _coefficient_constant(a_list: Sequence[np.ndarray], restarts: int, rng: np.random.Generator, tol: float) -> tuple[float, list]:
    m = len(a_list)
    per = []
    for l in range(m):
        others = [a_list[j] for j in range(m) if j != l]
        if not others:
            per.append(1.0 / operator_norm(a_list[l]))
            continue

        def obj(x, others=others, base=a_list[l]):
            c = x[: len(others)] + 1j * x[len(others) :]
            return operator_norm(base + sum(ci * oi for ci, oi in zip(c, others)))

        best = obj(np.zeros(2 * len(others)))
        for r in range(restarts):
            x0 = np.zeros(2 * len(others)) if r == 0 else rng.standard_normal(2 * len(others)) * 0.5
            res = minimize(obj, x0, method="Powell", options={"xtol": tol, "ftol": tol, "maxiter": 20_000})
            best = min(best, float(res.fun))
        per.append(1.0 / best)
    return max(per), per


@dataclass
class CbCheck:
    M: float
    per_generator: list
    distance_sum: float
    bound: float
    inverse_bound: float | None
    measured: list
    inverse_measured: list
    reports: list


def _sampled_ratio(num_ops, den_ops, k: int, samples: int, rng: np.random.Generator, polish: int = 20) -> float:
    m = len(num_ops)

    def ratio(xs):
        d = _amplified_norm(xs, den_ops)
        return _amplified_norm(xs, num_ops) / d if d > 0 else 0.0

    best_val = 0.0
    best_xs = None
    for _ in range(samples):
        xs = [rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k)) for _ in range(m)]
        val = ratio(xs)
        if val > best_val:
            best_val, best_xs = val, xs
    if best_xs is not None:
        step = 0.3
        for _ in range(polish):
            cand = [x + step * (rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))) for x in best_xs]
            val = ratio(cand)
            if val > best_val:
                best_val, best_xs = val, cand
            else:
                step *= 0.8
    return best_val


def cb_perturbation_check(
    a_list: Sequence[np.ndarray],
    b_list: Sequence[np.ndarray],
    k_max: int = 3,
    *,
    samples: int = 60,
    restarts: int = 10,
    tol: float = 1e-6,
    seed: int = 0,
) -> CbCheck:
    """Measured amplified norms of ``W: a_l -> b_l`` against ``1 + m M sum ||a_l - b_l||``.

    ``M`` is ``max_l 1 / min ||a_l + sum_{j != l} c_j a_j||`` over complex
    ``c``, minimised with Powell's method from ``restarts`` starting points.
    ``measured[k-1]`` is a sampled lower estimate of ``||id_{M_k} (x) W||``;
    it is carried forward so that it is nondecreasing in ``k`` (padding
    with zeros embeds ``M_{k-1}`` in ``M_k``).
    """
    a_list = [as_matrix(a, square=True, name="a") for a in a_list]
    b_list = [as_matrix(b, square=True, name="b") for b in b_list]
    if len(a_list) != len(b_list) or not a_list:
        raise InputError("a_list and b_list must be nonempty and of equal length")
    flat = np.array([a.ravel() for a in a_list])
    if np.linalg.matrix_rank(flat, tol=1e-10) < len(a_list):
        raise InputError("a_list is linearly dependent")
    rng = np.random.default_rng(seed)
    m = len(a_list)
    big_m, per = _coefficient_constant(a_list, restarts, rng, tol)
    dist_sum = sum(operator_norm(a - b) for a, b in zip(a_list, b_list))
    kappa = m * big_m * dist_sum
    bound = 1.0 + kappa
    inv_bound = 1.0 / (1.0 - kappa) if kappa < 1 else None
    measured, inv_measured, reports = [], [], []
    prev, prev_inv = 0.0, 0.0
    for k in range(1, k_max + 1):
        val = max(prev, _sampled_ratio(b_list, a_list, k, samples, rng))
        measured.append(val)
        prev = val
        reports.append(make_report(f"cb-perturbation/k={k}", "cb perturbation", val, bound,
                                   inputs={"m": m, "k": k, "seed": seed}, seed=seed, tol=1e-6, details={"M": big_m}))
        if inv_bound is not None:
            ival = max(prev_inv, _sampled_ratio(a_list, b_list, k, samples, rng))
            inv_measured.append(ival)
            prev_inv = ival
            reports.append(make_report(f"cb-perturbation-inverse/k={k}", "cb perturbation", ival, inv_bound,
                                       inputs={"m": m, "k": k, "seed": seed}, seed=seed, tol=1e-6, details={"M": big_m}))
    return CbCheck(big_m, per, dist_sum, bound, inv_bound, measured, inv_measured, reports)


def torus_monomials(grid: int) -> list[np.ndarray]:
    """``1, u, u*, v, v*`` for commuting diagonal unitaries sampling the 2-torus."""
    w = np.exp(2j * np.pi * np.arange(grid) / grid)
    uu = np.kron(w, np.ones(grid))
    vv = np.kron(np.ones(grid), w)
    return [np.eye(grid * grid, dtype=np.complex128), np.diag(uu), np.diag(uu.conj()), np.diag(vv), np.diag(vv.conj())]


# ---------------------------------------------------------------------------
# dilation of a ucp map on M_n
# ---------------------------------------------------------------------------


def choi_of_map(images: dict, n: int, k: int) -> np.ndarray:
    """``sum_ij e_ij (x) T(e_ij)`` from the images of matrix units."""
    c = np.zeros((n * k, n * k), dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            c[i * k : (i + 1) * k, j * k : (j + 1) * k] = images[(i, j)]
    return c


def apply_choi(choi: np.ndarray, b: np.ndarray, n: int, k: int) -> np.ndarray:
    """``T(b) = sum_ij b_ij T(e_ij)``."""
    blocks = choi.reshape(n, k, n, k)
    return np.einsum("ij,iajb->ab", b, blocks)


def random_ucp_choi(n: int, k: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random unital CP map ``M_n -> M_k`` as a Choi matrix (Kraus form, then unital normalisation)."""
    rank = max(rank or n * k, -(-k // n))  # enough Kraus operators for T(1) invertible
    kraus = [rng.standard_normal((k, n)) + 1j * rng.standard_normal((k, n)) for _ in range(rank)]
    unit = sum(v @ adjoint(v) for v in kraus)
    fix = hermitian_function(unit, "inv_sqrt")
    kraus = [fix @ v for v in kraus]
    c = np.zeros((n * k, n * k), dtype=np.complex128)
    for v in kraus:
        # |v> with components v[a, i] at position (i, a)
        vec = v.T.reshape(-1)
        c += np.outer(vec, vec.conj())
    return c


@dataclass
class Dilation:
    t: np.ndarray
    basis_error: float
    isometry_error: float

    @property
    def holds(self) -> bool:
        return self.basis_error <= 1e-9 and self.isometry_error <= 1e-9


def kasparov_dilation(choi, n: int, k: int) -> Dilation:
    """``t = sum_ij e_i1 (x) e_j1 (x) a_ji`` where ``a_ij`` are the blocks of ``y^(1/2)``.

    ``y = (id (x) T)(sum e_ij (x) e_ij)`` is the Choi matrix itself.  Then
    ``t^* (b (x) 1 (x) 1) t = e_11 (x) e_11 (x) T(b)`` and, because ``T`` is
    unital, ``t^* t = e_11 (x) e_11 (x) 1``.
    """
    y = as_matrix(choi, square=True, name="choi")
    if y.shape[0] != n * k:
        raise InputError("Choi matrix has the wrong size")
    if not is_hermitian(y, 1e-10):
        raise InputError("Choi matrix is not Hermitian")
    w = np.linalg.eigvalsh(hermitize(y))
    if w[0] < -1e-9:
        raise InputError(f"Choi matrix is not positive (min eigenvalue {w[0]:.3e})")
    unit = apply_choi(y, np.eye(n), n, k)
    if float(np.abs(unit - np.eye(k)).max()) > 1e-9:
        raise InputError("map is not unital")
    root = hermitian_function(y, "sqrt", tol=1e-9)
    blocks = root.reshape(n, k, n, k)
    t = np.zeros((n * n * k, n * n * k), dtype=np.complex128)
    e = np.eye(n)
    for i in range(n):
        for j in range(n):
            ei1 = np.outer(e[:, i], e[:, 0])
            ej1 = np.outer(e[:, j], e[:, 0])
            t += np.kron(np.kron(ei1, ej1), blocks[j, :, i, :])
    e11 = np.outer(e[:, 0], e[:, 0])
    head = np.kron(e11, e11)
    basis_err = 0.0
    for p in range(n):
        for q in range(n):
            b = np.outer(e[:, p], e[:, q])
            lhs = adjoint(t) @ np.kron(np.kron(b, np.eye(n)), np.eye(k)) @ t
            rhs = np.kron(head, apply_choi(y, b, n, k))
            basis_err = max(basis_err, float(np.abs(lhs - rhs).max()))
    iso_err = float(np.abs(adjoint(t) @ t - np.kron(head, np.eye(k))).max())
    return Dilation(t, basis_err, iso_err)


# ---------------------------------------------------------------------------
# unit-vector identity
# ---------------------------------------------------------------------------


def verify_unit_vector_identity(xi, eta, *, seed: int | None = None) -> VerificationReport:
    """``Re <xi, eta> = 1 - ||xi - eta||^2 / 2`` for unit vectors."""
    xi = np.asarray(xi, dtype=np.complex128).ravel()
    eta = np.asarray(eta, dtype=np.complex128).ravel()
    if xi.shape != eta.shape:
        raise InputError("vectors must have the same length")
    if abs(np.linalg.norm(xi) - 1) > 1e-10 or abs(np.linalg.norm(eta) - 1) > 1e-10:
        raise InputError("inputs must be unit vectors")
    lhs = float(np.vdot(xi, eta).real)
    rhs = 1.0 - 0.5 * float(np.linalg.norm(xi - eta)) ** 2
    return make_report("unit-vector-identity", "inner product expansion", abs(lhs - rhs), 1e-12,
                       inputs={"dim": xi.size, "seed": seed}, seed=seed, tol=0.0)


# ---------------------------------------------------------------------------
# random instances
# ---------------------------------------------------------------------------


def random_projection(n: int, rank: int, rng: np.random.Generator) -> np.ndarray:
    u = haar_unitary(n, rng)[:, :rank]
    return u @ adjoint(u)


def random_polar_instance(rng: np.random.Generator, max_dim: int = 16) -> tuple[np.ndarray, np.ndarray]:
    n = int(rng.integers(1, max_dim + 1))
    r = int(rng.integers(1, n + 1))
    basis = haar_unitary(n, rng)
    p = basis[:, :r] @ adjoint(basis[:, :r])
    w = haar_unitary(n, rng)
    while True:
        eps = rng.uniform(0.0, 0.45)
        g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        x = (w + eps * g / operator_norm(g)) @ p
        if operator_norm(adjoint(x) @ x - p) < 0.999:
            return x, p


def random_compression_instance(rng: np.random.Generator, max_dim: int = 16):
    n = int(rng.integers(1, max_dim + 1))
    kind = int(rng.integers(0, 3))
    q = random_projection(n, int(rng.integers(0, n + 1)), rng)
    if kind == 0:
        a, h = random_positive_contraction(n, rng), random_positive_contraction(n, rng)
    else:
        # near-unit operators make both sides small
        eps = 10.0 ** rng.uniform(-6, -1)
        ga, gh = random_positive_contraction(n, rng), random_positive_contraction(n, rng)
        a = np.eye(n) - eps * ga
        h = np.eye(n) - (eps if kind == 1 else rng.uniform(0, 1)) * gh
    return hermitize(a), hermitize(h), hermitize(q)


def random_corner_instance(rng: np.random.Generator, max_dim: int = 16):
    n = int(rng.integers(1, max_dim + 1))
    k = int(rng.integers(1, n + 1))
    s = haar_unitary(n, rng)[:, :k]
    if rng.uniform() < 0.5:
        u = haar_unitary(n, rng)
        v = haar_unitary(k, rng)
    else:
        # nearly block-diagonal u with a small off-diagonal rotation
        full = haar_unitary(n, rng)
        e = s @ adjoint(s)
        base = e @ full @ e + (np.eye(n) - e) @ full @ (np.eye(n) - e)
        blockw = np.linalg.svd(base)
        u0 = blockw[0] @ blockw[2]
        g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        kick = hermitian_function(hermitize(g) / operator_norm(g), "exp_i_t", t=10.0 ** rng.uniform(-4, -1))
        u = kick @ u0
        svd = np.linalg.svd(adjoint(s) @ u @ s)
        v = svd[0] @ svd[2]
    return u, s, v


def random_unit_pair(rng: np.random.Generator, max_dim: int = 16):
    n = int(rng.integers(1, max_dim + 1))
    a = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    if rng.uniform() < 0.3:
        b = a + 10.0 ** rng.uniform(-8, 0) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    else:
        b = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return a / np.linalg.norm(a), b / np.linalg.norm(b)


@dataclass
class SuiteSummary:
    name: str
    instances: int
    violations: int
    worst_slack: float
    first_violation_seed: int | None = None

    @property
    def passed(self) -> bool:
        return self.violations == 0


def _summarise(name: str, reports: list[VerificationReport], seeds: list[int]) -> SuiteSummary:
    bad = [s for r, s in zip(reports, seeds) if r.failed]
    worst = min((r.slack for r in reports), default=float("inf"))
    return SuiteSummary(name, len(reports), len(bad), float(worst), bad[0] if bad else None)


def run_property_suite(count: int = 1000, seed: int = 0, max_dim: int = 16, dilations: int = 100) -> dict[str, SuiteSummary]:
    """Random sweeps over the four matrix inequalities plus the dilation identity.

    Each instance draws from its own generator ``default_rng([seed, check, i])``.
    """
    out: dict[str, SuiteSummary] = {}
    suites = {
        "polar": lambda rng, s: verify_polar(*random_polar_instance(rng, max_dim), seed=s),
        "compression": lambda rng, s: verify_compression(*random_compression_instance(rng, max_dim), seed=s),
        "corner-split": lambda rng, s: corner_splitting_bound(*random_corner_instance(rng, max_dim), seed=s),
        "unit-vector-identity": lambda rng, s: verify_unit_vector_identity(*random_unit_pair(rng, max_dim), seed=s),
    }
    for idx, (name, fn) in enumerate(suites.items()):
        reports, seeds = [], []
        for i in range(count):
            rng = np.random.default_rng([seed, idx, i])
            reports.append(fn(rng, i))
            seeds.append(i)
        out[name] = _summarise(name, reports, seeds)
    bad, worst = [], 0.0
    for i in range(dilations):
        rng = np.random.default_rng([seed, 99, i])
        n, k = int(rng.integers(1, 7)), int(rng.integers(1, 7))
        d = kasparov_dilation(random_ucp_choi(n, k, rng, rank=int(rng.integers(1, n * k + 1))), n, k)
        err = max(d.basis_error, d.isometry_error)
        worst = max(worst, err)
        if not d.holds:
            bad.append(i)
    out["dilation"] = SuiteSummary("dilation", dilations, len(bad), 1e-9 - worst, bad[0] if bad else None)
    return out
