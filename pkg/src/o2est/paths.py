"""Unitary paths, gluing, subdivision and refinement over grid-sampled fiber families.

A *representation* here is a :class:`Rep`: for one parameter value ``t``
it stores the images of the ``m`` generators at every base point ``x``,
as an array of shape ``(nx, m, N, N)``.  Algorithms talk to the family
only through an :class:`Oracle`, which embeds fibers and answers
approximate-equivalence queries with a claimed error.  Everything that
the continuous statements assert is measured on the sampled objects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

import numpy as np
from scipy.linalg import schur

from . import _accel
from .errors import ConstructionFailedError, InputError, OracleError, PreconditionError
from .linalg import adjoint, is_unitary, operator_norm

PATH_TARGETS = {"derivative": 9.0, "commutator": 4.0, "commutator_derivative": 9.0, "conjugation_derivative": 45.0}
DEFAULT_T_SAMPLES = 33
UNITARY_TOL = 1e-9


# ---------------------------------------------------------------------------
# data types
# ---------------------------------------------------------------------------


@dataclass
class Rep:
    """Generator images ``images[x, l]`` of one fiber.

    ``frame`` is optional bookkeeping for ground-truth oracles: a
    unitary per base point that is updated by :meth:`conjugate`.
    """

    t: float
    images: np.ndarray
    frame: np.ndarray | None = None

    def __post_init__(self):
        self.images = np.asarray(self.images, dtype=np.complex128)
        if self.images.ndim != 4 or self.images.shape[-1] != self.images.shape[-2]:
            raise InputError("images must have shape (nx, m, N, N)")

    @property
    def nx(self) -> int:
        return self.images.shape[0]

    @property
    def sections(self) -> int:
        return self.images.shape[1]

    @property
    def dim(self) -> int:
        return self.images.shape[-1]

    def conjugate(self, w: np.ndarray) -> "Rep":
        """``w rep w^*`` pointwise in ``x``."""
        w = np.asarray(w, dtype=np.complex128)
        if w.shape != (self.nx, self.dim, self.dim):
            raise InputError("unitary section has the wrong shape")
        imgs = np.einsum("xab,xlbc,xdc->xlad", w, self.images, w.conj())
        frame = None if self.frame is None else np.einsum("xab,xbc->xac", w, self.frame)
        return Rep(self.t, imgs, frame)


class Oracle(Protocol):
    """Fiber access used by the path algorithms."""

    def rho(self, r: float) -> float: ...

    def embed(self, t: float) -> Rep: ...

    def equivalence(self, a: Rep, b: Rep, eps: float) -> tuple[np.ndarray, float]:
        """``z`` with ``d_S(z b z^*, a) <= claimed < rho(|t_a - t_b|) + eps``."""
        ...


@dataclass
class FiberFamily:
    grid: np.ndarray
    oracle: Oracle

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        if np.any(np.diff(self.grid) <= 0):
            raise InputError("grid must be strictly increasing")
        probe = np.linspace(0.0, 1.0, 65)
        vals = np.array([self.oracle.rho(r) for r in probe])
        if vals[0] != 0 or np.any(np.diff(vals) < -1e-15):
            raise InputError("rho must vanish at 0 and be nondecreasing")

    def rho(self, r: float) -> float:
        return self.oracle.rho(r)

    def fiber_at(self, t: float) -> Rep:
        rep = self.oracle.embed(t)
        if not all(is_unitary(u, UNITARY_TOL) for u in rep.images.reshape(-1, rep.dim, rep.dim)):
            raise InputError(f"generator images at t={t} are not unitary")
        return rep


@dataclass
class UnitarySection:
    """Unitaries ``values[k, x]`` at parameter points ``points[k]``."""

    points: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.ndim != 4 or self.values.shape[0] != self.points.size:
            raise InputError("values must have shape (points, nx, N, N)")
        for u in self.values.reshape(-1, *self.values.shape[-2:]):
            if not is_unitary(u, 1e-8):
                raise InputError("section value is not unitary")

    def at(self, t: float) -> np.ndarray:
        k = int(np.argmin(np.abs(self.points - t)))
        if abs(self.points[k] - t) > 1e-12:
            raise InputError(f"no section value at t={t}")
        return self.values[k]


@dataclass
class PathReport:
    derivative_sup: float
    commutator_ratio: float
    commutator_derivative_ratio: float
    conjugation_derivative_ratio: float
    endpoint_errors: tuple
    construction: str
    target_met: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("derivative_sup", "commutator_ratio", "commutator_derivative_ratio", "conjugation_derivative_ratio"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        self.target_met = {
            "derivative": self.derivative_sup <= PATH_TARGETS["derivative"],
            "commutator": self.commutator_ratio <= PATH_TARGETS["commutator"],
            "commutator_derivative": self.commutator_derivative_ratio <= PATH_TARGETS["commutator_derivative"],
            "conjugation_derivative": self.conjugation_derivative_ratio <= PATH_TARGETS["conjugation_derivative"],
        }


# ---------------------------------------------------------------------------
# sectional distance
# ---------------------------------------------------------------------------


def sectional_distance(phi: Rep | Sequence[Rep], psi: Rep | Sequence[Rep]) -> float:
    """``sup_x max_l ||phi_x(l) - psi_x(l)||`` over a common grid."""
    phis = [phi] if isinstance(phi, Rep) else list(phi)
    psis = [psi] if isinstance(psi, Rep) else list(psi)
    if len(phis) != len(psis):
        raise InputError("grid mismatch: different numbers of points")
    best = 0.0
    for a, b in zip(phis, psis):
        if a.images.shape != b.images.shape:
            raise InputError("grid mismatch: image arrays differ in shape")
        if abs(a.t - b.t) > 1e-12 and len(phis) > 1:
            raise InputError("grid mismatch: parameter values differ")
        d = a.images - b.images
        best = max(best, float(np.linalg.norm(d.reshape(-1, a.dim, a.dim), ord=2, axis=(-2, -1)).max()))
    return best


# ---------------------------------------------------------------------------
# commutator-controlled paths
# ---------------------------------------------------------------------------


def _min_norm_log(v: np.ndarray) -> np.ndarray:
    """Hermitian ``h`` with ``exp(ih) = v`` and the smallest possible ``||h||``.

    The branch cut is placed in the widest spectral gap and the lifted
    angles are shifted by a multiple of ``2 pi`` to be centred at 0.
    """
    t, q = schur(v, output="complex")
    w = np.diag(t)
    ang = np.sort(np.angle(w))
    gaps = np.diff(np.concatenate([ang, [ang[0] + 2 * np.pi]]))
    k = int(np.argmax(gaps))
    # angles after the gap come first, lifted into one window of length < 2 pi
    start = ang[(k + 1) % ang.size]
    raw = np.angle(w)
    lifted = start + np.mod(raw - start, 2 * np.pi)
    lo, hi = lifted.min(), lifted.max()
    shift = 2 * np.pi * np.round(-(lo + hi) / (4 * np.pi))
    lifted = lifted + shift
    return (q * lifted) @ adjoint(q)


def _probe_ratio(num: float, den: float) -> float:
    if den > 1e-12:
        return num / den
    return 0.0 if num <= 1e-9 else math.inf


def _measure_path(path: np.ndarray, ts: np.ndarray, v_target: np.ndarray, v_probe: np.ndarray,
                  probes: Sequence[np.ndarray], amplify: int) -> tuple:
    """Finite-difference constants of a sampled path ``path[k]`` at ``ts[k]``."""
    dt = np.diff(ts)
    if not np.allclose(dt, dt[0]):
        raise InputError("time samples must be uniform")
    h = float(dt[0])
    dsup = _accel.finite_difference_sup(path, h)
    one = np.eye(path.shape[-1])
    ends = (operator_norm(path[0] - one), operator_norm(path[-1] - v_target))
    comm = cder = conj = 0.0
    deriv = (path[1:] - path[:-1]) / h
    for a in probes:
        aa = np.kron(np.eye(amplify), a) if amplify > 1 else a
        base = operator_norm(v_probe @ a - a @ v_probe)
        c_path = max(operator_norm(u @ aa - aa @ u) for u in path)
        c_der = max(operator_norm(d @ aa - aa @ d) for d in deriv)
        conjp = np.einsum("kab,bc,kdc->kad", path, aa, path.conj())
        c_conj = float(np.linalg.norm((conjp[1:] - conjp[:-1]) / h, ord=2, axis=(-2, -1)).max())
        comm = max(comm, _probe_ratio(c_path, base))
        cder = max(cder, _probe_ratio(c_der, base))
        conj = max(conj, _probe_ratio(c_conj, base))
    return dsup, comm, cder, conj, ends


def log_path(v: np.ndarray, ts: np.ndarray) -> np.ndarray:
    """``exp(i t h)`` with ``h`` the minimal-norm logarithm of ``v``."""
    h = _min_norm_log(v)
    w, q = np.linalg.eigh(0.5 * (h + adjoint(h)))
    return np.stack([(q * np.exp(1j * t * w)) @ adjoint(q) for t in ts])


def doubling_path(v: np.ndarray, ts: np.ndarray, h3: np.ndarray | None = None) -> np.ndarray:
    """``exp(ith) z exp(-ith) z^*`` in ``M_3(M_N)`` with ``z = diag(v^*, 1, v)``.

    With the default ``h = (pi/2)(1 - swap_12) (x) 1`` the endpoint is
    ``diag(v, v^*, 1)``.  ``h`` commutes with amplified probes ``1 (x) a``,
    so commutators are at most twice those of ``v``.
    """
    n = v.shape[0]
    if h3 is None:
        swap = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1]], dtype=float)
        h3 = 0.5 * np.pi * (np.eye(3) - swap)
    w3, q3 = np.linalg.eigh(h3)
    z = np.zeros((3 * n, 3 * n), dtype=np.complex128)
    z[:n, :n] = adjoint(v)
    z[n : 2 * n, n : 2 * n] = np.eye(n)
    z[2 * n :, 2 * n :] = v
    out = []
    for t in ts:
        e3 = (q3 * np.exp(1j * t * w3)) @ adjoint(q3)
        e = np.kron(e3, np.eye(n))
        out.append(e @ z @ adjoint(e) @ adjoint(z))
    return np.stack(out)


def doubling_target(v: np.ndarray) -> np.ndarray:
    n = v.shape[0]
    out = np.zeros((3 * n, 3 * n), dtype=np.complex128)
    out[:n, :n] = v
    out[n : 2 * n, n : 2 * n] = adjoint(v)
    out[2 * n :, 2 * n :] = np.eye(n)
    return out


def commutator_controlled_path(
    v,
    construction: str = "log",
    t_samples: int = DEFAULT_T_SAMPLES,
    probes: Sequence[np.ndarray] = (),
) -> tuple[np.ndarray, PathReport]:
    """Unitary path from ``1`` to ``v(x)`` at every base point, with measured constants.

    ``v`` is an array ``(nx, N, N)`` (or a single ``(N, N)`` unitary).
    Returns ``(u, report)`` with ``u[k, x]`` the path at ``ts[k]``.  For the
    doubling construction the path lives in ``M_{3N}`` and ends at
    ``diag(v, v^*, 1)``; probes are amplified to ``1 (x) a``.
    """
    v = np.asarray(v, dtype=np.complex128)
    if v.ndim == 2:
        v = v[None]
    for vx in v:
        if not is_unitary(vx, UNITARY_TOL):
            raise InputError("v must be unitary-valued")
    if t_samples < 2:
        raise InputError("need at least two time samples")
    ts = np.linspace(0.0, 1.0, t_samples)
    paths, dsup, comm, cder, conj = [], 0.0, 0.0, 0.0, 0.0
    e0 = e1 = 0.0
    for vx in v:
        if construction == "log":
            p = log_path(vx, ts)
            target, amp = vx, 1
        elif construction == "doubling":
            p = doubling_path(vx, ts)
            target, amp = doubling_target(vx), 3
        else:
            raise InputError(f"unknown construction {construction!r}")
        if operator_norm(p[-1] - target) > 1e-8 or operator_norm(p[0] - np.eye(p.shape[-1])) > 1e-8:
            raise ConstructionFailedError(f"{construction} path misses its endpoints")
        d, c, cd, cj, ends = _measure_path(p, ts, target, vx, probes, amp)
        dsup, comm, cder, conj = max(dsup, d), max(comm, c), max(cder, cd), max(conj, cj)
        e0, e1 = max(e0, ends[0]), max(e1, ends[1])
        paths.append(p)
    u = np.stack(paths, axis=1)
    return u, PathReport(dsup, comm, cder, conj, (e0, e1), construction)


# ---------------------------------------------------------------------------
# gluing over an interval
# ---------------------------------------------------------------------------


@dataclass
class GlueResult:
    w: UnitarySection
    partition: np.ndarray
    measured: float
    bound: float
    neighbour_max: float
    path_reports: list

    @property
    def holds(self) -> bool:
        return self.measured < self.bound


def _partition(alpha, beta, r: float, ts: np.ndarray, max_depth: int = 16, checks: int = 5) -> np.ndarray:
    """Bisect ``[0, 1]`` until neighbouring distances are measured below ``r/21``."""
    cache: dict = {}

    def rep(f, t):
        key = (id(f), t)
        if key not in cache:
            cache[key] = f(t)
        return cache[key]

    def fine(a, b):
        inner = np.concatenate([np.linspace(a, b, checks), ts[(ts > a) & (ts < b)]])
        for f in (alpha, beta):
            right = rep(f, b)
            if max(sectional_distance(rep(f, float(t)), right) for t in inner) >= r / 21:
                return False
        return True

    out = [0.0]

    def split(a, b, depth):
        if fine(a, b):
            out.append(b)
            return
        if depth >= max_depth:
            raise PreconditionError(f"could not reach the r/21 fineness near t={a:.6g}")
        m = 0.5 * (a + b)
        split(a, m, depth + 1)
        split(m, b, depth + 1)

    split(0.0, 1.0, 0)
    return np.array(out)


def glue_over_interval(
    alpha: Callable[[float], Rep],
    beta: Callable[[float], Rep],
    r: float,
    oracle: Callable[[float], np.ndarray],
    c0: np.ndarray | None = None,
    c1: np.ndarray | None = None,
    t_samples: int = DEFAULT_T_SAMPLES,
) -> GlueResult:
    """Unitary ``w`` on ``X x [0, 1]`` with ``d_S(w alpha w^*, beta) < 10 r`` (measured).

    ``oracle(t)`` returns a section ``z`` with ``d_S(z alpha_t z^*, beta_t) < r``.
    Between partition points ``w = z_{j-1} u`` with ``u`` the log path from
    ``1`` to ``z_{j-1}^* z_j``.  The output is sampled at ``t_samples``
    uniform points together with the partition points.
    """
    if r <= 0:
        raise InputError("r must be positive")
    ts = np.linspace(0.0, 1.0, t_samples)
    part = _partition(alpha, beta, r, ts)
    zs = []
    for j, t in enumerate(part):
        if j == 0 and c0 is not None:
            z = np.asarray(c0, dtype=np.complex128)
        elif j == part.size - 1 and c1 is not None:
            z = np.asarray(c1, dtype=np.complex128)
        else:
            try:
                z = np.asarray(oracle(float(t)), dtype=np.complex128)
            except Exception as exc:  # propagate with location
                raise OracleError(f"oracle failed at t={t}: {exc}", location=float(t)) from exc
        d = sectional_distance(alpha(float(t)).conjugate(z), beta(float(t)))
        if d >= r:
            raise OracleError(f"oracle answer at t={t} has distance {d:.3g} >= r", location=float(t))
        zs.append(z)
    neighbour = 0.0
    for a, b in zip(part[:-1], part[1:]):
        neighbour = max(neighbour, sectional_distance(alpha(float(a)), alpha(float(b))),
                        sectional_distance(beta(float(a)), beta(float(b))))
    points = np.union1d(ts, part)
    values = np.zeros((points.size,) + zs[0].shape, dtype=np.complex128)
    reports = []
    measured = 0.0
    for j in range(1, part.size):
        a, b = part[j - 1], part[j]
        mask = (points >= a) & (points <= b)
        local = (points[mask] - a) / (b - a)
        step = np.einsum("xba,xbc->xac", zs[j - 1].conj(), zs[j])
        probes = [img for img in alpha(float(a)).images.reshape(-1, step.shape[-1], step.shape[-1])]
        seg = np.stack([log_path(sx, local) for sx in step], axis=1)
        _, rep = commutator_controlled_path(step, "log", t_samples=5, probes=probes[:4])
        reports.append(rep)
        values[mask] = np.einsum("xab,kxbc->kxac", zs[j - 1], seg)
        idx = np.flatnonzero(mask)
        values[idx[0]] = zs[j - 1]
        values[idx[-1]] = zs[j]
    for k, t in enumerate(points):
        measured = max(measured, sectional_distance(alpha(float(t)).conjugate(values[k]), beta(float(t))))
    res = GlueResult(UnitarySection(points, values), part, measured, 10 * r, neighbour, reports)
    return res


# ---------------------------------------------------------------------------
# subdivision between embeddings
# ---------------------------------------------------------------------------


@dataclass
class SubdivisionResult:
    gammas: list
    step_distances: list
    anchor_distances: list
    step_bound: float
    anchor_bound: float
    eps: float
    blocks: list
    conjugation_ratios: list

    @property
    def holds(self) -> bool:
        return max(self.step_distances) < self.step_bound and max(self.anchor_distances) < self.anchor_bound


def subdivision_eps(rho_h: float, rho_span: float, d0: float, n_prime: int) -> float:
    """The fixed ``eps`` strictly below ``min(rho(h), d0 - rho(span)) / (2 n' + 1)``."""
    gap = d0 - rho_span
    cap = min(rho_h, gap) if rho_h > 0 else gap
    return 0.5 * cap / (2 * n_prime + 1)


def block_ends(n: int, n_prime: int) -> list[int]:
    """``0 = j(0) < ... < j(n'') = n`` with ``n' <= j(r) - j(r-1) < 2 n'``."""
    count = n // n_prime
    ends = [k * n_prime for k in range(count)] + [n]
    return ends


def subdivide_embeddings(phi0: Rep, phi1: Rep, oracle: Oracle, n: int, n_prime: int, d0: float,
                         t_samples: int = 9) -> SubdivisionResult:
    """Representations ``gamma^(0..n)`` at ``s_j = t0 + j (t1 - t0)/n`` following the block construction.

    Within each block the representations are aligned step by step; the
    block end is then aligned to ``phi0`` (to ``phi1`` in the last block)
    and the correction is spread over the block along a log path.
    """
    if not 0 < n_prime <= n:
        raise InputError("need 0 < n' <= n")
    t0, t1 = float(phi0.t), float(phi1.t)
    span = t1 - t0
    rho_span = oracle.rho(span)
    h = span / n
    rho_h = oracle.rho(h)
    if d0 <= rho_span:
        raise PreconditionError(f"d0 = {d0:.6g} must exceed rho(t1 - t0) = {rho_span:.6g}")
    d01 = _dist(phi0, phi1)
    if d01 >= d0:
        raise PreconditionError(f"d_S(phi0, phi1) = {d01:.6g} is not below d0 = {d0:.6g}")
    eps = subdivision_eps(rho_h, rho_span, d0, n_prime)
    ends = block_ends(n, n_prime)
    s = [t0 + j * h for j in range(n)] + [t1]
    gammas: list = [None] * (n + 1)
    gammas[0] = phi0
    ratios = []
    for r in range(1, len(ends)):
        a, b = ends[r - 1], ends[r]
        betas = {a: gammas[a]}
        for j in range(a + 1, b + 1):
            fresh = oracle.embed(s[j])
            z, claimed = oracle.equivalence(betas[j - 1], fresh, eps)
            if claimed >= eps + oracle.rho(abs(s[j] - s[j - 1])):
                raise OracleError(f"oracle claim {claimed:.3g} too weak at t={s[j]}", location=s[j])
            betas[j] = fresh.conjugate(z)
        last = r == len(ends) - 1
        anchor = phi1 if last else phi0
        w, claimed = oracle.equivalence(anchor, betas[b], eps)
        k = b - a
        local = np.array([(j - a) / k for j in range(a, b + 1)])
        probes = [img for j in range(a, b + 1) for img in betas[j].images.reshape(-1, phi0.dim, phi0.dim)]
        path = np.stack([log_path(wx, local) for wx in w], axis=1)
        _, rep = commutator_controlled_path(w, "log", t_samples=t_samples, probes=probes[: 2 * phi0.sections])
        ratios.append(rep.conjugation_derivative_ratio)
        for idx, j in enumerate(range(a, b + 1)):
            if j == a:
                continue
            gammas[j] = betas[j].conjugate(path[idx])
        if last:
            gammas[n] = phi1
    step = [_dist(gammas[j - 1], gammas[j]) for j in range(1, n + 1)]
    anchor_d = [_dist(g, phi0) for g in gammas]
    return SubdivisionResult(
        gammas, step, anchor_d,
        step_bound=91 * rho_h + 90 / n_prime * d0,
        anchor_bound=91 * n_prime * rho_h + 91 * d0,
        eps=eps, blocks=ends, conjugation_ratios=ratios,
    )


def _dist(a: Rep, b: Rep) -> float:
    """``d_S`` between representations of (possibly) different fibers."""
    d = a.images - b.images
    return float(np.linalg.norm(d.reshape(-1, a.dim, a.dim), ord=2, axis=(-2, -1)).max())


# ---------------------------------------------------------------------------
# refinement to a modulus and Lipschitz certificates
# ---------------------------------------------------------------------------


def lip_certificate(reps: Sequence[Rep], exponent: float) -> float:
    """Smallest ``C`` with ``d_S(rep_i, rep_j) <= C |t_i - t_j|^exponent`` over all pairs."""
    reps = list(reps)
    if len(reps) < 2:
        raise InputError("need at least two grid points")
    ts = np.array([r.t for r in reps])
    n = reps[0].dim
    imgs = np.stack([r.images.reshape(-1, n, n) for r in reps])
    dist = _accel.pairwise_sectional(imgs)
    dt = np.abs(ts[:, None] - ts[None, :])
    iu = np.triu_indices(len(reps), 1)
    if np.any(dt[iu] <= 0):
        raise InputError("grid points must be distinct")
    return float((dist[iu] / dt[iu] ** exponent).max())


def holder_schedule_constant(alpha: float) -> float:
    """``M(alpha) = 11 * 181 * 5 (181^beta + 1) / (1 - 181^(-alpha beta / 2))``, ``beta = 1/(1 - alpha/2)``."""
    beta = 1.0 / (1.0 - alpha / 2)
    return 11 * 181 * 5 * (181**beta + 1) / (1 - 181 ** (-alpha * beta / 2))


def nominal_certificate(alpha: float, c1: float, schedule: str = "holder") -> float:
    """Closed-form certificate for the nominal schedule.

    ``c1`` is the constant in ``rho(r) <= c1 r^(alpha/2)``; with
    ``c1 = 11 C0^(1/2)`` the Hoelder schedule gives ``M(alpha) C0^(1/2)``
    and the ``n = n' = 8100`` schedule (``alpha = 1``) gives
    ``320 * 92 * c1``.
    """
    if schedule == "lipschitz-half":
        if alpha != 1:
            raise InputError("the n = n' = 8100 schedule is stated for alpha = 1")
        return 320 * 92 * c1
    if schedule == "holder":
        return holder_schedule_constant(alpha) * c1 / 11
    raise InputError(f"unknown schedule {schedule!r}")


@dataclass
class RefinementResult:
    reps: list
    certificate: float
    desk_certificate: float
    schedule: str
    level_bounds: list
    subdivision_ok: bool
    details: dict = field(default_factory=dict)

    @property
    def grid(self) -> np.ndarray:
        return np.array([r.t for r in self.reps])


def modulus_constant(rho: Callable[[float], float], exponent: float, samples: int = 257) -> float:
    """``sup rho(r) / r^exponent`` over a sample of ``(0, 1]``."""
    rs = np.linspace(1.0 / (samples - 1), 1.0, samples - 1)
    return float(max(rho(r) / r**exponent for r in rs))


def refine_to_modulus(
    family: FiberFamily,
    alpha_exponent: float,
    depth: int = 6,
    *,
    n_level: int = 2,
    n_prime: int = 2,
    schedule: str = "holder",
) -> RefinementResult:
    """Level-by-level subdivision producing representations on ``{j / n_level^k}``.

    Level ``k+1`` subdivides each level-``k`` interval with
    :func:`subdivide_embeddings` using ``d0 = d_k``, where
    ``d_0 = 91 rho(1)`` and ``d_{k+1} = 91 rho(1/N_{k+1}) + (90/n') d_k``.
    Two certificates are returned for exponent ``alpha/2``: ``certificate``
    is the nominal closed form for ``schedule`` and ``desk_certificate`` is
    the chaining constant of the schedule actually run,
    ``max_k (d_k + 2 sum_{s>k} D_s) N_{k+1}^(alpha/2)`` with
    ``D_s = 91 n' rho(1/N_s) + 91 d_{s-1}``.
    """
    if depth < 1 or n_level < 2 or not 0 < n_prime <= n_level:
        raise InputError("need depth >= 1, n_level >= 2 and 0 < n' <= n_level")
    rho = family.rho
    exponent = alpha_exponent / 2
    oracle = family.oracle
    c1 = modulus_constant(rho, exponent)
    if rho(1.0) == 0:
        base = oracle.embed(0.0)
        reps = [base]
        for j in range(1, n_level**depth + 1):
            fresh = oracle.embed(j / n_level**depth)
            z, _ = oracle.equivalence(base, fresh, 1.0)
            reps.append(fresh.conjugate(z))
        return RefinementResult(reps, 0.0, 0.0, schedule, [0.0] * (depth + 1), True, {"case": "constant"})
    n_sizes = [n_level**k for k in range(depth + 1)]
    d = [91 * rho(1.0)]
    for k in range(1, depth + 1):
        d.append(91 * rho(1.0 / n_sizes[k]) + 90 / n_prime * d[k - 1])
    phi0 = oracle.embed(0.0)
    raw1 = oracle.embed(1.0)
    z, _ = oracle.equivalence(phi0, raw1, d[0] - rho(1.0))
    level = [phi0, raw1.conjugate(z)]
    ok = True
    for k in range(1, depth + 1):
        nxt = [level[0]]
        for a, b in zip(level[:-1], level[1:]):
            sub = subdivide_embeddings(a, b, oracle, n_level, min(n_prime, n_level), d[k - 1])
            ok = ok and sub.holds
            nxt.extend(sub.gammas[1:])
        level = nxt
    big_d = [0.0] + [91 * n_prime * rho(1.0 / n_sizes[s]) + 91 * d[s - 1] for s in range(1, depth + 1)]
    desk = 0.0
    for k in range(depth):
        tail = sum(big_d[k + 1 :])
        desk = max(desk, (d[k] + 2 * tail) * n_sizes[k + 1] ** exponent)
    desk = max(desk, d[depth] * n_sizes[depth] ** exponent)
    cert = nominal_certificate(alpha_exponent, c1, schedule)
    return RefinementResult(level, cert, desk, schedule, d, ok,
                            {"n_level": n_level, "n_prime": n_prime, "depth": depth, "c1": c1,
                             "nominal_schedule": schedule, "substitution": "desk subdivision counts with nominal bound formula"})
