"""Truncated Fock-space model of the Cuntz algebra and the rearranging unitary.

:func:`truncated_cuntz` builds creation operators ``S_i`` on the span of
words of length ``<= L`` over ``d`` letters.  ``S_i`` prepends the letter
``i`` and kills the top layer, so ``S_i^* S_j = delta_ij P_{<= L-1}`` and
``sum_i S_i S_i^* = 1 - P_root``.

:func:`rearranger` implements the unitary
``z = s1 (x) c1 + 1 (x) c2 + s2 (x) c3 + 1 (x) c4`` built from two
(near-)isometries ``s, t`` of a carrier space.  Truncation breaks the
Cuntz and isometry relations only near the edges of the filtrations, so
all certificate norms are taken on an *interior* subspace where every
relation used by the estimate holds; the measured leftovers form the
:class:`DefectBudget`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .errors import ConstructionDegenerateError, InputError, ResourceError
from .linalg import INEQ_SLACK, adjoint, as_matrix, is_unitary, operator_norm, random_hermitian
from .report import VerificationReport, make_report

DEFAULT_DIM_CAP = 4096
DEFAULT_O2_DEPTH = 4
DEFAULT_CARRIER_DEPTH = 5
UNITARITY_TOL = 1e-8


# ---------------------------------------------------------------------------
# truncated Fock space
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TruncatedCuntz:
    d: int
    depth: int
    words: tuple
    lengths: np.ndarray
    S: tuple

    @property
    def dim(self) -> int:
        return len(self.words)

    def layer_projection(self, k: int | Sequence[int]) -> np.ndarray:
        ks = [k] if isinstance(k, (int, np.integer)) else list(k)
        return np.diag(np.isin(self.lengths, ks).astype(float))

    @property
    def layer_projections(self) -> list[np.ndarray]:
        return [self.layer_projection(k) for k in range(self.depth + 1)]

    def prefix_projection(self, prefix: Sequence[int]) -> np.ndarray:
        """Diagonal projection onto words beginning with ``prefix``."""
        pre = tuple(prefix)
        mask = [len(w) >= len(pre) and w[: len(pre)] == pre for w in self.words]
        return np.diag(np.asarray(mask, dtype=float))

    def length_columns(self, lo: int, hi: int) -> np.ndarray:
        """Isometry onto the span of words with ``lo <= len <= hi``."""
        idx = np.flatnonzero((self.lengths >= lo) & (self.lengths <= hi))
        j = np.zeros((self.dim, idx.size))
        j[idx, np.arange(idx.size)] = 1.0
        return j

    def index(self, word: Sequence[int]) -> int:
        return self.words.index(tuple(word))


def fock_dim(d: int, depth: int) -> int:
    return (d ** (depth + 1) - 1) // (d - 1)


def truncated_cuntz(d: int, depth: int, *, dim_cap: int = DEFAULT_DIM_CAP) -> TruncatedCuntz:
    if d < 2 or depth < 1:
        raise InputError("need d >= 2 and depth >= 1")
    dim = fock_dim(d, depth)
    if dim > dim_cap:
        raise ResourceError(f"Fock dimension {dim} exceeds the cap {dim_cap}")
    words: list[tuple] = [()]
    layer = [()]
    for _ in range(depth):
        layer = [(i,) + w for i in range(d) for w in layer]
        words.extend(sorted(layer))
    pos = {w: k for k, w in enumerate(words)}
    lengths = np.array([len(w) for w in words])
    ops = []
    for i in range(d):
        s = np.zeros((dim, dim))
        for w, k in pos.items():
            if len(w) < depth:
                s[pos[(i,) + w], k] = 1.0
        ops.append(s)
    o2 = TruncatedCuntz(d, depth, tuple(words), lengths, tuple(ops))
    _check_cuntz(o2)
    return o2


def _check_cuntz(o2: TruncatedCuntz) -> None:
    below = np.diag((o2.lengths <= o2.depth - 1).astype(float))
    above = np.diag((o2.lengths >= 1).astype(float))
    for i, si in enumerate(o2.S):
        for j, sj in enumerate(o2.S):
            want = below if i == j else np.zeros_like(below)
            if not np.array_equal(si.T @ sj, want):
                raise AssertionError(f"S_{i}^* S_{j} relation failed")
    if not np.array_equal(sum(s @ s.T for s in o2.S), above):
        raise AssertionError("range relation failed")


# ---------------------------------------------------------------------------
# defect budget
# ---------------------------------------------------------------------------


@dataclass
class DefectBudget:
    trace: list = field(default_factory=list)

    @property
    def accumulated(self) -> float:
        return float(sum(c for _, c in self.trace))

    def add(self, step: str, contribution: float) -> float:
        c = float(max(contribution, 0.0))
        self.trace.append((step, c))
        return c


# ---------------------------------------------------------------------------
# the rearranging unitary
# ---------------------------------------------------------------------------


@dataclass
class Carrier:
    """Carrier space data: the two near-isometries plus the measurement regions.

    ``interior`` is an isometry onto the subspace where the certificate is
    evaluated; ``region`` is an isometry onto the larger subspace on which
    ``delta`` is measured and on which ``s, t`` must be isometric.
    """

    s: np.ndarray
    t: np.ndarray
    interior: np.ndarray
    region: np.ndarray

    @property
    def dim(self) -> int:
        return self.s.shape[0]


def full_carrier(s, t) -> Carrier:
    s, t = as_matrix(s, square=True, name="s"), as_matrix(t, square=True, name="t")
    eye = np.eye(s.shape[0])
    return Carrier(s, t, eye, eye)


def fock_carrier(depth: int = DEFAULT_CARRIER_DEPTH) -> Carrier:
    """``s = S_1``, ``t = S_2`` on the two-letter Fock space of the given depth.

    The certificate is evaluated on lengths ``<= depth - 2`` and ``delta``
    on lengths ``<= depth - 1``, the layers reached by ``z``, ``z^*`` and
    one application of ``s`` or ``t`` from the interior.
    """
    if depth < 3:
        raise InputError("carrier depth must be at least 3")
    f = truncated_cuntz(2, depth)
    return Carrier(f.S[0].astype(complex), f.S[1].astype(complex), f.length_columns(0, depth - 2), f.length_columns(0, depth - 1))


@dataclass
class RearrangerParts:
    e1: np.ndarray
    e2: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    f3: np.ndarray
    p: tuple
    q: tuple
    c: tuple


def rearranger_parts(s: np.ndarray, t: np.ndarray) -> RearrangerParts:
    n = s.shape[0]
    one = np.eye(n)
    e1 = s @ adjoint(s)
    f1 = t @ adjoint(t)
    e2 = s @ f1 @ adjoint(s)
    f2 = t @ e1 @ adjoint(t)
    f3 = t @ e2 @ adjoint(t)
    p = (one - e1, e1 - e2, e2)
    q = (one - f1, f1 - f2, f2 - f3, f3)
    ts = adjoint(t)
    c = (p[1] @ s @ q[0], p[0] @ ts @ q[1], p[1] @ ts @ q[2], p[2] @ ts @ q[3])
    return RearrangerParts(e1, e2, f1, f2, f3, p, q, c)


def _o2_legs(o2: TruncatedCuntz) -> tuple:
    one = np.eye(o2.dim)
    return (o2.S[0], one, o2.S[1], one)


def _ksum(terms) -> np.ndarray:
    out = None
    for a, b in terms:
        k = np.kron(a, b)
        out = k if out is None else out + k
    return out


def _restricted_norm(x: np.ndarray, cols: np.ndarray) -> float:
    return operator_norm(x @ cols)


@dataclass
class RearrangerResult:
    parts: RearrangerParts
    achieved: float
    delta: float
    bound: float
    budget: DefectBudget
    o2: TruncatedCuntz
    carrier: Carrier

    @property
    def holds(self) -> bool:
        return self.achieved <= self.bound + self.budget.accumulated + INEQ_SLACK

    def z(self) -> np.ndarray:
        """Dense ``z`` (only sensible for small models)."""
        legs = _o2_legs(self.o2)
        return _ksum(zip(legs, self.parts.c))


def rearranger_delta(carrier: Carrier, u: np.ndarray, v: np.ndarray) -> float:
    s, t, r = carrier.s, carrier.t, carrier.region
    return max(_restricted_norm(adjoint(s) @ u @ s - v, r), _restricted_norm(adjoint(t) @ v @ t - u, r))


def rearranger(
    carrier: Carrier,
    u,
    v,
    o2: TruncatedCuntz | None = None,
    *,
    defect_tol: float = 1e-9,
) -> RearrangerResult:
    """Build ``z`` and certify ``||z (1 (x) v) z^* - 1 (x) u|| <= 11 sqrt(delta) + budget``.

    All norms on the tensor product are restricted to
    ``J = J_O2 (x) carrier.interior`` with ``J_O2`` the words of length
    ``1 .. L-1``; ``delta = max(||s^* u s - v||, ||t^* v t - u||)`` is
    measured on ``carrier.region``.
    """
    o2 = o2 or truncated_cuntz(2, DEFAULT_O2_DEPTH)
    s, t = carrier.s, carrier.t
    u = as_matrix(u, square=True, name="u")
    v = as_matrix(v, square=True, name="v")
    n = carrier.dim
    if u.shape != (n, n) or v.shape != (n, n):
        raise InputError("u and v must act on the carrier")
    if not (is_unitary(u, 1e-9) and is_unitary(v, 1e-9)):
        raise InputError("u and v must be unitary")
    r = carrier.region
    for name, x in (("s", s), ("t", t)):
        dfc = _restricted_norm(adjoint(x) @ x - np.eye(n), r)
        if dfc > defect_tol:
            raise InputError(f"{name} is not isometric on the measurement region (defect {dfc:.3e})")

    parts = rearranger_parts(s, t)
    legs = _o2_legs(o2)
    jo = o2.length_columns(1, o2.depth - 1)
    jb = carrier.interior
    budget = DefectBudget()

    # O2 relations on the interior
    one_o = np.eye(o2.dim)
    budget.add("o2 range relation", operator_norm((o2.S[0] @ o2.S[0].T + o2.S[1] @ o2.S[1].T - one_o) @ jo))
    budget.add("o2 isometry relation", max(operator_norm((x.T @ x - one_o) @ jo) for x in o2.S))
    # partial isometry relations of the c_j on the carrier interior
    for j, cj in enumerate(parts.c):
        src = parts.q[j]
        rng_ = parts.p[1] if j == 0 else parts.p[j - 1]
        budget.add(f"c{j + 1}* c{j + 1} = q{j + 1}", _restricted_norm(adjoint(cj) @ cj - src, jb))
        # the range relation is used after z^*, which moves carrier lengths by one
        budget.add(f"c{j + 1} c{j + 1}* = p", _restricted_norm(cj @ adjoint(cj) - rng_, jb))

    pairs = list(zip(legs, parts.c))
    jfull = np.kron(jo, jb)
    zstar_z = _ksum((aj.T @ ai @ jo, adjoint(cj) @ ci @ jb) for ai, ci in pairs for aj, cj in pairs)
    z_zstar = _ksum((ai @ aj.T @ jo, ci @ adjoint(cj) @ jb) for ai, ci in pairs for aj, cj in pairs)
    unit_def = max(operator_norm(zstar_z - jfull), operator_norm(z_zstar - jfull))
    if unit_def > UNITARITY_TOL:
        raise ConstructionDegenerateError(f"z is not unitary on the interior (defect {unit_def:.3e})", budget.trace)
    budget.add("z unitarity on interior", unit_def)

    delta = rearranger_delta(carrier, u, v)
    # z (1 (x) v) z^* J = sum_ij (a_i a_j^* J_O) (x) (c_i v c_j^* J_B)
    x = _ksum((ai @ aj.T @ jo, ci @ v @ adjoint(cj) @ jb) for ai, ci in pairs for aj, cj in pairs)
    x = x - np.kron(jo, u @ jb)
    achieved = operator_norm(x)
    bound = 11.0 * math.sqrt(delta)
    return RearrangerResult(parts, achieved, delta, bound, budget, o2, carrier)


# ---------------------------------------------------------------------------
# the intermediate chain
# ---------------------------------------------------------------------------


def _split_defect(x: np.ndarray, e: np.ndarray, cols: np.ndarray) -> float:
    f = np.eye(e.shape[0]) - e
    return _restricted_norm(x - (e @ x @ e + f @ x @ f), cols)


def internal_chain(res: RearrangerResult, u, v, *, seed: int | None = None) -> list[VerificationReport]:
    """Every intermediate inequality of the estimate on the concrete instance."""
    u = as_matrix(u, square=True)
    v = as_matrix(v, square=True)
    s, t, jb = res.carrier.s, res.carrier.t, res.carrier.interior
    pr = res.parts
    d = res.delta
    b = res.budget.accumulated
    rd = math.sqrt(d)
    inputs = {"delta": d, "o2_depth": res.o2.depth, "carrier_dim": res.carrier.dim}
    out: list[VerificationReport] = []

    def add(cid: str, measured: float, bound: float, **details):
        out.append(make_report(f"rearranger/{cid}", "rearranging unitary", measured, bound + b, inputs=inputs, seed=seed,
                               tol=INEQ_SLACK, details=details))

    # corner pieces
    for j, cj in enumerate(pr.c):
        qj = pr.q[j]
        pj = pr.p[1] if j == 0 else pr.p[j - 1]
        add(f"corner-{j + 1}", _restricted_norm(cj @ qj @ v @ qj @ adjoint(cj) - pj @ u @ pj, jb), d)
    # splitting cascade for u
    su = _split_defect(u, pr.e1, jb)
    add("split-e1", su, math.sqrt(2 * d))
    st = s @ t
    add("e2-compression", _restricted_norm(pr.e2 @ u @ pr.e2 - st @ u @ adjoint(st), jb), 2 * d)
    add("split-e2", _split_defect(u, pr.e2, jb), math.sqrt(4 * d))
    pu = sum(p @ u @ p for p in pr.p)
    add("p-decomposition", _restricted_norm(pu - u, jb), (math.sqrt(2) + 2) * rd)
    # splitting cascade for v
    ts, tst = t @ s, t @ s @ t
    add("split-f1", _split_defect(v, pr.f1, jb), math.sqrt(2 * d))
    add("f2-compression", _restricted_norm(pr.f2 @ v @ pr.f2 - ts @ v @ adjoint(ts), jb), 2 * d)
    add("split-f2", _split_defect(v, pr.f2, jb), math.sqrt(4 * d))
    add("f3-compression", _restricted_norm(pr.f3 @ v @ pr.f3 - tst @ u @ adjoint(tst), jb), 3 * d)
    add("split-f3", _split_defect(v, pr.f3, jb), math.sqrt(6 * d))
    qv = sum(q @ v @ q for q in pr.q)
    add("q-decomposition", _restricted_norm(qv - v, jb), (math.sqrt(2) + 2 + math.sqrt(6)) * rd)
    add("assembled", res.achieved,
        d + _restricted_norm(qv - v, jb) + _restricted_norm(pu - u, jb))
    add("aggregate", res.achieved, 11 * rd)
    return out


# ---------------------------------------------------------------------------
# engineered instances
# ---------------------------------------------------------------------------


def layered_unitary(f: TruncatedCuntz, hams: Sequence[np.ndarray], kappa: float) -> np.ndarray:
    """``exp(i kappa H_l)`` acting inside each word-length layer."""
    u = np.zeros((f.dim, f.dim), dtype=np.complex128)
    for k, h in enumerate(hams):
        idx = np.flatnonzero(f.lengths == k)
        u[np.ix_(idx, idx)] = expm(1j * kappa * h)
    return u


@dataclass
class EngineeredInstance:
    carrier: Carrier
    u: np.ndarray
    v: np.ndarray
    delta: float
    kappa: float
    seed: int


def engineered_instance(target_delta: float, *, carrier_depth: int = DEFAULT_CARRIER_DEPTH, seed: int = 0,
                        rtol: float = 1e-6) -> EngineeredInstance:
    """Layer-preserving ``u, v`` whose ``delta`` matches ``target_delta``.

    ``u = exp(i kappa H)`` and ``v = exp(i kappa K)`` with random layerwise
    Hamiltonians of norm one; ``kappa`` is found by bisection.
    """
    if not 0 < target_delta < 1:
        raise InputError("target delta must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    f = truncated_cuntz(2, carrier_depth)
    carrier = fock_carrier(carrier_depth)
    hs = [random_hermitian(2**k, rng) for k in range(carrier_depth + 1)]
    ks = [random_hermitian(2**k, rng) for k in range(carrier_depth + 1)]

    def build(kappa):
        u = layered_unitary(f, hs, kappa)
        v = layered_unitary(f, ks, kappa)
        return u, v, rearranger_delta(carrier, u, v)

    lo, hi = 0.0, 0.05
    while build(hi)[2] < target_delta:
        hi *= 2
        if hi > 10:
            raise InputError("target delta unreachable for this seed")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        _, _, dm = build(mid)
        if abs(dm - target_delta) <= rtol * target_delta:
            lo = hi = mid
            break
        if dm < target_delta:
            lo = mid
        else:
            hi = mid
    u, v, d = build(0.5 * (lo + hi))
    return EngineeredInstance(carrier, u, v, d, 0.5 * (lo + hi), seed)


@dataclass
class DepthRegression:
    depths: tuple
    excess: tuple
    budgets: tuple

    @property
    def worst_violation(self) -> float:
        """Largest ``(excess increase) - (budget decrease)`` between consecutive depths."""
        worst = -math.inf
        for k in range(1, len(self.depths)):
            worsen = self.excess[k] - self.excess[k - 1]
            relief = self.budgets[k - 1] - self.budgets[k]
            worst = max(worst, worsen - relief)
        return worst

    @property
    def holds(self) -> bool:
        return self.worst_violation <= INEQ_SLACK


def depth_regression(carrier: Carrier, u, v, depths: Sequence[int] = (3, 4, 5)) -> DepthRegression:
    """``achieved - 11 sqrt(delta)`` and the budget as the O2 depth grows.

    The interior of a deeper truncation contains the interior of a shallower
    one, so ``achieved`` is nondecreasing in the depth.
    """
    ex, bu = [], []
    for L in depths:
        res = rearranger(carrier, u, v, truncated_cuntz(2, L))
        ex.append(res.achieved - res.bound)
        bu.append(res.budget.accumulated)
    return DepthRegression(tuple(depths), tuple(ex), tuple(bu))
