"""Ground-truth fiber families and oracles for the path algorithms.

A synthetic family moves fixed generator images ``G[x, l]`` along known
unitary drivers ``W(t) = exp(i (c/2) t^e H)`` with ``||H|| = 1``, so that

    ||W(t1) G W(t1)^* - W(t2) G W(t2)^*|| <= 2 ||W(t1) - W(t2)|| <= c |t1 - t2|^e

for ``0 < e <= 1``.  With ``driver="per-section"`` every generator has its
own Hamiltonian and the fibers are genuinely different; with
``driver="joint"`` all generators share one driver and the fibers are
unitarily equivalent.

The oracle hides each fiber behind a random frame.  Equivalence answers
align frames and multiply by ``polar(1 + noise K)`` for a random
skew-Hermitian ``K`` of norm one, which moves the answer by at most
``noise``; the claimed error is the ground-truth fiber distance plus
``2 noise``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import InputError, OracleError
from .linalg import haar_unitary, operator_norm, polar_partial_isometry, random_hermitian
from .paths import FiberFamily, Rep
from .report import VerificationReport, make_report
from .rotation import clock_shift_rep, rho0_upper_search

ORACLE_SLACK = 1e-9


def _key(*parts) -> int:
    blob = repr(tuple(float(p) if isinstance(p, (float, np.floating)) else p for p in parts)).encode()
    return int.from_bytes(hashlib.sha256(blob).digest()[:8], "little")


def _expi(h: np.ndarray, a: float) -> np.ndarray:
    w, q = np.linalg.eigh(h)
    return (q * np.exp(1j * a * w)) @ q.conj().T


@dataclass
class SyntheticFamily:
    N: int
    sections: int
    nx: int
    exponent: float
    constant: float
    noise: float
    seed: int
    base: np.ndarray
    hams: np.ndarray
    driver: str = "per-section"
    claim_scale: float = 1.0
    queries: list = field(default_factory=list, repr=False)

    # -- ground truth ---------------------------------------------------
    def rho(self, r: float) -> float:
        r = abs(float(r))
        if self.constant == 0 or r == 0:
            return 0.0
        return self.constant * min(r, 1.0) ** self.exponent

    def driver_at(self, t: float) -> np.ndarray:
        """``W[x, l]`` at parameter ``t``."""
        a = 0.5 * self.constant * float(t) ** self.exponent if self.constant else 0.0
        return np.stack([[_expi(h, a) for h in row] for row in self.hams])

    def canonical(self, t: float) -> np.ndarray:
        w = self.driver_at(t)
        return np.einsum("xlab,xlbc,xldc->xlad", w, self.base, w.conj())

    def canonical_distance(self, t1: float, t2: float) -> float:
        d = self.canonical(t1) - self.canonical(t2)
        return float(np.linalg.norm(d.reshape(-1, self.N, self.N), ord=2, axis=(-2, -1)).max())

    # -- oracle ---------------------------------------------------------
    def embed(self, t: float) -> Rep:
        rng = np.random.default_rng(_key(self.seed, "embed", t))
        frame = np.stack([haar_unitary(self.N, rng) for _ in range(self.nx)])
        return Rep(float(t), self.canonical(t), np.eye(self.N)[None].repeat(self.nx, 0)).conjugate(frame)

    def _noise_unitary(self, ta: float, tb: float) -> np.ndarray:
        if self.noise == 0:
            return np.eye(self.N)[None].repeat(self.nx, 0)
        rng = np.random.default_rng(_key(self.seed, "noise", ta, tb))
        out = []
        for _ in range(self.nx):
            k = 1j * random_hermitian(self.N, rng)
            out.append(polar_partial_isometry(np.eye(self.N) + self.noise * k, np.eye(self.N)).v)
        return np.stack(out)

    def equivalence(self, a: Rep, b: Rep, eps: float = np.inf) -> tuple[np.ndarray, float]:
        if a.frame is None or b.frame is None:
            raise OracleError("representations without frame bookkeeping", location=(a.t, b.t))
        if 2 * self.noise >= eps:
            raise OracleError(f"requested precision {eps:.3g} is below twice the oracle noise", location=(a.t, b.t))
        z = np.einsum("xab,xbc,xdc->xad", a.frame, self._noise_unitary(a.t, b.t), b.frame.conj())
        claimed = self.claim_scale * (self.canonical_distance(a.t, b.t) + 2 * self.noise)
        self.queries.append((a.t, b.t))
        return z, claimed

    def family(self, grid: Sequence[float] | None = None) -> FiberFamily:
        grid = np.linspace(0.0, 1.0, 9) if grid is None else grid
        return FiberFamily(np.asarray(grid, dtype=float), self)


def make_synthetic(
    N: int,
    m_sections: int,
    exponent: float,
    constant: float,
    noise: float,
    seed: int,
    *,
    nx: int = 2,
    driver: str = "per-section",
    claim_scale: float = 1.0,
) -> SyntheticFamily:
    """Synthetic family with certified modulus ``rho(r) = constant * r^exponent``.

    The returned object is both the family and its oracle.
    """
    if N < 2:
        raise InputError("need N >= 2")
    if constant < 0 or noise < 0:
        raise InputError("constant and noise must be nonnegative")
    if constant > 0 and not 0 < exponent <= 1:
        raise InputError("exponent must lie in (0, 1] for a certified modulus")
    if driver not in ("per-section", "joint"):
        raise InputError(f"unknown driver {driver!r}")
    rng = np.random.default_rng(seed)
    base = np.stack([[haar_unitary(N, rng) for _ in range(m_sections)] for _ in range(nx)])
    if driver == "joint":
        hams = np.stack([[random_hermitian(N, rng)] * m_sections for _ in range(nx)])
    else:
        hams = np.stack([[random_hermitian(N, rng) for _ in range(m_sections)] for _ in range(nx)])
    return SyntheticFamily(N, m_sections, nx, float(exponent), float(constant), float(noise), int(seed), base, hams,
                           driver, float(claim_scale))


def oracle_contract_check(family: SyntheticFamily, samples: int = 32, *, seed: int = 0) -> VerificationReport:
    """Every sampled equivalence answer must satisfy ``measured <= claimed``.

    Also confirms that claims never exceed ``rho(|dt|) + 2 noise``.
    The failing report names the worst query.
    """
    rng = np.random.default_rng(seed)
    worst, worst_q, adv_excess = -np.inf, None, -np.inf
    rows = []
    for _ in range(samples):
        ta, tb = (float(x) for x in rng.uniform(0, 1, 2))
        a, b = family.embed(ta), family.embed(tb)
        z, claimed = family.equivalence(a, b)
        measured = operator_norm_max(b.conjugate(z).images - a.images, family.N)
        rows.append((ta, tb, measured, claimed))
        if measured - claimed > worst:
            worst, worst_q = measured - claimed, (ta, tb)
        adv_excess = max(adv_excess, claimed - (family.rho(abs(ta - tb)) + 2 * family.noise) * max(family.claim_scale, 1.0))
    measured_max = max(r[2] - r[3] for r in rows)
    return make_report(
        "oracle/contract",
        "oracle soundness",
        measured_max,
        0.0,
        inputs={"seed": family.seed, "samples": samples, "noise": family.noise},
        seed=seed,
        tol=ORACLE_SLACK,
        details={"worst_query": list(worst_q), "advertised_excess": adv_excess, "samples": samples},
    )


def operator_norm_max(diff: np.ndarray, n: int) -> float:
    return float(np.linalg.norm(diff.reshape(-1, n, n), ord=2, axis=(-2, -1)).max())


# ---------------------------------------------------------------------------
# glue test pairs
# ---------------------------------------------------------------------------


@dataclass
class GluePair:
    """``beta_t = F(t) alpha'_t F(t)^*`` with ``alpha'`` a small perturbation of ``alpha``.

    ``oracle(t)`` returns ``F(t)`` times oracle noise, so its answers are
    within ``offset + 2 noise < r`` where ``offset`` is the measured
    distance between ``alpha`` and ``alpha'``.
    """

    alpha_family: SyntheticFamily
    perturbed: SyntheticFamily
    rotation: np.ndarray
    noise: float
    seed: int

    def frame(self, t: float) -> np.ndarray:
        return np.stack([_expi(k, float(t)) for k in self.rotation])

    def alpha(self, t: float) -> Rep:
        return Rep(float(t), self.alpha_family.canonical(t))

    def beta(self, t: float) -> Rep:
        return Rep(float(t), self.perturbed.canonical(t)).conjugate(self.frame(t))

    def oracle(self, t: float) -> np.ndarray:
        noise = self.alpha_family._noise_unitary(t, t)
        return np.einsum("xab,xbc->xac", self.frame(t), noise)

    def claimed(self, t: float) -> float:
        return self.alpha_family.canonical_distance(t, t) + offset_distance(self, t) + 2 * self.noise


def offset_distance(pair: GluePair, t: float) -> float:
    d = pair.alpha_family.canonical(t) - pair.perturbed.canonical(t)
    return operator_norm_max(d, pair.alpha_family.N)


def make_glue_pair(N: int, m_sections: int, r: float, seed: int, *, nx: int = 2, constant: float = 1.0,
                   noise: float = 1e-4, rotation_speed: float = 2.0) -> GluePair:
    """A rotating pair whose pointwise alignment error stays below ``r/2``."""
    alpha = make_synthetic(N, m_sections, 1.0, constant, noise, seed, nx=nx)
    rng = np.random.default_rng(_key(seed, "glue"))
    # perturb the base images by a small common conjugation to create a genuine offset
    kick = r / 8
    pert_base = np.einsum(
        "xab,xlbc,xdc->xlad",
        np.stack([_expi(random_hermitian(N, rng), kick) for _ in range(nx)]),
        alpha.base,
        np.stack([np.eye(N)] * nx).conj(),
    )
    pert = SyntheticFamily(N, m_sections, nx, 1.0, constant, noise, seed, pert_base, alpha.hams)
    rot = np.stack([random_hermitian(N, rng, rotation_speed) for _ in range(nx)])
    return GluePair(alpha, pert, rot, noise, seed)


# ---------------------------------------------------------------------------
# rotation-field adapter
# ---------------------------------------------------------------------------


@dataclass
class RotationFibers:
    """Clock/shift fibers at ``theta_i = m_i^2 / q`` placed at ``t_i = i / (k - 1)``.

    All fibers act on ``C^q`` and carry identity frames, so equivalence
    answers are conjugations by frame alignments and the claimed error is
    the exact distance between the canonical generator pairs.
    """

    n: int
    ms: tuple
    reps: list
    table: np.ndarray

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, len(self.ms))

    @property
    def thetas(self) -> list[Fraction]:
        return [r.theta for r in self.reps]

    def _index(self, t: float) -> int:
        g = self.grid
        i = int(np.argmin(np.abs(g - t)))
        if abs(g[i] - t) > 1e-12:
            raise OracleError(f"no rotation fiber at t={t}", location=t)
        return i

    def rho(self, r: float) -> float:
        g = self.grid
        dt = np.abs(g[:, None] - g[None, :])
        mask = dt <= r + 1e-12
        return float(self.table[mask].max()) if r > 0 else 0.0

    def embed(self, t: float) -> Rep:
        i = self._index(t)
        rep = self.reps[i]
        q = rep.q
        return Rep(float(t), np.stack([rep.y(), rep.z()])[None], np.eye(q)[None])

    def equivalence(self, a: Rep, b: Rep, eps: float = np.inf) -> tuple[np.ndarray, float]:
        i, j = self._index(a.t), self._index(b.t)
        z = np.einsum("xab,xcb->xac", a.frame, b.frame.conj())
        return z, float(self.table[i, j])

    def rho0_values(self, budget: int = 12) -> dict:
        """``rho0_upper_search`` both ways for every pair, keyed by ``(i, j)``."""
        out = {}
        for i, ri in enumerate(self.reps):
            for j, rj in enumerate(self.reps):
                if i != j:
                    out[(i, j)] = rho0_upper_search(ri, rj, budget=budget).value
        return out


def rotation_fibers(n: int, ms: Sequence[int]) -> RotationFibers:
    reps = [clock_shift_rep(n, m) for m in ms]
    k = len(reps)
    table = np.zeros((k, k))
    for i in range(k):
        for j in range(k):
            table[i, j] = max(operator_norm(reps[i].y() - reps[j].y()), operator_norm(reps[i].z() - reps[j].z()))
    return RotationFibers(n, tuple(ms), reps, table)
