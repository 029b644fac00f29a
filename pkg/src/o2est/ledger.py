"""Exact verification of the numeric inequality chains behind the estimates.

Each catalog entry bundles one or more :class:`Claim` objects.  A claim
compares two expression trees in interval arithmetic over a (possibly
empty) list of rational sample bindings; it passes when the upper end of
the left side is below the lower end of the right side for every sample.
Equalities are only accepted between exact rationals (irrational identities
are checked through their squares).

Parametric entries use the fixed sample grids below; bump
``SAMPLE_GRID_VERSION`` whenever a grid changes.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction as F
from typing import Callable, Iterable, Sequence

from .errors import InputError
from .expr import PI, Expr, const, eval_interval, lift, sqrt, sym
from .interval import Interval, root_bounds, sin_interval

SAMPLE_GRID_VERSION = 1

RELATIONS = ("<=", "<", "==", ">=", ">")


@dataclass
class Claim:
    label: str
    lhs: Expr
    rhs: Expr
    relation: str = "<="
    samples: Sequence[dict] = (None,)  # type: ignore[assignment]

    def evaluate(self, pi: Interval | None = None) -> "ClaimResult":
        if self.relation not in RELATIONS:
            raise InputError(f"unknown relation {self.relation!r}")
        worst: ClaimResult | None = None
        for b in self.samples:
            lv = eval_interval(self.lhs, b or {}, pi=pi)
            rv = eval_interval(self.rhs, b or {}, pi=pi)
            if self.relation in (">=", ">"):
                lo_side, hi_side = rv, lv
            else:
                lo_side, hi_side = lv, rv
            slack = hi_side - lo_side
            if self.relation == "==":
                ok = lv.is_exact() and rv.is_exact() and lv.lo == rv.lo
            elif self.relation in ("<", ">"):
                ok = lo_side.certainly_lt(hi_side)
            else:
                ok = lo_side.certainly_le(hi_side)
            res = ClaimResult(self.label, self.relation, lv, rv, slack, ok, dict(b or {}))
            if worst is None or (not ok and worst.ok) or (ok == worst.ok and slack.lo < worst.slack.lo):
                worst = res
        assert worst is not None
        return worst


@dataclass(frozen=True)
class ClaimResult:
    label: str
    relation: str
    lhs: Interval
    rhs: Interval
    slack: Interval
    ok: bool
    binding: dict


@dataclass
class LedgerEntry:
    """Result of verifying one catalog entry."""

    id: str
    description: str
    anchor: str
    lhs: Interval
    rhs: Interval
    slack: Interval
    status: str
    parameters: dict = field(default_factory=dict)
    claims: list[ClaimResult] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    runtime_ms: float = 0.0

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self) -> dict:
        def iv(x: Interval) -> list[str]:
            return [str(x.lo), str(x.hi)]

        return {
            "id": self.id,
            "description": self.description,
            "anchor": self.anchor,
            "status": self.status,
            "lhs": iv(self.lhs),
            "rhs": iv(self.rhs),
            "slack": iv(self.slack),
            "lhs_float": float(self.lhs.hi),
            "rhs_float": float(self.rhs.lo),
            "parameters": {k: str(v) for k, v in sorted(self.parameters.items())},
            "claims": [
                {
                    "label": c.label,
                    "relation": c.relation,
                    "ok": c.ok,
                    "lhs": iv(c.lhs),
                    "rhs": iv(c.rhs),
                    "binding": {k: str(v) for k, v in sorted(c.binding.items())},
                }
                for c in self.claims
            ],
            "notes": list(self.notes),
        }


@dataclass
class _CatalogItem:
    id: str
    description: str
    anchor: str
    build: Callable[[], tuple[list[Claim], dict, list[str]]]


def _grid(**axes: Iterable) -> list[dict]:
    out = [{}]
    for name, values in axes.items():
        out = [dict(d, **{name: F(v)}) for d in out for v in values]
    return out


# ---------------------------------------------------------------------------
# catalog builders
# ---------------------------------------------------------------------------


def _polar_sqrt_floor():
    d = sym("delta")
    samples = _grid(delta=[F(k, 20) for k in range(21)])
    x = sym("x")
    claims = [
        Claim("(1-delta)^(1/2) >= 1-delta on a grid of [0,1]", sqrt(1 - d), 1 - d, ">=", samples),
        Claim("1-(1-delta)^(1/2) <= delta on a grid of [0,1]", 1 - sqrt(1 - d), d, "<=", samples),
        # symbolic: with x = 1 - delta, x - x^2 = x(1-x) is a concave quadratic
        # that vanishes at both ends of [0,1], hence is >= 0 on all of it
        Claim("x - x^2 vanishes at x = 0", x - x * x, const(0), "==", [{"x": F(0)}]),
        Claim("x - x^2 vanishes at x = 1", x - x * x, const(0), "==", [{"x": F(1)}]),
        Claim("x - x^2 has negative leading coefficient", const(-1), const(0), "<"),
    ]
    return claims, {}, ["the squared form x >= x^2 on [0,1] proves the inequality for every delta, not only the grid"]


def _rearranger_aggregate():
    agg = sqrt(2) + (sqrt(2) + sqrt(4)) + (sqrt(2) + sqrt(4) + sqrt(6))
    claims = [
        Claim("sqrt2 + (sqrt2 + sqrt4) + (sqrt2 + sqrt4 + sqrt6) <= 11", agg, const(11)),
        Claim("closed form 3 sqrt2 + 4 + sqrt6 <= 11", 3 * sqrt(2) + 4 + sqrt(6), const(11)),
        Claim("delta <= 2 implies delta <= sqrt(2 delta)", sym("delta"), sqrt(2 * sym("delta")), "<=",
              _grid(delta=[F(k, 10) for k in range(0, 21)])),
    ]
    return claims, {}, []


def _eps0_choice(eps: F) -> F:
    """A concrete small enough epsilon_0: min(eps/4, (eps/22)^2 / 3)."""
    return min(eps / 4, (eps / 22) ** 2 / 3)


def _sqrt_chain_margin():
    e, m, e0 = sym("eps"), sym("M"), sym("eps0")
    samples = []
    for eps in (F(1), F(1, 10), F(1, 1000), F(5)):
        for mm in (F(0), F(1, 100), F(1, 4), F(1), F(2), F(100)):
            samples.append({"eps": eps, "M": mm, "eps0": _eps0_choice(eps)})
    claims = [
        Claim("2 eps0 + 11 sqrt(M + 3 eps0) <= eps + 11 sqrt(M)",
              2 * e0 + 11 * sqrt(m + 3 * e0), e + 11 * sqrt(m), "<=", samples),
        Claim("eps0 > 0", const(0), e0, "<", samples),
    ]
    notes = ["eps0 = min(eps/4, (eps/22)^2/3) works for every M >= 0 since sqrt(M + 3 eps0) <= sqrt(M) + sqrt(3 eps0)"]
    return claims, {}, notes


def _subdivision_step():
    rh, rt, d0, npr, k, eps = (sym(s) for s in ("rho_h", "rho_T", "d0", "nprime", "k", "eps"))
    samples = []
    for npv in (1, 4, 360, 8100):
        for rhv in (F(1, 1000), F(1)):
            for rtv in (F(0), rhv, 10 * rhv):
                for d0v in (rtv + F(1, 1000), 91 * rtv + 1):
                    epsv = min(rhv, d0v - rtv) / (2 * npv + 1) / 2
                    for kv in (npv, 2 * npv - 1 if npv > 1 else npv):
                        samples.append({"rho_h": rhv, "rho_T": rtv, "d0": d0v, "nprime": F(npv),
                                        "k": F(kv), "eps": epsv})
    target = 91 * rh + 90 / npr * d0
    claims = [
        Claim("first block: eps + rho_h + (1/k)[45(2n' rho_h + rho_T) + eps] <= 2 eps + 91 rho_h + (45/n') rho_T",
              eps + rh + (45 * (2 * npr * rh + rt) + eps) / k, 2 * eps + 91 * rh + 45 / npr * rt, "<=", samples),
        Claim("first block: 2 eps + 91 rho_h + (45/n') rho_T < 91 rho_h + (90/n') d0",
              2 * eps + 91 * rh + 45 / npr * rt, target, "<", samples),
        Claim("middle block: eps + rho_h + (1/k)[45(2n' rho_h + 2 rho_T) + eps] <= 2 eps + 91 rho_h + (90/n') rho_T",
              eps + rh + (45 * (2 * npr * rh + 2 * rt) + eps) / k, 2 * eps + 91 * rh + 90 / npr * rt, "<=", samples),
        Claim("middle block: 2 eps + 91 rho_h + (90/n') rho_T < 91 rho_h + (90/n') d0",
              2 * eps + 91 * rh + 90 / npr * rt, target, "<", samples),
        Claim("final block: 3 eps + 91 rho_h + (45/n')(rho_T + d0) < 91 rho_h + (90/n') d0",
              3 * eps + 91 * rh + 45 / npr * (rt + d0), target, "<", samples),
        Claim("distance to the start: (n'-1)[91 rho_h + (90/n') d0] + d0 < 91 n' rho_h + 91 d0",
              (npr - 1) * target + d0, 91 * npr * rh + 91 * d0, "<", samples),
    ]
    return claims, {"eps_rule": "min(rho_h, d0 - rho_T)/(2n'+1)/2"}, []


def _refinement_dk():
    k = sym("two_pow_minus_k")  # 2^-k
    rho_next = k / 2  # rho(1/N_{k+1}) <= 2^{-(k+1)} rho(1), with rho(1) = 1
    dk = 2 * k * 91
    samples = _grid(two_pow_minus_k=[F(1, 2**j) for j in range(0, 13)])
    claims = [
        Claim("d_0 = 91 rho(1) <= 2 * 91 rho(1)", const(91), const(2 * 91)),
        Claim("90/n' = 1/4 at n' = 360", const(F(90, 360)), const(F(1, 4)), "=="),
        Claim("d_{k+1} = 91 rho(1/N_{k+1}) + d_k/4 <= 2^-k * 91 rho(1)",
              91 * rho_next + dk / 4, 91 * k, "<=", samples),
    ]
    return claims, {"nprime": 360}, ["the induction step is an identity: 91*2^-(k+1) + 91*2^-(k+1) = 91*2^-k"]


def _refinement_telescope():
    nprime = 360
    # d_s <= 182 rho(1) 2^-s; sum_{s>=k} 2^-s = 2 * 2^-k, sum_{s>=k} 2^-(s+1) = 2^-k
    total = 3 * 182 * 2 + 2 * nprime * 182 * 1
    claims = [
        Claim("sum_{s>=k} (3 d_s + 2 n' d_{s+1}) * 2^k / rho(1) = 132132",
              const(total), const(132132), "=="),
        Claim("132132 <= 133000", const(total), const(133000)),
        Claim("(6 + 2n') * 182 * sum_{s>=k+1} 2^-s * 2^k <= 133000", const((6 + 2 * nprime) * 182 * 1), const(133000)),
    ]
    return claims, {"nprime": nprime}, ["exact value 132,132 from geometric series with ratio 1/2"]


def _holder_schedule_constant():
    claims: list[Claim] = []
    params = {}
    notes = []
    for alpha in (F(1, 4), F(1, 2), F(1)):
        beta = 1 / (1 - alpha / 2)
        p = 1 - alpha / 2  # exponent with n^p >= 181 iff n >= 181^beta
        b181 = Interval.point(181).rpow(beta)
        n = -(-b181.hi.numerator // b181.hi.denominator)  # ceil of the upper end
        # exact integer checks of 181^beta <= n <= 181^beta + 1 via n^num >= 181^den
        pn, pd = p.numerator, p.denominator
        lower_ok = n**pn >= 181**pd
        upper_ok = (n - 1) ** pn <= 181**pd
        tag = f"alpha={alpha}"
        claims.append(Claim(f"{tag}: n = {n} satisfies n >= 181^beta (n^{pn} >= 181^{pd})",
                            const(int(lower_ok)), const(1), "=="))
        claims.append(Claim(f"{tag}: n - 1 <= 181^beta", const(int(upper_ok)), const(1), "=="))
        step = 181 * lift(Interval.point(n).rpow(-p))
        claims.append(Claim(f"{tag}: 181 n^-(1-alpha/2) <= 1", step, const(1)))
        claims.append(Claim(f"{tag}: 91 + 90 (181 n^-(1-alpha/2)) <= 181", 91 + 90 * step, const(181)))
        na2 = lift(Interval.point(n).rpow(alpha / 2))
        claims.append(Claim(f"{tag}: 3 n^(alpha/2) + 2 n <= 5 (181^beta + 1)", 3 * na2 + 2 * n,
                            5 * (lift(b181) + 1)))
        claims.append(Claim(f"{tag}: 1 - n^(-alpha/2) >= 1 - 181^(-alpha beta/2)",
                            1 - lift(Interval.point(n).rpow(-alpha / 2)),
                            1 - lift(Interval.point(181).rpow(-alpha * beta / 2)), ">="))
        m_alpha = 11 * (181 * 5 * (lift(b181) + 1)) / (1 - lift(Interval.point(181).rpow(-alpha * beta / 2)))
        m_val = eval_interval(m_alpha)
        claims.append(Claim(f"{tag}: M(alpha) is finite and positive", const(0), m_alpha, "<"))
        params[f"n[{alpha}]"] = n
        params[f"M[{alpha}]~"] = F(round(float(m_val.mid)))
        notes.append(f"alpha={alpha}: beta={beta}, n={n}, M(alpha) in [{float(m_val.lo):.6e}, {float(m_val.hi):.6e}]")
    return claims, params, notes


def _lipschitz_half_schedule():
    n = 8100
    rn = root_bounds(F(n), 2)[0]
    claims = [
        Claim("sqrt(8100) = 90", const(rn), const(90), "=="),
        Claim("d_{k+1} <= 92 C_1 n^-(k+1)/2: 46 + (45/n) * 92 * n^(1/2) <= 92",
              const(46) + F(45, n) * 92 * lift(Interval.point(n).sqrt()), const(92)),
        Claim("d_0 = 46 C_1 <= 92 C_1", const(46), const(92)),
        Claim("320 * 92 = 29440", const(320 * 92), const(29440), "=="),
        Claim("29440 <= 30000", const(320 * 92), const(30000)),
        Claim("30000 * 11 <= 330000", const(30000 * 11), const(330000)),
    ]
    return claims, {"n": n}, []


def _test_vector_chain():
    n, m = sym("n"), sym("m")
    ns = [F(k) for k in list(range(1, 101)) + [200, 500, 1000, 10**6]]
    samples = [{"n": v, "m": F(1)} for v in ns] + [{"n": v, "m": F(3)} for v in ns[:30]]
    y_bound = PI * n * m / (2 * n + 1) ** 2 * sqrt((n - 1) / 2)
    claims = [
        Claim("(pi n m/(2n+1)^2) sqrt((n-1)/2) sqrt(3/(2n)) <= (pi sqrt3/4) m/(2n+1)",
              y_bound * sqrt(3 / (2 * n)), PI * sqrt(3) / 4 * m / (2 * n + 1), "<=", samples),
        # symbolic version: (2n+1)^2/4 - n(n-1) = 2n + 1/4 > 0
        Claim("(2n+1)^2/4 - n(n-1) - (2n + 1/4) == 0 (polynomial identity, checked at 3 points)",
              (2 * n + 1) * (2 * n + 1) / 4 - n * (n - 1) - (2 * n + F(1, 4)), const(0), "==",
              [{"n": F(0)}, {"n": F(1)}, {"n": F(7)}]),
        Claim("[m sqrt(2/n) sqrt(3/(2n))]^2 == [2 sqrt3 (1 + 1/(2n)) m/(2n+1)]^2",
              m * m * (2 / n) * (3 / (2 * n)), 12 * (1 + 1 / (2 * n)) ** 2 * (m / (2 * n + 1)) ** 2, "==",
              samples),
        Claim("pi sqrt3 / 4 <= 3/2", PI * sqrt(3) / 4, const(F(3, 2))),
        Claim("2 sqrt3 (1 + 1/(2n)) <= 7/2 at n = 49", 2 * sqrt(3) * (1 + F(1, 98)), const(F(7, 2))),
        Claim("2 sqrt3 (1 + 1/(2n)) > 7/2 at n = 48", 2 * sqrt(3) * (1 + F(1, 96)), const(F(7, 2)), ">"),
        Claim("3/2 + 7/2 <= 5", const(F(3, 2) + F(7, 2)), const(5)),
    ]
    notes = ["2 sqrt3 (1 + 1/(2n)) decreases in n, so the n = 49 / n = 48 pair pins the threshold at n >= 49"]
    return claims, {"threshold_n": 49}, notes


def _solve_linear(a: list[list[F]], b: list[F]) -> list[F] | None:
    n = len(b)
    mat = [row[:] + [b[i]] for i, row in enumerate(a)]
    for c in range(n):
        piv = next((r for r in range(c, n) if mat[r][c] != 0), None)
        if piv is None:
            return None
        mat[c], mat[piv] = mat[piv], mat[c]
        for r in range(n):
            if r != c and mat[r][c] != 0:
                f = mat[r][c] / mat[c][c]
                mat[r] = [x - f * y for x, y in zip(mat[r], mat[c])]
    return [mat[i][n] / mat[i][i] for i in range(n)]


def simplex_quadratic_max(coef_ab: F, coef_ag: F, coef_bg: F) -> tuple[F, tuple[F, F, F]]:
    """Exact max of ``c1 ab + c2 ag + c3 bg`` over the probability simplex.

    Enumerates each face, solves its Lagrange system in rationals and keeps
    the critical points that lie in the face.
    """
    a = [[F(0), coef_ab / 2, coef_ag / 2], [coef_ab / 2, F(0), coef_bg / 2], [coef_ag / 2, coef_bg / 2, F(0)]]

    def q(x):
        return sum(a[i][j] * x[i] * x[j] for i in range(3) for j in range(3))

    best = (F(-1), (F(0), F(0), F(0)))
    from itertools import combinations

    for size in (1, 2, 3):
        for supp in combinations(range(3), size):
            k = len(supp)
            # unknowns x_supp (k) and lambda: 2 A_SS x - lambda 1 = 0, sum x = 1
            mat = [[2 * a[i][j] for j in supp] + [F(-1)] for i in supp]
            mat.append([F(1)] * k + [F(0)])
            rhs = [F(0)] * k + [F(1)]
            sol = _solve_linear(mat, rhs)
            if sol is None:
                continue
            xs = sol[:k]
            if any(v < 0 for v in xs):
                continue
            x = [F(0)] * 3
            for i, v in zip(supp, xs):
                x[i] = v
            val = q(x)
            if val > best[0]:
                best = (val, tuple(x))
    return best


def _simplex_quadratic():
    val, arg = simplex_quadratic_max(F(9, 4), F(49, 4), F(25))
    claims = [
        Claim("max over simplex of (9/4)ab + (49/4)ag + 25bg <= 25/2", const(val), const(F(25, 2))),
        Claim("coefficients: 2(9/8), 2(49/8), 2(25/2) from the three distance bounds",
              const(F(9, 4) + F(49, 4) + 25), const(F(9, 4) + F(49, 4) + 25), "=="),
        Claim("(3/2)^2/2 = 9/8, (7/2)^2/2 = 49/8, 5^2/2 = 25/2",
              const(F(3, 2) ** 2 / 2 + F(7, 2) ** 2 / 2 + F(25, 2)), const(F(9, 8) + F(49, 8) + F(25, 2)), "=="),
    ]
    return claims, {"argmax": "(" + ", ".join(str(v) for v in arg) + ")", "max": val}, [
        f"exact simplex maximum {val} attained at {tuple(str(v) for v in arg)}"
    ]


def taylor_delta0(eps0: F) -> F:
    """A rational delta_0 with (1-r)^(-1/2) < 1 + (1+eps0) r/2 on (0, delta_0].

    With a = (1+eps0)/2 the inequality is equivalent to
    h(r) = eps0 + (a^2 - 2a) r - a^2 r^2 > 0, a concave quadratic with
    h(0) = eps0 > 0; we halve a candidate until h(candidate) > 0.
    """
    a = (1 + eps0) / 2
    d = F(1, 2)
    while eps0 + (a * a - 2 * a) * d - a * a * d * d <= 0:
        d /= 2
    return d


def _inverse_sqrt_taylor():
    claims = []
    params = {}
    r = sym("r")
    for eps in (F(1), F(1, 10), F(1, 100), F(1, 10000)):
        eps0 = F(2, 25) * eps
        d0 = taylor_delta0(eps0)
        a = (1 + eps0) / 2
        params[f"delta0[eps={eps}]"] = d0
        h = lambda rr: eps0 + (a * a - 2 * a) * rr - a * a * rr * rr  # noqa: E731
        claims.append(Claim(f"eps={eps}: h(0) > 0", const(0), const(h(F(0))), "<"))
        claims.append(Claim(f"eps={eps}: h(delta0) > 0 (concave, so h > 0 on [0, delta0])",
                            const(0), const(h(d0)), "<"))
        samples = [{"r": d0 * F(k, 16)} for k in range(1, 17)]
        claims.append(Claim(f"eps={eps}: (1-r)^(-1/2) < 1 + (1+eps0) r/2 on samples of (0, delta0]",
                            1 / sqrt(1 - r), 1 + (1 + eps0) * r / 2, "<", samples))
        theta = sym("theta")
        tsamples = [{"theta": F(2, 25) * d0 * F(k, 8)} for k in range(1, 8)]
        claims.append(Claim(f"eps={eps}: (1 - 25 theta/2)^(-1/2) < 1 + (25/4 + eps) theta for theta < (2/25) delta0",
                            1 / sqrt(1 - F(25, 2) * theta), 1 + (F(25, 4) + eps) * theta, "<", tsamples))
    return claims, params, ["eps0 = (2/25) eps, delta = (2/25) delta0"]


def _zeta_halving():
    x = sym("x")
    xs = [F(k, 40) for k in range(1, 20)]
    # chord length |exp(2 pi i x) - 1| = 2 sin(pi x); compare with 4x on (0, 1/2]
    chord_ok = []
    from .interval import pi_interval

    pi = pi_interval()
    for xv in xs:
        s = sin_interval(pi * xv) if (pi * xv).hi <= F(8, 5) else None
        chord_ok.append(s is not None and (4 * xv) <= (2 * s).lo)
    claims = [
        Claim("|theta1-theta2| <= |zeta1-zeta2|/4 on samples (2 sin(pi x) >= 4x)",
              const(int(all(chord_ok))), const(1), "=="),
        Claim("sqrt(t/4) == sqrt(t)/2 on square samples", sqrt(x / 4), sqrt(x) / 2, "==",
              [{"x": F(k, 20) ** 2} for k in range(1, 20)]),
        Claim("sqrt(1/4) = 1/2", sqrt(F(1, 4)), const(F(1, 2)), "=="),
        Claim("840000 / 2 <= 420000", const(F(840000, 2)), const(420000)),
    ]
    return claims, {}, [
        "chord bound is Jordan's inequality sin(pi x) >= 2x on [0, 1/2]; equality at x = 1/2 is exact (sin(pi/2) = 1)"
    ]


def _gluing_partition():
    r = const(1)
    step = 4 * (2 * r + F(4, 21) * r) + F(1, 21) * r
    claims = [
        Claim("2r + 2r/21 <= 2r + 4r/21", 2 * r + 2 * r / 21, 2 * r + 4 * r / 21),
        Claim("4(2r + 4r/21) + r/21 = 8r + 17r/21", step, 8 * r + 17 * r / 21, "=="),
        Claim("(8r + 17r/21) + 2r/21 + 2r/21 + r <= 10r", step + 2 * r / 21 + 2 * r / 21 + r, 10 * r),
    ]
    return claims, {"r": 1}, ["the sum is exactly 10r; strictness comes from the strict hypotheses, not the arithmetic"]


def _rotation_holder_composition():
    claims = [
        Claim("(25/4)^(1/2) = 5/2", sqrt(F(25, 4)), const(F(5, 2)), "=="),
        Claim("330000 (25/4)^(1/2) = 825000", 330000 * sqrt(F(25, 4)), const(825000), "=="),
        Claim("825000 <= 840000", 330000 * sqrt(F(25, 4)), const(840000)),
    ]
    return claims, {}, []


def _rotation_modulus_constant():
    claims = [
        Claim("11 (25/4)^(1/2) = 27.5", 11 * sqrt(F(25, 4)), const(F(55, 2)), "=="),
        Claim("27.5 <= 28", 11 * sqrt(F(25, 4)), const(28)),
    ]
    return claims, {}, []


CATALOG: dict[str, _CatalogItem] = {
    s.id: s
    for s in [
        _CatalogItem("polar-sqrt-floor", "(1-delta)^(1/2) >= 1 - delta on [0,1]", "polar partial isometry estimate", _polar_sqrt_floor),
        _CatalogItem("rearranger-aggregate", "sqrt2 + (sqrt2+sqrt4) + (sqrt2+sqrt4+sqrt6) <= 11", "rearranging unitary aggregate", _rearranger_aggregate),
        _CatalogItem("sqrt-chain-margin", "2 eps0 + 11 sqrt(M + 3 eps0) <= eps + 11 sqrt(M)", "ucp-to-unitary square-root chain", _sqrt_chain_margin),
        _CatalogItem("subdivision-step", "91 rho(h) + (90/n') d0 per-step bound", "subdivision between embeddings", _subdivision_step),
        _CatalogItem("refinement-dk", "d_k <= 2^-k+1 * 91 rho(1)", "refinement distance recursion", _refinement_dk),
        _CatalogItem("refinement-telescope", "telescoped sum = 132132 rho(1) 2^-k <= 133000 rho(1) 2^-k", "refinement telescoping sum", _refinement_telescope),
        _CatalogItem("holder-schedule-constant", "M(alpha) schedule for alpha in {1/4, 1/2, 1}", "Hoelder refinement schedule", _holder_schedule_constant),
        _CatalogItem("lipschitz-half-schedule", "46/45 recursion with n = 8100; 320*92 <= 30000", "n = n' = 8100 schedule", _lipschitz_half_schedule),
        _CatalogItem("test-vector-chain", "test-vector displacement bounds and the n >= 49 threshold", "clock/shift test vector", _test_vector_chain),
        _CatalogItem("simplex-quadratic", "max (9/4)ab + (49/4)ag + 25bg on the simplex <= 25/2", "twisted-norm quadratic floor", _simplex_quadratic),
        _CatalogItem("inverse-sqrt-taylor", "(1-r)^(-1/2) < 1 + (1+eps0) r/2 on (0, delta0)", "first-order norm expansion", _inverse_sqrt_taylor),
        _CatalogItem("zeta-halving", "|dtheta| <= |dzeta|/4 gives the factor 1/2", "circle reparametrisation", _zeta_halving),
        _CatalogItem("gluing-partition", "8r + 17r/21 + 2r/21 + 2r/21 + r <= 10r", "partition gluing", _gluing_partition),
        _CatalogItem("rotation-holder-composition", "330000 (25/4)^(1/2) = 825000 <= 840000", "rotation field Hoelder constant", _rotation_holder_composition),
        _CatalogItem("rotation-modulus-constant", "11 (25/4)^(1/2) = 27.5 <= 28", "rotation field modulus", _rotation_modulus_constant),
    ]
}


def catalog_ids() -> list[str]:
    return sorted(CATALOG)


def verify_entry(entry_id: str, pi: Interval | None = None) -> LedgerEntry:
    """Evaluate a catalog entry exactly and return its status and slack."""
    if entry_id not in CATALOG:
        raise InputError(f"unknown ledger entry {entry_id!r}")
    item = CATALOG[entry_id]
    t0 = time.perf_counter()
    claims, params, notes = item.build()
    results = [c.evaluate(pi=pi) for c in claims]
    head = results[0]
    worst = min(results, key=lambda r: (r.ok, r.slack.lo))
    status = "pass" if all(r.ok for r in results) else "fail"
    return LedgerEntry(
        id=item.id,
        description=item.description,
        anchor=item.anchor,
        lhs=head.lhs,
        rhs=head.rhs,
        slack=worst.slack,
        status=status,
        parameters=params,
        claims=results,
        notes=notes,
        runtime_ms=(time.perf_counter() - t0) * 1e3,
    )


def verify_all(pi: Interval | None = None) -> list[LedgerEntry]:
    return [verify_entry(i, pi=pi) for i in catalog_ids()]
