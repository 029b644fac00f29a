"""Command-line driver: ``o2est {ledger,rotation,perturb,cuntz,path,all}``.

Configuration comes from an optional ``key = value`` file, then flags
(flags win).  The seed falls back to ``$O2EST_SEED`` and then to 0.
Reports go to ``<out>/report.json`` and ``<out>/summary.csv``.  Exit
status: 0 when nothing failed, 1 when some report failed, 2 for invalid
configuration or usage.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
from fractions import Fraction
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import InputError, O2EstError
from .report import DEFAULT_TOL, VerificationReport, any_failed, make_report, reports_to_csv, reports_to_json, sort_reports

SUBCOMMANDS = ("ledger", "rotation", "perturb", "cuntz", "path")


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    dim_cap: int = 6561
    grid: int = 32
    jobs: int = 1
    tol: float = DEFAULT_TOL
    out: str = "o2est-out"
    n: tuple = (1, 2)
    m: tuple = (1,)
    t_theta: bool = True
    rho0_n: int = 2
    rho0_budget: int = 12
    perturb_count: int = 100
    dilations: int = 20
    cuntz_instances: int = 4
    cuntz_depths: tuple = (3, 4)
    path_families: int = 2
    path_dim: int = 4
    refine_depth: int = 4
    inject_violation: str = ""

    def validate(self) -> "RunConfig":
        if self.dim_cap <= 0 or self.grid <= 0 or self.jobs <= 0:
            raise InputError("caps, grid and jobs must be positive")
        if not 0 < self.tol <= 1e-3:
            raise InputError("tolerance must lie in (0, 1e-3]")
        if not self.n or any(k < 1 for k in self.n) or any(k < 1 for k in self.m):
            raise InputError("n and m must be positive integers")
        for name in ("perturb_count", "dilations", "cuntz_instances", "path_families", "refine_depth", "rho0_budget"):
            if getattr(self, name) < 0:
                raise InputError(f"{name} must be nonnegative")
        if self.path_dim < 2:
            raise InputError("path_dim must be at least 2")
        return self


def _int_tuple(text: str) -> tuple:
    try:
        return tuple(int(x) for x in str(text).replace(" ", "").split(",") if x)
    except ValueError as exc:
        raise InputError(f"expected a comma-separated integer list, got {text!r}") from exc


def _bool(text: str) -> bool:
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise InputError(f"expected a boolean, got {text!r}")


_TYPE_PARSERS: dict[str, Callable] = {"int": int, "float": float, "str": str, "tuple": _int_tuple, "bool": _bool}
# annotations are strings under postponed evaluation
_PARSERS: dict[str, Callable] = {f.name: _TYPE_PARSERS[f.type] for f in fields(RunConfig)}


def parse_config_text(text: str) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"config line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _PARSERS:
            raise InputError(f"config line {lineno}: unknown key {key!r}")
        try:
            out[key] = _PARSERS[key](value)
        except ValueError as exc:
            raise InputError(f"config line {lineno}: bad value for {key}: {value!r}") from exc
    return out


def build_config(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    env_seed = os.environ.get("O2EST_SEED")
    if env_seed is not None:
        try:
            values["seed"] = int(env_seed)
        except ValueError as exc:
            raise InputError(f"O2EST_SEED must be an integer, got {env_seed!r}") from exc
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise InputError(f"cannot read config: {exc}") from exc
        values.update(parse_config_text(text))
    flag_map = {"seed": args.seed, "out": args.out, "dim_cap": args.dim_cap, "grid": args.grid, "jobs": args.jobs,
                "inject_violation": args.inject_violation}
    if getattr(args, "n", None) is not None:
        flag_map["n"] = _int_tuple(args.n)
    if getattr(args, "m", None) is not None:
        flag_map["m"] = _int_tuple(args.m)
    values.update({k: v for k, v in flag_map.items() if v is not None})
    return RunConfig(**values).validate()


# ---------------------------------------------------------------------------
# sections
# ---------------------------------------------------------------------------


def _prefix(reports, prefix: str) -> list[VerificationReport]:
    return [replace(r, claim_id=f"{prefix}/{r.claim_id}") for r in reports]


def run_ledger(cfg: RunConfig) -> list[VerificationReport]:
    from .ledger import verify_all

    out = []
    for e in verify_all():
        out.append(make_report(f"ledger/{e.id}", e.anchor, float(e.lhs.hi), float(e.rhs.lo), inputs=e.parameters,
                               status=e.status, details={"slack": e.slack, "description": e.description,
                                                         "claims": len(e.claims)}))
    return out


def run_rotation(cfg: RunConfig) -> list[VerificationReport]:
    from .rotation import (clock_shift_rep, rho0_ledger_bound, rho0_upper_search, t_theta_norm,
                           test_vector_certificate)

    out: list[VerificationReport] = []
    for n in cfg.n:
        for m in cfg.m:
            reps = test_vector_certificate(n, m, dim_cap=cfg.dim_cap, grid=cfg.grid, seed=cfg.seed)
            out.extend(_prefix(reps, f"rotation/n{n}-m{m}"))
            theta = Fraction(m * m, (2 * n + 1) ** 2)
            if cfg.t_theta and theta < Fraction(2, 25) and (2 * n + 1) ** 2 <= 169:
                t = t_theta_norm(n, m, dim_cap=cfg.dim_cap)
                out.append(make_report(f"rotation/n{n}-m{m}/t-theta", "inverse norm bound", t.measured, t.bound,
                                       inputs={"n": n, "m": m}, seed=cfg.seed, tol=1e-6,
                                       details={"evaluations": t.evaluations}))
    if cfg.rho0_budget:
        nn = cfg.rho0_n
        q = (2 * nn + 1) ** 2
        ms = (2 * nn + 1, 1, 2)
        reps = {mm: clock_shift_rep(nn, mm) for mm in ms}
        for a in ms:
            for b in ms:
                if a == b:
                    continue
                res = rho0_upper_search(reps[a], reps[b], budget=cfg.rho0_budget)
                ledger = float(rho0_ledger_bound(reps[a].theta % 1, reps[b].theta % 1))
                finite = math.isfinite(res.value)
                out.append(make_report(
                    f"rotation/rho0/q{q}-m{a}-m{b}", "rho0 upper bound", res.value if finite else 1e300, float("inf"),
                    inputs={"q": q, "m1": a, "m2": b, "budget": cfg.rho0_budget}, seed=cfg.seed,
                    status="pass" if finite and (res.min_eigenvalue or 0) >= -1e-9 else "fail",
                    details={"profile": res.profile, "r": res.r, "min_choi_eigenvalue": res.min_eigenvalue,
                             "ledger_bound": ledger, "below_ledger_bound": finite and res.value <= ledger},
                ))
    return out


def run_perturb(cfg: RunConfig) -> list[VerificationReport]:
    from .perturbation import run_property_suite

    out = []
    for name, s in run_property_suite(count=cfg.perturb_count, seed=cfg.seed, dilations=cfg.dilations).items():
        out.append(make_report(f"perturb/{name}", "random property sweep", s.violations, 0,
                               inputs={"count": s.instances, "seed": cfg.seed}, seed=cfg.seed, tol=0.0,
                               details={"instances": s.instances, "worst_slack": s.worst_slack,
                                        "first_violation": s.first_violation_seed}))
    return out


def run_cuntz(cfg: RunConfig) -> list[VerificationReport]:
    from .cuntz import engineered_instance, internal_chain, rearranger, truncated_cuntz

    out = []
    k = cfg.cuntz_instances
    deltas = np.linspace(0.01, 0.25, k) if k > 1 else np.array([0.04])
    for i, delta in enumerate(deltas):
        L = cfg.cuntz_depths[i % len(cfg.cuntz_depths)]
        inst = engineered_instance(float(delta), seed=cfg.seed * 1000 + i)
        res = rearranger(inst.carrier, inst.u, inst.v, truncated_cuntz(2, L))
        tag = f"cuntz/i{i:02d}-L{L}"
        out.append(make_report(f"{tag}/certificate", "rearranging unitary", res.achieved,
                               res.bound + res.budget.accumulated, inputs={"delta": inst.delta, "L": L, "i": i},
                               seed=inst.seed, tol=cfg.tol,
                               details={"delta": inst.delta, "budget_trace": res.budget.trace}))
        out.extend(_prefix(internal_chain(res, inst.u, inst.v, seed=inst.seed), tag))
    return out


def run_path(cfg: RunConfig) -> list[VerificationReport]:
    from .paths import lip_certificate, refine_to_modulus, subdivide_embeddings
    from .synthetic import make_glue_pair, make_synthetic, oracle_contract_check
    from .paths import glue_over_interval

    out = []
    r = 0.2
    for i in range(cfg.path_families):
        s = cfg.seed * 100 + i
        pair = make_glue_pair(cfg.path_dim, 2, r, s, constant=0.5, rotation_speed=1.0)
        g = glue_over_interval(pair.alpha, pair.beta, r, pair.oracle, t_samples=17)
        out.append(make_report(f"path/glue/f{i:02d}", "gluing", g.measured, g.bound, inputs={"seed": s, "r": r},
                               seed=s, tol=0.0, details={"partition_points": int(g.partition.size)}))
    fam = make_synthetic(cfg.path_dim, 2, 1.0, 1.0, 1e-7, cfg.seed)
    out.append(_prefix([oracle_contract_check(fam, seed=cfg.seed)], "path")[0])
    p0, p1 = fam.embed(0.0), fam.embed(1.0)
    z, _ = fam.equivalence(p0, p1)
    p1 = p1.conjugate(z)
    d0 = 1.1 * fam.rho(1.0)
    for n, npr in ((8, 4), (16, 8)):
        sub = subdivide_embeddings(p0, p1, fam, n, npr, d0)
        inp = {"n": n, "n_prime": npr, "d0": d0}
        out.append(make_report(f"path/subdivide/n{n}-np{npr}/step", "subdivision", max(sub.step_distances),
                               sub.step_bound, inputs=inp, seed=cfg.seed, tol=0.0))
        out.append(make_report(f"path/subdivide/n{n}-np{npr}/anchor", "subdivision", max(sub.anchor_distances),
                               sub.anchor_bound, inputs=inp, seed=cfg.seed, tol=0.0))
    if cfg.refine_depth:
        half = make_synthetic(cfg.path_dim, 2, 0.5, 1.0, 1e-9, cfg.seed + 1)
        ref = refine_to_modulus(half.family(), 1.0, cfg.refine_depth, schedule="lipschitz-half")
        lip = lip_certificate(ref.reps, 0.5)
        out.append(make_report("path/refine/lip-vs-certificate", "refinement", lip, ref.certificate,
                               inputs={"depth": cfg.refine_depth, "seed": cfg.seed + 1}, seed=cfg.seed,
                               details={"desk_certificate": ref.desk_certificate, **ref.details}))
        out.append(make_report("path/refine/nominal-constant", "refinement", ref.certificate,
                               330000 * ref.details["c1"] / 11, inputs={"c1": ref.details["c1"]}, seed=cfg.seed))
    return out


SECTIONS: dict[str, Callable[[RunConfig], list[VerificationReport]]] = {
    "ledger": run_ledger,
    "rotation": run_rotation,
    "perturb": run_perturb,
    "cuntz": run_cuntz,
    "path": run_path,
}


def _run_section(name: str, cfg: RunConfig) -> list[VerificationReport]:
    t0 = time.perf_counter()
    try:
        reps = SECTIONS[name](cfg)
    except InputError:
        raise
    except O2EstError as exc:
        reps = [make_report(f"{name}/error", "runtime", 1.0, 0.0, inputs={"section": name}, seed=cfg.seed,
                            status="fail", details={"error": type(exc).__name__, "message": str(exc)})]
    dt = (time.perf_counter() - t0) * 1e3
    for r in reps:
        r.runtime_ms = dt / max(len(reps), 1)
    return reps


def inject_violation(reports: list[VerificationReport], prefix: str) -> list[VerificationReport]:
    """Lower the bound of the first report matching ``prefix`` below its measured value."""
    for i, r in enumerate(sort_reports(reports)):
        if r.claim_id.startswith(prefix):
            m = float(r.measured)
            bad = make_report(r.claim_id, r.anchor, m, m - 1.0, status="fail",
                              details={**r.details, "injected": True})
            bad.inputs_digest = r.inputs_digest
            return [bad if x is r else x for x in reports]
    raise InputError(f"no report matches the injection prefix {prefix!r}")


def run(subcommand: str, cfg: RunConfig) -> tuple[int, list[VerificationReport]]:
    names = list(SUBCOMMANDS) if subcommand == "all" else [subcommand]
    if cfg.jobs > 1 and len(names) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            chunks = list(pool.map(_run_section, names, [cfg] * len(names)))
    else:
        chunks = [_run_section(n, cfg) for n in names]
    reports = [r for c in chunks for r in c]
    if cfg.inject_violation:
        reports = inject_violation(reports, cfg.inject_violation)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    meta = {"subcommand": subcommand, "config": {f.name: getattr(cfg, f.name) for f in fields(cfg)
                                                 if f.name not in ("out", "jobs")}}
    (out / "report.json").write_text(reports_to_json(reports, meta))
    (out / "summary.csv").write_text(reports_to_csv(reports))
    return (1 if any_failed(reports) else 0), reports


def _render(reports: list[VerificationReport], stream) -> None:
    counts: dict[str, int] = {}
    for r in sort_reports(reports):
        counts[r.status] = counts.get(r.status, 0) + 1
        if r.status != "pass":
            stream.write(f"{r.status:>14}  {r.claim_id}  measured={r.measured!r} bound={r.bound!r}\n")
    stream.write("  ".join(f"{k}={v}" for k, v in sorted(counts.items())) + f"  total={len(reports)}\n")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--config", default=None, help="key = value file")
    common.add_argument("--out", default=None, help="output directory")
    common.add_argument("--dim-cap", type=int, default=None)
    common.add_argument("--grid", type=int, default=None)
    common.add_argument("--jobs", type=int, default=None)
    common.add_argument("--inject-violation", default=None, metavar="PREFIX",
                        help="force the first report whose claim id starts with PREFIX to fail")
    p = argparse.ArgumentParser(prog="o2est", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS + ("all",):
        sp = sub.add_parser(name, parents=[common])
        if name in ("rotation", "all"):
            sp.add_argument("--n", default=None, help="comma-separated n values")
            sp.add_argument("--m", default=None, help="comma-separated m values")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = build_config(args)
        code, reports = run(args.command, cfg)
    except InputError as exc:
        sys.stderr.write(f"o2est: {exc}\n")
        return 2
    _render(reports, sys.stdout)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
