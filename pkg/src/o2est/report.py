"""The common verification record and its JSON/CSV serialisation."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable

import numpy as np

from .interval import Interval

SCHEMA_VERSION = 1
STATUSES = ("pass", "fail", "conditional", "not-applicable")
DEFAULT_TOL = 1e-9


def _canon(obj: Any) -> Any:
    """Convert numbers/arrays into JSON-stable primitives."""
    if isinstance(obj, Interval):
        return {"lo": str(obj.lo), "hi": str(obj.hi)}
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return float(repr(x)) if x != 0 else 0.0
    if isinstance(obj, (complex, np.complexfloating)):
        return [_canon(obj.real), _canon(obj.imag)]
    if isinstance(obj, np.ndarray):
        return [_canon(x) for x in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): _canon(v) for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))}
    if isinstance(obj, (list, tuple)):
        return [_canon(x) for x in obj]
    return obj


def digest(inputs: Any) -> str:
    blob = json.dumps(_canon(inputs), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class VerificationReport:
    claim_id: str
    anchor: str
    measured: Any
    bound: Any
    slack: Any
    status: str
    inputs_digest: dict = field(default_factory=dict)
    runtime_ms: float = 0.0
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    @property
    def failed(self) -> bool:
        return self.status == "fail"

    def to_dict(self, include_runtime: bool = False) -> dict:
        out = {
            "claim_id": self.claim_id,
            "anchor": self.anchor,
            "inputs_digest": self.inputs_digest,
            "measured": _canon(self.measured),
            "bound": _canon(self.bound),
            "slack": _canon(self.slack),
            "status": self.status,
            "details": _canon(self.details),
        }
        if include_runtime:
            out["runtime_ms"] = _canon(self.runtime_ms)
        return out


def make_report(
    claim_id: str,
    anchor: str,
    measured: float,
    bound: float,
    *,
    inputs: Any = None,
    seed: int | None = None,
    tol: float = DEFAULT_TOL,
    status: str | None = None,
    details: dict | None = None,
    runtime_ms: float = 0.0,
) -> VerificationReport:
    """Build a report for the claim ``measured <= bound`` (within ``tol``)."""
    m = float(measured)
    b = float(bound)
    slack = b - m
    if status is None:
        status = "pass" if m <= b + tol else "fail"
    return VerificationReport(
        claim_id=claim_id,
        anchor=anchor,
        measured=m,
        bound=b,
        slack=slack,
        status=status,
        inputs_digest={"hash": digest(inputs), "seed": seed},
        runtime_ms=runtime_ms,
        details=dict(details or {}),
    )


def sort_reports(reports: Iterable[VerificationReport]) -> list[VerificationReport]:
    return sorted(reports, key=lambda r: (r.claim_id, r.inputs_digest.get("hash", "")))


def reports_to_json(reports: Iterable[VerificationReport], meta: dict | None = None) -> str:
    """Deterministic JSON document (runtime is reported separately)."""
    doc = {
        "schema": SCHEMA_VERSION,
        "meta": _canon(meta or {}),
        "reports": [r.to_dict() for r in sort_reports(reports)],
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _fmt(x: Any) -> str:
    c = _canon(x)
    if isinstance(c, dict) and "lo" in c:
        return f"[{c['lo']},{c['hi']}]"
    if isinstance(c, float):
        return repr(c)
    return str(c)


def reports_to_csv(reports: Iterable[VerificationReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["claim_id", "measured", "bound", "slack", "status"])
    for r in sort_reports(reports):
        w.writerow([r.claim_id, _fmt(r.measured), _fmt(r.bound), _fmt(r.slack), r.status])
    return buf.getvalue()


def any_failed(reports: Iterable[VerificationReport]) -> bool:
    return any(r.failed for r in reports)
