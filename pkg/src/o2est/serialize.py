"""JSON serialisation of families, representations and unitary sections.

Arrays are stored as base64 of their little-endian complex128 (or
float64) bytes, together with dtype and shape, so round trips are exact.
"""

from __future__ import annotations

import base64
import json
from typing import Any

import numpy as np

from .errors import InputError
from .paths import Rep, UnitarySection
from .synthetic import SyntheticFamily

FORMAT_VERSION = 1
_DTYPES = {"complex128": "<c16", "float64": "<f8"}


def encode_array(a: np.ndarray) -> dict:
    a = np.asarray(a)
    kind = "complex128" if np.iscomplexobj(a) else "float64"
    data = np.ascontiguousarray(a, dtype=_DTYPES[kind]).tobytes()
    return {"dtype": kind, "shape": list(a.shape), "data": base64.b64encode(data).decode("ascii")}


def decode_array(obj: dict) -> np.ndarray:
    try:
        dtype = _DTYPES[obj["dtype"]]
        raw = base64.b64decode(obj["data"])
        return np.frombuffer(raw, dtype=dtype).reshape(obj["shape"]).copy()
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(f"malformed array payload: {exc}") from exc


def rep_to_dict(rep: Rep) -> dict:
    out = {"kind": "rep", "t": rep.t, "images": encode_array(rep.images)}
    if rep.frame is not None:
        out["frame"] = encode_array(rep.frame)
    return out


def rep_from_dict(d: dict) -> Rep:
    frame = decode_array(d["frame"]) if "frame" in d else None
    return Rep(float(d["t"]), decode_array(d["images"]), frame)


def section_to_dict(sec: UnitarySection) -> dict:
    return {"kind": "unitary-section", "points": encode_array(sec.points), "values": encode_array(sec.values)}


def section_from_dict(d: dict) -> UnitarySection:
    return UnitarySection(decode_array(d["points"]), decode_array(d["values"]))


def family_to_dict(fam: SyntheticFamily) -> dict:
    return {
        "kind": "synthetic-family",
        "N": fam.N,
        "sections": fam.sections,
        "nx": fam.nx,
        "exponent": fam.exponent,
        "constant": fam.constant,
        "noise": fam.noise,
        "seed": fam.seed,
        "driver": fam.driver,
        "claim_scale": fam.claim_scale,
        "base": encode_array(fam.base),
        "hams": encode_array(fam.hams),
    }


def family_from_dict(d: dict) -> SyntheticFamily:
    return SyntheticFamily(
        int(d["N"]), int(d["sections"]), int(d["nx"]), float(d["exponent"]), float(d["constant"]),
        float(d["noise"]), int(d["seed"]), decode_array(d["base"]), decode_array(d["hams"]),
        d.get("driver", "per-section"), float(d.get("claim_scale", 1.0)),
    )


_ENCODERS = {Rep: rep_to_dict, UnitarySection: section_to_dict, SyntheticFamily: family_to_dict}
_DECODERS = {"rep": rep_from_dict, "unitary-section": section_from_dict, "synthetic-family": family_from_dict}


def dumps(obj: Any) -> str:
    enc = _ENCODERS.get(type(obj))
    if enc is None:
        raise InputError(f"cannot serialise {type(obj).__name__}")
    return json.dumps({"format": FORMAT_VERSION, "payload": enc(obj)}, sort_keys=True)


def loads(text: str) -> Any:
    doc = json.loads(text)
    if doc.get("format") != FORMAT_VERSION:
        raise InputError(f"unsupported format {doc.get('format')!r}")
    payload = doc["payload"]
    dec = _DECODERS.get(payload.get("kind"))
    if dec is None:
        raise InputError(f"unknown payload kind {payload.get('kind')!r}")
    return dec(payload)
