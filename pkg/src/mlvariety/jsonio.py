"""JSON formats for forms, maps, varieties and certificates.

Round trips are bit exact: coefficients are flat integer arrays in
lexicographic order with the first support factor outermost, support indices
are 1-based on the wire, and rationals are "numerator/denominator" strings.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from .construct import SubvarietyCertificate
from .errors import PreconditionError
from .forms import MultilinearForm, MultilinearMap, Shape
from .variety import Variety

FORMAT_VERSION = "1"


def frac_to_str(fr: Fraction) -> str:
    return str(Fraction(fr))


def frac_from_str(s) -> Fraction:
    return Fraction(str(s))


def shape_to_obj(shape: Shape) -> dict:
    return {"p": shape.p, "k": shape.k, "dims": list(shape.dims)}


def shape_from_obj(obj) -> Shape:
    shape = Shape(int(obj["p"]), tuple(int(n) for n in obj["dims"]))
    if "k" in obj and int(obj["k"]) != shape.k:
        raise PreconditionError(f"k={obj['k']} does not match {len(obj['dims'])} dims")
    return shape


def form_to_obj(form: MultilinearForm) -> dict:
    return {
        "p": form.shape.p,
        "k": form.shape.k,
        "dims": list(form.shape.dims),
        "support": [j + 1 for j in form.support],
        "coeffs": [int(c) for c in form.coeffs.reshape(-1)],
    }


def form_from_obj(obj, shape: Shape | None = None) -> MultilinearForm:
    found = shape_from_obj(obj)
    if shape is not None and found != shape:
        raise PreconditionError("form shape does not match the enclosing shape")
    support = tuple(int(j) - 1 for j in obj["support"])
    if any(j < 0 for j in support):
        raise PreconditionError("support indices are 1-based")
    return MultilinearForm(found, support, np.array(obj["coeffs"], dtype=np.int64))


def map_to_obj(m: MultilinearMap) -> dict:
    return {
        "p": m.shape.p,
        "k": m.shape.k,
        "dims": list(m.shape.dims),
        "support": [j + 1 for j in m.support],
        "codomain_dim": m.codomain_dim,
        "components": [[int(c) for c in f.coeffs.reshape(-1)] for f in m.components],
    }


def map_from_obj(obj) -> MultilinearMap:
    shape = shape_from_obj(obj)
    support = tuple(int(j) - 1 for j in obj["support"])
    comps = [
        MultilinearForm(shape, support, np.array(row, dtype=np.int64))
        for row in obj["components"]
    ]
    if "codomain_dim" in obj and int(obj["codomain_dim"]) != len(comps):
        raise PreconditionError("codomain_dim does not match the component count")
    return MultilinearMap(shape, support, comps)


def variety_to_obj(v: Variety) -> dict:
    out = {
        "format_version": FORMAT_VERSION,
        "shape": shape_to_obj(v.shape),
    }
    if v.is_empty:
        out["empty"] = True
        out["forms"] = []
    else:
        out["forms"] = [form_to_obj(f) for f in v.forms]
    return out


def variety_from_obj(obj) -> Variety:
    shape = shape_from_obj(obj["shape"])
    if obj.get("empty"):
        return Variety.empty(shape)
    forms = [form_from_obj(f, shape) for f in obj.get("forms", [])]
    return Variety(shape, forms)


def _ledger_record_to_obj(record: dict) -> dict:
    out = {}
    for key, value in record.items():
        if isinstance(value, Fraction):
            out[key] = frac_to_str(value)
        elif key == "directions" and value is not None:
            out[key] = [
                {
                    **d,
                    "min_fiber_density": frac_to_str(d["min_fiber_density"]),
                }
                for d in value
            ]
        else:
            out[key] = value
    return out


def _ledger_record_from_obj(obj: dict) -> dict:
    out = {}
    for key, value in obj.items():
        if key in ("c", "c_prime", "c_double_prime", "epsilon") and value is not None:
            out[key] = frac_from_str(value)
        elif key == "directions" and value is not None:
            out[key] = [
                {**d, "min_fiber_density": frac_from_str(d["min_fiber_density"])}
                for d in value
            ]
        else:
            out[key] = value
    return out


def certificate_to_obj(cert: SubvarietyCertificate, config: dict | None = None) -> dict:
    out = {
        "format_version": FORMAT_VERSION,
        "input_density": frac_to_str(cert.input_density),
        "output_codim": cert.output_codim,
        "budget": cert.budget,
        "containment_verified": cert.containment_verified,
        "output": variety_to_obj(cert.output),
        "ledger": [_ledger_record_to_obj(r) for r in cert.ledger],
    }
    if config is not None:
        out["config"] = config
    return out


def certificate_from_obj(obj) -> SubvarietyCertificate:
    return SubvarietyCertificate(
        input_density=frac_from_str(obj["input_density"]),
        output=variety_from_obj(obj["output"]),
        output_codim=int(obj["output_codim"]),
        budget=int(obj["budget"]),
        ledger=tuple(_ledger_record_from_obj(r) for r in obj["ledger"]),
        containment_verified=bool(obj["containment_verified"]),
    )


def dump_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2) + "\n")


def load_json(path):
    return json.loads(Path(path).read_text())
