"""JSON descriptors for algebras, elements, operators and gallery cases.

Complex numbers are written as [re, im] pairs.  Every report produced here
carries ``schema_version``.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .algebra import AlgElement, FiniteVNA
from .errors import StructureError
from .gallery import GalleryCase, builtin_cases
from .operators import (Conjugation, JordanMap, Kraus, LpOperator, Schur, WbJTriple, conjugation,
                        from_matrix, from_wbj, kraus, schur)

SCHEMA_VERSION = "1.0"


def _complex(z) -> complex:
    if isinstance(z, (list, tuple)):
        if len(z) != 2:
            raise StructureError(f"complex entries are [re, im] pairs, got {z!r}")
        re, im = z
    else:
        re, im = z, 0.0
    try:
        re, im = float(re), float(im)
    except (TypeError, ValueError) as err:
        raise StructureError(f"not a number: {z!r}") from err
    if not (math.isfinite(re) and math.isfinite(im)):
        raise StructureError("NaN or Inf entry")
    return complex(re, im)


def matrix_to_json(a: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(a, dtype=complex)]


def matrix_from_json(data, square: bool = True) -> np.ndarray:
    if not isinstance(data, list) or not data or not all(isinstance(r, list) for r in data):
        raise StructureError("a matrix is a nonempty list of rows")
    n = len(data[0])
    if any(len(r) != n for r in data):
        raise StructureError("ragged matrix")
    if square and len(data) != n:
        raise StructureError(f"block must be square, got {len(data)} x {n}")
    return np.array([[_complex(z) for z in row] for row in data], dtype=complex)


def algebra_to_dict(M: FiniteVNA) -> dict:
    return {"blocks": [{"dim": b.dim, "weight": b.weight} for b in M.blocks]}


def algebra_from_dict(data: dict) -> FiniteVNA:
    try:
        blocks = data["blocks"]
        dims = [int(b["dim"]) for b in blocks]
        weights = [float(b.get("weight", 1.0)) for b in blocks]
    except (KeyError, TypeError) as err:
        raise StructureError("algebra descriptor needs blocks with dim and weight") from err
    if not all(math.isfinite(w) for w in weights):
        raise StructureError("NaN or Inf weight")
    return FiniteVNA.from_dims(dims, weights)


def element_to_json(x: AlgElement) -> list:
    return [matrix_to_json(b) for b in x.blocks]


def element_from_json(M: FiniteVNA, data) -> AlgElement:
    if not isinstance(data, list) or len(data) != M.n_blocks:
        raise StructureError(f"element needs {M.n_blocks} blocks")
    return M.element([matrix_from_json(b) for b in data])


def operator_to_dict(T: LpOperator) -> dict:
    f = T.form
    out = {"algebra": algebra_to_dict(T.parent), "kind": T.kind}
    if isinstance(f, Kraus):
        out["a"] = [element_to_json(x) for x in f.a]
        out["b"] = [element_to_json(x) for x in f.b]
    elif isinstance(f, Conjugation):
        out["r"] = element_to_json(f.r)
    elif isinstance(f, Schur):
        out["m"] = element_to_json(f.m)
    elif isinstance(f, WbJTriple):
        out["w"] = element_to_json(f.w)
        out["b"] = element_to_json(f.b)
        out["J"] = matrix_to_json(f.J.matrix)
    else:
        out["matrix"] = matrix_to_json(T.matrix)
    return out


def operator_from_dict(data: dict, M: FiniteVNA | None = None) -> LpOperator:
    kind = data.get("kind")
    if kind == "gallery":
        return load_case(data["name"]).operator
    if M is None:
        if "algebra" not in data:
            raise StructureError("operator descriptor needs an algebra")
        M = algebra_from_dict(data["algebra"])
    try:
        if kind == "kraus":
            a = [element_from_json(M, x) for x in data["a"]]
            b = [element_from_json(M, x) for x in data["b"]]
            return kraus(a, b)
        if kind == "conjugation":
            return conjugation(element_from_json(M, data["r"]))
        if kind == "schur":
            return schur(element_from_json(M, data["m"]))
        if kind == "dense":
            return from_matrix(M, matrix_from_json(data["matrix"]))
        if kind == "wbj":
            J = JordanMap.analyzed(M, matrix_from_json(data["J"]))
            return from_wbj(element_from_json(M, data["w"]), element_from_json(M, data["b"]), J)
    except KeyError as err:
        raise StructureError(f"{kind} descriptor is missing {err}") from err
    raise StructureError(f"unknown operator kind {kind!r}")


# -- gallery cases -------------------------------------------------------------------

def case_to_dict(case: GalleryCase) -> dict:
    return to_jsonable({"name": case.name, "algebra": algebra_to_dict(case.algebra),
                        "operator": operator_to_dict(case.operator),
                        "expected": case.expected, "parameters": case.parameters})


def case_from_dict(data: dict) -> GalleryCase:
    M = algebra_from_dict(data["algebra"])
    T = operator_from_dict(data["operator"], M)
    return GalleryCase(data["name"], M, T, list(data.get("expected", [])),
                       dict(data.get("parameters", {})))


def load_case(name: str) -> GalleryCase:
    cases = builtin_cases()
    if name not in cases:
        raise StructureError(f"unknown gallery case {name!r}; try `gallery list`")
    return cases[name]()


# -- reports --------------------------------------------------------------------------

def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, AlgElement):
        return element_to_json(obj)
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return to_jsonable(obj.tolist())
        return obj.tolist()
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def report(kind: str, payload: dict) -> dict:
    out = {"schema_version": SCHEMA_VERSION, "report": kind}
    out.update(to_jsonable(payload))
    return out


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, allow_nan=True)
