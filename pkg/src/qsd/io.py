"""Instance-file schema, complex/matrix encoding and canonical JSON output.

Complex scalars are two-element arrays ``[re, im]``; matrices are row-major
lists of rows.  Canonical output sorts keys and prints floats with 17
significant digits, so serialize -> parse -> serialize is byte-identical.
"""
from __future__ import annotations

import dataclasses
import json
import math
from typing import Any

import jsonschema
import numpy as np

from .algebra import AlgebraInstance, RiggedTriplet, algebra_from_basis, build_full_matrix_algebra
from .derivations import Derivation, inner_derivation, tabulated_derivation
from .errors import InstanceError, QsdError
from .gns import PositiveFunctional, density_functional, vector_state

_number = {"type": "number"}
_complex = {"type": "array", "items": _number, "minItems": 2, "maxItems": 2}
_vector = {"type": "array", "items": _complex, "minItems": 1}
_matrix = {"type": "array", "items": _vector, "minItems": 1}

INSTANCE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "algebra": {
            "oneOf": [
                {
                    "type": "object",
                    "properties": {"full_matrix": {"type": "integer", "minimum": 1}},
                    "required": ["full_matrix"],
                    "additionalProperties": False,
                },
                {
                    "type": "object",
                    "properties": {
                        "basis": {"type": "array", "items": _matrix, "minItems": 1},
                        "labels": {"type": "array", "items": {"type": "string"}},
                    },
                    "required": ["basis"],
                    "additionalProperties": False,
                },
            ]
        },
        "functional": {
            "oneOf": [
                {
                    "type": "object",
                    "properties": {"vector_state": _vector},
                    "required": ["vector_state"],
                    "additionalProperties": False,
                },
                {
                    "type": "object",
                    "properties": {"density": _matrix},
                    "required": ["density"],
                    "additionalProperties": False,
                },
            ]
        },
        "derivation": {
            "oneOf": [
                {
                    "type": "object",
                    "properties": {"inner": _matrix},
                    "required": ["inner"],
                    "additionalProperties": False,
                },
                {
                    "type": "object",
                    "properties": {"table": {"type": "array", "items": _matrix, "minItems": 1}},
                    "required": ["table"],
                    "additionalProperties": False,
                },
            ]
        },
        "triplet": {
            "type": "object",
            "properties": {"weights": {"type": "array", "items": {"type": "number", "minimum": 1}, "minItems": 1}},
            "required": ["weights"],
            "additionalProperties": False,
        },
        "family": {
            "type": "object",
            "properties": {
                "model": {"enum": ["boson", "spin", "explicit"]},
                "modes": {"type": "integer", "minimum": 1},
                "nmax": {"type": "integer", "minimum": 1},
                "lmax": {"type": "integer", "minimum": 0},
                "vector": {"type": "string", "pattern": "^number:[0-9]+$"},
                "vmax": {"type": "integer", "minimum": 1},
                "state": {"enum": ["up", "alternating"]},
                "generators": {"type": "array", "items": _matrix, "minItems": 1},
                "limit": _matrix,
                "cyclic_vector": _vector,
            },
            "required": ["model"],
            "additionalProperties": False,
        },
    },
    "required": ["algebra"],
    "additionalProperties": False,
}


def encode_complex(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def encode_vector(v) -> list:
    return [encode_complex(z) for z in np.asarray(v).reshape(-1)]


def encode_matrix(m) -> list:
    return [encode_vector(row) for row in np.atleast_2d(np.asarray(m))]


def decode_vector(data) -> np.ndarray:
    return np.array([complex(re, im) for re, im in data], dtype=complex)


def decode_matrix(data, path: str = "$") -> np.ndarray:
    rows = [decode_vector(r) for r in data]
    if any(len(r) != len(rows) for r in rows):
        raise InstanceError(path, "matrix must be square")
    return np.array(rows, dtype=complex)


def _path(error: jsonschema.ValidationError) -> str:
    p = "$"
    for part in error.absolute_path:
        p += f"[{part}]" if isinstance(part, int) else f".{part}"
    return p


def validate_instance(doc: dict) -> None:
    validator = jsonschema.Draft202012Validator(INSTANCE_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: (list(e.absolute_path), e.message))
    if errors:
        best = jsonschema.exceptions.best_match(errors)
        raise InstanceError(_path(best), best.message)


@dataclasses.dataclass
class Instance:
    raw: dict
    algebra: AlgebraInstance
    functional: PositiveFunctional | None = None
    derivation: Derivation | None = None
    triplet: RiggedTriplet | None = None
    family: dict | None = None


def parse_instance(doc: dict) -> Instance:
    """Validate against :data:`INSTANCE_SCHEMA` and build the typed objects."""
    validate_instance(doc)

    def at(path, fn, *args):
        try:
            return fn(*args)
        except InstanceError:
            raise
        except (QsdError, ValueError) as exc:
            raise InstanceError(path, str(exc)) from exc

    a = doc["algebra"]
    if "full_matrix" in a:
        alg = at("$.algebra.full_matrix", build_full_matrix_algebra, a["full_matrix"])
    else:
        basis = [decode_matrix(m, f"$.algebra.basis[{k}]") for k, m in enumerate(a["basis"])]
        alg = at("$.algebra.basis", algebra_from_basis, basis, a.get("labels"))
    inst = Instance(raw=doc, algebra=alg)

    if "functional" in doc:
        f = doc["functional"]
        if "vector_state" in f:
            inst.functional = at("$.functional.vector_state", vector_state, alg, decode_vector(f["vector_state"]))
        else:
            rho = decode_matrix(f["density"], "$.functional.density")
            inst.functional = at("$.functional.density", density_functional, alg, rho)

    if "derivation" in doc:
        d = doc["derivation"]
        if "inner" in d:
            inst.derivation = at("$.derivation.inner", inner_derivation, decode_matrix(d["inner"]), alg)
        else:
            imgs = [decode_matrix(m, f"$.derivation.table[{k}]") for k, m in enumerate(d["table"])]
            inst.derivation = at("$.derivation.table", tabulated_derivation, alg, imgs)

    if "triplet" in doc:
        w = doc["triplet"]["weights"]
        if len(w) != alg.dim:
            raise InstanceError("$.triplet.weights", f"expected {alg.dim} weights, got {len(w)}")
        inst.triplet = RiggedTriplet(np.asarray(w, dtype=float))
    if "family" in doc:
        inst.family = doc["family"]
    return inst


def load_instance(path) -> Instance:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InstanceError("$", f"invalid JSON: {exc}") from exc
    return parse_instance(doc)


def instance_document(
    algebra: AlgebraInstance,
    functional: PositiveFunctional | None = None,
    derivation: Derivation | None = None,
    triplet: RiggedTriplet | None = None,
    full_matrix: bool = False,
) -> dict:
    """Inverse of :func:`parse_instance` for in-memory objects."""
    doc: dict[str, Any] = {}
    if full_matrix:
        doc["algebra"] = {"full_matrix": algebra.dim}
    else:
        doc["algebra"] = {"basis": [encode_matrix(b) for b in algebra.basis], "labels": list(algebra.labels)}
    if functional is not None:
        if functional.vector is not None:
            doc["functional"] = {"vector_state": encode_vector(functional.vector)}
        else:
            doc["functional"] = {"density": encode_matrix(functional.density)}
    if derivation is not None:
        if derivation.is_inner:
            doc["derivation"] = {"inner": encode_matrix(derivation.generator)}
        else:
            doc["derivation"] = {"table": [encode_matrix(y) for y in derivation.images]}
    if triplet is not None:
        doc["triplet"] = {"weights": [float(w) for w in triplet.weights]}
    return doc


# ---------------------------------------------------------------------------
# canonical JSON


def to_jsonable(obj):
    """Plain JSON types for reports: dataclasses, numpy arrays/scalars, complex numbers."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return to_jsonable(np.stack([obj.real, obj.imag], axis=-1).tolist())
        return to_jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return encode_complex(obj)
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    s = format(x, ".17g")
    if s == "-0":
        s = "0"
    return s


def canonical_dumps(obj) -> str:
    """Deterministic JSON: sorted keys, ``%.17g`` floats, non-finite floats as null."""
    obj = to_jsonable(obj)

    def enc(o) -> str:
        if o is None:
            return "null"
        if o is True:
            return "true"
        if o is False:
            return "false"
        if isinstance(o, int):
            return str(o)
        if isinstance(o, float):
            return _fmt_float(o)
        if isinstance(o, str):
            return json.dumps(o, ensure_ascii=True)
        if isinstance(o, dict):
            items = sorted(o.items())
            return "{" + ",".join(json.dumps(k) + ":" + enc(v) for k, v in items) + "}"
        if isinstance(o, (list, tuple)):
            return "[" + ",".join(enc(v) for v in o) + "]"
        raise TypeError(f"cannot serialize {type(o).__name__}")

    return enc(obj) + "\n"
