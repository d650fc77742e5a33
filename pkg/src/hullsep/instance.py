"""JSON instance files: two bodies named "K" and "K_prime".

    {
      "name": "pentagon",
      "K": {"point_set": [[0, 0], [4, 3]]},
      "K_prime": {"ball": {"center": [1, 5], "radius": 0.5}},
      "start": {"p": [0, 0], "p_prime": [1, 5]},
      "expected": {...}
    }

A polytope is {"polytope": {"A": [[...], ...], "b": [...]}}. Floats are
written with repr, which round-trips every float64 exactly.
"""
import json
from dataclasses import dataclass, field

import numpy as np

from .bodies import BallBody, PointSetBody, PolytopeBody
from .errors import DimensionMismatch, EmptyBody, ParseError

BODY_KEYS = ("point_set", "ball", "polytope")


@dataclass
class Instance:
    K: object
    K_prime: object
    start: tuple | None = None
    name: str | None = None
    expected: dict = field(default_factory=dict)


def _number(x, where):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ParseError(f"{where}: expected a number, got {type(x).__name__}")
    if not np.isfinite(x):
        raise ParseError(f"{where}: number must be finite")
    return float(x)


def _row(xs, where):
    if not isinstance(xs, list) or not xs:
        raise ParseError(f"{where}: expected a nonempty list of numbers")
    return [_number(x, f"{where}[{i}]") for i, x in enumerate(xs)]


def _matrix(rows, where):
    if not isinstance(rows, list) or not rows:
        raise ParseError(f"{where}: expected a nonempty list of rows")
    out = [_row(r, f"{where}[{i}]") for i, r in enumerate(rows)]
    widths = {len(r) for r in out}
    if len(widths) != 1:
        raise DimensionMismatch(f"{where}: rows have differing lengths {sorted(widths)}")
    return np.array(out)


def parse_body(doc, where):
    if not isinstance(doc, dict):
        raise ParseError(f"{where}: expected an object with one of {BODY_KEYS}")
    kinds = [k for k in BODY_KEYS if k in doc]
    if len(kinds) != 1:
        raise ParseError(f"{where}: expected exactly one of {BODY_KEYS}, found {sorted(doc)}")
    kind = kinds[0]
    val = doc[kind]
    w = f"{where}.{kind}"
    if kind == "point_set":
        if isinstance(val, list) and not val:
            raise EmptyBody(f"{w}: point set needs at least one point")
        return PointSetBody(_matrix(val, w))
    if kind == "ball":
        if not isinstance(val, dict) or "center" not in val or "radius" not in val:
            raise ParseError(f"{w}: expected keys 'center' and 'radius'")
        r = _number(val["radius"], f"{w}.radius")
        if r <= 0:
            raise ParseError(f"{w}.radius: must be positive")
        return BallBody(_row(val["center"], f"{w}.center"), r)
    if not isinstance(val, dict) or "A" not in val or "b" not in val:
        raise ParseError(f"{w}: expected keys 'A' and 'b'")
    A = _matrix(val["A"], f"{w}.A")
    b = np.array(_row(val["b"], f"{w}.b"))
    if A.shape[0] != b.shape[0]:
        raise DimensionMismatch(f"{w}: A has {A.shape[0]} rows, b has {b.shape[0]} entries")
    return PolytopeBody(A, b)


def parse_instance_text(text, source="<string>"):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ParseError(f"{source}: top level must be an object")
    for key in ("K", "K_prime"):
        if key not in doc:
            raise ParseError(f"{source}: missing body '{key}'")
    K = parse_body(doc["K"], "K")
    Kp = parse_body(doc["K_prime"], "K_prime")
    if K.dim != Kp.dim:
        raise DimensionMismatch(f"K has dimension {K.dim}, K_prime has {Kp.dim}")
    start = None
    if doc.get("start") is not None:
        s = doc["start"]
        if not isinstance(s, dict) or "p" not in s or "p_prime" not in s:
            raise ParseError("start: expected keys 'p' and 'p_prime'")
        start = (np.array(_row(s["p"], "start.p")), np.array(_row(s["p_prime"], "start.p_prime")))
    name = doc.get("name")
    if name is not None and not isinstance(name, str):
        raise ParseError("name: expected a string")
    expected = doc.get("expected") or {}
    if not isinstance(expected, dict):
        raise ParseError("expected: expected an object")
    return Instance(K, Kp, start, name, expected)


def parse_instance(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from None
    return parse_instance_text(text, str(path))


def body_to_dict(body):
    if isinstance(body, PointSetBody):
        return {"point_set": body.points.tolist()}
    if isinstance(body, BallBody):
        return {"ball": {"center": body.center.tolist(), "radius": body.radius}}
    if isinstance(body, PolytopeBody):
        return {"polytope": {"A": body.A.tolist(), "b": body.b.tolist()}}
    raise TypeError(f"cannot serialize {type(body).__name__}")


def instance_to_dict(inst):
    doc = {}
    if inst.name is not None:
        doc["name"] = inst.name
    doc["K"] = body_to_dict(inst.K)
    doc["K_prime"] = body_to_dict(inst.K_prime)
    if inst.start is not None:
        doc["start"] = {"p": np.asarray(inst.start[0]).tolist(), "p_prime": np.asarray(inst.start[1]).tolist()}
    if inst.expected:
        doc["expected"] = inst.expected
    return doc


def emit_instance(inst):
    return json.dumps(instance_to_dict(inst), indent=2) + "\n"
