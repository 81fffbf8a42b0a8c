"""File formats and argument parsing shared by the command line."""

from __future__ import annotations

import json
import re
from pathlib import Path

from .algebra import AlgebraElement
from .errors import MalformedInput
from .field import Field, make_field
from .lattice import Lattice
from .linalg import JetMatrix
from .series import LaurentJet

__all__ = ["load_json", "dump_json", "parse_monomial", "load_lattice", "load_matrix",
           "load_witness", "write_json"]

_MONO = re.compile(r"^\s*(?:([+-]?\d+)\s*\*?\s*)?(?:(-)?\s*t(?:\s*\^\s*\(?\s*([+-]?\d+)\s*\)?)?)?\s*$")


def load_json(path) -> object:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise MalformedInput(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def dump_json(obj) -> str:
    # sorted keys and fixed separators keep reports byte-identical across runs
    return json.dumps(obj, sort_keys=True, indent=1)


def write_json(path, obj):
    Path(path).write_text(dump_json(obj) + "\n")


def parse_monomial(field: Field, text: str) -> LaurentJet:
    """Parse ``c*t^m`` (also ``t``, ``t^-2``, ``3``, ``-t``) into an exact jet in u = t^(1/3)."""
    m = _MONO.match(text or "")
    if not m or not text.strip():
        raise MalformedInput(f"bad monomial {text!r}; expected c*t^m")
    coef, neg, exp = m.groups()
    has_t = "t" in text
    c = int(coef) if coef is not None else 1
    if neg:
        c = -c
    e = int(exp) if exp is not None else (1 if has_t else 0)
    if c % field.char == 0 if field.char else c == 0:
        raise MalformedInput(f"monomial {text!r} is zero")
    return LaurentJet.monomial(field, field.coerce(c), 3 * e)


def _field_of(obj, default):
    if isinstance(obj, dict) and "field" in obj:
        return make_field(obj["field"])
    return default


def load_lattice(path, field: Field | None = None) -> Lattice:
    obj = load_json(path)
    if not isinstance(obj, dict):
        raise MalformedInput(f"{path}: lattice file must be an object")
    f = _field_of(obj, field or make_field(7))
    return Lattice.from_json(obj, f)


def load_matrix(path, field: Field) -> JetMatrix:
    """A JetMatrix file: either a bare row-major array or ``{"field":…, "matrix":…}``."""
    obj = load_json(path)
    f = _field_of(obj, field)
    if isinstance(obj, dict):
        obj = obj.get("matrix", obj.get("g"))
    M = JetMatrix.from_json(f, obj)
    if M.shape != (8, 8):
        raise MalformedInput(f"{path}: expected an 8x8 matrix")
    return M


def load_witness(path, field: Field) -> AlgebraElement:
    obj = load_json(path)
    f = _field_of(obj, field)
    if isinstance(obj, dict):
        obj = obj.get("witness", obj.get("coords"))
    if not isinstance(obj, list) or len(obj) != 8:
        raise MalformedInput(f"{path}: a witness is an array of 8 jets")
    return AlgebraElement.from_json(f, obj)
