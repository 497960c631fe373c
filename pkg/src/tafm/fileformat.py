"""The ``tafm-1`` JSON document format for instances and fractional assignments.

Numbers are written as integer literals or ``"p/q"`` strings, never as
binary floats.  Jobs and machines are 1-based on disk.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Union

from .core import (
    EdgeSet,
    FractionalAssignment,
    Instance,
    InstanceError,
    Variant,
    check_instance,
    format_rational,
    parse_rational,
)

FORMAT_VERSION = "tafm-1"


class FormatError(ValueError):
    pass


def encode_rational(q: Fraction) -> Union[int, str]:
    return q.numerator if q.denominator == 1 else format_rational(q)


def decode_rational(raw: Any, where: str) -> Fraction:
    if isinstance(raw, bool) or not isinstance(raw, (int, str)):
        raise FormatError(f"{where}: expected an integer or a \"p/q\" string, got {raw!r}")
    if isinstance(raw, int):
        return Fraction(raw)
    try:
        return parse_rational(raw)
    except (ValueError, ZeroDivisionError) as exc:
        raise FormatError(f"{where}: {exc}") from None


def _matrix(doc: dict, key: str, n: int, m: int) -> list[list[Fraction]]:
    rows = doc.get(key)
    if not isinstance(rows, list) or len(rows) != n:
        raise FormatError(f"{key}: expected {n} rows")
    out = []
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != m:
            raise FormatError(f"{key}[{i + 1}]: expected {m} entries")
        out.append([decode_rational(v, f"{key}[{i + 1}][{j + 1}]") for j, v in enumerate(row)])
    return out


def _header(doc: Any, kind: str) -> tuple[int, int]:
    if not isinstance(doc, dict):
        raise FormatError("document must be a JSON object")
    if doc.get("format_version") != FORMAT_VERSION:
        raise FormatError(f"unsupported format_version {doc.get('format_version')!r}; expected {FORMAT_VERSION!r}")
    if doc.get("kind", "instance") != kind:
        raise FormatError(f"expected a {kind} document, got {doc.get('kind')!r}")
    n, m = doc.get("n"), doc.get("m")
    for name, v in (("n", n), ("m", m)):
        if isinstance(v, bool) or not isinstance(v, int) or v < 1:
            raise FormatError(f"{name} must be a positive integer")
    return n, m


def instance_to_dict(inst: Instance, E: EdgeSet) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "kind": "instance",
        "variant": inst.variant.value,
        "n": inst.n,
        "m": inst.m,
        "values": [[encode_rational(v) for v in row] for row in inst.values],
        "sizes": [[encode_rational(v) for v in row] for row in inst.sizes],
        "capacities": [encode_rational(c) for c in inst.capacities],
        "edges": [[i + 1, j + 1] for i, j in E],
    }


def instance_from_dict(doc: Any) -> tuple[Instance, EdgeSet]:
    n, m = _header(doc, "instance")
    try:
        variant = Variant(doc.get("variant"))
    except ValueError:
        raise FormatError(f"unknown variant {doc.get('variant')!r}") from None
    values = _matrix(doc, "values", n, m)
    sizes = _matrix(doc, "sizes", n, m)
    caps = doc.get("capacities")
    if not isinstance(caps, list) or len(caps) != m:
        raise FormatError(f"capacities: expected {m} entries")
    capacities = [decode_rational(c, f"capacities[{j + 1}]") for j, c in enumerate(caps)]
    edges = set()
    for k, e in enumerate(doc.get("edges", [])):
        if (
            not isinstance(e, list)
            or len(e) != 2
            or not all(isinstance(t, int) and not isinstance(t, bool) for t in e)
            or not (1 <= e[0] <= n and 1 <= e[1] <= m)
        ):
            raise FormatError(f"edges[{k + 1}]: expected [job, machine] within [1..{n}]x[1..{m}]")
        edges.add((e[0] - 1, e[1] - 1))
    inst = Instance.create(values, sizes, capacities, variant)
    try:
        check_instance(inst)
    except InstanceError as exc:
        raise FormatError(f"invalid instance: {exc}") from None
    return inst, EdgeSet(n, m, frozenset(edges))


def fractional_to_dict(x: FractionalAssignment) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "kind": "fractional",
        "n": x.n,
        "m": x.m,
        "x": [[encode_rational(v) for v in row] for row in x.x],
    }


def fractional_from_dict(doc: Any) -> FractionalAssignment:
    n, m = _header(doc, "fractional")
    return FractionalAssignment(tuple(tuple(r) for r in _matrix(doc, "x", n, m)))


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"not valid JSON: {exc}") from None


def emit_instance(inst: Instance, E: EdgeSet) -> str:
    return dumps(instance_to_dict(inst, E))


def parse_instance(text: str) -> tuple[Instance, EdgeSet]:
    return instance_from_dict(loads(text))


def read_instance(path) -> tuple[Instance, EdgeSet]:
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read())


def read_fractional(path) -> FractionalAssignment:
    with open(path, encoding="utf-8") as fh:
        return fractional_from_dict(loads(fh.read()))
