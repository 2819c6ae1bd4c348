"""JSON file formats: pds-1 (disk systems), css-1 (contact segments),
graph-1 (abstract graphs).

Coordinates are JSON integers or "p/q" strings for non-integral rationals.
All emitters are deterministic: sorted keys, fixed separators, records in
input order.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .errors import ValidationError
from .geometry import (
    ContactSegment,
    ContactSegmentSystem,
    PseudoDisk,
    PseudoDiskSystem,
)
from .graphs import IntersectionGraph


def coord_to_json(x):
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return int(x)
        return f"{x.numerator}/{x.denominator}"
    raise ValidationError(f"unsupported coordinate type {type(x).__name__}")


def coord_from_json(v):
    if isinstance(v, bool):
        raise ValidationError(f"bad coordinate {v!r}")
    if isinstance(v, int):
        return v
    if isinstance(v, str):
        num, sep, den = v.partition("/")
        try:
            if sep:
                f = Fraction(int(num), int(den))
            else:
                f = Fraction(int(num))
        except (ValueError, ZeroDivisionError) as e:
            raise ValidationError(f"bad coordinate {v!r}: {e}") from None
        return int(f) if f.denominator == 1 else f
    raise ValidationError(f"bad coordinate {v!r} (expected int or 'p/q' string)")


def _point_to_json(p):
    return [coord_to_json(p[0]), coord_to_json(p[1])]


def _point_from_json(v, where):
    if not (isinstance(v, list) and len(v) == 2):
        raise ValidationError(f"{where}: point must be a [x, y] pair, got {v!r}")
    return (coord_from_json(v[0]), coord_from_json(v[1]))


def system_to_json(system: PseudoDiskSystem) -> dict:
    return {
        "format": "pds-1",
        "disks": [
            {"id": d.id, "polygon": [_point_to_json(p) for p in d.polygon]}
            for d in system.disks
        ],
    }


def system_from_json(doc: dict) -> PseudoDiskSystem:
    if doc.get("format") != "pds-1":
        raise ValidationError(f"expected format pds-1, got {doc.get('format')!r}")
    disks = []
    for i, rec in enumerate(doc.get("disks", [])):
        if "id" not in rec or "polygon" not in rec:
            raise ValidationError(f"disks[{i}]: missing id or polygon")
        poly = [_point_from_json(p, f"disks[{i}].polygon[{j}]")
                for j, p in enumerate(rec["polygon"])]
        disks.append(PseudoDisk.make(str(rec["id"]), poly))
    return PseudoDiskSystem(disks)


def contact_to_json(css: ContactSegmentSystem) -> dict:
    return {
        "format": "css-1",
        "segments": [
            {"id": s.id, "a": _point_to_json(s.a), "b": _point_to_json(s.b)}
            for s in css.segments
        ],
    }


def contact_from_json(doc: dict) -> ContactSegmentSystem:
    if doc.get("format") != "css-1":
        raise ValidationError(f"expected format css-1, got {doc.get('format')!r}")
    segs = []
    for i, rec in enumerate(doc.get("segments", [])):
        if "id" not in rec or "a" not in rec or "b" not in rec:
            raise ValidationError(f"segments[{i}]: missing id, a or b")
        segs.append(ContactSegment(
            str(rec["id"]),
            _point_from_json(rec["a"], f"segments[{i}].a"),
            _point_from_json(rec["b"], f"segments[{i}].b"),
        ))
    return ContactSegmentSystem(segs)


def graph_to_json(graph: IntersectionGraph) -> dict:
    return {
        "format": "graph-1",
        "vertices": graph.vertices(),
        "edges": [[u, v] for u, v in graph.edges()],
    }


def graph_from_json(doc: dict) -> IntersectionGraph:
    if doc.get("format") != "graph-1":
        raise ValidationError(f"expected format graph-1, got {doc.get('format')!r}")
    g = IntersectionGraph()
    for v in doc.get("vertices", []):
        g.add_vertex(str(v))
    for i, e in enumerate(doc.get("edges", [])):
        if not (isinstance(e, list) and len(e) == 2):
            raise ValidationError(f"edges[{i}]: expected [u, v], got {e!r}")
        u, v = str(e[0]), str(e[1])
        if u not in g or v not in g:
            raise ValidationError(f"edges[{i}]: endpoint not in vertices")
        g.add_edge(u, v)
    return g


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def load_any(text: str):
    """Parse any known format, returning the typed object."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationError(f"not valid JSON: line {e.lineno} col {e.colno}: {e.msg}") from None
    if not isinstance(doc, dict):
        raise ValidationError("top level must be a JSON object")
    fmt = doc.get("format")
    if fmt == "pds-1":
        return system_from_json(doc)
    if fmt == "css-1":
        return contact_from_json(doc)
    if fmt == "graph-1":
        return graph_from_json(doc)
    raise ValidationError(f"unknown format {fmt!r}")


def save_path(path: str, doc: dict):
    with open(path, "w") as fh:
        fh.write(dumps(doc))


def load_path(path: str):
    with open(path) as fh:
        return load_any(fh.read())
