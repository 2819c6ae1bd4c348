"""Exact planar geometry for pseudo-disk systems.

Coordinates are exact rationals, stored as plain ``int`` whenever the value is
integral and ``fractions.Fraction`` otherwise (integer-only predicates are an
order of magnitude faster, and all input coordinates are integers; crossing
points and derived constructions promote to Fraction).

A pseudo-disk is a simple, positively oriented polygon. A system is in general
position when every pair of boundaries either is disjoint, crosses
transversally at exactly two points, or one region contains the other; no
tangencies, no overlapping boundary stretches, no vertex of one polygon on
another boundary, and no point on three boundaries.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Iterable, Optional, Sequence

from .errors import PreconditionViolation, ValidationError

Coord = object  # int | Fraction
Point = tuple  # (Coord, Coord)


def nrm(x):
    """Normalize a rational to int when integral."""
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return int(x)
        return x
    return x


def pt(x, y) -> Point:
    return (nrm(x), nrm(y))


def orient(a: Point, b: Point, c: Point):
    """Twice the signed area of triangle abc; >0 when c is left of a->b."""
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def sgn(x) -> int:
    if x > 0:
        return 1
    if x < 0:
        return -1
    return 0


def on_segment(q: Point, a: Point, b: Point) -> bool:
    """True when q lies on the closed segment ab (exact)."""
    if orient(a, b, q) != 0:
        return False
    return (
        min(a[0], b[0]) <= q[0] <= max(a[0], b[0])
        and min(a[1], b[1]) <= q[1] <= max(a[1], b[1])
    )


def segment_crossing(a: Point, b: Point, c: Point, d: Point):
    """Classify the intersection of closed segments ab and cd.

    Returns (kind, point) with kind one of:
      "none"    - disjoint
      "proper"  - transversal interior-interior crossing, point is exact
      "touch"   - single shared point involving an endpoint or a vertex
      "overlap" - collinear segments sharing more than one point
    """
    o1 = sgn(orient(a, b, c))
    o2 = sgn(orient(a, b, d))
    o3 = sgn(orient(c, d, a))
    o4 = sgn(orient(c, d, b))
    if o1 != o2 and o3 != o4 and o1 != 0 and o2 != 0 and o3 != 0 and o4 != 0:
        return "proper", crossing_point(a, b, c, d)
    if o1 == 0 and o2 == 0 and o3 == 0 and o4 == 0:
        # collinear: project on the line's dominant axis
        dirv = (b[0] - a[0], b[1] - a[1])
        if dirv == (0, 0):
            dirv = (d[0] - c[0], d[1] - c[1])
        if dirv == (0, 0):
            return ("touch", a) if a == c else ("none", None)
        ax = 0 if abs(dirv[0]) >= abs(dirv[1]) else 1
        lo1, hi1 = sorted((a[ax], b[ax]))
        lo2, hi2 = sorted((c[ax], d[ax]))
        lo, hi = max(lo1, lo2), min(hi1, hi2)
        if lo > hi:
            return "none", None
        if lo == hi:
            p = a if a[ax] == lo else b if b[ax] == lo else c if c[ax] == lo else d
            return "touch", p
        return "overlap", None
    # at least one endpoint is collinear with the other segment
    for p, (u, v) in ((c, (a, b)), (d, (a, b)), (a, (c, d)), (b, (c, d))):
        if on_segment(p, u, v):
            return "touch", p
    return "none", None


def crossing_point(a: Point, b: Point, c: Point, d: Point) -> Point:
    """Exact intersection point of the lines ab and cd (must not be parallel)."""
    r = (b[0] - a[0], b[1] - a[1])
    s = (d[0] - c[0], d[1] - c[1])
    denom = r[0] * s[1] - r[1] * s[0]
    if denom == 0:
        raise PreconditionViolation("parallel segments have no crossing point")
    t = Fraction((c[0] - a[0]) * s[1] - (c[1] - a[1]) * s[0], denom)
    return pt(a[0] + t * r[0], a[1] + t * r[1])


def polygon_area2(poly: Sequence[Point]):
    """Twice the signed area (positive for counterclockwise)."""
    s = 0
    n = len(poly)
    for i in range(n):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % n]
        s += x1 * y2 - x2 * y1
    return s


def point_in_polygon(q: Point, poly: Sequence[Point]) -> str:
    """Exact location of q: "in", "out" or "boundary"."""
    n = len(poly)
    inside = False
    qx, qy = q
    for i in range(n):
        a = poly[i]
        b = poly[(i + 1) % n]
        if on_segment(q, a, b):
            return "boundary"
        if (a[1] > qy) != (b[1] > qy):
            o = orient(a, b, q)
            if b[1] > a[1]:
                if o > 0:
                    inside = not inside
            else:
                if o < 0:
                    inside = not inside
    return "in" if inside else "out"


def bbox(points: Iterable[Point]):
    xs = []
    ys = []
    for x, y in points:
        xs.append(x)
        ys.append(y)
    return min(xs), min(ys), max(xs), max(ys)


def boxes_overlap(b1, b2) -> bool:
    return not (b1[2] < b2[0] or b2[2] < b1[0] or b1[3] < b2[1] or b2[3] < b1[1])


def clean_polygon(points: Sequence[Point]) -> tuple:
    """Drop duplicate and straight-through vertices (region unchanged)."""
    pts = [pt(x, y) for x, y in points]
    out = []
    for p in pts:
        if not out or p != out[-1]:
            out.append(p)
    if len(out) > 1 and out[0] == out[-1]:
        out.pop()
    changed = True
    while changed and len(out) >= 3:
        changed = False
        for i in range(len(out)):
            a = out[i - 1]
            v = out[i]
            b = out[(i + 1) % len(out)]
            if orient(a, v, b) == 0 and on_segment(v, a, b):
                out.pop(i)
                changed = True
                break
    return tuple(out)


def polygon_simplicity_issue(poly: Sequence[Point]) -> Optional[str]:
    """None when the polygon is simple; otherwise a description."""
    n = len(poly)
    if n < 3:
        return "fewer than 3 distinct vertices"
    edges = [(poly[i], poly[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        a, b = edges[i]
        if a == b:
            return "zero-length edge"
        for j in range(i + 1, n):
            c, d = edges[j]
            adjacent = j == i + 1 or (i == 0 and j == n - 1)
            kind, p = segment_crossing(a, b, c, d)
            if adjacent:
                shared = b if j == i + 1 else a
                if kind == "overlap":
                    return "adjacent edges overlap"
                if kind in ("proper",):
                    return "adjacent edges cross"
                if kind == "touch" and p != shared:
                    return "adjacent edges touch beyond their shared vertex"
            else:
                if kind != "none":
                    return "non-adjacent edges intersect"
    return None


@dataclass(frozen=True)
class PseudoDisk:
    """A plane region bounded by a simple positively oriented polygon."""

    id: str
    polygon: tuple

    @staticmethod
    def make(id: str, points: Sequence[Point]) -> "PseudoDisk":
        return PseudoDisk(id=str(id), polygon=clean_polygon(points))

    def bbox(self):
        return bbox(self.polygon)

    def contains_point(self, q: Point) -> str:
        return point_in_polygon(q, self.polygon)

    def edges(self):
        n = len(self.polygon)
        for i in range(n):
            yield self.polygon[i], self.polygon[(i + 1) % n]


@dataclass(frozen=True)
class Issue:
    code: str
    message: str
    ids: tuple = ()


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    issues: tuple

    def raise_if_failed(self):
        if not self.ok:
            msgs = "; ".join(f"{i.code}: {i.message}" for i in self.issues[:5])
            raise ValidationError(f"invalid system: {msgs}", self.issues)


@dataclass(frozen=True)
class PairRelation:
    """Exact relation of two pseudo-disk boundaries.

    kind: "disjoint" | "crossing" | "contains" (first contains second) |
    "contained" (second contains first). crossings holds the transversal
    boundary crossing points together with the edge indices they lie on.
    """

    kind: str
    crossings: tuple  # of (point, edge_index_a, edge_index_b)

    @property
    def intersects(self) -> bool:
        return self.kind != "disjoint"


class PseudoDiskSystem:
    """An immutable collection of pseudo-disks with cached pair analysis."""

    def __init__(self, disks: Sequence[PseudoDisk]):
        self.disks = tuple(disks)
        self.by_id = {d.id: d for d in self.disks}
        if len(self.by_id) != len(self.disks):
            seen = set()
            dup = next(d.id for d in self.disks if d.id in seen or seen.add(d.id))
            raise ValidationError(f"duplicate disk id {dup!r}")
        self._pairs = {}

    def ids(self):
        return tuple(d.id for d in self.disks)

    def __len__(self):
        return len(self.disks)

    def subset(self, ids: Iterable[str]) -> "PseudoDiskSystem":
        keep = set(ids)
        sub = PseudoDiskSystem([d for d in self.disks if d.id in keep])
        # pair analysis is expensive; reuse what this system already knows
        for (i, j), rel in self._pairs.items():
            if i in keep and j in keep:
                sub._pairs[(i, j)] = rel
        return sub

    def without(self, ids: Iterable[str]) -> "PseudoDiskSystem":
        drop = set(ids)
        return self.subset(i for i in self.by_id if i not in drop)

    def replace(self, removals: Iterable[str], additions: Sequence[PseudoDisk]) -> "PseudoDiskSystem":
        drop = set(removals)
        disks = [d for d in self.disks if d.id not in drop]
        disks.extend(additions)
        sub = PseudoDiskSystem(disks)
        added = {d.id for d in additions}
        for (i, j), rel in self._pairs.items():
            if i in sub.by_id and j in sub.by_id and i not in added and j not in added:
                sub._pairs[(i, j)] = rel
        return sub

    def pair_relation(self, id1: str, id2: str) -> PairRelation:
        key = (id1, id2) if id1 < id2 else (id2, id1)
        rel = self._pairs.get(key)
        if rel is None:
            rel = _analyze_pair(self.by_id[key[0]], self.by_id[key[1]])
            self._pairs[key] = rel
        if key == (id1, id2):
            return rel
        return _flip_relation(rel)

    def intersecting_pairs(self):
        ids = sorted(self.by_id)
        boxes = {i: self.by_id[i].bbox() for i in ids}
        for a, b in itertools.combinations(ids, 2):
            if boxes_overlap(boxes[a], boxes[b]) and self.pair_relation(a, b).intersects:
                yield a, b


def _flip_relation(rel: PairRelation) -> PairRelation:
    kind = {"contains": "contained", "contained": "contains"}.get(rel.kind, rel.kind)
    return PairRelation(kind, tuple((p, jb, ja) for (p, ja, jb) in rel.crossings))


def _analyze_pair(d1: PseudoDisk, d2: PseudoDisk) -> PairRelation:
    """Exact relation of two disks; degeneracies raise ValidationError."""
    issues = pair_degeneracies(d1, d2)
    if issues:
        raise ValidationError(
            f"degenerate contact between {d1.id!r} and {d2.id!r}: {issues[0].message}",
            issues,
        )
    crossings = []
    if boxes_overlap(d1.bbox(), d2.bbox()):
        p1 = d1.polygon
        p2 = d2.polygon
        n1, n2 = len(p1), len(p2)
        for i in range(n1):
            a, b = p1[i], p1[(i + 1) % n1]
            ebox = bbox((a, b))
            for j in range(n2):
                c, d = p2[j], p2[(j + 1) % n2]
                if not boxes_overlap(ebox, bbox((c, d))):
                    continue
                kind, p = segment_crossing(a, b, c, d)
                if kind == "proper":
                    crossings.append((p, i, j))
    if len(crossings) % 2 == 1:
        raise ValidationError(
            f"odd crossing count between {d1.id!r} and {d2.id!r} (non-simple input?)"
        )
    if crossings:
        return PairRelation("crossing", tuple(crossings))
    if point_in_polygon(d2.polygon[0], d1.polygon) == "in":
        return PairRelation("contains", ())
    if point_in_polygon(d1.polygon[0], d2.polygon) == "in":
        return PairRelation("contained", ())
    return PairRelation("disjoint", ())


def pair_degeneracies(d1: PseudoDisk, d2: PseudoDisk):
    """All non-transversal contacts between the two boundaries."""
    if not boxes_overlap(d1.bbox(), d2.bbox()):
        return []
    issues = []
    p1, p2 = d1.polygon, d2.polygon
    n1, n2 = len(p1), len(p2)
    for i in range(n1):
        a, b = p1[i], p1[(i + 1) % n1]
        ebox = bbox((a, b))
        for j in range(n2):
            c, d = p2[j], p2[(j + 1) % n2]
            if not boxes_overlap(ebox, bbox((c, d))):
                continue
            kind, p = segment_crossing(a, b, c, d)
            if kind == "overlap":
                issues.append(Issue(
                    "pair-degenerate-contact",
                    f"boundaries of {d1.id!r} and {d2.id!r} overlap along a stretch",
                    (d1.id, d2.id),
                ))
            elif kind == "touch":
                issues.append(Issue(
                    "pair-degenerate-contact",
                    f"boundaries of {d1.id!r} and {d2.id!r} touch non-transversally at {p}",
                    (d1.id, d2.id),
                ))
    return issues


def validate_system(system: PseudoDiskSystem) -> ValidationReport:
    """Check general position for a pseudo-disk system.

    Reports: non-simple or non-ccw polygons, degenerate pair contacts
    (tangency, vertex on boundary, overlapping stretches), pairs crossing
    more than twice, and points shared by three boundaries.
    """
    issues = []
    for d in system.disks:
        if len(d.polygon) < 3:
            issues.append(Issue("polygon-degenerate", f"{d.id!r} has fewer than 3 vertices", (d.id,)))
            continue
        simp = polygon_simplicity_issue(d.polygon)
        if simp:
            issues.append(Issue("polygon-not-simple", f"{d.id!r}: {simp}", (d.id,)))
            continue
        if polygon_area2(d.polygon) <= 0:
            issues.append(Issue("polygon-not-ccw", f"{d.id!r} is not positively oriented", (d.id,)))
    if issues:
        return ValidationReport(False, tuple(issues))

    ids = sorted(system.by_id)
    boxes = {i: system.by_id[i].bbox() for i in ids}
    point_owners = {}
    for a, b in itertools.combinations(ids, 2):
        if not boxes_overlap(boxes[a], boxes[b]):
            continue
        degen = pair_degeneracies(system.by_id[a], system.by_id[b])
        if degen:
            issues.extend(degen)
            continue
        rel = system.pair_relation(a, b)
        if len(rel.crossings) not in (0, 2):
            issues.append(Issue(
                "pair-crosses-more-than-twice",
                f"boundaries of {a!r} and {b!r} cross {len(rel.crossings)} times",
                (a, b),
            ))
        for (p, _, _) in rel.crossings:
            owners = point_owners.setdefault(p, set())
            owners.update((a, b))
            if len(owners) > 2:
                issues.append(Issue(
                    "triple-boundary-point",
                    f"point {p} lies on {len(owners)} boundaries",
                    tuple(sorted(owners)),
                ))
    # a crossing point of one pair sitting on a third boundary is a triple
    # point even without being a crossing of that third boundary
    if not issues:
        for p, owners in point_owners.items():
            for c in ids:
                if c in owners:
                    continue
                if not (boxes[c][0] <= p[0] <= boxes[c][2] and boxes[c][1] <= p[1] <= boxes[c][3]):
                    continue
                if point_in_polygon(p, system.by_id[c].polygon) == "boundary":
                    issues.append(Issue(
                        "triple-boundary-point",
                        f"crossing point {p} of {tuple(sorted(owners))} lies on boundary of {c!r}",
                        tuple(sorted(owners)) + (c,),
                    ))
    return ValidationReport(not issues, tuple(issues))


def boundary_intersections(system: PseudoDiskSystem, id1: str, id2: str) -> tuple:
    """The transversal crossing points of two boundaries, in edge order of id1."""
    rel = system.pair_relation(id1, id2)
    return tuple(p for (p, _, _) in rel.crossings)


# ---------------------------------------------------------------------------
# chains and boolean constructions for pairs crossing exactly twice
# ---------------------------------------------------------------------------

def _edge_param_key(a: Point, b: Point, q: Point):
    """Monotone sort key for points on segment ab."""
    return (b[0] - a[0]) * (q[0] - a[0]) + (b[1] - a[1]) * (q[1] - a[1])


def boundary_stations(poly: Sequence[Point], crossings) -> list:
    """Walk the polygon ccw, inserting crossing points in order.

    crossings: iterable of (point, edge_index). Returns the cyclic list of
    (point, is_crossing) stations.
    """
    per_edge = {}
    for p, i in crossings:
        per_edge.setdefault(i, []).append(p)
    n = len(poly)
    out = []
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        out.append((a, False))
        for p in sorted(per_edge.get(i, []), key=lambda q: _edge_param_key(a, b, q)):
            if p != a and p != b:
                out.append((p, True))
    return out


def split_two_chains(poly: Sequence[Point], crossings) -> list:
    """Split a boundary at exactly two crossing points into two directed chains.

    Each chain is a point list from one crossing to the other following the
    polygon's ccw order (endpoints included).
    """
    stations = boundary_stations(poly, crossings)
    idx = [i for i, (_, isc) in enumerate(stations) if isc]
    if len(idx) != 2:
        raise PreconditionViolation(f"expected 2 crossing stations, found {len(idx)}")
    i, j = idx
    chain1 = [p for p, _ in stations[i: j + 1]]
    chain2 = [p for p, _ in stations[j:]] + [p for p, _ in stations[: i + 1]]
    return [chain1, chain2]


def _chain_probe(chain: list) -> Point:
    """A point of the chain's interior, never one of its crossing endpoints."""
    if len(chain) > 2:
        return chain[1]
    a, b = chain
    return pt(Fraction(a[0] + b[0], 2), Fraction(a[1] + b[1], 2))


def chains_by_side(poly_a, poly_b, crossings_ab) -> dict:
    """Chains of poly_a split at its two crossings with poly_b, keyed by side.

    Returns {"in": chain_inside_b, "out": chain_outside_b} (ccw direction of
    poly_a preserved).
    """
    chains = split_two_chains(poly_a, crossings_ab)
    out = {}
    for ch in chains:
        side = point_in_polygon(_chain_probe(ch), poly_b)
        if side == "boundary":
            raise PreconditionViolation("chain probe landed on the other boundary")
        key = "in" if side == "in" else "out"
        if key in out:
            raise PreconditionViolation("both chains on the same side; not a 2-crossing lens")
        out[key] = ch
    if set(out) != {"in", "out"}:
        raise PreconditionViolation("2-crossing pair without an in/out chain split")
    return out


def _stitch(chain1: list, chain2: list) -> tuple:
    if chain1[-1] != chain2[0] or chain2[-1] != chain1[0]:
        raise PreconditionViolation("chains do not stitch into a cycle")
    return clean_polygon(chain1[:-1] + chain2[:-1])


def union_two_crossing(poly_a, poly_b, crossings_ab) -> tuple:
    """Boundary of the union of two regions crossing exactly twice."""
    a_cr = [(p, i) for (p, i, _) in crossings_ab]
    b_cr = [(p, j) for (p, _, j) in crossings_ab]
    a_out = chains_by_side(poly_a, poly_b, a_cr)["out"]
    b_out = chains_by_side(poly_b, poly_a, b_cr)["out"]
    poly = _stitch(a_out, b_out)
    if polygon_area2(poly) <= 0 or polygon_simplicity_issue(poly):
        raise PreconditionViolation("union stitching produced a degenerate polygon")
    return poly


def lens_two_crossing(poly_a, poly_b, crossings_ab) -> tuple:
    """Boundary of the intersection of two regions crossing exactly twice."""
    a_cr = [(p, i) for (p, i, _) in crossings_ab]
    b_cr = [(p, j) for (p, _, j) in crossings_ab]
    a_in = chains_by_side(poly_a, poly_b, a_cr)["in"]
    b_in = chains_by_side(poly_b, poly_a, b_cr)["in"]
    poly = _stitch(a_in, b_in)
    if polygon_area2(poly) <= 0 or polygon_simplicity_issue(poly):
        raise PreconditionViolation("lens stitching produced a degenerate polygon")
    return poly


def first_ray_hit(origin: Point, direction, segments, skip=()):
    """First crossing of the open ray origin + t*direction (t > 0) with any
    segment not in skip.

    Returns (t, point, seg_index, at_endpoint). t is an exact Fraction, or
    None when the ray escapes cleanly.
    """
    ox, oy = origin
    dx, dy = direction
    best = None
    for idx, (a, b) in enumerate(segments):
        if idx in skip:
            continue
        ex, ey = b[0] - a[0], b[1] - a[1]
        denom = dx * ey - dy * ex
        if denom == 0:
            # parallel; collinear overlaps are treated as endpoint hits
            if orient(a, b, origin) == 0:
                for p in (a, b):
                    wx, wy = p[0] - ox, p[1] - oy
                    t = None
                    if dx != 0:
                        t = Fraction(wx, dx)
                    elif dy != 0:
                        t = Fraction(wy, dy)
                    if t is not None and t > 0 and wx * dy == wy * dx:
                        if best is None or t < best[0]:
                            best = (t, p, idx, True)
            continue
        t = Fraction((a[0] - ox) * ey - (a[1] - oy) * ex, denom)
        if t <= 0:
            continue
        u = Fraction((a[0] - ox) * dy - (a[1] - oy) * dx, denom)
        if u < 0 or u > 1:
            continue
        p = pt(a[0] + u * ex, a[1] + u * ey)
        at_end = u == 0 or u == 1
        if best is None or t < best[0]:
            best = (t, p, idx, at_end)
    return best


def polygon_interior_point(poly: Sequence[Point]) -> Point:
    """An exact point strictly inside a simple ccw polygon."""
    n = len(poly)
    vi = min(range(n), key=lambda i: poly[i])
    v = poly[vi]
    a = poly[vi - 1]
    b = poly[(vi + 1) % n]
    if orient(a, v, b) <= 0:
        raise PreconditionViolation("polygon not ccw or degenerate corner")
    segments = [(poly[i], poly[(i + 1) % n]) for i in range(n)]
    skip = {(vi - 1) % n, vi}
    for num, den in ((1, 2), (1, 3), (2, 3), (1, 5), (4, 5), (1, 7), (6, 7), (3, 7)):
        w = Fraction(num, den)
        d = ((a[0] - v[0]) * w + (b[0] - v[0]) * (1 - w),
             (a[1] - v[1]) * w + (b[1] - v[1]) * (1 - w))
        if d == (0, 0):
            continue
        hit = first_ray_hit(v, d, segments, skip=skip)
        if hit is None:
            continue
        t, p, _, at_end = hit
        if at_end:
            continue
        return pt(v[0] + t / 2 * d[0], v[1] + t / 2 * d[1])
    raise PreconditionViolation("no clean interior ray found for polygon")


def sqrt_bounds(value, bits: int = 40):
    """Rational lo <= sqrt(value) <= hi with hi - lo <= 2^(1-bits)ish."""
    f = Fraction(value)
    if f < 0:
        raise ValueError("sqrt of negative")
    scale = 1 << bits
    r = isqrt((f.numerator * scale * scale) // f.denominator)
    return Fraction(r, scale), Fraction(r + 2, scale)


def dist2(a: Point, b: Point):
    return (a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2


def point_segment_dist2(q: Point, a: Point, b: Point):
    """Exact squared distance from q to the closed segment ab."""
    ex, ey = b[0] - a[0], b[1] - a[1]
    wx, wy = q[0] - a[0], q[1] - a[1]
    dot = ex * wx + ey * wy
    if dot <= 0:
        return dist2(q, a)
    ll = ex * ex + ey * ey
    if dot >= ll:
        return dist2(q, b)
    cr = ex * wy - ey * wx
    return Fraction(cr * cr, ll)


def segment_segment_dist2(a: Point, b: Point, c: Point, d: Point):
    kind, _ = segment_crossing(a, b, c, d)
    if kind != "none":
        return 0
    return min(
        point_segment_dist2(a, c, d),
        point_segment_dist2(b, c, d),
        point_segment_dist2(c, a, b),
        point_segment_dist2(d, a, b),
    )


# ---------------------------------------------------------------------------
# contact segment systems
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContactSegment:
    id: str
    a: Point
    b: Point


class ContactSegmentSystem:
    """Straight segments that may touch but never cross transversally."""

    def __init__(self, segments: Sequence[ContactSegment]):
        self.segments = tuple(segments)
        self.by_id = {s.id: s for s in self.segments}
        if len(self.by_id) != len(self.segments):
            raise ValidationError("duplicate segment id")

    def ids(self):
        return tuple(s.id for s in self.segments)

    def __len__(self):
        return len(self.segments)


def validate_contact_system(css: ContactSegmentSystem) -> ValidationReport:
    issues = []
    for s in css.segments:
        if s.a == s.b:
            issues.append(Issue("segment-degenerate", f"{s.id!r} has zero length", (s.id,)))
    ids = sorted(css.by_id)
    for i1, i2 in itertools.combinations(ids, 2):
        s, t = css.by_id[i1], css.by_id[i2]
        kind, p = segment_crossing(s.a, s.b, t.a, t.b)
        if kind == "proper":
            issues.append(Issue(
                "segments-cross",
                f"{i1!r} and {i2!r} cross at {p}, which is an endpoint of neither",
                (i1, i2),
            ))
        elif kind == "overlap":
            issues.append(Issue(
                "segments-overlap",
                f"{i1!r} and {i2!r} overlap along a stretch",
                (i1, i2),
            ))
    return ValidationReport(not issues, tuple(issues))


def contact_graph_edges(css: ContactSegmentSystem):
    """Pairs of segment ids sharing at least one point."""
    ids = sorted(css.by_id)
    out = []
    for i1, i2 in itertools.combinations(ids, 2):
        s, t = css.by_id[i1], css.by_id[i2]
        kind, _ = segment_crossing(s.a, s.b, t.a, t.b)
        if kind != "none":
            out.append((i1, i2))
    return out
