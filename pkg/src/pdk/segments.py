"""Convert contact-segment systems into equivalent pseudo-disk systems.

Each segment is shortened a little at both endpoints and replaced by a thin
convex octagon (a polygonal stadium) around the shortened core.  The tube
half-width and cap depth are sized from a single clearance parameter eps
chosen so that

  (1) every segment has length at least eps, and
  (2) any two non-touching segments are at distance greater than 2*eps,

which keeps tubes of non-adjacent segments disjoint while tubes of touching
segments overlap near the contact point.  All coordinates stay rational: the
unit direction of a segment is replaced by d / hi where hi is a rational
upper bound on |d| obtained from integer square roots.

The construction is verified a posteriori: the output must pass the full
system validation and its intersection graph must equal the contact graph
vertex-for-vertex.  If a coincidence (for instance a symmetric triple
contact) produces a degeneracy, the builder retries with smaller eps and a
different direction-rounding precision, which perturbs every tube slightly.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import PdkError
from .geometry import (
    ContactSegmentSystem,
    PseudoDisk,
    PseudoDiskSystem,
    contact_graph_edges,
    nrm,
    segment_segment_dist2,
    sqrt_bounds,
    validate_contact_system,
    validate_system,
)
from .graphs import build_intersection_graph


def _tube(seg, eps: Fraction, bits: int) -> PseudoDisk:
    """Octagonal stadium around the segment shortened by eps/2 per end."""
    ax, ay = seg.a
    bx, by = seg.b
    dx, dy = bx - ax, by - ay
    _, hi = sqrt_bounds(dx * dx + dy * dy, bits=bits)
    ux, uy = Fraction(dx, 1) / hi, Fraction(dy, 1) / hi  # |u| in (1-2^-bits, 1]
    nx, ny = -uy, ux
    cut = eps / 2          # shortening per end
    w = eps * Fraction(3, 4)   # tube half-width
    w2 = eps * Fraction(3, 8)  # cap nose half-width
    c = eps * Fraction(5, 8)   # cap depth beyond the shortened end
    sax, say = ax + cut * ux, ay + cut * uy
    sbx, sby = bx - cut * ux, by - cut * uy
    pts = [
        (sax - c * ux - w2 * nx, say - c * uy - w2 * ny),
        (sax - w * nx, say - w * ny),
        (sbx - w * nx, sby - w * ny),
        (sbx + c * ux - w2 * nx, sby + c * uy - w2 * ny),
        (sbx + c * ux + w2 * nx, sby + c * uy + w2 * ny),
        (sbx + w * nx, sby + w * ny),
        (sax + w * nx, say + w * ny),
        (sax - c * ux + w2 * nx, say - c * uy + w2 * ny),
    ]
    return PseudoDisk.make(seg.id, [(nrm(x), nrm(y)) for x, y in pts])


def _clearance(css: ContactSegmentSystem) -> Fraction:
    """eps = 1/4 * min(shortest length, half the min non-touching distance)."""
    touching = set()
    for u, v in contact_graph_edges(css):
        touching.add((u, v))
        touching.add((v, u))
    best = None
    for seg in css.segments:
        ax, ay = seg.a
        bx, by = seg.b
        d2 = (bx - ax) ** 2 + (by - ay) ** 2
        if d2 == 0:
            raise PdkError(f"segment {seg.id!r} has zero length")
        lo, _ = sqrt_bounds(d2)
        if best is None or lo < best:
            best = lo
    segs = css.segments
    for i in range(len(segs)):
        for j in range(i + 1, len(segs)):
            if (segs[i].id, segs[j].id) in touching:
                continue
            d2 = segment_segment_dist2(
                segs[i].a, segs[i].b, segs[j].a, segs[j].b)
            if d2 == 0:
                raise PdkError(
                    f"segments {segs[i].id!r} and {segs[j].id!r} touch but are "
                    "not contact-graph neighbours")
            lo, _ = sqrt_bounds(d2)
            if lo / 2 < best:
                best = lo / 2
    if best is None or best <= 0:
        raise PdkError("cannot size tubes for this segment system")
    return Fraction(best) / 4


def segments_to_pseudodisks(css: ContactSegmentSystem) -> PseudoDiskSystem:
    """Equivalent pseudo-disk system: one tube per segment, same graph."""
    validate_contact_system(css).raise_if_failed()
    if not css.segments:
        return PseudoDiskSystem(())
    eps0 = _clearance(css)
    want = sorted(tuple(sorted(e)) for e in contact_graph_edges(css))
    last = None
    for shrink, bits in ((1, 40), (2, 50), (4, 60), (8, 70), (16, 80)):
        eps = eps0 / shrink
        system = PseudoDiskSystem(tuple(_tube(s, eps, bits) for s in css.segments))
        report = validate_system(system)
        if not report.ok:
            last = report.issues[0].message
            continue
        got = build_intersection_graph(system).edges()
        if got == want:
            return system
        last = f"graph mismatch ({len(got)} vs {len(want)} edges)"
    raise PdkError(f"tube construction failed for every clearance tried: {last}")
