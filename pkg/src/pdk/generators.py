"""Seeded random generators for pseudo-disk systems and contact segments.

All shapes use integer coordinates, so validation and arrangement
construction stay exact. Generation is rejection-based: a candidate system
that fails validation (shared edge lines, vertices on boundaries, ...) is
resampled with a fresh child seed. Requested ply is achieved by adjusting
the placement window and measuring the true ply.
"""

from __future__ import annotations

from typing import Optional

from .errors import PdkError, ValidationError
from .geometry import (
    ContactSegment,
    _analyze_pair,
    ContactSegmentSystem,
    PseudoDisk,
    PseudoDiskSystem,
    segment_crossing,
    validate_contact_system,
    validate_system,
)
from .rng import child_rng

# fixed strictly convex integer polygons (counterclockwise), used as disk shapes
BASE_24GON = (
    (1024, 0), (989, 265), (887, 512), (724, 724), (512, 887), (265, 989),
    (0, 1024), (-265, 989), (-512, 887), (-724, 724), (-887, 512),
    (-989, 265), (-1024, 0), (-989, -265), (-887, -512), (-724, -724),
    (-512, -887), (-265, -989), (0, -1024), (265, -989), (512, -887),
    (724, -724), (887, -512), (989, -265),
)
BASE_12GON = (
    (16, 0), (14, 8), (8, 14), (0, 16), (-8, 14), (-14, 8),
    (-16, 0), (-14, -8), (-8, -14), (0, -16), (8, -14), (14, -8),
)


def _square(id, rng, window: int, smin: int, smax: int) -> PseudoDisk:
    side = rng.randrange(smin, smax + 1)
    x = rng.randrange(0, max(1, window - side))
    y = rng.randrange(0, max(1, window - side))
    return PseudoDisk.make(id, [(x, y), (x + side, y), (x + side, y + side), (x, y + side)])


def _gon(id, rng, window: int, smin: int, smax: int) -> PseudoDisk:
    # integer scaling keeps strict convexity; radius = 16 * scale
    scale = rng.randrange(smin, smax + 1)
    cx = rng.randrange(0, window)
    cy = rng.randrange(0, window)
    return PseudoDisk.make(id, [(cx + scale * vx, cy + scale * vy) for vx, vy in BASE_12GON])


def max_ply_rectangles(boxes) -> int:
    """Exact ply of open axis-parallel boxes (xmin, ymin, xmax, ymax) via slab sweep."""
    rects = [(x1, x2, y1, y2) for x1, y1, x2, y2 in boxes]
    best = 0
    yss = sorted({y for r in rects for y in (r[2], r[3])})
    for y0, y1 in zip(yss, yss[1:]):
        ymid2 = y0 + y1  # doubled slab midpoint keeps comparisons integral
        events = []
        for x1, x2, ya, yb in rects:
            if 2 * ya < ymid2 < 2 * yb:
                events.append((x1, 1))
                events.append((x2, -1))
        # open intervals: closings sort before openings at equal x
        events.sort(key=lambda e: (e[0], e[1]))
        depth = 0
        for _, delta in events:
            depth += delta
            if depth > best:
                best = depth
    return best


def measured_ply(system: PseudoDiskSystem) -> int:
    """True system ply, via the rectangle sweep when possible."""
    boxes = []
    for d in system.disks:
        xs = {p[0] for p in d.polygon}
        ys = {p[1] for p in d.polygon}
        if len(xs) != 2 or len(ys) != 2:
            break
        boxes.append(d.bbox())
    else:
        return max_ply_rectangles(boxes)
    from .arrangement import build_arrangement, compute_ply
    return compute_ply(build_arrangement(system, validated=True)).p


def _draw_shape(kind: str, i: int, rng, window: int) -> PseudoDisk:
    vid = f"v{i}"
    if kind == "squares":
        return _square(vid, rng, window, 192, 384)
    if kind == "disks":
        return _gon(vid, rng, window, 12, 24)
    if kind == "mixed":
        if i % 2 == 0:
            return _square(vid, rng, window, 192, 384)
        return _gon(vid, rng, window, 12, 24)
    raise PdkError(f"unknown generator kind {kind!r}")


def _pair_ok(a: PseudoDisk, b: PseudoDisk) -> bool:
    """Placement filter: transversal, at most two boundary crossings."""
    try:
        rel = _analyze_pair(a, b)
    except ValidationError:
        return False
    return len(rel.crossings) <= 2


def _candidate(kind: str, n: int, rng, window: int) -> PseudoDiskSystem:
    disks = []
    for i in range(n):
        for _ in range(80):
            cand = _draw_shape(kind, i, rng, window)
            if all(_pair_ok(cand, other) for other in disks):
                disks.append(cand)
                break
        else:
            raise PdkError(
                f"could not place shape {i} of a {kind} candidate (window {window})")
    return PseudoDiskSystem(disks)


def _ply_anchor(kind: str, t: int) -> list:
    """A staircase of t mutually overlapping shapes whose common region has
    depth exactly t; placed near the origin, clear of the main window."""
    shapes = []
    if kind == "disks":
        # offset (7,3) is parallel to no 12-gon edge direction
        for i in range(t):
            shapes.append(PseudoDisk.make(
                f"a{i}", [(60 + 7 * i + 3 * vx, 60 + 3 * i + 3 * vy) for vx, vy in BASE_12GON]))
    else:
        # step 5 with side ≢ 0 (mod 5) avoids shared edge lines
        side = 37 if t <= 8 else 5 * (t - 1) + 2
        for i in range(t):
            shapes.append(_square_at(f"a{i}", 5 * i, 5 * i, side))
    return shapes


def _square_at(id, x, y, side):
    return PseudoDisk.make(id, [(x, y), (x + side, y), (x + side, y + side), (x, y + side)])


def generate_system(kind: str, n: int, seed: int,
                    ply: Optional[int] = None,
                    density: float = 1.0,
                    max_attempts: int = 400) -> PseudoDiskSystem:
    """A validated random system of n shapes.

    kind: "squares" | "disks" | "mixed". Without a ply target the window is
    sized by `density` (larger = sparser). With a target t, a staircase of t
    shapes pins the ply from below and the remaining shapes are placed in a
    disjoint window that is grown until their own ply stays <= t, so the
    system ply is exactly t.
    """
    if n <= 0:
        return PseudoDiskSystem([])
    if ply is not None:
        if ply < 1 or ply > n:
            raise PdkError(f"ply target {ply} out of range for n={n}")
        anchor = _ply_anchor(kind, ply)
        rest_n = n - len(anchor)
        offset = 1000
        window = max(600, int((rest_n * 288 * 288 / max(0.6, ply * 0.55)) ** 0.5 * density))
        for attempt in range(max_attempts):
            rng = child_rng(seed, "system", kind, n, ply, attempt)
            rest = _candidate(kind, rest_n, rng, window) if rest_n else PseudoDiskSystem([])
            shifted = [
                PseudoDisk.make(d.id, [(x + offset, y + offset) for x, y in d.polygon])
                for d in rest.disks
            ]
            sys = PseudoDiskSystem(anchor + shifted)
            if not validate_system(sys).ok:
                continue
            rest_ply = measured_ply(PseudoDiskSystem(shifted)) if shifted else 0
            if rest_ply <= ply:
                got = measured_ply(sys)
                if got != ply:
                    raise PdkError(f"anchored system measured ply {got}, wanted {ply}")
                return sys
            window = int(window * 1.15) + 1
        raise PdkError(f"could not generate {kind} system with n={n} ply={ply} (seed {seed})")
    window = max(600, int((n * 288 * 288) ** 0.5 * density))
    for attempt in range(max_attempts):
        rng = child_rng(seed, "system", kind, n, attempt)
        sys = _candidate(kind, n, rng, window)
        if validate_system(sys).ok:
            return sys
    raise PdkError(f"could not generate {kind} system with n={n} (seed {seed})")


def generate_contact_system(n: int, seed: int, max_attempts: int = 200) -> ContactSegmentSystem:
    """Random contact-segment system: segments may share endpoints or touch
    an interior point with an endpoint, but never cross or overlap."""
    for attempt in range(max_attempts):
        rng = child_rng(seed, "contact", n, attempt)
        segs: list = []
        window = max(60, 14 * n)
        tries = 0
        while len(segs) < n and tries < 60 * n:
            tries += 1
            sid = f"s{len(segs)}"
            if segs and rng.random() < 0.6:
                # grow from an existing feature point to encourage contacts
                base = rng.choice(segs)
                if rng.random() < 0.7:
                    start = base.a if rng.random() < 0.5 else base.b
                else:
                    # an interior lattice point of the base segment, if any
                    dx, dy = base.b[0] - base.a[0], base.b[1] - base.a[1]
                    steps = max(abs(dx), abs(dy))
                    t = rng.randrange(1, steps) if steps > 1 else 0
                    if t == 0 or (dx * t) % steps or (dy * t) % steps:
                        start = base.a
                    else:
                        start = (base.a[0] + dx * t // steps, base.a[1] + dy * t // steps)
            else:
                start = (rng.randrange(window), rng.randrange(window))
            end = (start[0] + rng.randrange(-30, 31), start[1] + rng.randrange(-30, 31))
            if end == start:
                continue
            cand = ContactSegment(sid, start, end)
            ok = True
            for s in segs:
                kind, pnt = segment_crossing(s.a, s.b, cand.a, cand.b)
                if kind in ("proper", "overlap"):
                    ok = False
                    break
            if ok:
                segs.append(cand)
        if len(segs) < n:
            continue
        css = ContactSegmentSystem(segs)
        if validate_contact_system(css).ok:
            return css
    raise PdkError(f"could not generate contact system n={n} (seed {seed})")
