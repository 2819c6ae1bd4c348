"""Planar arrangement of pseudo-disk boundaries.

Vertices are boundary crossing points (plus one anchor per uncrossed
boundary), arcs are the boundary pieces between them, oriented clockwise
around their owner disk so the owner's interior lies to the right. Faces are
maximal connected regions; each face's ply is the number of disks containing
it. The dual structure drives ply computation, max-ply clique extraction and
the per-disk overlays (hosted graphs) used by the kernel.

Faces are built per crossing-connected cluster of disks as orbits of the
half-edge next-permutation, then clusters nested inside other clusters are
merged into their surrounding faces. All arithmetic is exact.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import PreconditionViolation, ValidationError
from .geometry import (
    PseudoDisk,
    PseudoDiskSystem,
    bbox,
    boundary_stations,
    boxes_overlap,
    first_ray_hit,
    orient,
    point_in_polygon,
    segment_crossing,
    validate_system,
)

# deterministic fallback ray directions for point location
_RAY_DIRECTIONS = (
    (1, 0), (1, 1), (1, -1), (2, 1), (2, -1), (1, 2), (1, -2), (3, 1),
    (3, -1), (1, 3), (1, -3), (3, 2), (3, -2), (2, 3), (2, -3), (5, 1),
)


@dataclass(frozen=True)
class ArrNode:
    id: int
    point: tuple
    owners: tuple  # disk ids whose boundaries pass through this point


@dataclass
class ArrArc:
    id: int
    owner: str
    src: int  # node id
    dst: int  # node id
    points: tuple  # polyline, clockwise around owner; interior on the right
    left: int = -1  # face id
    right: int = -1  # face id


@dataclass(frozen=True)
class FacePly:
    plies: dict  # face id -> ply
    p: int  # system ply = max over faces


@dataclass(frozen=True)
class HostedGraph:
    """Faces of a sub-arrangement met by one disk, linked via met arcs."""

    disk: str
    faces: tuple  # face ids
    edges: tuple  # (face_left, face_right, arc_id) per met arc
    plies: dict  # face id -> ply in the sub-arrangement
    covers: dict  # face id -> frozenset of covering disk ids

    def is_tree(self) -> bool:
        if len(self.edges) != len(self.faces) - 1:
            return False
        parent = {f: f for f in self.faces}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a, b, _ in self.edges:
            ra, rb = find(a), find(b)
            if ra == rb:
                return False
            parent[ra] = rb
        return True


def _pseudo_angle_cmp(d1, d2) -> int:
    """Counterclockwise order of direction vectors starting at positive x-axis."""
    def half(d):
        return 0 if (d[1] > 0 or (d[1] == 0 and d[0] > 0)) else 1

    h1, h2 = half(d1), half(d2)
    if h1 != h2:
        return -1 if h1 < h2 else 1
    cr = d1[0] * d2[1] - d1[1] * d2[0]
    if cr > 0:
        return -1
    if cr < 0:
        return 1
    return 0


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


class ArrangementGraph:
    """Immutable arrangement; ply/cover data filled in by compute_ply."""

    def __init__(self, system, nodes, arcs, face_cycles, outer_face, clusters):
        self.system = system
        self.nodes = nodes  # list[ArrNode]
        self.arcs = arcs  # list[ArrArc]
        self.face_cycles = face_cycles  # face id -> tuple of dart cycles
        self.outer_face = outer_face  # face id of the unbounded face
        self.clusters = clusters  # disk id -> cluster representative
        self.ply_data: Optional[FacePly] = None
        self.covers: Optional[dict] = None
        self.parent_arc: Optional[dict] = None  # face -> (arc id, other face)
        self._witnesses = {}
        # flat segment table for ray shooting
        self._segments = []
        self._seg_arc = []
        for arc in arcs:
            for i in range(len(arc.points) - 1):
                self._segments.append((arc.points[i], arc.points[i + 1]))
                self._seg_arc.append(arc.id)

    @property
    def faces(self):
        return sorted(self.face_cycles)

    def dart_points(self, dart):
        arc_id, direction = dart
        pts = self.arcs[arc_id].points
        return pts if direction > 0 else tuple(reversed(pts))

    def face_boundary_arcs(self, fid) -> list:
        """Arcs on the face boundary, grouped in cyclic order per cycle."""
        return [[d[0] for d in cycle] for cycle in self.face_cycles[fid]]

    # -- point location --------------------------------------------------
    def locate(self, q) -> int:
        """Face containing q; raises if q lies on an arc."""
        for (a, b), _ in zip(self._segments, self._seg_arc):
            if (min(a[0], b[0]) <= q[0] <= max(a[0], b[0])
                    and min(a[1], b[1]) <= q[1] <= max(a[1], b[1])
                    and orient(a, b, q) == 0
                    and _on_box_segment(q, a, b)):
                raise PreconditionViolation(f"point {q} lies on an arrangement arc")
        for d in _RAY_DIRECTIONS:
            hit = first_ray_hit(q, d, self._segments)
            if hit is None:
                return self.outer_face
            t, p, idx, at_end = hit
            if at_end:
                continue
            a, b = self._segments[idx]
            side = orient(a, b, q)
            if side == 0:
                continue
            arc = self.arcs[self._seg_arc[idx]]
            return arc.left if side > 0 else arc.right
        raise PreconditionViolation(f"no clean ray direction for locating {q}")

    def face_witness(self, fid):
        """An exact interior point of the face (computed lazily)."""
        if fid in self._witnesses:
            return self._witnesses[fid]
        if fid == self.outer_face:
            xmin, ymin, _, _ = bbox(p for d in self.system.disks for p in d.polygon)
            w = (xmin - 1, ymin - 1)
        else:
            w = self._bounded_face_witness(fid)
        self._witnesses[fid] = w
        return w

    def _bounded_face_witness(self, fid):
        # positive cycle of the face, as a simple polygon
        poly = None
        for cycle in self.face_cycles[fid]:
            pts = []
            for dart in cycle:
                dp = self.dart_points(dart)
                pts.extend(dp[:-1])
            from .geometry import polygon_area2
            if polygon_area2(pts) > 0:
                poly = pts
                break
        if poly is None:
            raise PreconditionViolation(f"face {fid} has no positive boundary cycle")
        n = len(poly)
        vi = min(range(n), key=lambda i: poly[i])
        v = poly[vi]
        a, b = poly[vi - 1], poly[(vi + 1) % n]
        for num, den in ((1, 2), (1, 3), (2, 3), (1, 5), (4, 5), (2, 5), (3, 5), (1, 7)):
            w = Fraction(num, den)
            d = ((a[0] - v[0]) * w + (b[0] - v[0]) * (1 - w),
                 (a[1] - v[1]) * w + (b[1] - v[1]) * (1 - w))
            if d == (0, 0):
                continue
            hit = first_ray_hit(v, d, self._segments)
            if hit is None or hit[3]:
                continue
            t = hit[0]
            return (v[0] + t / 2 * d[0], v[1] + t / 2 * d[1])
        raise PreconditionViolation(f"no clean witness ray for face {fid}")

    def debug_dump(self) -> dict:
        """JSON-able listing of nodes, arcs, faces and plies."""
        from .formats import coord_to_json

        ply = self.ply_data.plies if self.ply_data else {}
        covers = self.covers or {}
        return {
            "nodes": [
                {"id": n.id, "point": [coord_to_json(n.point[0]), coord_to_json(n.point[1])],
                 "owners": list(n.owners)}
                for n in self.nodes
            ],
            "arcs": [
                {"id": a.id, "owner": a.owner, "src": a.src, "dst": a.dst,
                 "left": a.left, "right": a.right, "points": len(a.points)}
                for a in self.arcs
            ],
            "faces": [
                {"id": f, "ply": ply.get(f), "cover": sorted(covers.get(f, ())),
                 "cycles": [[list(d) for d in cyc] for cyc in self.face_cycles[f]],
                 "outer": f == self.outer_face}
                for f in self.faces
            ],
            "p": self.ply_data.p if self.ply_data else None,
        }


def _on_box_segment(q, a, b) -> bool:
    # bbox part of on-segment (orient already checked by caller)
    return (min(a[0], b[0]) <= q[0] <= max(a[0], b[0])
            and min(a[1], b[1]) <= q[1] <= max(a[1], b[1]))


def build_arrangement(system: PseudoDiskSystem, validated: bool = False) -> ArrangementGraph:
    """Build the boundary arrangement of a (validated) system."""
    if not validated:
        validate_system(system).raise_if_failed()

    ids = sorted(system.by_id)
    clusters = _UnionFind()
    per_disk_crossings = {i: [] for i in ids}  # disk -> [(point, edge index)]
    point_owners = {}
    boxes = {i: system.by_id[i].bbox() for i in ids}
    for a, b in itertools.combinations(ids, 2):
        if not boxes_overlap(boxes[a], boxes[b]):
            continue
        rel = system.pair_relation(a, b)
        if rel.kind == "crossing":
            clusters.union(a, b)
            for p, ia, ib in rel.crossings:
                per_disk_crossings[a].append((p, ia))
                per_disk_crossings[b].append((p, ib))
                point_owners.setdefault(p, set()).update((a, b))

    # nodes: crossing points, plus an anchor per uncrossed boundary
    for i in ids:
        clusters.find(i)
        if not per_disk_crossings[i]:
            anchor = min(system.by_id[i].polygon)
            point_owners.setdefault(anchor, set()).add(i)
    node_points = sorted(point_owners)
    node_of = {p: idx for idx, p in enumerate(node_points)}
    nodes = [ArrNode(idx, p, tuple(sorted(point_owners[p]))) for idx, p in enumerate(node_points)]

    # arcs: clockwise walk of each boundary, cut at crossing nodes
    arcs = []
    for i in ids:
        poly = system.by_id[i].polygon
        if per_disk_crossings[i]:
            stations = boundary_stations(poly, per_disk_crossings[i])
            stations = list(reversed(stations))  # ccw -> cw
            start = next(j for j, (_, isc) in enumerate(stations) if isc)
            order = stations[start:] + stations[:start + 1]  # closed cw walk
            run = [order[0][0]]
            for p, isc in order[1:]:
                run.append(p)
                if isc:
                    arcs.append(ArrArc(
                        id=-1, owner=i, src=node_of[run[0]], dst=node_of[p],
                        points=tuple(run)))
                    run = [p]
        else:
            anchor = min(poly)
            start = poly.index(anchor)
            rotated = poly[start:] + poly[:start]
            cw = (rotated[0],) + tuple(reversed(rotated[1:])) + (rotated[0],)
            arcs.append(ArrArc(
                id=-1, owner=i, src=node_of[anchor], dst=node_of[anchor], points=cw))
    arcs.sort(key=lambda a: (a.owner, a.points))
    for idx, a in enumerate(arcs):
        a.id = idx

    # outgoing darts per node, in ccw angular order
    out_darts = {idx: [] for idx in range(len(nodes))}
    for a in arcs:
        out_darts[a.src].append(((a.id, 1), _dir_of(a.points, forward=True)))
        out_darts[a.dst].append(((a.id, -1), _dir_of(a.points, forward=False)))
    dart_pos = {}
    for v, lst in out_darts.items():
        lst.sort(key=functools.cmp_to_key(lambda x, y: _pseudo_angle_cmp(x[1], y[1])))
        for pos, (dart, _) in enumerate(lst):
            dart_pos[dart] = (v, pos)

    def next_dart(dart):
        arc = arcs[dart[0]]
        head = arc.dst if dart[1] > 0 else arc.src
        rev = (dart[0], -dart[1])
        _, pos = dart_pos[rev]
        lst = out_darts[head]
        return lst[(pos - 1) % len(lst)][0]

    # face orbits, grouped per cluster
    orbit_of = {}
    orbits = {}  # orbit id -> list of darts
    orbit_area = {}
    orbit_cluster = {}
    for a in arcs:
        for direction in (1, -1):
            d0 = (a.id, direction)
            if d0 in orbit_of:
                continue
            oid = len(orbits)
            cycle = []
            d = d0
            while True:
                cycle.append(d)
                orbit_of[d] = oid
                d = next_dart(d)
                if d == d0:
                    break
            pts = []
            for dd in cycle:
                pts.extend(_dart_pts(arcs, dd)[:-1])
            area2 = 0
            for j in range(len(pts)):
                x1, y1 = pts[j]
                x2, y2 = pts[(j + 1) % len(pts)]
                area2 += x1 * y2 - x2 * y1
            orbits[oid] = cycle
            orbit_area[oid] = area2
            orbit_cluster[oid] = clusters.find(a.owner)

    # one negative (outer) orbit per cluster
    cluster_outer = {}
    for oid, area2 in orbit_area.items():
        cl = orbit_cluster[oid]
        if area2 < 0:
            if cl in cluster_outer:
                raise ValidationError(f"cluster {cl!r} has two unbounded orbits")
            cluster_outer[cl] = oid
    cluster_ids = sorted({clusters.find(i) for i in ids})
    for cl in cluster_ids:
        if cl not in cluster_outer:
            raise ValidationError(f"cluster {cl!r} has no unbounded orbit")

    # nest clusters: merge each cluster's outer orbit into the surrounding face
    cluster_segments = {cl: [] for cl in cluster_ids}
    cluster_seg_arc = {cl: [] for cl in cluster_ids}
    for a in arcs:
        cl = clusters.find(a.owner)
        for j in range(len(a.points) - 1):
            cluster_segments[cl].append((a.points[j], a.points[j + 1]))
            cluster_seg_arc[cl].append(a.id)
    cluster_rep = {}
    for cl in cluster_ids:
        members = [i for i in ids if clusters.find(i) == cl]
        cluster_rep[cl] = min(min(system.by_id[i].polygon) for i in members)

    def locate_orbit(q, cl):
        """Orbit of cluster cl containing q, or None when q is outside."""
        segs = cluster_segments[cl]
        for d in _RAY_DIRECTIONS:
            hit = first_ray_hit(q, d, segs)
            if hit is None:
                return None
            t, p, idx, at_end = hit
            if at_end:
                continue
            sa, sb = segs[idx]
            side = orient(sa, sb, q)
            if side == 0:
                continue
            arc_id = cluster_seg_arc[cl][idx]
            # segment direction equals the arc's forward (cw) direction
            dart = (arc_id, 1) if side > 0 else (arc_id, -1)
            oid = orbit_of[dart]
            return None if oid == cluster_outer[cl] else oid
        raise PreconditionViolation(f"no clean ray for cluster location of {q}")

    cluster_boxes = {
        cl: bbox(p for i in ids if clusters.find(i) == cl
                 for p in system.by_id[i].polygon)
        for cl in cluster_ids
    }
    inside_orbit = {}  # (cl outer, cl inner) -> orbit of outer containing inner
    for ci, co in itertools.permutations(cluster_ids, 2):
        q = cluster_rep[ci]
        if not (cluster_boxes[co][0] <= q[0] <= cluster_boxes[co][2]
                and cluster_boxes[co][1] <= q[1] <= cluster_boxes[co][3]):
            continue
        oid = locate_orbit(q, co)
        if oid is not None:
            inside_orbit[(co, ci)] = oid

    merge = _UnionFind()
    GLOBAL_OUTER = "outer"
    for cl in cluster_ids:
        containers = [co for (co, ci) in inside_orbit if ci == cl]
        if not containers:
            merge.union(cluster_outer[cl], GLOBAL_OUTER)
            continue
        parent = None
        for c1 in containers:
            if all(c2 == c1 or (c2, c1) in inside_orbit for c2 in containers):
                parent = c1
                break
        if parent is None:
            raise ValidationError("cluster containment is not nested")
        merge.union(cluster_outer[cl], inside_orbit[(parent, cl)])

    # canonical face ids: outer face first, then by smallest dart
    class_members = {}
    for oid in orbits:
        class_members.setdefault(merge.find(oid), []).append(oid)
    outer_root = merge.find(GLOBAL_OUTER)
    class_members.setdefault(outer_root, [])

    def class_key(root):
        oids = class_members[root]
        if root == outer_root:
            return (0,)
        return (1, min(min(orbits[o]) for o in oids))

    face_ids = {}
    face_cycles = {}
    for root in sorted(class_members, key=class_key):
        fid = len(face_ids)
        face_ids[root] = fid
        face_cycles[fid] = tuple(
            tuple(orbits[o]) for o in sorted(class_members[root], key=lambda o: min(orbits[o]))
        )
    outer_face = face_ids[outer_root]

    for oid, cycle in orbits.items():
        fid = face_ids[merge.find(oid)]
        for arc_id, direction in cycle:
            if direction > 0:
                arcs[arc_id].left = fid
            else:
                arcs[arc_id].right = fid
    for a in arcs:
        if a.left < 0 or a.right < 0 or a.left == a.right:
            raise ValidationError(f"arc {a.id} has malformed face incidence")

    return ArrangementGraph(system, nodes, arcs, face_cycles, outer_face,
                            {i: clusters.find(i) for i in ids})


def _dir_of(points, forward: bool):
    if forward:
        a, b = points[0], points[1]
    else:
        a, b = points[-1], points[-2]
    return (b[0] - a[0], b[1] - a[1])


def _dart_pts(arcs, dart):
    pts = arcs[dart[0]].points
    return pts if dart[1] > 0 else tuple(reversed(pts))


def compute_ply(arr: ArrangementGraph) -> FacePly:
    """Per-face ply via breadth-first search over the dual from the outer face.

    Crossing an arc from its left to its right side enters the owner disk, so
    the cover set gains the owner; ply is the cover size. Also records a dual
    spanning tree (parent pointers) for clique extraction.
    """
    if arr.ply_data is not None:
        return arr.ply_data
    adj = {f: [] for f in arr.faces}
    for a in arr.arcs:
        adj[a.left].append((a.right, a.owner, True, a.id))
        adj[a.right].append((a.left, a.owner, False, a.id))
    covers = {arr.outer_face: frozenset()}
    parent_arc = {}
    queue = [arr.outer_face]
    qi = 0
    while qi < len(queue):
        f = queue[qi]
        qi += 1
        for g, owner, entering, arc_id in adj[f]:
            cover = covers[f] | {owner} if entering else covers[f] - {owner}
            if entering and owner in covers[f]:
                raise ValidationError(f"face {f} already inside {owner!r} before arc {arc_id}")
            if not entering and owner not in covers[f]:
                raise ValidationError(f"face {f} not inside {owner!r} leaving arc {arc_id}")
            if g in covers:
                if covers[g] != cover:
                    raise ValidationError(
                        f"inconsistent covers for face {g}: {sorted(covers[g])} vs {sorted(cover)}"
                    )
                continue
            covers[g] = cover
            parent_arc[g] = (arc_id, f)
            queue.append(g)
    if len(covers) != len(arr.faces):
        raise ValidationError("dual graph is not connected")
    plies = {f: len(c) for f, c in covers.items()}
    arr.ply_data = FacePly(plies, max(plies.values()) if plies else 0)
    arr.covers = covers
    arr.parent_arc = parent_arc
    return arr.ply_data


def extract_max_ply_clique(arr: ArrangementGraph, ply: Optional[FacePly] = None) -> list:
    """Disk ids all containing one max-ply face, ordered along the dual path
    from the outer face (by last crossing of each disk's boundary).

    The returned list has exactly p entries and is a clique in the
    intersection graph.
    """
    if ply is None:
        ply = compute_ply(arr)
    if ply.p == 0:
        return []
    target = min(f for f, q in ply.plies.items() if q == ply.p)
    # walk the dual tree path outer -> target
    path_arcs = []
    f = target
    while f != arr.outer_face:
        arc_id, parent = arr.parent_arc[f]
        path_arcs.append(arc_id)
        f = parent
    path_arcs.reverse()
    last_toggle = {}
    count = {}
    for step, arc_id in enumerate(path_arcs):
        owner = arr.arcs[arc_id].owner
        last_toggle[owner] = step
        count[owner] = count.get(owner, 0) + 1
    clique = [d for d in count if count[d] % 2 == 1]
    clique.sort(key=lambda d: last_toggle[d])
    if set(clique) != set(arr.covers[target]):
        raise ValidationError("clique extraction disagrees with face cover")
    return clique


def overlay_disk(arr_m: ArrangementGraph, disk: PseudoDisk) -> HostedGraph:
    """Hosted graph of `disk` over a sub-arrangement: faces met by the disk,
    edges through arcs met by the disk. Raises a precondition violation
    naming two witness disks when the result is not a tree."""
    if disk.id in arr_m.system.by_id:
        raise PreconditionViolation(f"{disk.id!r} is part of the sub-arrangement")
    ply = compute_ply(arr_m)
    dbox = disk.bbox()
    dpoly = disk.polygon
    dedges = list(disk.edges())

    def segment_meets(a, b):
        sbox = bbox((a, b))
        if not boxes_overlap(sbox, dbox):
            return False
        if point_in_polygon(a, dpoly) != "out" or point_in_polygon(b, dpoly) != "out":
            return True
        for c, d in dedges:
            kind, _ = segment_crossing(a, b, c, d)
            if kind == "proper":
                return True
            if kind in ("touch", "overlap"):
                raise PreconditionViolation(
                    f"degenerate contact between {disk.id!r} and the sub-arrangement"
                )
        return False

    met_arcs = []
    for arc in arr_m.arcs:
        if any(segment_meets(arc.points[i], arc.points[i + 1])
               for i in range(len(arc.points) - 1)):
            met_arcs.append(arc)
    met_faces = set()
    edges = []
    for arc in met_arcs:
        met_faces.update((arc.left, arc.right))
        edges.append((arc.left, arc.right, arc.id))
    seed = arr_m.locate(dpoly[0])
    met_faces.add(seed)

    hosted = HostedGraph(
        disk=disk.id,
        faces=tuple(sorted(met_faces)),
        edges=tuple(sorted(edges, key=lambda e: e[2])),
        plies={f: ply.plies[f] for f in sorted(met_faces)},
        covers={f: arr_m.covers[f] for f in sorted(met_faces)},
    )
    if not hosted.is_tree():
        witnesses = ()
        for node in arr_m.nodes:
            if len(node.owners) >= 2 and point_in_polygon(node.point, dpoly) == "in":
                witnesses = node.owners[:2]
                break
        raise PreconditionViolation(
            f"hosted graph of {disk.id!r} is not a tree"
            + (f"; witnesses {witnesses[0]!r}, {witnesses[1]!r} cross inside it"
               if witnesses else ""),
            witnesses=witnesses,
        )
    return hosted
