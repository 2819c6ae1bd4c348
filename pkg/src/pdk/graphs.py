"""Intersection graphs of pseudo-disk systems and their maintenance.

The graph is simple and undirected, with string vertex ids matching disk ids.
Vertex deletion, edge deletion and edge contraction keep an exact geometric
representation alongside when possible: deletion drops disks, contraction
replaces two regions by their union, and edge deletion shrinks the two
regions away from their common lens. Edge deletion and contraction are
best-effort: they return None when no valid representation update is found,
and the caller continues combinatorially.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

from .errors import PreconditionViolation
from .geometry import (
    PseudoDisk,
    PseudoDiskSystem,
    chains_by_side,
    clean_polygon,
    lens_two_crossing,
    polygon_interior_point,
    pt,
    union_two_crossing,
    validate_system,
)


class IntersectionGraph:
    """Simple undirected graph with deterministic (sorted) iteration."""

    __slots__ = ("_adj",)

    def __init__(self, vertices: Iterable = (), edges: Iterable = ()):
        self._adj = {}
        for v in vertices:
            self.add_vertex(v)
        for u, v in edges:
            self.add_edge(u, v)

    # -- construction ------------------------------------------------------
    def add_vertex(self, v):
        self._adj.setdefault(v, set())

    def add_edge(self, u, v):
        if u == v:
            raise ValueError("self-loops not supported")
        self._adj.setdefault(u, set()).add(v)
        self._adj.setdefault(v, set()).add(u)

    def delete_vertex(self, v):
        for w in self._adj.pop(v):
            self._adj[w].discard(v)

    def delete_vertices(self, vs):
        for v in list(vs):
            self.delete_vertex(v)

    def delete_edge(self, u, v):
        self._adj[u].discard(v)
        self._adj[v].discard(u)

    def bypass(self, u):
        """Remove a degree-2 vertex, joining its two neighbors by an edge."""
        a, b = sorted(self._adj[u])
        if b in self._adj[a]:
            raise PreconditionViolation(f"bypassing {u!r} would create a parallel edge")
        self.delete_vertex(u)
        self.add_edge(a, b)

    def contract(self, u, keep):
        """Merge u into its neighbor `keep` (u disappears)."""
        if keep not in self._adj[u]:
            raise PreconditionViolation(f"{u!r} and {keep!r} are not adjacent")
        for w in list(self._adj[u]):
            if w != keep:
                self.add_edge(keep, w)
        self.delete_vertex(u)

    def copy(self) -> "IntersectionGraph":
        g = IntersectionGraph()
        g._adj = {v: set(ns) for v, ns in self._adj.items()}
        return g

    def subgraph(self, keep) -> "IntersectionGraph":
        keep = set(keep)
        g = IntersectionGraph()
        for v in keep:
            if v in self._adj:
                g._adj[v] = self._adj[v] & keep
        return g

    # -- queries -----------------------------------------------------------
    @property
    def n(self) -> int:
        return len(self._adj)

    @property
    def m(self) -> int:
        return sum(len(ns) for ns in self._adj.values()) // 2

    def __contains__(self, v) -> bool:
        return v in self._adj

    def vertices(self) -> list:
        return sorted(self._adj)

    def edges(self) -> list:
        out = []
        for v in sorted(self._adj):
            for w in self._adj[v]:
                if v < w:
                    out.append((v, w))
        return sorted(out)

    def neighbors(self, v) -> set:
        return self._adj[v]

    def degree(self, v) -> int:
        return len(self._adj[v])

    def has_edge(self, u, v) -> bool:
        return v in self._adj.get(u, ())

    def components(self) -> list:
        seen = set()
        comps = []
        for s in sorted(self._adj):
            if s in seen:
                continue
            comp = []
            stack = [s]
            seen.add(s)
            while stack:
                v = stack.pop()
                comp.append(v)
                for w in self._adj[v]:
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
            comps.append(sorted(comp))
        return comps

    def is_forest(self, removed=()) -> bool:
        removed = set(removed)
        parent = {}

        def find(x):
            root = x
            while parent.get(root, root) != root:
                root = parent[root]
            while parent.get(x, x) != x:
                parent[x], x = root, parent[x]
            return root

        for v, w in self.edges():
            if v in removed or w in removed:
                continue
            rv, rw = find(v), find(w)
            if rv == rw:
                return False
            parent[rv] = rw
        return True

    def triangles(self) -> list:
        """All triangles as sorted vertex triples."""
        out = []
        for u, v in self.edges():
            for w in sorted(self._adj[u] & self._adj[v]):
                if w > v:
                    out.append((u, v, w))
        return out

    def is_triangle_free(self, removed=()) -> bool:
        removed = set(removed)
        for v in sorted(self._adj):
            if v in removed:
                continue
            alive = [w for w in self._adj[v] if w > v and w not in removed]
            for i, a in enumerate(alive):
                nb = self._adj[a]
                for b in alive[i + 1:]:
                    if b in nb:
                        return False
        return True

    def two_core(self) -> set:
        """Vertices remaining after iteratively stripping degree <= 1."""
        deg = {v: len(ns) for v, ns in self._adj.items()}
        queue = [v for v, d in deg.items() if d <= 1]
        dead = set()
        while queue:
            v = queue.pop()
            if v in dead:
                continue
            dead.add(v)
            for w in self._adj[v]:
                if w not in dead:
                    deg[w] -= 1
                    if deg[w] <= 1:
                        queue.append(w)
        return set(self._adj) - dead

    def __eq__(self, other):
        return isinstance(other, IntersectionGraph) and self._adj == other._adj

    def __hash__(self):
        raise TypeError("unhashable (mutable); use fingerprint()")

    def fingerprint(self) -> str:
        payload = repr((self.vertices(), self.edges())).encode()
        return hashlib.sha256(payload).hexdigest()[:16]

    def __repr__(self):
        return f"IntersectionGraph(n={self.n}, m={self.m})"


def build_intersection_graph(system: PseudoDiskSystem) -> IntersectionGraph:
    g = IntersectionGraph(vertices=system.by_id)
    for a, b in system.intersecting_pairs():
        g.add_edge(a, b)
    return g


# ---------------------------------------------------------------------------
# geometric maintenance
# ---------------------------------------------------------------------------

def system_delete_vertices(system: PseudoDiskSystem, ids) -> PseudoDiskSystem:
    return system.without(ids)


def system_contract_edge(system: PseudoDiskSystem, u: str, keep: str) -> Optional[PseudoDiskSystem]:
    """Replace regions u and keep by their union, named keep.

    Valid pseudo-disk families are closed under union of intersecting
    members; the result is still validated and checked against the expected
    merged intersection graph. Returns None when that fails.
    """
    rel = system.pair_relation(u, keep)
    if rel.kind == "disjoint":
        raise PreconditionViolation(f"{u!r} and {keep!r} do not intersect")
    du, dk = system.by_id[u], system.by_id[keep]
    if rel.kind == "contains":
        merged = du.polygon
    elif rel.kind == "contained":
        merged = dk.polygon
    else:
        try:
            merged = union_two_crossing(du.polygon, dk.polygon, rel.crossings)
        except PreconditionViolation:
            return None
    candidate = system.replace([u, keep], [PseudoDisk.make(keep, merged)])
    if not validate_system(candidate).ok:
        return None
    expected = build_intersection_graph(system)
    expected.contract(u, keep)
    if build_intersection_graph(candidate) != expected:
        return None
    return candidate


def _shrink_toward(p, z, f: Fraction):
    return pt(p[0] + f * (z[0] - p[0]), p[1] + f * (z[1] - p[1]))


def _inset_polygon(outside_chain, inside_chain_rev, z, f: Fraction):
    """Boundary of (region kept outside the lens) plus a thin strip that
    stops short of the lens boundary: trim the outside chain near its two
    crossing endpoints and pull the lens-side chain toward the interior
    anchor z by factor f."""
    out = list(outside_chain)
    s, t = out[0], out[-1]
    out[0] = _shrink_toward(s, out[1], f)
    out[-1] = _shrink_toward(t, out[-2], f)
    inner = [_shrink_toward(p, z, f) for p in inside_chain_rev]
    return clean_polygon(out + inner)


def system_delete_edge(system: PseudoDiskSystem, u: str, v: str) -> Optional[PseudoDiskSystem]:
    """Shrink regions u and v apart so they stop intersecting while every
    other intersection is preserved. Returns None when no valid update is
    found (caller drops the representation)."""
    rel = system.pair_relation(u, v)
    if rel.kind != "crossing":
        return None
    du, dv = system.by_id[u], system.by_id[v]
    try:
        lens = lens_two_crossing(du.polygon, dv.polygon, rel.crossings)
        z = polygon_interior_point(lens)
        u_chains = chains_by_side(du.polygon, dv.polygon, [(p, i) for p, i, _ in rel.crossings])
        v_chains = chains_by_side(dv.polygon, du.polygon, [(p, j) for p, _, j in rel.crossings])
    except PreconditionViolation:
        return None
    expected = build_intersection_graph(system)
    expected.delete_edge(u, v)
    for shift in (20, 26, 32, 38):
        fu = Fraction(1, 2 ** shift)
        fv = Fraction(1, 2 ** (shift + 1))
        try:
            new_u = _inset_polygon(u_chains["out"], list(reversed(v_chains["in"])), z, fu)
            new_v = _inset_polygon(v_chains["out"], list(reversed(u_chains["in"])), z, fv)
            candidate = system.replace(
                [u, v], [PseudoDisk.make(u, new_u), PseudoDisk.make(v, new_v)]
            )
        except (PreconditionViolation, ValueError):
            continue
        if not validate_system(candidate).ok:
            continue
        if build_intersection_graph(candidate) != expected:
            continue
        return candidate
    return None

# ---------------------------------------------------------------------------
# instances
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Instance:
    """A budgeted sub-problem: graph, remaining budget, optional geometry.

    `forced` collects vertices already committed to the solution by earlier
    branching; `provenance` is the branch log that produced this instance.
    """
    graph: IntersectionGraph
    k: int
    system: Optional[PseudoDiskSystem] = None
    forced: frozenset = frozenset()
    provenance: tuple = ()

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("budget must be non-negative")
        if self.forced & set(self.graph.vertices()):
            raise ValueError("forced vertices must already be deleted")
        if self.system is not None and set(self.system.ids()) != set(self.graph.vertices()):
            raise ValueError("system ids do not match graph vertices")

    def check_representation(self) -> bool:
        """Full (quadratic) test that the system represents the graph."""
        return self.system is None or build_intersection_graph(self.system) == self.graph

    def force_vertices(self, ids) -> "Instance":
        """Commit `ids` to the solution: delete them and pay |ids| budget."""
        ids = sorted(set(ids))
        if len(ids) > self.k:
            raise PreconditionViolation("not enough budget to force these vertices")
        g = self.graph.copy()
        g.delete_vertices(ids)
        system = self.system.without(ids) if self.system is not None else None
        return Instance(g, self.k - len(ids), system,
                        self.forced | set(ids),
                        self.provenance + (("force", tuple(ids)),))

    def drop_vertices(self, ids) -> "Instance":
        """Delete `ids` without paying budget (safe reductions only)."""
        ids = sorted(set(ids))
        g = self.graph.copy()
        g.delete_vertices(ids)
        system = self.system.without(ids) if self.system is not None else None
        return Instance(g, self.k, system, self.forced,
                        self.provenance + (("drop", tuple(ids)),))


def update_representation(inst: Instance, op: tuple) -> Instance:
    """Apply delete_vertex / delete_edge / contract_edge, keeping geometry.

    Edge operations require the edge to lie in no triangle. When the
    geometric update cannot be realized the instance degrades gracefully to
    graph-only (system = None).
    """
    name = op[0]
    g = inst.graph
    if name == "delete_vertex":
        (_, v) = op
        if v not in g:
            raise PreconditionViolation(f"no vertex {v!r}")
        return inst.drop_vertices([v])
    if name not in ("delete_edge", "contract_edge"):
        raise ValueError(f"unknown operation {name!r}")
    _, u, v = op
    if not g.has_edge(u, v):
        raise PreconditionViolation(f"no edge {u!r}-{v!r}")
    if set(g.neighbors(u)) & set(g.neighbors(v)):
        raise PreconditionViolation(f"edge {u!r}-{v!r} lies in a triangle")
    new_g = g.copy()
    system = inst.system
    if name == "delete_edge":
        new_g.delete_edge(u, v)
        if system is not None:
            system = system_delete_edge(system, u, v)
    else:
        new_g.contract(u, v)
        if system is not None:
            system = system_contract_edge(system, u, v)
    return Instance(new_g, inst.k, system, inst.forced,
                    inst.provenance + ((name, u, v),))
