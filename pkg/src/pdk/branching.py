"""Clique branching and the triangle-double-cover set M.

The preprocessing stage turns one instance into a small collection of
branch tuples (G', M, k') such that the original answer is the OR of the
tuple answers, every emitted G' has clique number at most p, M is a
feedback vertex set of G', and every triangle of G' has at least two
vertices in M.

Cliques above the threshold are found either geometrically (a deepest
point of the arrangement certifies a clique of that ply) or, graph-only,
through a 2-approximate feedback vertex set S: any clique has all but at
most two of its vertices inside S, because the rest lies in a forest.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .errors import PdkError
from .graphs import Instance, IntersectionGraph


def _semidisjoint_cycle(work: IntersectionGraph):
    """A cycle whose vertices all have degree 2, except at most one.

    Walks maximal chains of degree-2 vertices; a chain closing on itself is
    such a cycle, and a chain whose both ends attach to the same higher-degree
    vertex w forms one with w as the single exception.
    """
    visited = set()

    def walk(prev, cur):
        out = []
        while cur not in visited and work.degree(cur) == 2:
            visited.add(cur)
            out.append(cur)
            a, b = sorted(work.neighbors(cur))
            prev, cur = cur, (a if b == prev else b)
        return out, cur

    for s in sorted(work.vertices()):
        if work.degree(s) != 2 or s in visited:
            continue
        visited.add(s)
        n0, n1 = sorted(work.neighbors(s))
        right, stop_r = walk(s, n1)
        if stop_r == s:
            return [s] + right
        left, stop_l = walk(s, n0)
        if stop_l == stop_r and work.degree(stop_l) != 2:
            return [stop_l] + list(reversed(left)) + [s] + right
    return None


def approx_fvs_2(g: IntersectionGraph) -> frozenset:
    """Feedback vertex set at most twice the optimum (local-ratio scheme).

    Repeatedly: strip degree <= 1 vertices; if some cycle is semidisjoint,
    lower weights uniformly along it, otherwise lower each weight
    proportionally to degree - 1; move zero-weight vertices into the
    solution.  A reverse-delete pass keeps the result minimal, which the
    approximation guarantee requires.
    """
    work = g.copy()
    weight = {v: Fraction(1) for v in work.vertices()}
    picked = []

    def clean():
        changed = True
        while changed:
            changed = False
            for v in work.vertices():
                if work.degree(v) <= 1:
                    work.delete_vertex(v)
                    changed = True

    clean()
    while work.n > 0:
        cyc = _semidisjoint_cycle(work)
        if cyc is not None:
            dec = min(weight[v] for v in cyc)
            for v in cyc:
                weight[v] -= dec
        else:
            scale = min(weight[v] / (work.degree(v) - 1) for v in work.vertices())
            for v in work.vertices():
                weight[v] -= scale * (work.degree(v) - 1)
        for v in work.vertices():
            if weight[v] == 0:
                picked.append(v)
                work.delete_vertex(v)
        clean()
    # reverse delete keeps only necessary vertices
    kept = set(picked)
    for v in reversed(picked):
        if g.is_forest(removed=kept - {v}):
            kept.discard(v)
    return frozenset(kept)


def _extend_to_maximal(g: IntersectionGraph, clique) -> tuple:
    members = set(clique)
    common = None
    for v in members:
        nb = g.neighbors(v)
        common = set(nb) if common is None else common & nb
    common -= members
    while common:
        v = min(common)
        members.add(v)
        common = {u for u in common if u != v and g.has_edge(u, v)}
    return tuple(sorted(members))


def _geometric_clique(inst: Instance, p: int):
    from .arrangement import build_arrangement, compute_ply, extract_max_ply_clique
    arr = build_arrangement(inst.system, validated=True)
    ply = compute_ply(arr)
    if ply.p >= p:
        return _extend_to_maximal(inst.graph, extract_max_ply_clique(arr))
    return None


def find_clique_of_size(inst: Instance, p: int):
    """A clique of size >= p, "none", or "reject" (certified no-instance).

    Tries the geometric route first (a deepest point of the arrangement is
    covered by a clique); otherwise enumerates p-2 vertices in a
    2-approximate feedback vertex set S plus two adjacent common neighbours.
    If |S| > 2k the optimum exceeds k and the instance is rejected outright.
    """
    if p < 3:
        raise PdkError("clique threshold must be at least 3")
    g = inst.graph
    if inst.system is not None and inst.system.disks:
        found = _geometric_clique(inst, p)
        if found is not None:
            return found
    s = sorted(approx_fvs_2(g))
    if len(s) > 2 * inst.k:
        return "reject"
    if p - 2 > len(s):
        return "none"
    for base in itertools.combinations(s, p - 2):
        ok = all(g.has_edge(a, b) for a, b in itertools.combinations(base, 2))
        if not ok:
            continue
        common = set(g.vertices())
        for t in base:
            common &= g.neighbors(t)
        common -= set(base)
        cl = sorted(common)
        for a, b in itertools.combinations(cl, 2):
            if g.has_edge(a, b):
                return _extend_to_maximal(g, base + (a, b))
    return "none"


def branch_high_cliques(inst: Instance, p: int):
    """Split into instances of clique number <= p; OR of answers preserved.

    A feedback vertex set must take all but at most 2 vertices of any
    clique, so a clique K larger than p spawns C(|K|, 2) branches, one per
    surviving pair.  A clique of size k+3 cannot be paid for and kills its
    branch line.
    """
    if p < 3:
        raise PdkError("clique threshold must be at least 3")
    done = []
    stack = [inst]
    while stack:
        cur = stack.pop()
        q = min(p + 1, cur.k + 3)
        found = find_clique_of_size(cur, q)
        if found == "reject":
            continue
        if found == "none":
            done.append(cur)
            continue
        clique = sorted(found)
        if len(clique) >= cur.k + 3:
            continue
        for a, b in reversed(list(itertools.combinations(clique, 2))):
            rest = [v for v in clique if v not in (a, b)]
            child = cur.force_vertices(rest)
            stack.append(Instance(
                child.graph, child.k, child.system, child.forced,
                cur.provenance + (("clique", tuple(clique), (a, b)),)))
    return done


def build_M(inst: Instance):
    """A feedback vertex set M covering every triangle twice, or "reject".

    Start from the 2-approximation; reject when it exceeds 2k (the optimum
    is then provably above k).  Then close under the triangle rule: while
    some triangle has at most one vertex in M, add its missing vertices.
    """
    g = inst.graph
    f = approx_fvs_2(g)
    if len(f) > 2 * inst.k:
        return "reject"
    m = set(f)
    changed = True
    while changed:
        changed = False
        for tri in g.triangles():
            inside = sum(1 for v in tri if v in m)
            if inside <= 1:
                for v in tri:
                    m.add(v)
                changed = True
    return frozenset(m)


@dataclass(frozen=True)
class BranchTuple:
    instance: Instance
    m: frozenset
    p: int


def preprocess(inst: Instance, p: int):
    """Branch tuples whose OR of answers equals the input's answer."""
    p = max(3, min(p, inst.k) if inst.k >= 3 else 3)
    tuples = []
    for child in branch_high_cliques(inst, p):
        m = build_M(child)
        if m == "reject":
            continue
        tuples.append(BranchTuple(child, m, p))
    return tuples
