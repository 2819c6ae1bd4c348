"""Clique branching, the 2-approximation, and the set M."""

import itertools
import random

import pytest

from pdk.branching import (
    approx_fvs_2,
    branch_high_cliques,
    build_M,
    find_clique_of_size,
    preprocess,
)
from pdk.errors import PdkError
from pdk.generators import generate_system
from pdk.graphs import Instance, IntersectionGraph, build_intersection_graph
from pdk.oracle import brute_force_fvs


def cycle(n, pre="v"):
    vs = [f"{pre}{i}" for i in range(n)]
    return IntersectionGraph(vs, [(vs[i], vs[(i + 1) % n]) for i in range(n)])


def complete(n, pre="v"):
    vs = [f"{pre}{i}" for i in range(n)]
    return IntersectionGraph(vs, [(a, b) for i, a in enumerate(vs) for b in vs[i + 1:]])


def random_graph(n, p, seed):
    r = random.Random(seed)
    g = IntersectionGraph([f"v{i}" for i in range(n)])
    for i in range(n):
        for j in range(i + 1, n):
            if r.random() < p:
                g.add_edge(f"v{i}", f"v{j}")
    return g


def test_approx_fvs_basics():
    assert approx_fvs_2(IntersectionGraph("abc", [("a", "b"), ("b", "c")])) == frozenset()
    assert len(approx_fvs_2(cycle(8))) <= 2
    assert len(approx_fvs_2(complete(5))) <= 6


@pytest.mark.parametrize("seed", range(25))
def test_approx_fvs_factor_two(seed):
    g = random_graph(10, 0.3, seed)
    f = approx_fvs_2(g)
    assert g.is_forest(removed=f)
    assert len(f) <= 2 * brute_force_fvs(g).opt


def test_find_clique_none_on_triangle_free():
    assert find_clique_of_size(Instance(cycle(9), 3), 3) == "none"


def test_find_clique_k5_with_pendant_path():
    g = complete(5)
    g.add_edge("p0", "p1")
    g.add_edge("p1", "p2")
    g.add_edge("p2", "v0")
    assert find_clique_of_size(Instance(g, 3), 5) == ("v0", "v1", "v2", "v3", "v4")


def test_find_clique_rejects_when_budget_hopeless():
    g = IntersectionGraph()
    for t in range(4):
        a, b, c = f"t{t}a", f"t{t}b", f"t{t}c"
        g.add_edge(a, b)
        g.add_edge(b, c)
        g.add_edge(c, a)
    assert find_clique_of_size(Instance(g, 1), 3) == "reject"


def test_find_clique_needs_threshold_three():
    with pytest.raises(PdkError):
        find_clique_of_size(Instance(cycle(4), 2), 2)


def test_find_clique_geometric_route():
    s = generate_system("squares", 14, seed=21, ply=4)
    g = build_intersection_graph(s)
    res = find_clique_of_size(Instance(g, 5, s), 4)
    assert isinstance(res, tuple) and len(res) >= 4
    assert all(g.has_edge(a, b) for a, b in itertools.combinations(res, 2))


def test_branch_k6_gives_fifteen_leaves():
    branches = branch_high_cliques(Instance(complete(6), 4), 4)
    assert len(branches) == 15
    assert all(b.k == 0 and b.graph.n == 2 for b in branches)
    pairs = {tuple(b.graph.vertices()) for b in branches}
    assert len(pairs) == 15


def test_branch_low_clique_number_is_identity():
    inst = Instance(cycle(7), 3)
    branches = branch_high_cliques(inst, 3)
    assert len(branches) == 1
    assert branches[0].graph == inst.graph and branches[0].k == 3


def test_branch_drops_hopeless_cliques():
    # K_5 with budget 2: the clique has size k+3, certifying NO
    assert branch_high_cliques(Instance(complete(5), 2), 3) == []


def test_build_m_covers_triangles_twice():
    m = build_M(Instance(complete(4), 2))
    assert m != "reject"
    for tri in complete(4).triangles():
        assert sum(1 for v in tri if v in m) >= 2


def test_build_m_triangle_free_is_plain_fvs():
    g = cycle(6)
    m = build_M(Instance(g, 3))
    assert m == approx_fvs_2(g)


def test_preprocess_forest():
    ts = preprocess(Instance(IntersectionGraph("abcd", [("a", "b"), ("b", "c")]), 2), 3)
    assert len(ts) == 1 and ts[0].m == frozenset()


@pytest.mark.parametrize("seed", range(30))
def test_preprocess_preserves_answer_and_invariants(seed):
    g = random_graph(9, 0.35, seed)
    k = seed % 5
    want = brute_force_fvs(g).opt <= k
    got = False
    for bt in preprocess(Instance(g.copy(), k), 3 + seed % 3):
        gg = bt.instance.graph
        assert gg.is_forest(removed=bt.m)
        assert bt.instance.k <= k
        for tri in gg.triangles():
            assert sum(1 for v in tri if v in bt.m) >= 2
        for sub in itertools.combinations(gg.vertices(), bt.p + 1):
            assert not all(gg.has_edge(x, y) for x, y in itertools.combinations(sub, 2))
        if brute_force_fvs(gg).opt <= bt.instance.k:
            got = True
    assert got == want
