"""Tree-decomposition DPs and the end-to-end FVS / triangle-hitting pipelines."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from pdk.errors import PdkError
from pdk.generators import generate_contact_system, generate_system
from pdk.geometry import PseudoDisk, PseudoDiskSystem, validate_system
from pdk.graphs import IntersectionGraph, build_intersection_graph
from pdk.oracle import brute_force_fvs, brute_force_th
from pdk.segments import contact_graph_edges
from pdk.solver import (
    SolveResult,
    fvs_dp,
    solve_fvs,
    solve_fvs_contact_segments,
    solve_fvs_graph,
    solve_th,
    th_dp,
)
from pdk.treewidth import TreeDecomposition, tree_decomposition


def rect(vid, x0, y0, x1, y1):
    return PseudoDisk.make(vid, [(x0, y0), (x1, y0), (x1, y1), (x0, y1)])


def system_of(*disks):
    sys_ = PseudoDiskSystem(list(disks))
    validate_system(sys_).raise_if_failed()
    return sys_


def cycle_graph(n):
    vs = list(range(n))
    return IntersectionGraph(vs, [(i, (i + 1) % n) for i in vs])


def complete_graph(n):
    vs = list(range(n))
    return IntersectionGraph(vs, [(a, b) for a in vs for b in vs if a < b])


def petersen_graph():
    edges = []
    for i in range(5):
        edges.append((i, (i + 1) % 5))
        edges.append((i, i + 5))
        edges.append((5 + i, 5 + (i + 2) % 5))
    return IntersectionGraph(list(range(10)), edges)


def random_graph(n, m, seed):
    rng = random.Random(seed)
    vs = list(range(n))
    g = IntersectionGraph(vs, [])
    pairs = [(a, b) for i, a in enumerate(vs) for b in vs[i + 1:]]
    rng.shuffle(pairs)
    for a, b in pairs[:m]:
        g.add_edge(a, b)
    return g


def triangle_trio(prefix, dx):
    """Three pairwise-crossing squares; their graph is one triangle."""
    return [rect(prefix + "a", dx + 0, 0, dx + 100, 100),
            rect(prefix + "b", dx + 60, -10, dx + 160, 90),
            rect(prefix + "c", dx + 30, -60, dx + 70, 40)]


# ---------------------------------------------------------------------------
# the feedback-vertex DP


def test_cycle_needs_one_deletion():
    g = cycle_graph(5)
    td = tree_decomposition(g)
    assert fvs_dp(g, td, 0) is None
    sol = fvs_dp(g, td, 1)
    assert sol is not None and len(sol) == 1


def test_complete_graph_needs_all_but_two():
    g = complete_graph(5)
    td = tree_decomposition(g)
    assert fvs_dp(g, td, 2) is None
    sol = fvs_dp(g, td, 3)
    assert sol is not None and g.is_forest(removed=sol)


def test_petersen_optimum_is_three():
    g = petersen_graph()
    td = tree_decomposition(g)
    assert fvs_dp(g, td, 2) is None
    sol = fvs_dp(g, td, 3)
    assert sol is not None and len(sol) == 3


def test_invalid_decomposition_is_rejected():
    g = cycle_graph(4)
    bad = TreeDecomposition([frozenset({0, 1}), frozenset({2, 3})], [(0, 1)])
    with pytest.raises(PdkError):
        fvs_dp(g, bad, 2)
    with pytest.raises(PdkError):
        th_dp(g, bad, 2)


def test_empty_graph_has_empty_solution():
    g = IntersectionGraph([], [])
    assert fvs_dp(g, tree_decomposition(g), 0) == frozenset()


def test_dp_matches_brute_force_on_random_graphs():
    for seed in range(60):
        n = 4 + seed % 9
        m = (seed * 5) % (n * (n - 1) // 2 + 1)
        g = random_graph(n, m, seed)
        td = tree_decomposition(g)
        opt = brute_force_fvs(g).opt
        assert (fvs_dp(g, td, max(0, opt - 1)) is not None) == (opt == 0)
        sol = fvs_dp(g, td, opt)
        assert sol is not None and len(sol) == opt
        assert g.is_forest(removed=sol)


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 8), st.data())
def test_dp_finds_the_exact_optimum(n, data):
    pairs = [(a, b) for a in range(n) for b in range(n) if a < b]
    chosen = data.draw(st.sets(st.sampled_from(pairs)) if pairs else st.just(set()))
    g = IntersectionGraph(list(range(n)), sorted(chosen))
    sol = fvs_dp(g, tree_decomposition(g), n)
    assert len(sol) == brute_force_fvs(g).opt


# ---------------------------------------------------------------------------
# the triangle-hitting DP


def test_th_dp_matches_brute_force_on_random_graphs():
    for seed in range(60):
        n = 4 + seed % 9
        m = (seed * 7) % (n * (n - 1) // 2 + 1)
        g = random_graph(n, m, seed + 500)
        td = tree_decomposition(g)
        opt = brute_force_th(g).opt
        assert (th_dp(g, td, max(0, opt - 1)) is not None) == (opt == 0)
        sol = th_dp(g, td, opt)
        assert sol is not None and len(sol) == opt
        assert g.is_triangle_free(removed=sol)


def test_th_dp_on_complete_graph():
    g = complete_graph(6)
    td = tree_decomposition(g)
    assert th_dp(g, td, 3) is None
    sol = th_dp(g, td, 4)
    assert sol is not None and g.is_triangle_free(removed=sol)


# ---------------------------------------------------------------------------
# solve_fvs end to end


def test_edgeless_system_is_trivially_yes():
    sys_ = system_of(rect("a", 0, 0, 10, 10),
                     rect("b", 1000, 0, 1010, 10),
                     rect("c", 2000, 0, 2010, 10))
    res = solve_fvs(sys_, 0)
    assert res.answer == "yes" and res.solution == ()


def test_three_disjoint_triangles_need_three_deletions():
    disks = (triangle_trio("t0", 0)
             + triangle_trio("t1", 2000)
             + triangle_trio("t2", 4000))
    sys_ = system_of(*disks)
    g = build_intersection_graph(sys_)
    assert len(g.triangles()) == 3
    assert solve_fvs(sys_, 2).answer == "no"
    res = solve_fvs(sys_, 3)
    assert res.answer == "yes"
    assert len(res.solution) == 3
    assert g.is_forest(removed=set(res.solution))


def test_solver_agrees_with_oracle_on_random_systems():
    kinds = ["squares", "disks", "mixed"]
    for seed in range(12):
        sys_ = generate_system(kinds[seed % 3], 9 + seed % 4, seed, density=1.3)
        g = build_intersection_graph(sys_)
        opt = brute_force_fvs(g).opt
        for k in (max(0, opt - 1), opt):
            res = solve_fvs(sys_, k)
            assert (res.answer == "yes") == (opt <= k), (seed, k, opt)
            if res.answer == "yes":
                assert len(res.solution) <= k
                assert g.is_forest(removed=set(res.solution))


def test_no_kernel_variant_gives_the_same_answers():
    for seed in range(8):
        sys_ = generate_system("squares", 9, seed + 40, density=1.4)
        g = build_intersection_graph(sys_)
        opt = brute_force_fvs(g).opt
        for k in (max(0, opt - 1), opt):
            with_kernel = solve_fvs(sys_, k)
            without = solve_fvs(sys_, k, use_kernel=False)
            assert with_kernel.answer == without.answer
            assert without.stats["rule_hits"] == {}


def test_graph_only_pipeline_matches_oracle():
    for seed in range(10):
        n = 6 + seed % 7
        m = (seed * 4) % (n * (n - 1) // 2 + 1)
        g = random_graph(n, m, seed + 900)
        opt = brute_force_fvs(g).opt
        for k in (max(0, opt - 1), opt):
            res = solve_fvs_graph(g, k)
            assert (res.answer == "yes") == (opt <= k)


def test_default_branching_threshold_scales_with_budget():
    sys_ = system_of(*triangle_trio("t", 0))
    res = solve_fvs(sys_, 1)
    assert res.stats["p"] == 6
    assert solve_fvs(sys_, 1, p=4).stats["p"] == 4


def test_result_json_shape():
    res = solve_fvs(system_of(rect("a", 0, 0, 10, 10)), 0)
    blob = res.to_json()
    assert blob["answer"] == "yes" and blob["solution"] == []
    for key in ("branches", "rule_hits", "kernel_size", "width", "p"):
        assert key in blob["stats"]


def test_budget_must_be_non_negative():
    g = cycle_graph(3)
    with pytest.raises(PdkError):
        solve_fvs_graph(g, -1)
    with pytest.raises(PdkError):
        solve_fvs(system_of(rect("a", 0, 0, 10, 10)), -2)


def test_solve_fvs_rejects_non_systems():
    with pytest.raises(PdkError):
        solve_fvs(cycle_graph(4), 1)


def test_parallel_tuples_agree_with_sequential(monkeypatch):
    sys_ = generate_system("mixed", 11, 7, density=1.4)
    g = build_intersection_graph(sys_)
    opt = brute_force_fvs(g).opt
    plain = solve_fvs(sys_, opt)
    monkeypatch.setenv("PDK_THREADS", "3")
    threaded = solve_fvs(sys_, opt)
    assert plain.answer == threaded.answer == "yes"
    assert g.is_forest(removed=set(threaded.solution))


# ---------------------------------------------------------------------------
# contact-segment systems


def test_contact_segments_pipeline_matches_oracle():
    for seed in range(4):
        css = generate_contact_system(8 + seed % 3, seed)
        edges = sorted(tuple(sorted(e)) for e in contact_graph_edges(css))
        g = IntersectionGraph(list(range(len(css.segments))), edges)
        opt = brute_force_fvs(g).opt
        for k in (max(0, opt - 1), opt):
            res = solve_fvs_contact_segments(css, k)
            assert (res.answer == "yes") == (opt <= k), (seed, k, opt)
            assert "m_prime_ratio" in res.stats


# ---------------------------------------------------------------------------
# solve_th end to end


def test_triangle_hitting_examples():
    assert solve_th(complete_graph(4), 1).answer == "no"
    res = solve_th(complete_graph(4), 2)
    assert res.answer == "yes" and len(res.solution) == 2
    assert solve_th(cycle_graph(5), 0).answer == "yes"


def test_triangle_hitting_on_disk_triangles():
    disks = triangle_trio("t0", 0) + triangle_trio("t1", 2000)
    sys_ = system_of(*disks)
    assert solve_th(sys_, 1).answer == "no"
    res = solve_th(sys_, 2)
    assert res.answer == "yes" and len(res.solution) == 2


def test_solve_th_matches_brute_force_on_random_graphs():
    for seed in range(40):
        n = 5 + seed % 9
        m = (seed * 6) % (n * (n - 1) // 2 + 1)
        g = random_graph(n, m, seed + 300)
        opt = brute_force_th(g).opt
        for k in (max(0, opt - 1), opt):
            res = solve_th(g, k)
            assert (res.answer == "yes") == (opt <= k), (seed, k, opt)
            if res.answer == "yes":
                assert g.is_triangle_free(removed=set(res.solution))


def test_solve_th_big_clique_is_cut_early():
    g = complete_graph(12)
    res = solve_th(g, 5)
    assert res.answer == "no"
    res = solve_th(g, 10)
    assert res.answer == "yes" and len(res.solution) == 10


def test_short_cycle_finds_the_girth():
    from pdk.solver import _short_cycle
    assert _short_cycle(IntersectionGraph(list(range(4)),
                                          [(0, 1), (1, 2), (2, 3)])) is None
    for n in (3, 5, 9):
        cyc = _short_cycle(cycle_graph(n))
        assert len(cyc) == n
    assert len(_short_cycle(complete_graph(6))) == 3
    assert len(_short_cycle(petersen_graph())) == 5
    for seed in range(25):
        n = 5 + seed % 8
        g = random_graph(n, (seed * 5) % (n * 2), seed)
        cyc = _short_cycle(g)
        if cyc is None:
            assert g.is_forest()
        else:
            assert len(set(cyc)) == len(cyc) >= 3
            ring = cyc + [cyc[0]]
            assert all(g.has_edge(a, b) for a, b in zip(ring, ring[1:]))


def test_branching_fallback_matches_the_dp():
    from pdk.solver import _fvs_branch
    for seed in range(30):
        n = 4 + seed % 8
        g = random_graph(n, (seed * 7) % (n * 2 + 1), seed + 900)
        opt = brute_force_fvs(g).opt
        for k in (max(0, opt - 1), opt):
            got = _fvs_branch(g, k)
            if opt <= k:
                assert got is not None and len(got) <= k
                assert g.is_forest(removed=got)
            else:
                assert got is None


def test_width_guard_reroutes_to_the_branching_fallback(monkeypatch):
    import pdk.solver as solver_mod
    monkeypatch.setattr(solver_mod, "_DP_WIDTH_LIMIT", 1)
    for seed in (0, 1, 2, 3):
        g = random_graph(10, 14, seed + 50)
        opt = brute_force_fvs(g).opt
        for k in (max(0, opt - 1), opt):
            res = solve_fvs_graph(g, k)
            assert (res.answer == "yes") == (opt <= k), (seed, k, opt)
        opt_t = brute_force_th(g).opt
        for k in (max(0, opt_t - 1), opt_t):
            res = solve_th(g, k)
            assert (res.answer == "yes") == (opt_t <= k), (seed, k, opt_t)
