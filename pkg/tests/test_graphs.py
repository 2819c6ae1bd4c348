"""Intersection graph construction and geometric maintenance ops."""

import pytest

from pdk.errors import PreconditionViolation
from pdk.geometry import PseudoDisk, PseudoDiskSystem, validate_system
from pdk.graphs import (
    IntersectionGraph,
    build_intersection_graph,
    system_contract_edge,
    system_delete_edge,
    system_delete_vertices,
)


def square(id, x, y, side):
    return PseudoDisk.make(id, [(x, y), (x + side, y), (x + side, y + side), (x, y + side)])


def chain_system():
    # a-b-c path: consecutive squares overlap transversally, a and c stay apart
    return PseudoDiskSystem([
        square("a", 0, 0, 4),
        square("b", 3, 1, 4),
        square("c", 6, 2, 4),
    ])


def test_build_intersection_graph_chain():
    g = build_intersection_graph(chain_system())
    assert g.vertices() == ["a", "b", "c"]
    assert g.edges() == [("a", "b"), ("b", "c")]


def test_build_graph_containment_counts_as_edge():
    sys = PseudoDiskSystem([square("big", 0, 0, 10), square("in", 2, 2, 2)])
    g = build_intersection_graph(sys)
    assert g.edges() == [("big", "in")]


def test_graph_basics():
    g = IntersectionGraph("abcde", [("a", "b"), ("b", "c"), ("c", "a"), ("c", "d")])
    assert g.n == 5 and g.m == 4
    assert g.degree("c") == 3
    assert g.neighbors("c") == {"a", "b", "d"}
    assert g.triangles() == [("a", "b", "c")]
    assert not g.is_forest()
    assert g.is_forest(removed={"a"})
    assert not g.is_triangle_free()
    assert g.is_triangle_free(removed={"b"})
    assert g.two_core() == {"a", "b", "c"}
    assert g.components() == [["a", "b", "c", "d"], ["e"]]
    g2 = g.copy()
    g2.delete_vertex("c")
    assert g2.edges() == [("a", "b")] and g.m == 4
    assert g.fingerprint() != g2.fingerprint()


def test_bypass_degree_two():
    g = IntersectionGraph("abc", [("a", "b"), ("b", "c")])
    g.bypass("b")
    assert g.edges() == [("a", "c")]
    g = IntersectionGraph("abc", [("a", "b"), ("b", "c"), ("a", "c")])
    with pytest.raises(PreconditionViolation):
        g.bypass("b")


def test_contract_merges_adjacency():
    g = IntersectionGraph("abcd", [("a", "b"), ("b", "c"), ("a", "d")])
    g.contract("a", "b")
    assert g.vertices() == ["b", "c", "d"]
    assert g.edges() == [("b", "c"), ("b", "d")]


def test_subgraph():
    g = IntersectionGraph("abcd", [("a", "b"), ("b", "c"), ("c", "d")])
    h = g.subgraph(["a", "b", "c"])
    assert h.edges() == [("a", "b"), ("b", "c")]
    assert g.n == 4


def test_system_delete_vertices():
    sys = chain_system()
    sub = system_delete_vertices(sys, ["b"])
    g = build_intersection_graph(sub)
    assert g.vertices() == ["a", "c"] and g.edges() == []


def test_system_contract_edge_crossing():
    sys = chain_system()
    merged = system_contract_edge(sys, "a", "b")
    assert merged is not None
    assert sorted(merged.by_id) == ["b", "c"]
    assert validate_system(merged).ok
    g = build_intersection_graph(merged)
    assert g.edges() == [("b", "c")]


def test_system_contract_edge_containment():
    sys = PseudoDiskSystem([square("big", 0, 0, 10), square("in", 2, 2, 2), square("c", 9, 1, 4)])
    merged = system_contract_edge(sys, "in", "big")
    assert merged is not None
    assert sorted(merged.by_id) == ["big", "c"]
    assert build_intersection_graph(merged).edges() == [("big", "c")]


def test_system_delete_edge_keeps_other_edges():
    sys = chain_system()
    out = system_delete_edge(sys, "a", "b")
    assert out is not None
    assert validate_system(out).ok
    g = build_intersection_graph(out)
    assert g.edges() == [("b", "c")]


def test_system_delete_edge_two_disks():
    sys = PseudoDiskSystem([square("a", 0, 0, 2), square("b", 1, 1, 2)])
    out = system_delete_edge(sys, "a", "b")
    assert out is not None
    assert validate_system(out).ok
    assert build_intersection_graph(out).edges() == []
