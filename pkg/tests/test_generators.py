"""Tests for the seeded instance generators."""

from fractions import Fraction

import pytest

from pdk.arrangement import build_arrangement, compute_ply
from pdk.generators import (
    generate_contact_system,
    generate_system,
    max_ply_rectangles,
    measured_ply,
)
from pdk.geometry import (
    contact_graph_edges,
    validate_contact_system,
    validate_system,
)
from pdk.graphs import build_intersection_graph


def test_generated_systems_validate():
    for kind in ("squares", "disks", "mixed"):
        s = generate_system(kind, 12, seed=1)
        assert validate_system(s).ok
        assert len(s.disks) == 12


def test_generator_is_deterministic():
    a = generate_system("squares", 20, seed=42, ply=3)
    b = generate_system("squares", 20, seed=42, ply=3)
    assert a.disks == b.disks
    c = generate_system("squares", 20, seed=43, ply=3)
    assert a.disks != c.disks


@pytest.mark.parametrize("kind", ["squares", "disks", "mixed"])
@pytest.mark.parametrize("ply", [2, 3, 4])
def test_ply_targeting(kind, ply):
    s = generate_system(kind, 16, seed=9, ply=ply)
    assert validate_system(s).ok
    assert measured_ply(s) == ply


def test_max_ply_rectangles_matches_arrangement():
    s = generate_system("squares", 18, seed=5, ply=3)
    boxes = [d.bbox() for d in s.disks]
    fast = max_ply_rectangles(boxes)
    slow = compute_ply(build_arrangement(s, validated=True)).p
    assert fast == slow == 3


def test_max_ply_rectangles_open_intervals():
    # Touching rectangles share no interior point.
    assert max_ply_rectangles([(0, 0, 2, 2), (2, 0, 4, 2)]) == 1
    assert max_ply_rectangles([(0, 0, 2, 2), (1, 1, 3, 3)]) == 2
    assert max_ply_rectangles([]) == 0


def test_contact_system_generation():
    css = generate_contact_system(15, seed=2)
    assert validate_contact_system(css).ok
    assert len(css.segments) == 15
    # growth strategy keeps the contact graph non-trivial
    assert len(contact_graph_edges(css)) >= 8
    again = generate_contact_system(15, seed=2)
    assert css.segments == again.segments


def test_generated_graph_size_scales_with_ply():
    sparse = generate_system("squares", 40, seed=3, ply=2)
    dense = generate_system("squares", 40, seed=3, ply=5)
    gs = build_intersection_graph(sparse)
    gd = build_intersection_graph(dense)
    assert gs.n == gd.n == 40
    assert gd.m > gs.m
