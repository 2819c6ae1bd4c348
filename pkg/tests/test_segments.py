"""Tests for the segment-to-tube conversion."""

import pytest

from pdk.errors import PdkError
from pdk.generators import generate_contact_system
from pdk.geometry import (
    ContactSegment,
    ContactSegmentSystem,
    contact_graph_edges,
    validate_system,
)
from pdk.graphs import build_intersection_graph
from pdk.segments import segments_to_pseudodisks


def css_of(*segs):
    return ContactSegmentSystem(tuple(ContactSegment(*s) for s in segs))


def test_v_shape_boundaries_cross_twice():
    css = css_of(("s1", (0, 0), (10, 0)), ("s2", (0, 0), (7, 9)))
    system = segments_to_pseudodisks(css)
    assert validate_system(system).ok
    rel = system.pair_relation("s1", "s2")
    assert rel.kind == "crossing"
    assert len(rel.crossings) == 2


def test_disjoint_segments_give_disjoint_disks():
    css = css_of(("s1", (0, 0), (10, 0)), ("s2", (0, 50), (10, 50)))
    system = segments_to_pseudodisks(css)
    assert system.pair_relation("s1", "s2").kind == "disjoint"
    assert build_intersection_graph(system).edges() == []


def test_interior_contact_and_collinear_touch():
    css = css_of(
        ("s1", (0, 0), (20, 0)),
        ("s2", (9, 0), (9, 13)),
        ("s3", (20, 0), (35, 0)),
    )
    system = segments_to_pseudodisks(css)
    assert validate_system(system).ok
    assert build_intersection_graph(system).edges() == [("s1", "s2"), ("s1", "s3")]


def test_zero_length_segment_rejected():
    with pytest.raises(PdkError):
        segments_to_pseudodisks(css_of(("s1", (3, 3), (3, 3))))


def test_empty_system():
    assert segments_to_pseudodisks(ContactSegmentSystem(())).disks == ()


@pytest.mark.parametrize("seed", range(10))
def test_random_conversion_preserves_graph(seed):
    css = generate_contact_system(10, seed=seed)
    system = segments_to_pseudodisks(css)
    assert validate_system(system).ok
    want = sorted(tuple(sorted(e)) for e in contact_graph_edges(css))
    assert build_intersection_graph(system).edges() == want
