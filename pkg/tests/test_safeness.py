"""Randomized opt-identity checks for every reduction rule."""

import json

import pytest

from pdk import kernel
from pdk.errors import PdkError
from pdk.formats import load_any
from pdk.graphs import IntersectionGraph
from pdk.oracle import (
    SYNTHESIZERS,
    _component_opt_fvs,
    check_rule_safeness,
    brute_force_fvs,
)

ALL_RULES = sorted(SYNTHESIZERS, key=lambda r: int(r[1:]))


@pytest.mark.parametrize("rule", [r for r in ALL_RULES if r != "R8"])
def test_rule_keeps_the_optimum(rule):
    rep = check_rule_safeness(rule, trials=25, seed=7)
    assert rep.ok, (rule, rep)
    assert rep.passed == 25 and rep.synth_failures == 0


def test_long_path_rule_keeps_the_optimum():
    rep = check_rule_safeness("R8", trials=8, seed=7)
    assert rep.ok and rep.synth_failures == 0


def test_reports_are_reproducible(monkeypatch):
    plain = check_rule_safeness("R4", trials=12, seed=3)
    again = check_rule_safeness("R4", trials=12, seed=3)
    assert plain == again
    monkeypatch.setenv("PDK_THREADS", "4")
    threaded = check_rule_safeness("R4", trials=12, seed=3)
    assert threaded == plain


def test_unknown_rule_is_refused():
    with pytest.raises(PdkError):
        check_rule_safeness("R42", trials=1, seed=0)


def test_sabotaged_rule_is_caught(monkeypatch):
    def bogus_R1(state):
        g = state.graph
        v = max(g.vertices(), key=lambda x: (g.degree(x), str(x)))
        kernel._shrink(state, "R1", [v], 0, {})
        return True

    monkeypatch.setattr(kernel, "_try_R1", bogus_R1)
    rep = check_rule_safeness("R1", trials=30, seed=5)
    assert rep.safeness_failures > 0
    assert rep.counterexamples
    blob = json.loads(rep.counterexamples[0])
    assert blob["opt_before"] != blob["opt_after"] + blob["dk"]
    replay = load_any(json.dumps(blob["before"]))
    assert isinstance(replay, IntersectionGraph)
    assert brute_force_fvs(replay).opt == blob["opt_before"]


def test_component_opt_handles_oversized_sparse_components():
    n = 40
    vs = list(range(n))
    edges = [(i, (i + 1) % n) for i in range(n)]
    g = IntersectionGraph(vs, edges)
    assert _component_opt_fvs(g) == 1

    # seven disjoint triangles joined by bridges: one 21-vertex component
    # needing seven deletions, beyond the cap
    vs, edges = [], []
    for i in range(7):
        a, b, c = 3 * i, 3 * i + 1, 3 * i + 2
        vs += [a, b, c]
        edges += [(a, b), (b, c), (a, c)]
        if i:
            edges.append((a - 1, a))
    chain = IntersectionGraph(vs, edges)
    assert _component_opt_fvs(chain, cap=2) is None
