"""Brute-force reference solvers used to verify everything else.

Deliberately independent of the optimized pipeline: plain subset enumeration
by increasing size, per connected component, with small-size guards. These
are the ground truth for feedback vertex set, triangle hitting, treewidth,
and for randomized safeness checks of every reduction rule.
"""

from __future__ import annotations

import itertools
import os
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

from .errors import OracleLimitError, PdkError, PreconditionViolation
from .formats import dumps, graph_to_json, system_to_json
from .geometry import PseudoDisk, PseudoDiskSystem, validate_system
from .graphs import Instance, IntersectionGraph, build_intersection_graph


@dataclass(frozen=True)
class OracleResult:
    opt: int
    witness: tuple
    explored: int


def _min_hitting_subset(vertices, feasible):
    """Smallest subset S of vertices with feasible(S), trying sizes upward.

    Returns (lexicographically first witness of minimum size, subsets tried).
    The full vertex set is assumed feasible.
    """
    vertices = sorted(vertices)
    tried = 0
    for size in range(len(vertices) + 1):
        for sub in itertools.combinations(vertices, size):
            tried += 1
            if feasible(set(sub)):
                return sub, tried
    raise AssertionError("full candidate set was not feasible")


def brute_force_fvs(graph: IntersectionGraph, max_n: int = 20) -> OracleResult:
    """Minimum feedback vertex set by exhaustive search.

    Only 2-core vertices are candidates (a vertex of degree <= 1 lies on no
    cycle) and connected components are solved independently, which keeps the
    per-component guard `max_n` honest even on larger unions.
    """
    core = graph.two_core()
    total = []
    explored = 0
    for comp in graph.subgraph(core).components():
        sub = graph.subgraph(comp)
        if sub.is_forest():
            continue
        if len(comp) > max_n:
            raise OracleLimitError(
                f"component of size {len(comp)} exceeds brute-force guard {max_n}"
            )
        sol, tried = _min_hitting_subset(comp, sub.is_forest)
        explored += tried
        total.extend(sol)
    return OracleResult(len(total), tuple(sorted(total)), explored)


def brute_force_th(graph: IntersectionGraph, max_n: int = 20) -> OracleResult:
    """Minimum triangle hitting set by exhaustive search.

    Candidates are restricted to vertices lying in at least one triangle.
    """
    tri_vertices = set()
    for t in graph.triangles():
        tri_vertices.update(t)
    total = []
    explored = 0
    for comp in graph.subgraph(tri_vertices).components():
        sub = graph.subgraph(comp)
        tris = sub.triangles()
        if not tris:
            continue
        if len(comp) > max_n:
            raise OracleLimitError(
                f"component of size {len(comp)} exceeds brute-force guard {max_n}"
            )

        def hits_all(s, tris=tris):
            return all(s & set(t) for t in tris)

        sol, tried = _min_hitting_subset(comp, hits_all)
        explored += tried
        total.extend(sol)
    return OracleResult(len(total), tuple(sorted(total)), explored)


def exact_treewidth(graph: IntersectionGraph, limit: int = 14) -> int:
    """Exact treewidth via dynamic programming over elimination prefixes.

    f(S) = min over v in S of max(f(S - v), fill-degree of v after
    eliminating S - v), where the fill-degree counts vertices outside S
    adjacent to v directly or through eliminated vertices.
    """
    vs = graph.vertices()
    n = len(vs)
    if n > limit:
        raise OracleLimitError(f"treewidth oracle limited to {limit} vertices")
    if n == 0:
        return 0
    idx = {v: i for i, v in enumerate(vs)}
    adj = [0] * n
    for u, v in graph.edges():
        adj[idx[u]] |= 1 << idx[v]
        adj[idx[v]] |= 1 << idx[u]

    def elim_degree(v: int, eliminated: int) -> int:
        # vertices outside `eliminated` reachable from v through eliminated ones
        seen = 1 << v
        frontier = adj[v]
        result = 0
        while frontier:
            new = frontier & ~seen
            if not new:
                break
            seen |= new
            result |= new & ~eliminated
            inner = new & eliminated
            frontier = 0
            while inner:
                low = inner & -inner
                frontier |= adj[low.bit_length() - 1]
                inner ^= low
        return bin(result & ~(1 << v)).count("1")

    full = (1 << n) - 1
    f = {0: -1}
    # iterate subsets in increasing popcount order
    by_count = [[] for _ in range(n + 1)]
    for s in range(1, full + 1):
        by_count[bin(s).count("1")].append(s)
    for cnt in range(1, n + 1):
        for s in by_count[cnt]:
            best = n
            rest = s
            while rest:
                low = rest & -rest
                v = low.bit_length() - 1
                prev = f[s ^ low]
                d = elim_degree(v, s ^ low)
                val = max(prev, d)
                if val < best:
                    best = val
                rest ^= low
            f[s] = best
    return f[full]


def verify_fvs(graph: IntersectionGraph, solution) -> bool:
    sol = set(solution)
    return sol <= set(graph.vertices()) and graph.is_forest(removed=sol)


def verify_th(graph: IntersectionGraph, solution) -> bool:
    sol = set(solution)
    return sol <= set(graph.vertices()) and graph.is_triangle_free(removed=sol)


# ---------------------------------------------------------------------------
# rule-safeness harness
#
# Every reduction rule claims opt(before) = opt(after) + dk on instances that
# satisfy its hypothesis.  Each synthesizer below builds such an instance
# around randomized decorations, the driver applies the rule exactly once
# through the real kernel machinery, and the optima are compared by brute
# force.  Failures to build or fire are reported separately from genuine
# safeness violations.


def _component_opt_fvs(graph: IntersectionGraph, cap: int = 6):
    """Componentwise optimum with a capped search for oversized components.

    Synthesized instances keep every cycle within reach of a couple of core
    vertices, so increasing-size enumeration stops early even on the
    61-vertex-path instances whose single component dwarfs the exhaustive
    guard.  Returns None when a component needs more than `cap` deletions.
    """
    total = 0
    core = graph.two_core()
    for comp in graph.subgraph(core).components():
        sub = graph.subgraph(comp)
        if sub.is_forest():
            continue
        if len(comp) <= 20:
            total += brute_force_fvs(sub).opt
            continue
        found = None
        for size in range(cap + 1):
            for cand in itertools.combinations(sorted(comp), size):
                if sub.is_forest(removed=set(cand)):
                    found = size
                    break
            if found is not None:
                break
        if found is None:
            return None
        total += found
    return total


def _decorate(rng, vertices, edges, m):
    """Optional far-away components: forest paths and a triangle on a core.

    They shift the optimum by a known amount without touching any rule
    hypothesis, so the identity check is exercised away from zero.
    """
    if rng.random() < 0.6:
        vertices += [902, 903, 904]
        edges += [(902, 903), (902, 904), (903, 904)]
        m.append(902)
        if rng.random() < 0.5:
            vertices.append(905)
            edges.append((903, 905))
    for i in range(rng.randrange(0, 3)):
        length = rng.randrange(1, 4)
        ids = [9000 + 10 * i + j for j in range(length)]
        vertices += ids
        edges += list(zip(ids, ids[1:]))


def _graph_state(rng, vertices, edges, m, p=3):
    from .kernel import KernelState

    g = IntersectionGraph(sorted(set(vertices)), edges)
    inst = Instance(graph=g, k=rng.randrange(3, 7), system=None)
    return KernelState(instance=inst, m=frozenset(m), p=p)


def _staircase_state(rng, n, m_count):
    """Diagonally overlapping squares whose graph is a path s0-s1-...-s(n-1)."""
    from .kernel import KernelState

    disks = []
    for i in range(n):
        w = 130 + rng.randrange(-4, 5)
        h = 100 + rng.randrange(-4, 5)
        x, y = 100 * i, 10 * i
        disks.append(PseudoDisk.make(
            "s%d" % i, [(x, y), (x + w, y), (x + w, y + h), (x, y + h)]))
    system = PseudoDiskSystem(disks)
    if not validate_system(system).ok:
        return None
    g = build_intersection_graph(system)
    inst = Instance(graph=g, k=rng.randrange(3, 7), system=system)
    return KernelState(instance=inst,
                       m=frozenset("s%d" % i for i in range(m_count)), p=3)


def _synth_R1(rng):
    if rng.random() < 0.4:
        return _staircase_state(rng, rng.randrange(3, 5), 1)
    n = rng.randrange(2, 8)
    vertices = list(range(n))
    edges = [(rng.randrange(0, i), i) for i in range(1, n)]
    m = []
    _decorate(rng, vertices, edges, m)
    return _graph_state(rng, vertices, edges, m)


def _synth_R2(rng):
    if rng.random() < 0.4:
        return _staircase_state(rng, rng.randrange(4, 6), 1)
    n = rng.randrange(4, 10)
    vertices = list(range(n))
    edges = [(i, (i + 1) % n) for i in range(n)]
    m = [0]
    _decorate(rng, vertices, edges, m)
    return _graph_state(rng, vertices, edges, m)


def _synth_R0(rng):
    from .kernel import R0_TWINS

    vertices = [900, 901]
    edges = []
    m = [900, 901]
    count = R0_TWINS + rng.randrange(1, 4)
    both = rng.random() < 0.5
    for i in range(count):
        vertices.append(i)
        edges.append((i, 900))
        if both or i > 0:
            edges.append((i, 901))
    _decorate(rng, vertices, edges, m)
    return _graph_state(rng, vertices, edges, m)


def _synth_R3(rng):
    vertices = [900]
    edges = []
    m = [900]
    for i in range(rng.randrange(2, 5)):
        vertices.append(i)
        edges.append((i, 900))
    _decorate(rng, vertices, edges, m)
    return _graph_state(rng, vertices, edges, m)


def _synth_R4(rng):
    vertices = [900]
    edges = []
    m = [900]
    size = rng.randrange(2, 7)
    tree = list(range(size))
    vertices += tree
    edges += [(rng.randrange(0, i), i) for i in range(1, size)]
    anchors = rng.sample(tree, rng.randrange(2, size + 1))
    edges += [(v, 900) for v in anchors]
    _decorate(rng, vertices, edges, m)
    return _graph_state(rng, vertices, edges, m)


def _synth_R5(rng):
    vertices = [900, 10]
    edges = []
    m = [900]
    next_id = 11
    for _ in range(rng.randrange(2, 4)):
        length = rng.randrange(2, 4)
        leg = list(range(next_id, next_id + length))
        next_id += length
        vertices += leg
        edges += [(10, leg[0])] + list(zip(leg, leg[1:]))
        edges += [(leg[0], 900), (leg[-1], 900)]
    if rng.random() < 0.5:
        edges.append((10, 900))
    _decorate(rng, vertices, edges, m)
    return _graph_state(rng, vertices, edges, m)


def _synth_R6(rng):
    vertices = [900, 10]
    edges = []
    m = [900]
    for i in range(rng.randrange(3, 6)):
        vertices.append(i)
        edges += [(i, 10), (i, 900)]
    if rng.random() < 0.5:
        edges.append((10, 900))
    _decorate(rng, vertices, edges, m)
    return _graph_state(rng, vertices, edges, m)


def _synth_R7(rng):
    from .kernel import R7_PATH_VERTICES

    length = R7_PATH_VERTICES + 2 + rng.randrange(0, 4)
    path = list(range(length))
    vertices = [900] + path
    edges = list(zip(path, path[1:]))
    m = [900]
    start = rng.randrange(1, length - R7_PATH_VERTICES)
    for v in path[start:start + R7_PATH_VERTICES]:
        edges.append((v, 900))
    _decorate(rng, vertices, edges, m)
    return _graph_state(rng, vertices, edges, m)


def _synth_R8(rng):
    from .kernel import R8_PATH_VERTICES

    path = list(range(R8_PATH_VERTICES + 2))
    window = path[1:-1]
    vertices = [900, 901] + path
    edges = list(zip(path, path[1:]))
    m = [900, 901]
    slots = rng.sample(window, 14)
    near1, near2 = set(slots[:7]), set(slots[7:])
    for v in window:
        if v in near1 or rng.random() < 0.25:
            edges.append((v, 900))
        if v in near2 or rng.random() < 0.25:
            edges.append((v, 901))
    _decorate(rng, vertices, edges, m)
    return _graph_state(rng, vertices, edges, m)


def _synth_R9(rng):
    from .kernel import R9_OTHERS

    vertices = [900, 901]
    edges = []
    m = [900, 901]
    for i in range(R9_OTHERS + 1 + rng.randrange(0, 3)):
        a, b = 10 + 2 * i, 11 + 2 * i
        vertices += [a, b]
        edges += [(a, b), (a, 900), (b, 901)]
    _decorate(rng, vertices, edges, m)
    return _graph_state(rng, vertices, edges, m)


def _synth_R10(rng):
    vertices = [900, 901, 10]
    edges = [(10, 901)]
    m = [900, 901]
    for i in range(4 + rng.randrange(0, 2)):
        t, u = 20 + 2 * i, 21 + 2 * i
        vertices += [t, u]
        edges += [(10, t), (t, u), (t, 900), (u, 900)]
    _decorate(rng, vertices, edges, m)
    return _graph_state(rng, vertices, edges, m)


SYNTHESIZERS = {
    "R0": _synth_R0, "R1": _synth_R1, "R2": _synth_R2, "R3": _synth_R3,
    "R4": _synth_R4, "R5": _synth_R5, "R6": _synth_R6, "R7": _synth_R7,
    "R8": _synth_R8, "R9": _synth_R9, "R10": _synth_R10,
}


@dataclass(frozen=True)
class SafenessReport:
    rule: str
    trials: int
    passed: int
    synth_failures: int
    safeness_failures: int
    counterexamples: tuple

    @property
    def ok(self) -> bool:
        return self.safeness_failures == 0 and self.passed == self.trials


def _run_safeness_trial(rule_id: str, seed: int):
    from . import kernel

    rng = random.Random(seed)
    try:
        state = SYNTHESIZERS[rule_id](rng)
    except PreconditionViolation:
        state = None
    if state is None:
        return "synth", None
    before_g = state.graph.copy()
    before_k = state.instance.k
    before_system = state.instance.system
    try:
        kernel._ensure_structures(state)
        fired = getattr(kernel, "_try_%s" % rule_id)(state)
    except PreconditionViolation:
        return "synth", None
    if not fired:
        return "synth", None
    dk = before_k - state.instance.k
    opt_before = _component_opt_fvs(before_g)
    opt_after = _component_opt_fvs(state.graph)
    if opt_before is None or opt_after is None:
        return "synth", None
    if opt_before == opt_after + dk:
        return "pass", None
    blob = {"rule": rule_id, "seed": seed, "dk": dk,
            "opt_before": opt_before, "opt_after": opt_after,
            "before": graph_to_json(before_g),
            "after": graph_to_json(state.graph)}
    if before_system is not None:
        blob["system"] = system_to_json(before_system)
    return "fail", dumps(blob)


def check_rule_safeness(rule_id: str, trials: int = 100,
                        seed: int = 0) -> SafenessReport:
    """Randomized opt-identity check of one reduction rule.

    Per trial: synthesize an instance satisfying the rule's hypothesis, apply
    the rule once, and assert opt(before) = opt(after) + dk by brute force.
    Trials are independent and run in parallel under PDK_THREADS; per-trial
    seeds derive from the master seed, so reports are reproducible either way.
    """
    if rule_id not in SYNTHESIZERS:
        raise PdkError("no synthesizer for rule %r" % rule_id)
    master = random.Random("%s:%s" % (seed, rule_id))
    seeds = [master.randrange(1 << 62) for _ in range(trials)]
    threads = int(os.environ.get("PDK_THREADS", "1") or "1")
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(
                lambda s: _run_safeness_trial(rule_id, s), seeds))
    else:
        outcomes = [_run_safeness_trial(rule_id, s) for s in seeds]
    passed = sum(1 for status, _ in outcomes if status == "pass")
    synth = sum(1 for status, _ in outcomes if status == "synth")
    fails = [blob for status, blob in outcomes if status == "fail"]
    return SafenessReport(rule=rule_id, trials=trials, passed=passed,
                          synth_failures=synth, safeness_failures=len(fails),
                          counterexamples=tuple(fails[:3]))
