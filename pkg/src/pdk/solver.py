"""End-to-end decision procedures for feedback vertex set and triangle hitting.

``fvs_dp`` and ``th_dp`` are exact dynamic programs over nice tree
decompositions.  ``solve_fvs`` wires the full pipeline: split the input into
branch tuples of bounded clique number, kernelize each tuple, decompose the
remainder and run the DP, then lift the certificate back through the rule log
and verify it on the original graph.  ``solve_th`` combines a disjoint-triangle
packing bound, clique branching, a bounded search tree and a DP finish.

DP states are kept deliberately plain: a feedback-vertex state is the set of
deleted bag vertices (implicit) plus the partition of the kept bag vertices
into connected components of the processed forest; a triangle-hitting state is
just the kept subset.  Tables map state keys to the best witness set found, so
certificates fall out of the DP without separate backpointer bookkeeping.
"""

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .branching import BranchTuple, find_clique_of_size, preprocess
from .errors import PdkError
from .geometry import PseudoDiskSystem, validate_system
from .graphs import Instance, IntersectionGraph, build_intersection_graph
from .kernel import lift_solution, run_kernel
from .segments import ContactSegmentSystem, segments_to_pseudodisks
from .treewidth import check_tree_decomposition, make_nice, tree_decomposition


@dataclass
class SolveResult:
    answer: str                     # "yes" or "no"
    solution: tuple = ()            # sorted vertex ids when answer == "yes"
    stats: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"answer": self.answer,
                "solution": list(self.solution),
                "stats": self.stats}


# ---------------------------------------------------------------------------
# dynamic programs over nice tree decompositions


def _canon(blocks) -> tuple:
    """Canonical key for a partition: sorted tuple of sorted blocks."""
    return tuple(sorted(tuple(sorted(b)) for b in blocks if b))


def _put(table: dict, key, sol: frozenset, k: int) -> None:
    if len(sol) > k:
        return
    cur = table.get(key)
    if cur is None or len(sol) < len(cur):
        table[key] = sol


def _kept(part) -> frozenset:
    return frozenset(v for block in part for v in block)


def fvs_dp(graph: IntersectionGraph, td, k: int):
    """Feedback vertex set of size <= k, or None.

    States at a bag: (set of deleted bag vertices, partition of the kept bag
    vertices into connected components of the processed graph).  The deleted
    set is implicit -- it is the bag minus the partition's support.  An
    introduced edge inside one block closes a cycle and kills the state; at a
    join the two component forests merge and the state survives only if the
    merge is still a forest (checked by counting spanning-tree edges).
    """
    if k < 0:
        raise PdkError("budget must be non-negative")
    if not check_tree_decomposition(graph, td):
        raise PdkError("tree decomposition does not cover the graph")
    nice = make_nice(graph, td)
    tables = {}
    for idx in nice.postorder():
        node = nice.nodes[idx]
        if node.kind == "leaf":
            tables[idx] = {(): frozenset()}
        elif node.kind == "introduce":
            (v,) = node.data
            out = {}
            for part, sol in tables[node.children[0]].items():
                _put(out, part, sol | {v}, k)
                _put(out, _canon(part + ((v,),)), sol, k)
            tables[idx] = out
        elif node.kind == "edge":
            u, v = node.data
            out = {}
            for part, sol in tables[node.children[0]].items():
                kept = _kept(part)
                if u not in kept or v not in kept:
                    _put(out, part, sol, k)
                    continue
                bu = next(b for b in part if u in b)
                bv = next(b for b in part if v in b)
                if bu == bv:
                    continue            # the edge closes a cycle
                rest = [b for b in part if b is not bu and b is not bv]
                rest.append(tuple(sorted(bu + bv)))
                _put(out, _canon(rest), sol, k)
            tables[idx] = out
        elif node.kind == "forget":
            (v,) = node.data
            out = {}
            for part, sol in tables[node.children[0]].items():
                newpart = _canon(tuple(x for x in block if x != v)
                                 for block in part)
                _put(out, newpart, sol, k)
            tables[idx] = out
        elif node.kind == "join":
            left = tables[node.children[0]]
            right = tables[node.children[1]]
            by_kept = {}
            for part, sol in right.items():
                by_kept.setdefault(_kept(part), []).append((part, sol))
            out = {}
            for p1, s1 in left.items():
                kept = _kept(p1)
                for p2, s2 in by_kept.get(kept, ()):
                    merged = _merge_partitions(kept, p1, p2)
                    if merged is None:
                        continue        # the union of the two forests cycles
                    _put(out, merged, s1 | s2, k)
            tables[idx] = out
        else:
            raise PdkError("unknown node kind %r" % node.kind)
        for child in node.children:
            tables.pop(child, None)
    sol = tables[nice.root].get(())
    if sol is None:
        return None
    assert len(sol) <= k and graph.is_forest(removed=sol)
    return sol


def _merge_partitions(kept, p1, p2):
    """Union of two component partitions, or None if it closes a cycle.

    Each side realizes its partition by a spanning forest with
    |kept| - #blocks edges; the two edge sets are disjoint (every graph edge
    is introduced at exactly one node), so the union is a forest iff the
    total edge count matches the merged partition.
    """
    parent = {v: v for v in kept}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for part in (p1, p2):
        for block in part:
            for other in block[1:]:
                parent[find(other)] = find(block[0])
    groups = {}
    for v in kept:
        groups.setdefault(find(v), []).append(v)
    edges = 2 * len(kept) - len(p1) - len(p2)
    if edges > len(kept) - len(groups):
        return None
    return _canon(groups.values())


def th_dp(graph: IntersectionGraph, td, k: int):
    """Triangle hitting set of size <= k, or None.

    States are the kept bag subsets.  A triangle is rejected at the node that
    introduces its last edge: edges live at the topmost bag containing both
    ends, those three nodes lie on one root path, and the deepest of them
    still holds the third vertex, so checking bag-local triangles at every
    edge node catches every triangle exactly once.
    """
    if k < 0:
        raise PdkError("budget must be non-negative")
    if not check_tree_decomposition(graph, td):
        raise PdkError("tree decomposition does not cover the graph")
    nice = make_nice(graph, td)
    tables = {}
    for idx in nice.postorder():
        node = nice.nodes[idx]
        if node.kind == "leaf":
            tables[idx] = {frozenset(): frozenset()}
        elif node.kind == "introduce":
            (v,) = node.data
            out = {}
            for kept, sol in tables[node.children[0]].items():
                _put(out, kept, sol | {v}, k)
                _put(out, kept | {v}, sol, k)
            tables[idx] = out
        elif node.kind == "edge":
            u, v = node.data
            out = {}
            for kept, sol in tables[node.children[0]].items():
                if u in kept and v in kept:
                    closing = any(w in kept
                                  and graph.has_edge(u, w)
                                  and graph.has_edge(v, w)
                                  for w in node.bag if w not in (u, v))
                    if closing:
                        continue
                _put(out, kept, sol, k)
            tables[idx] = out
        elif node.kind == "forget":
            (v,) = node.data
            out = {}
            for kept, sol in tables[node.children[0]].items():
                _put(out, kept - {v}, sol, k)
            tables[idx] = out
        elif node.kind == "join":
            left = tables[node.children[0]]
            right = tables[node.children[1]]
            out = {}
            for kept, s1 in left.items():
                s2 = right.get(kept)
                if s2 is not None:
                    _put(out, kept, s1 | s2, k)
            tables[idx] = out
        else:
            raise PdkError("unknown node kind %r" % node.kind)
        for child in node.children:
            tables.pop(child, None)
    sol = tables[nice.root].get(frozenset())
    if sol is None:
        return None
    assert len(sol) <= k and graph.is_triangle_free(removed=sol)
    return sol


# ---------------------------------------------------------------------------
# feedback vertex set pipeline


def _default_p(k: int, root: int) -> int:
    return max(6, math.ceil(k ** (1.0 / root))) if k > 0 else 6


# partition states explode in memory beyond this width; past it an exact
# cycle-branching search is the better tool (never reached by kernelized
# instances at the scales we run, but the CLI accepts arbitrary graphs)
_DP_WIDTH_LIMIT = 14


def _short_cycle(graph: IntersectionGraph):
    """Vertex list of a short cycle, or None if the graph is a forest.

    One BFS per start vertex; a non-tree edge closes a cycle through the two
    tree paths.  The shortest cycle found over all starts is returned, which
    is the girth for unweighted graphs.
    """
    best = None
    for s in graph.vertices():
        parent = {s: None}
        depth = {s: 0}
        order = [s]
        head = 0
        while head < len(order):
            u = order[head]
            head += 1
            if best is not None and 2 * depth[u] + 1 >= len(best):
                break
            for v in graph.neighbors(u):
                if v not in depth:
                    depth[v] = depth[u] + 1
                    parent[v] = u
                    order.append(v)
                    continue
                if parent[u] == v:
                    continue
                pu, pv = [u], [v]
                while parent[pu[-1]] is not None:
                    pu.append(parent[pu[-1]])
                while parent[pv[-1]] is not None:
                    pv.append(parent[pv[-1]])
                seen = {x: i for i, x in enumerate(pv)}
                cut = next(i for i, x in enumerate(pu) if x in seen)
                cycle = pu[:cut + 1] + pv[:seen[pu[cut]]][::-1]
                if len(cycle) >= 3 and (best is None
                                        or len(cycle) < len(best)):
                    best = cycle
        if best is not None and len(best) == 3:
            break
    return best


def _fvs_branch(graph: IntersectionGraph, k: int):
    """Exact bounded search branching over the vertices of a short cycle."""
    cycle = _short_cycle(graph)
    if cycle is None:
        return frozenset()
    if k <= 0:
        return None
    for v in cycle:
        sub = graph.copy()
        sub.delete_vertex(v)
        got = _fvs_branch(sub, k - 1)
        if got is not None:
            return got | {v}
    return None


def _strip_system(bt: BranchTuple) -> BranchTuple:
    inst = bt.instance
    return BranchTuple(Instance(inst.graph, inst.k, None, inst.forced,
                                inst.provenance), bt.m, bt.p)


def _solve_tuple(bt, use_kernel: bool, require_no_inner: bool,
                 representation: str = "geometric"):
    """Decide one branch tuple; returns (solution-or-None, stats-dict)."""
    info = {"rule_hits": {}, "kernel_size": None, "width": None,
            "m_prime_ratio": None}
    if representation == "fallback":
        bt = _strip_system(bt)
    work = bt.instance
    state = None
    if use_kernel:
        work, state, ks = run_kernel(bt)
        info["rule_hits"] = ks["rule_hits"]
        info["kernel_size"] = ks["final_n"]
        if bt.m:
            info["m_prime_ratio"] = ks["m_prime"] / float(len(bt.m))
        if require_no_inner and ks["inner"]:
            raise AssertionError("disk tubes must never host nested disks "
                                 "(found %d)" % ks["inner"])
        if state.decided == "no":
            return None, info
    else:
        info["kernel_size"] = work.graph.n
    td = tree_decomposition(work.graph)
    info["width"] = td.width
    if td.width > _DP_WIDTH_LIMIT:
        sol = _fvs_branch(work.graph, work.k)
    else:
        sol = fvs_dp(work.graph, td, work.k)
    if sol is None:
        return None, info
    if use_kernel:
        sol = lift_solution(bt, state, sol)
    return frozenset(sol) | bt.instance.forced, info


def _merge_info(stats: dict, info: dict) -> None:
    for rule, hits in info["rule_hits"].items():
        stats["rule_hits"][rule] = stats["rule_hits"].get(rule, 0) + hits
    for key in ("kernel_size", "width", "m_prime_ratio"):
        if info[key] is not None:
            cur = stats.get(key)
            stats[key] = info[key] if cur is None else max(cur, info[key])


def _run_fvs(inst: Instance, p: int, use_kernel: bool,
             require_no_inner: bool = False,
             representation: str = "geometric") -> SolveResult:
    if representation not in ("geometric", "fallback"):
        raise PdkError("unknown kernel representation %r" % representation)
    g0 = inst.graph
    k0 = inst.k
    tuples = preprocess(inst, p)
    stats = {"branches": len(tuples), "rule_hits": {}, "kernel_size": None,
             "width": None, "p": p}
    if require_no_inner:
        stats["m_prime_ratio"] = None
    solution = None
    threads = int(os.environ.get("PDK_THREADS", "1") or "1")
    if threads > 1 and len(tuples) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(
                lambda bt: _solve_tuple(bt, use_kernel, require_no_inner,
                                        representation),
                tuples))
        for sol, info in results:
            _merge_info(stats, info)
            if sol is not None and solution is None:
                solution = sol
    else:
        for bt in tuples:
            sol, info = _solve_tuple(bt, use_kernel, require_no_inner,
                                     representation)
            _merge_info(stats, info)
            if sol is not None:
                solution = sol
                break
    if not require_no_inner:
        stats.pop("m_prime_ratio", None)
    if solution is None:
        return SolveResult("no", (), stats)
    assert len(solution) <= k0 and g0.is_forest(removed=solution)
    return SolveResult("yes", tuple(sorted(solution)), stats)


def solve_fvs(system: PseudoDiskSystem, k: int, p=None,
              use_kernel: bool = True,
              representation: str = "geometric") -> SolveResult:
    """Decide whether k disk deletions make the intersection graph a forest."""
    if not isinstance(system, PseudoDiskSystem):
        raise PdkError("solve_fvs expects a pseudo-disk system")
    if k < 0:
        raise PdkError("budget must be non-negative")
    validate_system(system).raise_if_failed()
    if p is None:
        p = _default_p(k, 7)
    g = build_intersection_graph(system)
    return _run_fvs(Instance(g, k, system), p, use_kernel,
                    representation=representation)


def solve_fvs_graph(graph: IntersectionGraph, k: int, p=None,
                    use_kernel: bool = True) -> SolveResult:
    """The same pipeline on a bare graph (representation-free reductions)."""
    if k < 0:
        raise PdkError("budget must be non-negative")
    if p is None:
        p = _default_p(k, 7)
    return _run_fvs(Instance(graph.copy(), k, None), p, use_kernel)


def solve_fvs_contact_segments(css: ContactSegmentSystem, k: int,
                               p=None) -> SolveResult:
    """Feedback vertex set on a contact-segment system via disk tubes."""
    if k < 0:
        raise PdkError("budget must be non-negative")
    system = segments_to_pseudodisks(css)
    if p is None:
        p = _default_p(k, 6)
    g = build_intersection_graph(system)
    return _run_fvs(Instance(g, k, system), p, use_kernel=True,
                    require_no_inner=True)


def kernel_statistics(system_or_graph, k: int, p=None,
                      representation: str = "geometric") -> dict:
    """Kernelization summary without the DP: rule hits and size ratios."""
    if isinstance(system_or_graph, PseudoDiskSystem):
        validate_system(system_or_graph).raise_if_failed()
        g = build_intersection_graph(system_or_graph)
        inst = Instance(g, k, system_or_graph)
    else:
        inst = Instance(system_or_graph.copy(), k, None)
    if k < 0:
        raise PdkError("budget must be non-negative")
    if p is None:
        p = _default_p(k, 7)
    tuples = preprocess(inst, p)
    out = {"p": p, "k": k, "n": inst.graph.n, "branches": len(tuples),
           "rule_hits": {}, "tuples": []}
    for bt in tuples:
        if representation == "fallback":
            bt = _strip_system(bt)
        _, state, ks = run_kernel(bt)
        for rule, hits in ks["rule_hits"].items():
            out["rule_hits"][rule] = out["rule_hits"].get(rule, 0) + hits
        ratio_m = (ks["m_prime"] / float(len(bt.m))) if bt.m else None
        denom = float(bt.p ** 4 * max(1, bt.instance.k))
        out["tuples"].append({
            "initial_n": ks["initial_n"], "final_n": ks["final_n"],
            "final_k": ks["final_k"], "mode": ks["mode"],
            "decided": ks["decided"], "m_prime": ks["m_prime"],
            "inner": ks["inner"], "types": ks["types"],
            "m_prime_ratio": ratio_m,
            "size_ratio": ks["final_n"] / denom})
    return out


# ---------------------------------------------------------------------------
# triangle hitting


def _greedy_triangle_packing(graph: IntersectionGraph) -> list:
    """Vertex-disjoint triangles picked greedily in sorted order."""
    used = set()
    packing = []
    for a, b, c in graph.triangles():
        if a in used or b in used or c in used:
            continue
        packing.append((a, b, c))
        used.update((a, b, c))
    return packing


_TH_DP_MAX_N = 30


def _th_search(g: IntersectionGraph, k: int, stats: dict):
    stats["branches"] += 1
    tris = g.triangles()
    if not tris:
        return set()
    if k <= 0:
        return None
    if len(_greedy_triangle_packing(g)) > k:
        return None
    # any hitting set keeps at most 2 vertices of a clique, so a big clique
    # either kills the branch outright or splits it into surviving pairs
    probe = Instance(g, g.n + 3, None)
    found = find_clique_of_size(probe, min(6, k + 3))
    if found not in ("none", "reject"):
        clique = sorted(found)
        if len(clique) >= k + 3:
            return None
        for a, b in itertools.combinations(clique, 2):
            rest = [v for v in clique if v not in (a, b)]
            if len(rest) > k:
                continue
            sub = g.copy()
            sub.delete_vertices(rest)
            got = _th_search(sub, k - len(rest), stats)
            if got is not None:
                got.update(rest)
                return got
        return None
    if g.n <= _TH_DP_MAX_N:
        td = tree_decomposition(g)
        if td.width <= _DP_WIDTH_LIMIT:
            stats["width"] = max(stats["width"] or 0, td.width)
            got = th_dp(g, td, k)
            return None if got is None else set(got)
    a, b, c = tris[0]
    for v in (a, b, c):
        sub = g.copy()
        sub.delete_vertex(v)
        got = _th_search(sub, k - 1, stats)
        if got is not None:
            got.add(v)
            return got
    return None


def solve_th(obj, k: int) -> SolveResult:
    """Decide whether k deletions kill every triangle."""
    if isinstance(obj, PseudoDiskSystem):
        validate_system(obj).raise_if_failed()
        g = build_intersection_graph(obj)
    elif isinstance(obj, IntersectionGraph):
        g = obj
    else:
        raise PdkError("solve_th expects a pseudo-disk system or a graph")
    if k < 0:
        raise PdkError("budget must be non-negative")
    stats = {"branches": 0, "rule_hits": {}, "kernel_size": None,
             "width": None, "p": None}
    if len(_greedy_triangle_packing(g)) > k:
        return SolveResult("no", (), stats)
    got = _th_search(g.copy(), k, stats)
    if got is None:
        return SolveResult("no", (), stats)
    solution = frozenset(got)
    assert len(solution) <= k and g.is_triangle_free(removed=solution)
    return SolveResult("yes", tuple(sorted(solution)), stats)
