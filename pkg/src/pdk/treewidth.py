"""Tree decompositions: elimination heuristics, checker, nice form.

Decompositions come from elimination orders (min-fill and min-degree; the
better of the two is kept) and are always re-checked against the definition
before use.  The DP consumes a "nice" binary form with five node kinds:
leaf (empty bag), introduce vertex, introduce edge, forget vertex, join.
Every graph edge is introduced exactly once, at the topmost bag containing
both endpoints.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import PdkError
from .graphs import IntersectionGraph


@dataclass
class TreeDecomposition:
    bags: list          # index -> frozenset of vertices
    edges: list         # tree edges as (i, j) index pairs

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags), default=1) - 1


def _elimination_order(g: IntersectionGraph, strategy: str):
    adj = {v: set(g.neighbors(v)) for v in g.vertices()}
    order = []
    while adj:
        if strategy == "degree":
            v = min(adj, key=lambda u: (len(adj[u]), u))
        else:  # min-fill
            def fill(u):
                nb = adj[u]
                missing = 0
                nbl = sorted(nb)
                for i, a in enumerate(nbl):
                    for b in nbl[i + 1:]:
                        if b not in adj[a]:
                            missing += 1
                return missing
            v = min(adj, key=lambda u: (fill(u), len(adj[u]), u))
        order.append(v)
        nb = adj.pop(v)
        for a in nb:
            adj[a].discard(v)
        nbl = sorted(nb)
        for i, a in enumerate(nbl):
            for b in nbl[i + 1:]:
                adj[a].add(b)
                adj[b].add(a)
    return order


def _decomposition_from_order(g: IntersectionGraph, order) -> TreeDecomposition:
    pos = {v: i for i, v in enumerate(order)}
    adj = {v: set(g.neighbors(v)) for v in g.vertices()}
    bags = []
    parents = []
    for v in order:
        nb = adj.pop(v)
        bags.append(frozenset(nb) | {v})
        parents.append(min(nb, key=pos.get) if nb else None)
        nbl = sorted(nb)
        for a in nbl:
            adj[a].discard(v)
        for i, a in enumerate(nbl):
            for b in nbl[i + 1:]:
                adj[a].add(b)
                adj[b].add(a)
    edges = []
    for i, p in enumerate(parents):
        if p is not None:
            edges.append((i, pos[p]))
        elif i + 1 < len(order):
            # isolated-at-elimination vertex: chain bags to keep a tree
            edges.append((i, i + 1))
    if not bags:
        bags = [frozenset()]
    return TreeDecomposition(bags, edges)


def check_tree_decomposition(g: IntersectionGraph, td: TreeDecomposition) -> bool:
    n = len(td.bags)
    if len(td.edges) != n - 1:
        return False
    tree = {i: set() for i in range(n)}
    for i, j in td.edges:
        if i == j or not (0 <= i < n and 0 <= j < n):
            return False
        tree[i].add(j)
        tree[j].add(i)
    # connectivity of the tree itself
    seen = {0}
    stack = [0]
    while stack:
        for w in tree[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    if len(seen) != n:
        return False
    union = set()
    for b in td.bags:
        union |= b
    if union != set(g.vertices()):
        return False
    for u, v in g.edges():
        if not any(u in b and v in b for b in td.bags):
            return False
    for v in g.vertices():
        nodes = [i for i in range(n) if v in td.bags[i]]
        seen = {nodes[0]}
        stack = [nodes[0]]
        inset = set(nodes)
        while stack:
            for w in tree[stack.pop()]:
                if w in inset and w not in seen:
                    seen.add(w)
                    stack.append(w)
        if len(seen) != len(nodes):
            return False
    return True


def tree_decomposition(g: IntersectionGraph) -> TreeDecomposition:
    """Best of the min-fill and min-degree heuristics, verified."""
    best = None
    for strategy in ("fill", "degree"):
        order = _elimination_order(g, strategy)
        td = _decomposition_from_order(g, order)
        if best is None or td.width < best.width:
            best = td
    if not check_tree_decomposition(g, best):
        raise PdkError("heuristic produced an invalid tree decomposition")
    return best


@dataclass
class NiceNode:
    kind: str                 # leaf | introduce | edge | forget | join
    bag: tuple                # sorted vertex tuple
    children: tuple           # child indices
    data: Optional[tuple] = None   # vertex (as 1-tuple) or edge (u, v)


@dataclass
class NiceDecomposition:
    nodes: list = field(default_factory=list)
    root: int = -1

    def add(self, kind, bag, children=(), data=None) -> int:
        self.nodes.append(NiceNode(kind, tuple(sorted(bag)), tuple(children), data))
        return len(self.nodes) - 1

    @property
    def width(self) -> int:
        return max((len(nd.bag) for nd in self.nodes), default=1) - 1

    def postorder(self):
        out = []
        stack = [(self.root, False)]
        while stack:
            i, done = stack.pop()
            if done:
                out.append(i)
                continue
            stack.append((i, True))
            for c in self.nodes[i].children:
                stack.append((c, False))
        return out


def _root_tree(td: TreeDecomposition, root: int):
    n = len(td.bags)
    adj = {i: [] for i in range(n)}
    for i, j in td.edges:
        adj[i].append(j)
        adj[j].append(i)
    children = {i: [] for i in range(n)}
    parent = {root: None}
    order = [root]
    stack = [root]
    while stack:
        u = stack.pop()
        for w in sorted(adj[u]):
            if w not in parent:
                parent[w] = u
                children[u].append(w)
                order.append(w)
                stack.append(w)
    return children, order


def make_nice(g: IntersectionGraph, td: TreeDecomposition) -> NiceDecomposition:
    """Binary nice decomposition with one introduce-edge node per graph edge."""
    root = 0
    children, bfs = _root_tree(td, root)

    # assign every edge to the topmost original bag containing both ends
    depth = {bfs[0]: 0}
    for u in bfs:
        for c in children[u]:
            depth[c] = depth[u] + 1
    edge_at = {i: [] for i in range(len(td.bags))}
    for u, v in g.edges():
        hosts = [i for i in range(len(td.bags)) if u in td.bags[i] and v in td.bags[i]]
        top = min(hosts, key=lambda i: (depth[i], i))
        edge_at[top].append((u, v))

    nice = NiceDecomposition()

    def chain_introduce(below: int, have: set, want: set) -> int:
        cur = below
        bag = set(have)
        for v in sorted(want - have):
            bag.add(v)
            cur = nice.add("introduce", bag, (cur,), (v,))
        return cur

    def chain_forget(below: int, have: set, want: set) -> int:
        cur = below
        bag = set(have)
        for v in sorted(have - want):
            bag.discard(v)
            cur = nice.add("forget", bag, (cur,), (v,))
        return cur

    def build(node: int) -> int:
        bag = set(td.bags[node])
        subs = []
        for c in children[node]:
            top_c = build(c)
            cbag = set(td.bags[c])
            mid = chain_forget(top_c, cbag, bag)
            subs.append(chain_introduce(mid, cbag & bag, bag))
        if not subs:
            cur = nice.add("leaf", ())
            cur = chain_introduce(cur, set(), bag)
        else:
            cur = subs[0]
            for other in subs[1:]:
                cur = nice.add("join", bag, (cur, other))
        for e in sorted(edge_at[node]):
            cur = nice.add("edge", bag, (cur,), e)
        return cur

    top = build(root)
    top = chain_forget(top, set(td.bags[root]), set())
    nice.root = top
    return nice
