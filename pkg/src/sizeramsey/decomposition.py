"""Long induced cycles plus a bounded-treewidth remainder, and tree blow-up containers."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import ContainerBoundsExceeded, DegreeExceeded
from .graph import Graph, RootedTree
from .ops import find_induced_cycle


@dataclass
class Decomposition:
    source: Graph
    J: list
    cycles: list          # F_1..F_g as vertex sequences, in removal order
    ell: int = 5

    @property
    def order(self) -> list:
        return [sorted(self.J)] + [sorted(c) for c in self.cycles]

    def to_json(self) -> str:
        return json.dumps({"J": sorted(self.J), "cycles": [list(c) for c in self.cycles]}) + "\n"

    @classmethod
    def from_json(cls, text: str, source: Graph, ell: int = 5) -> "Decomposition":
        obj = json.loads(text)
        return cls(source, [int(v) for v in obj["J"]], [[int(v) for v in c] for c in obj["cycles"]], ell)


def decompose_cubic(h: Graph, ell: int = 5) -> Decomposition:
    """Peel shortest induced cycles of length >= ell until none is left."""
    if h.max_degree() > 3:
        raise DegreeExceeded(f"maximum degree {h.max_degree()} exceeds 3", degree=h.max_degree())
    if ell < 3:
        raise ValueError("ell must be at least 3")
    remaining = list(range(h.n))
    cycles = []
    while remaining:
        sub, ids = h.induced_subgraph(remaining)
        cyc = find_induced_cycle(sub, ell)
        if cyc is None:
            break
        cyc = [ids[v] for v in cyc]
        cycles.append(cyc)
        gone = set(cyc)
        remaining = [v for v in remaining if v not in gone]
    return Decomposition(h, remaining, cycles, ell)


@dataclass
class DecompositionReport:
    partition_ok: bool
    cycle_violations: list        # indices of parts that are not induced cycles of length >= ell
    J_long_cycle: list | None     # an induced cycle >= ell inside J, if any
    back_degree_violations: list  # (vertex, back-neighbour count)
    treewidth_bound: int

    @property
    def valid(self) -> bool:
        return (self.partition_ok and not self.cycle_violations and self.J_long_cycle is None
                and not self.back_degree_violations)

    def as_dict(self) -> dict:
        return {
            "valid": self.valid,
            "partition_ok": self.partition_ok,
            "cycle_violations": list(self.cycle_violations),
            "J_long_cycle": self.J_long_cycle,
            "back_degree_violations": [list(x) for x in self.back_degree_violations],
            "treewidth_bound": self.treewidth_bound,
        }


def validate_decomposition(h: Graph, d: Decomposition, ell: int | None = None) -> DecompositionReport:
    ell = d.ell if ell is None else ell
    parts = [list(d.J)] + [list(c) for c in d.cycles]
    flat = [v for p in parts for v in p]
    partition_ok = sorted(flat) == list(range(h.n))
    bad_cycles = []
    for i, cyc in enumerate(d.cycles, start=1):
        k = len(cyc)
        ok = k >= ell and len(set(cyc)) == k
        ok = ok and all(h.has_edge(cyc[j], cyc[(j + 1) % k]) for j in range(k))
        ok = ok and h.restrict(cyc).m == k
        if not ok:
            bad_cycles.append(i)
    sub, ids = h.induced_subgraph(sorted(set(d.J)))
    hit = find_induced_cycle(sub, ell) if sub.n else None
    long_cycle = None if hit is None else [ids[v] for v in hit]
    part_of = {}
    for i, p in enumerate(parts):
        for v in p:
            part_of.setdefault(v, i)
    back = []
    for i, p in enumerate(parts):
        for v in p:
            cnt = sum(1 for w in h.neighbours(v) if part_of.get(w, i) < i)
            if cnt > 1:
                back.append((v, cnt))
    delta = max(h.max_degree(), 1)
    return DecompositionReport(partition_ok, bad_cycles, long_cycle, back, (ell - 1) * (delta - 1) + 2)


# ------------------------------------------------------------ tree decompositions

@dataclass
class TreeDecomposition:
    bags: list                # list of frozensets
    tree_edges: list          # pairs of bag indices
    width: int
    exact: bool
    lower_bound: int
    within_cap: bool = True

    def as_dict(self) -> dict:
        return {"bags": [sorted(b) for b in self.bags], "tree_edges": [list(e) for e in self.tree_edges],
                "width": self.width, "exact": self.exact, "lower_bound": self.lower_bound}


def _fill_in(adj, v):
    nb = list(adj[v])
    return sum(1 for i, a in enumerate(nb) for b in nb[i + 1:] if b not in adj[a])


def _eliminate(adj, v):
    nb = adj.pop(v)
    for a in nb:
        adj[a].discard(v)
        adj[a] |= nb - {a}
    return nb


def _min_fill_order(adj):
    adj = {v: set(s) for v, s in adj.items()}
    order, width = [], 0
    while adj:
        v = min(adj, key=lambda x: (_fill_in(adj, x), len(adj[x]), x))
        width = max(width, len(adj[v]))
        order.append(v)
        _eliminate(adj, v)
    return order, width


def _mmd_plus(adj) -> int:
    """Minor-min-width lower bound: contract a min-degree vertex into its min-degree neighbour."""
    adj = {v: set(s) for v, s in adj.items()}
    lb = 0
    while len(adj) > 1:
        v = min(adj, key=lambda x: (len(adj[x]), x))
        lb = max(lb, len(adj[v]))
        if not adj[v]:
            adj.pop(v)
            continue
        u = min(adj[v], key=lambda x: (len(adj[x]), x))
        for w in adj.pop(v):
            adj[w].discard(v)
            if w != u:
                adj[w].add(u)
                adj[u].add(w)
    return lb


def _bags_from_order(adj, order):
    adj = {v: set(s) for v, s in adj.items()}
    pos = {v: i for i, v in enumerate(order)}
    bags, owner = [], {}
    for v in order:
        nb = set(adj[v])
        bags.append(frozenset(nb | {v}))
        owner[v] = len(bags) - 1
        _eliminate(adj, v)
        bags_nb = nb
        owner[(v, "nb")] = bags_nb
    edges = []
    for v in order:
        nb = owner[(v, "nb")]
        if nb:
            w = min(nb, key=lambda x: pos[x])
            edges.append((owner[v], owner[w]))
    return bags, edges


def _exact_width(adj, upper, budget):
    """Branch and bound over elimination orders. Returns (width, order, completed)."""
    best = [upper, None]
    seen = {}
    nodes = [0]
    verts = sorted(adj)

    def rec(adj, order, width):
        nodes[0] += 1
        if nodes[0] > budget:
            return False
        if not adj:
            if width < best[0] or best[1] is None:
                best[0], best[1] = width, list(order)
            return True
        key = frozenset(adj)
        if seen.get(key, 1 << 30) <= width:
            return True
        seen[key] = width
        if max(width, _mmd_plus(adj)) >= best[0] and best[1] is not None:
            return True
        # simplicial vertices can be eliminated greedily
        for v in sorted(adj):
            if _fill_in(adj, v) == 0:
                nxt = {x: set(s) for x, s in adj.items()}
                w = max(width, len(nxt[v]))
                _eliminate(nxt, v)
                return rec(nxt, order + [v], w)
        for v in sorted(adj, key=lambda x: (_fill_in(adj, x), len(adj[x]), x)):
            w = max(width, len(adj[v]))
            if w >= best[0] and best[1] is not None:
                continue
            nxt = {x: set(s) for x, s in adj.items()}
            _eliminate(nxt, v)
            if not rec(nxt, order + [v], w):
                return False
        return True

    done = rec({v: set(adj[v]) for v in verts}, [], 0)
    return best[0], best[1], done


def tree_decomposition_small(g: Graph, width_cap: int | None = None, exact_cap: int = 40,
                             budget: int = 200000) -> TreeDecomposition:
    """Tree decomposition per component, exact (branch and bound) up to ``exact_cap`` vertices.

    The min-fill order gives the upper bound and the fallback; the minor-min-width
    bound is reported as ``lower_bound``. ``exact`` is True only when every
    component's search finished within the node budget.
    """
    bags, edges = [], []
    width, lower, exact = 0, 0, True
    roots = []
    for comp in g.components():
        adj = {v: set(w for w in g.neighbours(v)) for v in comp}
        order, ub = _min_fill_order(adj)
        lb = _mmd_plus(adj)
        cw = ub
        if len(comp) <= exact_cap and lb < ub:
            w, o, done = _exact_width(adj, ub, budget)
            if o is not None and w <= ub:
                order, cw = o, w
            if not done:
                exact = False
        elif len(comp) > exact_cap and lb < ub:
            exact = False
        b, e = _bags_from_order(adj, order)
        off = len(bags)
        bags.extend(b)
        edges.extend((off + x, off + y) for x, y in e)
        roots.append(off + len(b) - 1)
        width = max(width, cw)
        lower = max(lower, lb)
    for a, b in zip(roots, roots[1:]):
        edges.append((a, b))
    if exact:
        lower = width
    td = TreeDecomposition(bags, edges, width, exact, lower)
    td.within_cap = width_cap is None or width <= width_cap
    return td


def check_tree_decomposition(g: Graph, td: TreeDecomposition) -> list[str]:
    problems = []
    covered = set().union(*td.bags) if td.bags else set()
    if covered != set(range(g.n)):
        problems.append("vertices not covered")
    for u, v in g.edge_list():
        if not any(u in b and v in b for b in td.bags):
            problems.append(f"edge {(u, v)} not covered")
    k = len(td.bags)
    if k and len(td.tree_edges) != k - 1:
        problems.append("bag graph is not a tree")
    nb = {i: set() for i in range(k)}
    for a, b in td.tree_edges:
        nb[a].add(b)
        nb[b].add(a)
    for v in covered:
        holders = [i for i, b in enumerate(td.bags) if v in b]
        seen, stack = {holders[0]}, [holders[0]]
        while stack:
            x = stack.pop()
            for y in nb[x]:
                if y not in seen and v in td.bags[y]:
                    seen.add(y)
                    stack.append(y)
        if len(seen) != len(holders):
            problems.append(f"bags of vertex {v} are not connected")
    if td.bags and max(len(b) for b in td.bags) - 1 != td.width:
        problems.append("width does not match the largest bag")
    return problems


# ------------------------------------------------------------ containers

@dataclass
class TreeBlowupContainer:
    tree: RootedTree
    k: int
    embedding: dict              # vertex -> (tree vertex, slot)
    parts: list = field(default_factory=list)
    width: int = 0
    d_max: int = 0


def build_tree_blowup_container(g: Graph, td: TreeDecomposition | None = None, d_max: int | None = None,
                                vertices=None) -> TreeBlowupContainer:
    """Tree partition by BFS layers; H[vertices] maps into T x K_k.

    Within each component, layer i is split into the classes of connectivity in
    the subgraph induced by layers >= i. Each class has its neighbours in layer
    i - 1 inside a single class, which becomes its parent. Component roots
    are chained into one tree.
    """
    verts = sorted(range(g.n) if vertices is None else set(int(v) for v in vertices))
    if td is None:
        sub, _ = g.induced_subgraph(verts)
        td = tree_decomposition_small(sub)
    w = max(td.width, 1)
    d = g.max_degree() if d_max is None else d_max
    d = max(d, 1)
    vs = set(verts)
    nb = {v: [u for u in g.neighbours(v) if u in vs] for v in verts}
    parts, parent, part_of = [], {}, {}
    prev_root = None
    for comp in _components(verts, nb):
        root = comp[0]
        dist = {root: 0}
        queue = [root]
        for v in queue:
            for u in sorted(nb[v]):
                if u not in dist:
                    dist[u] = dist[v] + 1
                    queue.append(u)
        depth = max(dist.values())
        for i in range(depth + 1):
            above = {v for v in comp if dist[v] >= i}
            layer = sorted(v for v in comp if dist[v] == i)
            seen = set()
            for s in layer:
                if s in seen:
                    continue
                cls, stack = set(), [s]
                reach = {s}
                while stack:
                    x = stack.pop()
                    if dist[x] == i:
                        cls.add(x)
                    for y in nb[x]:
                        if y in above and y not in reach:
                            reach.add(y)
                            stack.append(y)
                seen |= cls
                pid = len(parts)
                parts.append(sorted(cls))
                for v in cls:
                    part_of[v] = pid
                if i == 0:
                    parent[pid] = prev_root
                    prev_root = pid
                else:
                    ups = {part_of[y] for v in cls for y in nb[v] if dist[y] == i - 1}
                    if len(ups) != 1:
                        raise ContainerBoundsExceeded("layer class with several parents", parents=sorted(ups))
                    parent[pid] = ups.pop()
    tree = RootedTree(parent, 0) if parts else RootedTree({0: None}, 0)
    k = max((len(p) for p in parts), default=1)
    emb = {v: (part_of[v], parts[part_of[v]].index(v)) for v in verts}
    cont = TreeBlowupContainer(tree, k, emb, parts, w, d)
    k_bound, deg_bound = 18 * w * d, 18 * w * d * d
    if k > k_bound or tree.max_degree() > deg_bound:
        raise ContainerBoundsExceeded("container exceeds the class-size or degree bound", k=k, k_bound=k_bound,
                                      tree_degree=tree.max_degree(), degree_bound=deg_bound)
    return cont


def _components(verts, nb):
    seen, out = set(), []
    for s in verts:
        if s in seen:
            continue
        comp, stack = [], [s]
        seen.add(s)
        while stack:
            x = stack.pop()
            comp.append(x)
            for y in nb[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        out.append(sorted(comp))
    return out


def container_violations(g: Graph, cont: TreeBlowupContainer, vertices=None) -> list:
    """Edges of g[vertices] not realised in T x K_k by the container map."""
    verts = set(cont.embedding) if vertices is None else set(vertices)
    images = [cont.embedding[v] for v in verts]
    bad = []
    if len(set(images)) != len(images):
        bad.append(("not injective",))
    if any(slot >= cont.k for _, slot in images):
        bad.append(("slot out of range",))
    tree_edges = {frozenset(e) for e in cont.tree.edges()}
    for u, v in g.edge_list():
        if u in verts and v in verts:
            (a, _), (b, _) = cont.embedding[u], cont.embedding[v]
            if a != b and frozenset((a, b)) not in tree_edges:
                bad.append((u, v))
    return bad
