"""Tree embedding into expanding graphs and the blue-tree / red-q-partite dichotomy."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from ..errors import EmbeddingFailed, PatternTooLarge
from ..graph import BLUE, RED, EmbeddingMap, Graph, RootedTree, TwoColoring
from .expansion import expansion_check
from .pattern import embed_pattern


def tree_pattern(t: RootedTree) -> tuple[Graph, list]:
    """Tree as a Graph on 0..|t|-1 (BFS order) with the id -> tree-vertex list."""
    return t.to_graph()


def embed_tree_fp(host: Graph, t: RootedTree, d: int | None = None, vertices=None, budget: int = 200_000,
                  check_hypothesis: bool = False) -> EmbeddingMap:
    """Embed t into host by leaf extension in BFS order with backtracking.

    Each new vertex goes to a free neighbour of its parent's image, preferring
    images with many free neighbours left, which is the greedy behind the
    expansion argument. With ``check_hypothesis`` the exact (2|t|-2, d+1)
    expansion check is run first and a failed search under a passed check is
    raised as an inconsistency.
    """
    verts = range(host.n) if vertices is None else vertices
    verts = sorted(set(int(v) for v in verts))
    if not verts:
        raise EmbeddingFailed("host is empty")
    if len(t) > len(verts):
        raise PatternTooLarge(f"tree has {len(t)} vertices, host {len(verts)}", tree=len(t), host=len(verts))
    if d is not None and t.max_degree() > d:
        raise ValueError("tree degree exceeds d")
    pattern, order = tree_pattern(t)
    adj = host.adjacency()
    res = embed_pattern(adj, pattern, allowed=verts, budget=budget, order=range(pattern.n), prefer_free=True)
    if res.image is None:
        hyp = None
        if check_hypothesis and len(t) > 1:
            dd = t.max_degree() if d is None else d
            hyp = expansion_check(host, 2 * len(t) - 2, dd + 1, vertices=verts).passed
        raise EmbeddingFailed("tree embedding search failed", exhausted=res.exhausted, nodes=res.nodes,
                              hypothesis_passed=hyp, deepest=len(res.deepest))
    return EmbeddingMap(pattern, {order[i]: int(x) for i, x in res.image.items()})


# ------------------------------------------------------------ blue tree or red q-partite

@dataclass
class DichotomyResult:
    kind: str                      # "blue-tree" | "red-qpartite" | "dual-failure"
    embedding: EmbeddingMap | None = None
    parts: list = field(default_factory=list)
    min_part: int = 0
    size_hypothesis: bool = False  # N >= 20 n0 d q
    details: dict = field(default_factory=dict)


def _blue_free_between(blue_adj, parts) -> bool:
    owner = {}
    for i, p in enumerate(parts):
        for v in p:
            owner[v] = i
    for v, i in owner.items():
        for w in blue_adj[v]:
            if w in owner and owner[w] != i:
                return False
    return True


def _components_within(adj, verts):
    verts = set(verts)
    seen, comps = set(), []
    for v in sorted(verts):
        if v in seen:
            continue
        comp, stack = [], [v]
        seen.add(v)
        while stack:
            x = stack.pop()
            comp.append(x)
            for y in adj[x]:
                if y in verts and y not in seen:
                    seen.add(y)
                    stack.append(y)
        comps.append(sorted(comp))
    return comps


def _greedy_peeling(blue_adj, verts, q, size):
    """Pack blue components into q bins; peel the top blue-degree vertex while short."""
    alive = set(verts)
    while len(alive) >= q * size:
        comps = sorted(_components_within(blue_adj, alive), key=lambda c: (-len(c), c))
        bins = [[] for _ in range(q)]
        for c in comps:
            i = min(range(q), key=lambda i: (len(bins[i]), i))
            bins[i].extend(c)
        if all(len(b) >= size for b in bins):
            return [sorted(b) for b in bins]
        big = comps[0]
        v = max(big, key=lambda x: (len(blue_adj[x] & alive), -x))
        alive.discard(v)
    return None


def _exhaustive_parts(blue_adj, verts, q, size):
    """Assign each vertex to one of q parts or none; no blue edge across parts."""
    verts = sorted(verts)
    parts = [[] for _ in range(q)]
    owner = {}

    def rec(i):
        if all(len(p) >= size for p in parts):
            return True
        if i == len(verts):
            return False
        missing = sum(max(0, size - len(p)) for p in parts)
        if missing > len(verts) - i:
            return False
        v = verts[i]
        used_labels = sum(1 for p in parts if p)
        for k in range(min(q, used_labels + 1)):
            if all(owner.get(w, k) == k for w in blue_adj[v]):
                parts[k].append(v)
                owner[v] = k
                if rec(i + 1):
                    return True
                parts[k].pop()
                del owner[v]
        return rec(i + 1)

    return [sorted(p) for p in parts] if rec(0) else None


def tree_or_qpartite(meta: TwoColoring, n0: int, d: int, q: int, tree: RootedTree | None = None,
                     min_part: int | None = None, vertices=None, budget: int = 200_000,
                     exhaustive_cap: int = 16) -> DichotomyResult:
    """Blue copy of ``tree`` in the meta colouring, else q parts with only red between them.

    ``meta`` colours a complete graph on N vertices. Without a tree, a path on
    n0 vertices is requested. Parts have size at least N / (5 d q) unless
    ``min_part`` overrides it.
    """
    N = meta.host.n
    verts = sorted(range(N) if vertices is None else set(int(v) for v in vertices))
    hyp = len(verts) >= 20 * n0 * d * q
    size = max(1, math.ceil(len(verts) / (5 * d * q))) if min_part is None else min_part
    if tree is None:
        tree = RootedTree.from_graph(Graph.path(n0)) if n0 >= 1 else None
    blue = meta.subgraph(BLUE)
    details = {"N": len(verts), "min_part": size}
    if tree is not None:
        try:
            emb = embed_tree_fp(blue, tree, vertices=verts, budget=budget)
            emb.colour = BLUE
            return DichotomyResult("blue-tree", emb, [], size, hyp, details)
        except (EmbeddingFailed, PatternTooLarge) as exc:
            details["blue_failure"] = exc.code
    blue_adj = blue.adjacency()
    parts = _greedy_peeling(blue_adj, verts, q, size)
    if parts is None and len(verts) <= exhaustive_cap:
        parts = _exhaustive_parts(blue_adj, verts, q, size)
        details["exhaustive"] = True
    if parts is not None:
        return DichotomyResult("red-qpartite", None, parts, size, hyp, details)
    return DichotomyResult("dual-failure", None, [], size, hyp, details)


def red_qpartite_ok(meta: TwoColoring, parts) -> bool:
    return _blue_free_between(meta.subgraph(BLUE).adjacency(), parts)
