"""Generic backtracking subgraph embedding with forward checking."""
from __future__ import annotations

from dataclasses import dataclass, field

from ..graph import Graph


@dataclass
class SearchResult:
    image: dict | None
    nodes: int = 0
    exhausted: bool = False         # True when the search space was fully explored
    deepest: dict = field(default_factory=dict)

    @property
    def found(self) -> bool:
        return self.image is not None


def embed_pattern(host_adj, pattern: Graph, candidates: dict | None = None, allowed=None, budget: int = 200000,
                  order=None, forbidden=(), prefer_free: bool = False) -> SearchResult:
    """Injective map of pattern vertices to host vertices preserving every pattern edge.

    ``host_adj`` is a list of neighbour sets (e.g. ``Graph.adjacency()`` of the
    wanted colour class). ``candidates`` restricts individual vertices,
    ``allowed`` restricts all of them, ``forbidden`` host vertices are never
    used. Vertices are placed most-constrained first unless ``order`` is given.
    """
    k = pattern.n
    if k == 0:
        return SearchResult({}, 0, True)
    pnb = [sorted(pattern.neighbours(v)) for v in range(k)]
    base = set(range(len(host_adj))) if allowed is None else set(allowed)
    base -= set(forbidden)
    cand = {v: (base & set(candidates[v])) if candidates and v in candidates else base for v in range(k)}
    if any(not c for c in cand.values()):
        return SearchResult(None, 0, True)
    image, used = {}, set()
    nodes = [0]
    best = [{}]
    fixed_order = list(order) if order is not None else None

    def domain(v):
        d = cand[v]
        for w in pnb[v]:
            if w in image:
                d = d & host_adj[image[w]]
                if not d:
                    return d
        return d - used

    def pick():
        if fixed_order is not None:
            for v in fixed_order:
                if v not in image:
                    return v, domain(v)
        best_v, best_d, best_key = None, None, None
        for v in range(k):
            if v in image:
                continue
            d = domain(v)
            placed = sum(1 for w in pnb[v] if w in image)
            key = (len(d), -placed, -len(pnb[v]), v)
            if best_key is None or key < best_key:
                best_v, best_d, best_key = v, d, key
                if not d:
                    break
        return best_v, best_d

    def rec():
        if len(image) == k:
            return True
        nodes[0] += 1
        if nodes[0] > budget:
            raise _Budget()
        v, d = pick()
        if not d:
            return False
        if prefer_free:
            opts = sorted(d, key=lambda x: (-len(host_adj[x] - used), x))
        else:
            opts = sorted(d)
        for x in opts:
            image[v] = x
            used.add(x)
            if len(image) > len(best[0]):
                best[0] = dict(image)
            ok = all(domain(w) for w in pnb[v] if w not in image)
            if ok and rec():
                return True
            del image[v]
            used.discard(x)
        return False

    try:
        hit = rec()
    except _Budget:
        return SearchResult(None, nodes[0], False, best[0])
    return SearchResult(dict(image) if hit else None, nodes[0], not hit, best[0])


class _Budget(Exception):
    pass


def colour_adjacency(colouring, colour: str):
    return colouring.subgraph(colour).adjacency()
