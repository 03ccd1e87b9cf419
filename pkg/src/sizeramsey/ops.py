"""Structural primitives on graphs and colourings.

find_induced_cycle           shortest induced cycle of length >= min_len
graph_power                  k-th power (distance <= k)
blow_up                      F{t} (independent classes) or F x K_t (clique classes)
find_monochromatic_biclique  exact s x s one-colour complete bipartite search
find_monochromatic_clique    exact one-colour clique search
turan_bound, kst_bound       extremal thresholds
truncate_tree                drop positive even depths, re-attach grandchildren
auxiliary_coloring           colouring of K_m by biclique presence between parts
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from .errors import GraphError, SearchCapped
from .graph import BLUE, RED, Graph, RootedTree, TwoColoring, other

INDUCED_CYCLE_CAP = 400
BICLIQUE_CAP = 64
CLIQUE_CAP = 64


# ------------------------------------------------------------ induced cycles

def _is_induced_cycle(g: Graph, cyc) -> bool:
    k = len(cyc)
    if len(set(cyc)) != k or k < 3:
        return False
    for i, v in enumerate(cyc):
        if not g.has_edge(v, cyc[(i + 1) % k]):
            return False
    return g.restrict(cyc).m == k


def _search_induced_cycle(nbrs, nbrs_set, n, min_len, max_len):
    """Depth-limited DFS over induced paths.

    Returns (cycle or None, truncated). The start vertex is always the
    smallest vertex of the cycle, so each cycle is reached from one root.
    """
    truncated = False
    cnt = [0] * n
    on_path = [False] * n
    for s in range(n):
        if len(nbrs[s]) < 2:
            continue
        path = [s]
        on_path[s] = True
        # iterator stack over sorted neighbour lists
        stack = [iter(nbrs[s])]
        while stack:
            it = stack[-1]
            last = path[-1]
            advanced = False
            for w in it:
                if w <= s or on_path[w] or cnt[w]:
                    continue
                if len(path) >= 2 and s in nbrs_set[w]:
                    if len(path) + 1 >= min_len:
                        return path + [w], truncated
                    continue
                if len(path) + 2 > max_len:
                    truncated = True
                    continue
                if len(path) >= 2:
                    for x in nbrs[last]:
                        cnt[x] += 1
                path.append(w)
                on_path[w] = True
                stack.append(iter(nbrs[w]))
                advanced = True
                break
            if not advanced:
                stack.pop()
                v = path.pop()
                on_path[v] = False
                if len(path) >= 2:
                    for x in nbrs[path[-1]]:
                        cnt[x] -= 1
        on_path[s] = False
    return None, truncated


def _exhaustive_induced_cycle(g: Graph, min_len: int):
    nbrs = [sorted(g.neighbours(v)) for v in range(g.n)]
    nbrs_set = g.adjacency()
    max_len = min_len
    while max_len <= g.n:
        cyc, truncated = _search_induced_cycle(nbrs, nbrs_set, g.n, min_len, max_len)
        if cyc is not None or not truncated:
            return cyc
        max_len += 1
    return None


def _heuristic_induced_cycle(g: Graph, min_len: int):
    """BFS cycles, shortened along chords while they stay long enough."""
    for r in range(g.n):
        parent = {r: None}
        order = [r]
        for v in order:
            for w in sorted(g.neighbours(v)):
                if w not in parent:
                    parent[w] = v
                    order.append(w)
        for u in order:
            for v in sorted(g.neighbours(u)):
                if v <= u or parent.get(u) == v or parent.get(v) == u:
                    continue
                pu, pv = [u], [v]
                anc = {}
                x = u
                while x is not None:
                    anc[x] = len(pu) - 1
                    x = parent[x]
                    if x is not None:
                        pu.append(x)
                y = v
                while y not in anc:
                    y = parent[y]
                    pv.append(y)
                cyc = pu[: anc[y] + 1] + pv[-2::-1]
                cyc = _shorten(g, cyc, min_len)
                if cyc is not None:
                    return cyc
    return None


def _shorten(g: Graph, cyc, min_len):
    while True:
        if len(cyc) < min_len:
            return None
        pos = {v: i for i, v in enumerate(cyc)}
        chord = None
        for i, v in enumerate(cyc):
            for w in g.neighbours(v):
                j = pos.get(w)
                if j is not None and j > i + 1 and not (i == 0 and j == len(cyc) - 1):
                    chord = (i, j)
                    break
            if chord:
                break
        if chord is None:
            return cyc
        i, j = chord
        a = cyc[i : j + 1]
        b = cyc[j:] + cyc[: i + 1]
        options = [c for c in (a, b) if len(c) >= min_len]
        if not options:
            return None
        cyc = min(options, key=len)


def find_induced_cycle(g: Graph, min_len: int, cap: int = INDUCED_CYCLE_CAP):
    """Shortest induced cycle with at least ``min_len`` vertices, or None.

    Up to ``cap`` vertices the search is exhaustive with iterative deepening
    on the cycle length, so the first hit is a shortest one and the smallest
    start vertex wins ties. Above the cap a BFS/chord-shortening heuristic
    runs first (its hit need not be shortest) and the exhaustive search is
    the fallback, so None is always a certified absence.
    """
    if min_len < 3:
        raise ValueError("min_len must be at least 3")
    if g.n > cap:
        cyc = _heuristic_induced_cycle(g, min_len)
        if cyc is not None:
            return cyc
    return _exhaustive_induced_cycle(g, min_len)


# ------------------------------------------------------------ powers, blow-ups

def graph_power(g: Graph, k: int) -> Graph:
    if k < 1:
        raise ValueError("k must be at least 1")
    if k == 1 or g.m == 0:
        return g
    n = g.n
    e = g.edges
    a = sp.coo_matrix((np.ones(2 * g.m, dtype=np.int32), (np.r_[e[:, 0], e[:, 1]], np.r_[e[:, 1], e[:, 0]])), shape=(n, n)).tocsr()
    step = (a + sp.identity(n, dtype=np.int32, format="csr")).astype(bool).astype(np.int32)
    reach = step
    for _ in range(k - 1):
        reach = (reach @ step).astype(bool).astype(np.int32)
    upper = sp.triu(reach, k=1).tocoo()
    keys = np.sort(upper.row.astype(np.int64) * n + upper.col.astype(np.int64))
    return Graph.from_keys(n, keys)


def blow_up(g: Graph, t: int, class_kind: str = "independent") -> tuple[Graph, list[list[int]]]:
    """Replace each vertex v by the class {v*t, ..., v*t+t-1}."""
    if t < 1:
        raise ValueError("t must be at least 1")
    if class_kind not in ("independent", "clique"):
        raise ValueError("class_kind must be 'independent' or 'clique'")
    classes = [list(range(v * t, v * t + t)) for v in range(g.n)]
    a, b = np.meshgrid(np.arange(t), np.arange(t), indexing="ij")
    a, b = a.ravel(), b.ravel()
    parts = []
    if g.m:
        u = g.edges[:, 0:1] * t + a
        v = g.edges[:, 1:2] * t + b
        parts.append(np.stack([u.ravel(), v.ravel()], axis=1))
    if class_kind == "clique" and t > 1:
        iu, ju = np.triu_indices(t, 1)
        base = np.arange(g.n)[:, None] * t
        parts.append(np.stack([(base + iu).ravel(), (base + ju).ravel()], axis=1))
    edges = np.concatenate(parts) if parts else np.zeros((0, 2), dtype=np.int64)
    return Graph(g.n * t, edges), classes


# ------------------------------------------------------------ one-colour search

def _colour_nbrs(c: TwoColoring, colour: str):
    return c.subgraph(colour).neighbours


def find_monochromatic_biclique(c: TwoColoring, A, B, colour: str, s: int, cap: int = BICLIQUE_CAP):
    """Exact search for an s x s complete bipartite graph of one colour.

    Returns (X, Y) with X from A and Y from B, each sorted, or None.
    """
    A, B = sorted(set(A)), sorted(set(B))
    if set(A) & set(B):
        raise GraphError("biclique sides must be disjoint")
    if len(A) > cap or len(B) > cap:
        raise SearchCapped("biclique side exceeds cap", cap=cap, sizes=(len(A), len(B)))
    if s <= 0:
        return (), ()
    if len(A) < s or len(B) < s:
        return None
    nb = _colour_nbrs(c, colour)
    a_alive, b_alive = set(A), set(B)
    # prune vertices that cannot reach s partners, to a fixed point
    changed = True
    while changed:
        changed = False
        for v in list(a_alive):
            if len(nb(v) & b_alive) < s:
                a_alive.discard(v)
                changed = True
        for v in list(b_alive):
            if len(nb(v) & a_alive) < s:
                b_alive.discard(v)
                changed = True
    if len(a_alive) < s or len(b_alive) < s:
        return None
    # enumerate the smaller side
    swap = len(b_alive) < len(a_alive)
    side, opp = (sorted(b_alive), sorted(a_alive)) if swap else (sorted(a_alive), sorted(b_alive))
    bit = {v: 1 << i for i, v in enumerate(opp)}
    masks = [sum(bit[w] for w in nb(v) if w in bit) for v in side]
    full = (1 << len(opp)) - 1

    def rec(start, chosen, common):
        if len(chosen) == s:
            return chosen, common
        for i in range(start, len(side) - (s - len(chosen)) + 1):
            nc = common & masks[i]
            if bin(nc).count("1") >= s:
                hit = rec(i + 1, chosen + [side[i]], nc)
                if hit:
                    return hit
        return None

    hit = rec(0, [], full)
    if hit is None:
        return None
    chosen, common = hit
    partners = [w for w in opp if common & bit[w]][:s]
    X, Y = sorted(chosen), sorted(partners)
    return (Y, X) if swap else (X, Y)


def find_monochromatic_clique(c: TwoColoring, S, colour: str, size: int, cap: int = CLIQUE_CAP):
    """Exact search for a one-colour clique of ``size`` inside S (S must be a host clique)."""
    S = sorted(set(S))
    if len(S) > cap:
        raise SearchCapped("clique search set exceeds cap", cap=cap, size=len(S))
    host = c.host
    for i, u in enumerate(S):
        for v in S[i + 1 :]:
            if not host.has_edge(u, v):
                raise GraphError("S must induce a clique in the host")
    if size <= 0:
        return []
    if len(S) < size:
        return None
    nb = _colour_nbrs(c, colour)
    bit = {v: 1 << i for i, v in enumerate(S)}
    masks = [sum(bit[w] for w in nb(v) if w in bit) for v in S]

    def rec(chosen, cand):
        if len(chosen) == size:
            return chosen
        need = size - len(chosen)
        while cand and bin(cand).count("1") >= need:
            i = cand.bit_length() - 1
            cand &= ~(1 << i)
            hit = rec(chosen + [S[i]], cand & masks[i])
            if hit:
                return hit
        return None

    hit = rec([], (1 << len(S)) - 1)
    return sorted(hit) if hit is not None else None


# ------------------------------------------------------------ extremal bounds

@dataclass(frozen=True)
class TuranBound:
    max_edges: Fraction
    red_lower_bound: Fraction


def turan_bound(r: int, n: int) -> TuranBound:
    """Turán edge bound (1 - 1/r) n^2 / 2 for K_{r+1}-free graphs on n vertices.

    ``red_lower_bound`` is the companion count C(n, 2) / (r + 1): the number of
    red edges guaranteed on n vertices whose blue graph has no K_{r+1}.
    """
    if r < 1 or n < 0:
        raise ValueError("need r >= 1 and n >= 0")
    return TuranBound(Fraction(r - 1, r) * n * n / 2, Fraction(n * (n - 1) // 2, r + 1))


def kst_bound(l: int, n: int) -> float:
    """Kővári–Sós–Turán cap on edges of an n-vertex graph with no K_{l,l}."""
    if l < 1 or n < 0:
        raise ValueError("need l >= 1 and n >= 0")
    return (l - 1) ** (1.0 / l) * n ** (2.0 - 1.0 / l) + l - 1


# ------------------------------------------------------------ trees

def truncate_tree(t: RootedTree) -> RootedTree:
    depth = t.depths()
    parent = {}
    for v, p in t.parent.items():
        d = depth[v]
        if d > 0 and d % 2 == 0:
            continue
        if d <= 1:
            parent[v] = p
        else:
            parent[v] = t.parent[p]
    return RootedTree(parent, t.root)


# ------------------------------------------------------------ auxiliary colouring

def auxiliary_coloring(c: TwoColoring, parts, s: int, colour: str = BLUE, witnesses: dict | None = None,
                       cap: int = BICLIQUE_CAP) -> TwoColoring:
    """Colour K_m: pair ij gets ``colour`` iff a ``colour`` K_{s,s} joins parts i and j.

    With the default colour this is the blue-biclique colouring; passing
    red gives the mirror image used when red is the majority colour.
    When ``witnesses`` is a dict it is filled with (i, j) -> (X, Y).
    """
    parts = [sorted(p) for p in parts]
    seen = set()
    for p in parts:
        if seen & set(p):
            raise GraphError("parts must be pairwise disjoint")
        seen |= set(p)
    m = len(parts)
    k = Graph.complete(m)
    mask = np.zeros(k.m, dtype=bool)
    for idx, (i, j) in enumerate(k.edges.tolist()):
        w = find_monochromatic_biclique(c, parts[i], parts[j], colour, s, cap=cap)
        if w is not None:
            mask[idx] = True
            if witnesses is not None:
                witnesses[(i, j)] = w
    return TwoColoring(k, mask if colour == RED else ~mask)


__all__ = [
    "find_induced_cycle", "graph_power", "blow_up", "find_monochromatic_biclique",
    "find_monochromatic_clique", "turan_bound", "kst_bound", "TuranBound", "truncate_tree",
    "auxiliary_coloring", "other",
]
