"""Expansion and alpha-joint checks, and pruning a graph down to an expanding remainder."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ..graph import Graph
from ..rng import stream

EXHAUSTIVE_N = 20


@dataclass
class ExpansionReport:
    passed: bool
    s: int
    d: float
    witness: list | None = None    # X with |N(X)| < d |X|
    mode: str = "exhaustive"
    probes: int = 0

    @property
    def certified(self) -> bool:
        return self.mode == "exhaustive"


def _neighbour_masks(g: Graph, verts):
    pos = {v: i for i, v in enumerate(verts)}
    masks = []
    for v in verts:
        m = 0
        for w in g.neighbours(v):
            if w in pos:
                m |= 1 << pos[w]
        masks.append(m)
    return masks


def _popcount(a: np.ndarray) -> np.ndarray:
    a = a.astype(np.uint32)
    out = np.zeros(a.shape, dtype=np.int64)
    for shift in range(0, 32, 8):
        out += _BYTE_POP[(a >> shift) & 0xFF]
    return out


_BYTE_POP = np.array([bin(i).count("1") for i in range(256)], dtype=np.int64)


def _subset_neighbourhoods(masks) -> np.ndarray:
    """N(X) bitmask for every subset X (bit i = vertex i), by doubling."""
    n = len(masks)
    out = np.zeros(1 << n, dtype=np.uint32)
    for b in range(n):
        lo = 1 << b
        out[lo:2 * lo] = out[:lo] | np.uint32(masks[b])
    return out


def _exhaustive_expansion(g: Graph, verts, s, d):
    k = len(verts)
    masks = _neighbour_masks(g, verts)
    if k <= EXHAUSTIVE_N:
        nbh = _subset_neighbourhoods(masks)
        size = _popcount(np.arange(1 << k, dtype=np.uint32))
        gsize = _popcount(nbh)
        bad = (size >= 1) & (size <= s) & (gsize < d * size - 1e-9)
        idx = np.flatnonzero(bad)
        if idx.size:
            # report a smallest violating set
            x = int(idx[np.argmin(size[idx])])
            return [verts[i] for i in range(k) if x >> i & 1]
        return None
    for r in range(1, s + 1):
        for X in itertools.combinations(range(k), r):
            m = 0
            for i in X:
                m |= masks[i]
            if bin(m).count("1") < d * r - 1e-9:
                return [verts[i] for i in X]
    return None


def _randomized_expansion(g: Graph, verts, s, d, probes, seed):
    """Greedy growth of sets with small neighbourhoods from random starts."""
    rng = stream(seed, "expansion")
    vs = set(verts)
    adj = {v: set(w for w in g.neighbours(v) if w in vs) for v in verts}
    arr = np.asarray(verts)
    for probe in range(probes):
        X = [int(rng.choice(arr))]
        N = set(adj[X[0]])
        while True:
            if len(N) < d * len(X) - 1e-9:
                return X, probe + 1
            if len(X) >= s:
                break
            # candidates near X keep the neighbourhood from growing fast
            pool = set()
            for v in N:
                pool |= adj[v]
            pool -= set(X)
            if not pool:
                pool = vs - set(X)
            if not pool:
                break
            pool = sorted(pool)
            if len(pool) > 64:
                pool = [pool[i] for i in rng.choice(len(pool), 64, replace=False)]
            best = min(pool, key=lambda v: (len(adj[v] - N), v))
            X.append(best)
            N |= adj[best]
    return None, probes


def expansion_check(g: Graph, s: int, d: float, vertices=None, mode: str = "auto", probes: int = 200,
                    seed: int = 0) -> ExpansionReport:
    """Every X with 1 <= |X| <= s has |N(X)| >= d |X|, where N(X) is the set of
    vertices adjacent to some vertex of X.

    Exhaustive for s <= 3 or at most 20 vertices; otherwise a randomized witness
    search whose pass is not a certificate.
    """
    if s < 1:
        raise ValueError("s must be at least 1")
    verts = sorted(range(g.n) if vertices is None else set(int(v) for v in vertices))
    s = min(s, len(verts))
    if not verts:
        return ExpansionReport(True, s, d)
    exhaustive = mode == "exhaustive" or (mode == "auto" and (s <= 3 or len(verts) <= EXHAUSTIVE_N))
    if exhaustive:
        w = _exhaustive_expansion(g, verts, s, d)
        return ExpansionReport(w is None, s, d, w, "exhaustive")
    w, used = _randomized_expansion(g, verts, s, d, probes, seed)
    return ExpansionReport(w is None, s, d, w, "randomized", used)


@dataclass
class PruneReport:
    kept: list
    removed: list
    passed: bool
    hypothesis: ExpansionReport
    final: ExpansionReport | None = None
    rounds: int = 0


def _size_s_hypothesis(g: Graph, s: int, K: float, mode, probes, seed) -> ExpansionReport:
    """|N(X)| >= 3 K s for every X of size exactly s."""
    verts = list(range(g.n))
    need = 3 * K * s
    if s > g.n:
        return ExpansionReport(False, s, 3 * K, None, "exhaustive")
    exhaustive = mode == "exhaustive" or (mode == "auto" and (s <= 3 or g.n <= EXHAUSTIVE_N))
    if exhaustive:
        masks = _neighbour_masks(g, verts)
        for X in itertools.combinations(range(g.n), s):
            m = 0
            for i in X:
                m |= masks[i]
            if bin(m).count("1") < need - 1e-9:
                return ExpansionReport(False, s, 3 * K, list(X), "exhaustive")
        return ExpansionReport(True, s, 3 * K, None, "exhaustive")
    rng = stream(seed, "prune-hypothesis")
    deg_order = np.argsort(g.degrees(), kind="stable")
    # the lowest-degree vertices are the natural candidate, then random sets
    cands = [deg_order[:s].tolist()] + [rng.choice(g.n, s, replace=False).tolist() for _ in range(probes)]
    for X in cands:
        N = set()
        for v in X:
            N |= g.neighbours(v)
        if len(N) < need - 1e-9:
            return ExpansionReport(False, s, 3 * K, sorted(X), "randomized", probes)
    return ExpansionReport(True, s, 3 * K, None, "randomized", probes)


def prune_to_expander(g: Graph, s: int, K: float, mode: str = "auto", probes: int = 200, seed: int = 0) -> PruneReport:
    """Remove deficient sets until the rest is (s, K)-expanding.

    The size-s hypothesis is checked first and recorded. Each round removes the
    witness of a failed expansion check (a set of maximal deficiency among those
    found); the run stops with a failure report once the removed set reaches s.
    """
    hyp = _size_s_hypothesis(g, s, K, mode, probes, seed)
    removed: list = []
    kept = list(range(g.n))
    rounds = 0
    while True:
        rep = expansion_check(g, s, K, vertices=kept, mode=mode, probes=probes, seed=seed + rounds)
        if rep.passed:
            return PruneReport(kept, sorted(removed), True, hyp, rep, rounds)
        rounds += 1
        X = _grow_witness(g, kept, rep.witness, K)
        removed.extend(X)
        gone = set(X)
        kept = [v for v in kept if v not in gone]
        if len(removed) >= s or not kept:
            return PruneReport(kept, sorted(removed), False, hyp, rep, rounds)


def _grow_witness(g: Graph, kept, X, K):
    """Greedily enlarge a violating set while it stays violating."""
    ks = set(kept)
    X = list(X)
    N = set()
    for v in X:
        N |= g.neighbours(v) & ks
    improved = True
    while improved:
        improved = False
        for v in sorted(N - set(X)):
            N2 = N | (g.neighbours(v) & ks)
            if len(N2) < K * (len(X) + 1) - 1e-9:
                X.append(v)
                N = N2
                improved = True
                break
    return X


# ------------------------------------------------------------ alpha-joint

@dataclass
class JointReport:
    passed: bool
    alpha: float
    size: int
    witness: tuple | None = None   # (S, T) disjoint, no S-T edge
    mode: str = "exhaustive"
    probes: int = 0


def alpha_joint_check(g: Graph, alpha: float, mode: str = "auto", probes: int = 10_000, seed: int = 0) -> JointReport:
    """Every two disjoint vertex sets of size ceil(alpha n) span an edge.

    It suffices to look at sets of exactly that size: an edgeless pair (S, T)
    exists iff some S of that size leaves that many vertices outside S and N(S).
    """
    if not 0 < alpha <= 0.5:
        raise ValueError("alpha must lie in (0, 1/2]")
    n = g.n
    k = max(1, math.ceil(alpha * n - 1e-9))
    if 2 * k > n:
        return JointReport(True, alpha, k, None, "exhaustive")
    adj = g.adjacency()
    exhaustive = mode == "exhaustive" or (mode == "auto" and n <= EXHAUSTIVE_N)
    if exhaustive:
        for S in itertools.combinations(range(n), k):
            closed = set(S)
            for v in S:
                closed |= adj[v]
            if n - len(closed) >= k:
                T = sorted(set(range(n)) - closed)[:k]
                return JointReport(False, alpha, k, (list(S), T), "exhaustive")
        return JointReport(True, alpha, k, None, "exhaustive")
    rng = stream(seed, "alpha-joint")
    M = g.matrix().astype(bool)
    np.fill_diagonal(M, True)
    for probe in range(probes):
        start = int(rng.integers(n))
        S = [start]
        closed = M[start].copy()
        while len(S) < k:
            rest = np.flatnonzero(~closed)
            if rest.size == 0:
                inS = np.zeros(n, dtype=bool)
                inS[S] = True
                rest = np.flatnonzero(~inS)
            pick = rest[rng.choice(rest.size, min(rest.size, 16), replace=False)]
            growth = (M[pick] & ~closed).sum(axis=1)
            v = int(pick[np.argmin(growth)])
            S.append(v)
            closed |= M[v]
        if n - int(closed.sum()) >= k:
            T = np.flatnonzero(~closed)[:k].tolist()
            return JointReport(False, alpha, k, (sorted(S), T), "randomized", probe + 1)
    return JointReport(True, alpha, k, None, "randomized", probes)
