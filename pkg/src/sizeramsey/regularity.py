"""Pair densities, (eps, p)-regularity and the red-set extraction pipelines.

Exact checks enumerate every subset of the smaller side and, for each one,
pick the best subset of the other side by sorting degrees: for fixed U1 and
|U2| = k the extreme values of e(U1, U2) are the top-k and bottom-k sums of
the degrees into U1. Randomized checks run alternating greedy extremisation
from random starts and only ever report irregular with a concrete witness.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import CleanupCollapsed, EmptyPart, SearchCapped
from .graph import BLUE, RED, Graph, TwoColoring
from .ops import find_monochromatic_biclique, find_monochromatic_clique
from .rng import stream

EXACT_SIDE_CAP = 16
UNIFORMITY_EXACT_CAP = 20
TOL = 1e-12


def _min_size(eps: float, size: int) -> int:
    return max(1, math.ceil(eps * size - 1e-9))


def _bipartite_matrix(g: Graph, A, B) -> np.ndarray:
    return g.matrix()[np.ix_(list(A), list(B))].astype(np.int64)


def pair_density(g: Graph, A, B) -> Fraction:
    A, B = list(A), list(B)
    if not A or not B:
        raise EmptyPart("density of an empty set is undefined")
    return Fraction(int(_bipartite_matrix(g, A, B).sum()), len(A) * len(B))


@dataclass
class RegularPairReport:
    sets: tuple
    density: float
    epsilon: float
    p_scale: float
    verdict: str            # "regular", "irregular" or "search-capped"
    witness: tuple | None = None
    witness_density: float | None = None
    mode: str = "exact"
    trials: int = 0

    @property
    def regular(self) -> bool:
        return self.verdict == "regular"

    def as_dict(self) -> dict:
        return {
            "sets": [list(map(int, s)) for s in self.sets],
            "density": self.density,
            "epsilon": self.epsilon,
            "p_scale": self.p_scale,
            "verdict": self.verdict,
            "witness": None if self.witness is None else [list(map(int, w)) for w in self.witness],
            "witness_density": self.witness_density,
            "mode": self.mode,
            "trials": self.trials,
        }


def _scan_exact(X: np.ndarray, k1min: int, k2min: int, dens: float, bound: float):
    """Largest violation over U1 (all subsets of rows) and best U2 per size.

    Returns (deviation, row mask, column list) of the worst pair, or None.
    """
    a, b = X.shape
    masks = np.arange(1, 1 << a, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(a)) & 1).astype(np.int64)
    sizes = bits.sum(axis=1)
    ok = sizes >= k1min
    masks, bits, sizes = masks[ok], bits[ok], sizes[ok]
    if masks.size == 0 or b < k2min:
        return None
    ks = np.arange(k2min, b + 1)
    best = None
    chunk = 1 << 14
    for s in range(0, masks.size, chunk):
        D = bits[s : s + chunk] @ X
        Ds = np.sort(D, axis=1)
        lo = np.cumsum(Ds, axis=1)[:, ks - 1]
        hi = np.cumsum(Ds[:, ::-1], axis=1)[:, ks - 1]
        denom = sizes[s : s + chunk, None] * ks[None, :]
        dev = np.maximum(hi / denom - dens, dens - lo / denom)
        flat = int(np.argmax(dev))
        r, c = divmod(flat, ks.size)
        val = float(dev[r, c])
        if val > bound + TOL and (best is None or val > best[0] + TOL):
            k = int(ks[c])
            row = D[r]
            up = hi[r, c] / denom[r, c] - dens >= dens - lo[r, c] / denom[r, c]
            order = np.argsort(-row if up else row, kind="stable")
            best = (val, int(masks[s + r]), sorted(order[:k].tolist()))
    return best


def _greedy_extreme(X, k1min, k2min, dens, rng, up: bool, iters: int = 8):
    """Alternate best responses from a random row set; returns (dev, rows, cols)."""
    a, b = X.shape
    sign = 1.0 if up else -1.0
    k = int(rng.integers(k1min, a + 1))
    rows = np.sort(rng.choice(a, size=k, replace=False))
    cols = None
    best = None
    for _ in range(iters):
        D = X[rows].sum(axis=0) * sign
        order = np.argsort(-D, kind="stable")
        cs = np.cumsum(D[order])
        ks = np.arange(k2min, b + 1)
        vals = cs[ks - 1] / (rows.size * ks)
        j = int(np.argmax(vals))
        new_cols = np.sort(order[: ks[j]])
        E = X[:, new_cols].sum(axis=1) * sign
        order = np.argsort(-E, kind="stable")
        cs = np.cumsum(E[order])
        ks1 = np.arange(k1min, a + 1)
        vals1 = cs[ks1 - 1] / (ks1 * new_cols.size)
        i = int(np.argmax(vals1))
        new_rows = np.sort(order[: ks1[i]])
        dev = sign * (X[np.ix_(new_rows, new_cols)].mean() - dens)
        if best is None or dev > best[0]:
            best = (float(dev), new_rows.tolist(), new_cols.tolist())
        if cols is not None and np.array_equal(new_rows, rows) and np.array_equal(new_cols, cols):
            break
        rows, cols = new_rows, new_cols
    return best


def regularity_check(g: Graph, A, B, eps: float, p_scale: float, mode: str = "exact",
                     trials: int = 20, seed: int = 0, cap: int = EXACT_SIDE_CAP) -> RegularPairReport:
    """Is (A, B) (eps, p_scale)-regular in g?"""
    A, B = list(A), list(B)
    if not A or not B:
        raise EmptyPart("regularity of an empty set is undefined")
    X = _bipartite_matrix(g, A, B)
    dens = float(X.sum()) / (len(A) * len(B))
    bound = eps * p_scale
    k1, k2 = _min_size(eps, len(A)), _min_size(eps, len(B))
    rep = RegularPairReport((tuple(A), tuple(B)), dens, eps, p_scale, "regular", mode=mode)
    if mode == "exact":
        if min(len(A), len(B)) > cap:
            raise SearchCapped("exact regularity check above the side cap", cap=cap, sizes=(len(A), len(B)))
        flip = len(B) < len(A)
        hit = _scan_exact(X.T if flip else X, k2 if flip else k1, k1 if flip else k2, dens, bound)
        if hit is not None:
            val, mask, cols = hit
            rows = [i for i in range(len(B) if flip else len(A)) if mask >> i & 1]
            if flip:
                rows, cols = cols, rows
            U1, U2 = [A[i] for i in rows], [B[j] for j in cols]
            rep.verdict, rep.witness = "irregular", (tuple(U1), tuple(U2))
            rep.witness_density = float(X[np.ix_(rows, cols)].mean())
        return rep
    rng = stream(seed, "regularity-check", len(A), len(B))
    rep.mode, rep.trials = "randomized", trials
    for t in range(trials):
        for up in (True, False):
            val, rows, cols = _greedy_extreme(X, k1, k2, dens, rng, up)
            if val > bound + TOL:
                rep.verdict = "irregular"
                rep.witness = (tuple(A[i] for i in rows), tuple(B[j] for j in cols))
                rep.witness_density = float(X[np.ix_(rows, cols)].mean())
                return rep
    return rep


def witness_violates(g: Graph, rep: RegularPairReport) -> bool:
    """Re-evaluate a witness from scratch."""
    if rep.witness is None:
        return False
    (A, B), (U1, U2) = rep.sets, rep.witness
    if len(U1) < rep.epsilon * len(A) - 1e-9 or len(U2) < rep.epsilon * len(B) - 1e-9:
        return False
    if not set(U1) <= set(A) or not set(U2) <= set(B):
        return False
    d = pair_density(g, A, B)
    w = pair_density(g, U1, U2)
    return abs(float(w - d)) > rep.epsilon * rep.p_scale + TOL


# ------------------------------------------------------------ subset inheritance

@dataclass
class InheritanceReport:
    applicable: bool       # the pair is (eps1, p)-regular
    holds: bool
    method: str            # "exhaustive" or "envelope"
    checked_pairs: int
    counterexample: tuple | None = None


def _density_envelope(X: np.ndarray, k1: int, k2: int) -> tuple[float, float]:
    """Min and max density over all U1, U2 with |U1| >= k1, |U2| >= k2 (exact)."""
    flip = X.shape[1] < X.shape[0]
    if flip:
        X, k1, k2 = X.T, k2, k1
    a, b = X.shape
    masks = np.arange(1, 1 << a, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(a)) & 1).astype(np.int64)
    sizes = bits.sum(axis=1)
    keep = sizes >= k1
    bits, sizes = bits[keep], sizes[keep]
    ks = np.arange(k2, b + 1)
    D = np.sort(bits @ X, axis=1)
    lo = np.cumsum(D, axis=1)[:, ks - 1] / (sizes[:, None] * ks)
    hi = np.cumsum(D[:, ::-1], axis=1)[:, ks - 1] / (sizes[:, None] * ks)
    return float(lo.min()), float(hi.max())


def subset_inheritance_check(g: Graph, A, B, eps1: float, eps2: float, p_scale: float,
                             exhaustive_cap: int = 7) -> InheritanceReport:
    """Every X' of A, Y' of B at fraction >= eps2 is (eps1/eps2, p)-regular with density d +- eps1 p.

    Parts up to ``exhaustive_cap`` enumerate every sub-pair and run the exact
    checker on each. Larger parts use the density envelope: if all densities
    of eps1-large sub-pairs lie in an interval of width <= (eps1/eps2) p that
    stays within eps1 p of d(A, B), every sub-pair and every sub-sub-pair
    falls in it, which proves the claim for all of them at once.
    """
    A, B = list(A), list(B)
    base = regularity_check(g, A, B, eps1, p_scale, "exact")
    if not base.regular:
        return InheritanceReport(False, True, "none", 0)
    eps = eps1 / eps2
    bound = eps1 * p_scale
    d = base.density
    if max(len(A), len(B)) <= exhaustive_cap:
        k1, k2 = _min_size(eps2, len(A)), _min_size(eps2, len(B))
        count = 0
        for ka in range(k1, len(A) + 1):
            for Xs in itertools.combinations(A, ka):
                for kb in range(k2, len(B) + 1):
                    for Ys in itertools.combinations(B, kb):
                        count += 1
                        r = regularity_check(g, Xs, Ys, eps, p_scale, "exact")
                        if not r.regular or abs(r.density - d) > bound + TOL:
                            return InheritanceReport(True, False, "exhaustive", count, (Xs, Ys))
        return InheritanceReport(True, True, "exhaustive", count)
    X = _bipartite_matrix(g, A, B)
    lo, hi = _density_envelope(X, _min_size(eps1, len(A)), _min_size(eps1, len(B)))
    ok = hi - lo <= eps * p_scale + TOL and hi - d <= bound + TOL and d - lo <= bound + TOL
    return InheritanceReport(True, ok, "envelope", 1)


# ------------------------------------------------------------ upper uniformity

@dataclass
class UniformityReport:
    uniform: bool
    gamma: float
    p_scale: float
    witness: tuple | None = None
    mode: str = "exact"
    probes: int = 0


def _uniformity_exact(M: np.ndarray, gamma: float, p: float):
    n = M.shape[0]
    kmin = _min_size(gamma, n)
    c = (1 + gamma) * p
    masks = np.arange(1, 1 << n, dtype=np.int64)
    chunk = 1 << 14
    for s in range(0, masks.size, chunk):
        mk = masks[s : s + chunk]
        bits = ((mk[:, None] >> np.arange(n)) & 1).astype(np.int64)
        size = bits.sum(axis=1)
        live = (size >= kmin) & (size <= n - kmin)
        if not live.any():
            continue
        mk, bits, size = mk[live], bits[live], size[live]
        gain = (bits @ M).astype(float) - c * size[:, None]
        gain[bits.astype(bool)] = -np.inf
        order = np.argsort(-gain, axis=1, kind="stable")
        cs = np.cumsum(np.take_along_axis(gain, order, axis=1), axis=1)
        ks = np.arange(kmin, n + 1)
        cs = cs[:, ks - 1]
        hit = np.argwhere(cs > TOL)
        if hit.size:
            r, j = hit[0]
            U = [i for i in range(n) if mk[r] >> i & 1]
            W = sorted(order[r, : ks[j]].tolist())
            return U, W
    return None


def upper_uniformity_check(g: Graph, gamma: float, p_scale: float, mode: str = "auto",
                           probes: int = 1000, seed: int = 0) -> UniformityReport:
    """Search disjoint U, W of size >= gamma n with e(U, W) > (1 + gamma) p |U||W|."""
    n = g.n
    if mode == "auto":
        mode = "exact" if n <= UNIFORMITY_EXACT_CAP else "randomized"
    rep = UniformityReport(True, gamma, p_scale, mode=mode)
    if n < 2:
        return rep
    M = g.matrix().astype(np.int64)
    if mode == "exact":
        hit = _uniformity_exact(M, gamma, p_scale)
        if hit:
            rep.uniform, rep.witness = False, (tuple(hit[0]), tuple(hit[1]))
        return rep
    rng = stream(seed, "uniformity", n)
    kmin = _min_size(gamma, n)
    c = (1 + gamma) * p_scale
    rep.probes = probes
    for _ in range(probes):
        k = int(rng.integers(kmin, max(kmin, n // 2) + 1))
        U = rng.choice(n, size=k, replace=False)
        for _ in range(4):
            inU = np.zeros(n, bool)
            inU[U] = True
            gain = M[U].sum(axis=0) - c * U.size
            gain[inU] = -np.inf
            order = np.argsort(-gain, kind="stable")
            room = n - U.size
            if room < kmin:
                break
            cs = np.cumsum(gain[order[:room]])
            ks = np.arange(kmin, room + 1)
            j = int(np.argmax(cs[ks - 1]))
            W = order[: ks[j]]
            if cs[ks[j] - 1] > TOL:
                rep.uniform, rep.witness = False, (tuple(sorted(U.tolist())), tuple(sorted(W.tolist())))
                return rep
            inW = np.zeros(n, bool)
            inW[W] = True
            gain2 = M[W].sum(axis=0) - c * W.size
            gain2[inW] = -np.inf
            order2 = np.argsort(-gain2, kind="stable")
            room2 = n - W.size
            if room2 < kmin:
                break
            cs2 = np.cumsum(gain2[order2[:room2]])
            ks2 = np.arange(kmin, room2 + 1)
            U = order2[: ks2[int(np.argmax(cs2[ks2 - 1]))]]
    return rep


# ------------------------------------------------------------ cleanup

@dataclass
class CleanupReport:
    sets: list
    removed: list          # per set, removed vertices
    retention: list        # per set, |kept| / |original|
    target: float          # the (1 - Delta eps) retention a regular family promises

    def as_dict(self) -> dict:
        return {"sizes": [len(s) for s in self.sets], "retention": self.retention, "target": self.target}


def cleanup_partition(g: Graph, sets, d_min: float, pairs=None, eps: float = 0.0) -> CleanupReport:
    """Delete vertices with fewer than d_min |V_j| neighbours in some other current V_j.

    ``pairs`` restricts the constraint to the listed index pairs (default: all).
    """
    sets = [list(s) for s in sets]
    k = len(sets)
    if pairs is None:
        pairs = [(i, j) for i in range(k) for j in range(k) if i != j]
    else:
        pairs = [(i, j) for a, b in pairs for i, j in ((a, b), (b, a))]
    partners = [[] for _ in range(k)]
    for i, j in pairs:
        if j not in partners[i]:
            partners[i].append(j)
    M = g.matrix()
    alive = [np.asarray(s, dtype=np.int64) for s in sets]
    changed = True
    while changed:
        changed = False
        for i in range(k):
            if alive[i].size == 0:
                continue
            keep = np.ones(alive[i].size, dtype=bool)
            for j in partners[i]:
                deg = M[np.ix_(alive[i], alive[j])].sum(axis=1)
                keep &= deg >= d_min * alive[j].size - TOL
            if not keep.all():
                alive[i] = alive[i][keep]
                changed = True
                if alive[i].size == 0:
                    raise CleanupCollapsed(f"set {i} emptied during cleanup", index=i)
    kept = [sorted(a.tolist()) for a in alive]
    removed = [sorted(set(s) - set(kp)) for s, kp in zip(sets, kept)]
    retention = [len(kp) / len(s) if s else 1.0 for s, kp in zip(sets, kept)]
    max_deg = max((len(p) for p in partners), default=0)
    return CleanupReport(kept, removed, retention, 1 - max_deg * eps)


# ------------------------------------------------------------ partitioning

@dataclass
class Partition:
    parts: list
    reports: dict                   # (i, j) -> RegularPairReport
    history: list                   # irregular pair count per round
    rounds: int

    @property
    def irregular(self) -> list:
        return sorted(k for k, r in self.reports.items() if not r.regular)

    def vertex_map(self) -> dict:
        return {int(v): i for i, p in enumerate(self.parts) for v in p}

    def as_dict(self) -> dict:
        return {
            "parts": [list(map(int, p)) for p in self.parts],
            "irregular": [list(k) for k in self.irregular],
            "history": list(self.history),
            "rounds": self.rounds,
        }


def _check_all(g, parts, eps, p_scale, trials, seed, exact_cap):
    out = {}
    for i, j in itertools.combinations(range(len(parts)), 2):
        small = max(len(parts[i]), len(parts[j])) <= exact_cap
        out[(i, j)] = regularity_check(g, parts[i], parts[j], eps, p_scale,
                                       "exact" if small else "randomized", trials, seed + i * 7919 + j)
    return out


def regularity_partition(g: Graph, eps: float, p_scale: float, t0: int, t_max: int, seed: int,
                         vertices=None, initial=None, trials: int = 20, exact_cap: int = 8,
                         max_rounds: int = 8) -> Partition:
    """Refine an equipartition while witnesses of irregularity turn up.

    Each round checks every pair; if any is irregular and doubling stays within
    t_max, every part is halved, with a witness set of that part (when one
    exists) placed in the first half so the split follows the irregularity.
    """
    verts = list(range(g.n)) if vertices is None else [int(v) for v in vertices]
    if initial is not None:
        parts = [list(p) for p in initial]
    else:
        if not 1 <= t0 <= max(1, len(verts)):
            raise ValueError("need 1 <= t0 <= number of vertices")
        perm = stream(seed, "partition").permutation(np.asarray(verts, dtype=np.int64)) if verts else np.zeros(0, np.int64)
        parts = [sorted(x.tolist()) for x in np.array_split(perm, t0)]
    history, rounds = [], 0
    while True:
        reports = _check_all(g, parts, eps, p_scale, trials, seed + rounds, exact_cap)
        bad = [k for k, r in reports.items() if not r.regular]
        history.append(len(bad))
        rounds += 1
        if not bad or 2 * len(parts) > t_max or rounds > max_rounds or min(len(p) for p in parts) < 2:
            return Partition(parts, reports, history, rounds)
        lead = {}
        for (i, j) in bad:
            U1, U2 = reports[(i, j)].witness
            lead.setdefault(i, set(U1))
            lead.setdefault(j, set(U2))
        new = []
        for i, p in enumerate(parts):
            w = lead.get(i, set())
            order = [v for v in p if v in w] + [v for v in p if v not in w]
            h = len(order) // 2
            new.append(sorted(order[:h]))
            new.append(sorted(order[h:]))
        parts = new


# ------------------------------------------------------------ block distribution

@dataclass
class NiceBlocks:
    blocks: list              # qualifying block ids
    counts: dict              # block id -> number of parts meeting the bar
    bar: float
    required: float
    fraction: float           # qualifying / candidates


def nicely_distributed_blocks(parts, blocks_with_B0, beta: float, C: int, t_total: int | None = None,
                              xi: float = 1 / 200) -> NiceBlocks:
    """Blocks whose B0 meets >= (1 - beta) t parts in >= xi C / t vertices each.

    ``blocks_with_B0`` maps block id -> B0 vertex collection. The parts passed
    are the ones counted; ``t_total`` (default len(parts)) sets the bar.
    """
    t = len(parts) if t_total is None else t_total
    bar = xi * C / t
    required = (1 - beta) * t
    where = {}
    for i, p in enumerate(parts):
        for v in p:
            where[int(v)] = i
    counts, good = {}, []
    for b, B0 in blocks_with_B0.items():
        hits = np.bincount([where[v] for v in B0 if v in where], minlength=len(parts)) if len(parts) else np.zeros(0)
        c = int((hits >= bar - TOL).sum())
        counts[b] = c
        if c >= required - TOL:
            good.append(b)
    frac = len(good) / len(blocks_with_B0) if blocks_with_B0 else 1.0
    return NiceBlocks(sorted(good), counts, bar, required, frac)


# ------------------------------------------------------------ densifiers

@dataclass
class Densifier:
    families: list            # q lists of parts, each part a sorted tuple of vertices
    part_size: int
    parent_block: dict        # part -> block id
    layer: int
    C_prime: int
    gamma: float
    s: int
    q: int


def _layer_context(layers, i):
    vb = layers.vertex_block(i)
    skel = layers.skeletons[i]
    return vb, skel


def validate_densifier(dz: Densifier, layers, colouring: TwoColoring, S, n: int | None = None) -> list[str]:
    """Every clause of the densifier definition; returns the violated ones."""
    problems = []
    n = layers.n if n is None else n
    S = set(int(v) for v in S)
    i = dz.layer
    vb, skel = _layer_context(layers, i)
    if len(dz.families) != dz.q:
        problems.append(f"expected {dz.q} families, got {len(dz.families)}")
    need = dz.gamma * n / dz.C_prime
    seen = set()
    for k, fam in enumerate(dz.families):
        if len(fam) < need - 1e-9:
            problems.append(f"family {k} has {len(fam)} parts, needs {need:g}")
        for part in fam:
            part = tuple(part)
            if len(part) != dz.C_prime or len(set(part)) != dz.C_prime:
                problems.append(f"part {part} does not have size {dz.C_prime}")
            if seen & set(part):
                problems.append(f"part {part} overlaps another part")
            seen |= set(part)
            if not set(part) <= S:
                problems.append(f"part {part} leaves S")
            owners = {int(vb[v]) for v in part}
            if len(owners) != 1 or -1 in owners:
                problems.append(f"part {part} is not inside one block of the matching")
    A = layers.A(i)
    c_layer = colouring.restrict(A)
    for k1, k2 in itertools.combinations(range(len(dz.families)), 2):
        for P in dz.families[k1]:
            for Q in dz.families[k2]:
                a, b = int(vb[P[0]]), int(vb[Q[0]])
                if a < 0 or b < 0 or a == b or not skel.has_edge(a, b):
                    continue
                if find_monochromatic_biclique(c_layer, P, Q, BLUE, dz.s) is not None:
                    problems.append(f"blue K_{dz.s},{dz.s} between {tuple(P)} and {tuple(Q)}")
    return problems


def detect_densifier(layers, i: int, colouring: TwoColoring, S, C_prime: int, gamma: float, s: int, q: int,
                     candidate: Densifier | None = None, max_parts: int = 4, candidate_cap: int = 16):
    """Validate a supplied densifier, or search one exhaustively at tiny scale.

    Returns (Densifier or None, problems). Without a candidate the search
    considers every C'-subset of a block of M_i inside S and assigns each to a
    family or to nothing; more than ``candidate_cap`` such subsets, q > 3 or
    families larger than ``max_parts`` raise SearchCapped.
    """
    if candidate is not None:
        problems = validate_densifier(candidate, layers, colouring, S)
        return (candidate if not problems else None), problems
    n = layers.n
    need = max(1, math.ceil(gamma * n / C_prime - 1e-9))
    if q > 3 or need > max_parts:
        raise SearchCapped("densifier search beyond tiny scale", q=q, need=need)
    S = set(int(v) for v in S)
    vb, skel = _layer_context(layers, i)
    cands, parent = [], {}
    for v_sk in range(len(layers.matchings[i])):
        inside = sorted(x for x in layers.block_points(i, v_sk) if x in S)
        for part in itertools.combinations(inside, C_prime):
            cands.append(part)
            parent[part] = layers.block_of(i, v_sk)
    if len(cands) > candidate_cap:
        raise SearchCapped("too many candidate parts for exhaustive densifier search", count=len(cands))
    c_layer = colouring.restrict(layers.A(i))
    conflict = {}
    for P, Q in itertools.combinations(cands, 2):
        a, b = int(vb[P[0]]), int(vb[Q[0]])
        if set(P) & set(Q):
            conflict[(P, Q)] = "overlap"
        elif a != b and skel.has_edge(a, b) and find_monochromatic_biclique(c_layer, P, Q, BLUE, s) is not None:
            conflict[(P, Q)] = "blue"
    fams = [[] for _ in range(q)]

    def ok(P, k):
        for kk, fam in enumerate(fams):
            for Q in fam:
                key = (P, Q) if (P, Q) in conflict else (Q, P)
                kind = conflict.get(key)
                if kind == "overlap" or (kind == "blue" and kk != k):
                    return False
        return True

    def rec(idx):
        if all(len(f) >= need for f in fams):
            return True
        if idx == len(cands):
            return False
        missing = sum(max(0, need - len(f)) for f in fams)
        if missing > len(cands) - idx:
            return False
        P = cands[idx]
        for k in range(q):
            if len(fams[k]) < need and ok(P, k):
                fams[k].append(P)
                if rec(idx + 1):
                    return True
                fams[k].pop()
        return rec(idx + 1)

    if not rec(0):
        return None, ["no densifier found"]
    dz = Densifier([list(f) for f in fams], C_prime, {P: parent[P] for f in fams for P in f}, i, C_prime, gamma, s, q)
    problems = validate_densifier(dz, layers, colouring, S)
    return (dz if not problems else None), problems


# ------------------------------------------------------------ red sets

@dataclass
class RedSetsResult:
    ok: bool
    stage: str                       # last stage reached, or the one that failed
    sets: list = field(default_factory=list)
    reports: dict = field(default_factory=dict)
    densities: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "ok": self.ok,
            "stage": self.stage,
            "sets": [list(map(int, s)) for s in self.sets],
            "densities": {f"{i},{j}": d for (i, j), d in self.densities.items()},
            "details": self.details,
        }


@dataclass
class CliqueCertificate:
    block: int
    B_prime: tuple


def validate_certificate(cert: CliqueCertificate, design, colouring: TwoColoring, R, rho: float, C_prime: int) -> bool:
    """B' inside B and R with |B'| = rho C, and no blue K_C' in (R & B) - B'."""
    B = set(design.block(cert.block))
    Bp = set(cert.B_prime)
    R = set(R)
    if not Bp <= (B & R) or len(Bp) != round(rho * design.block_size):
        return False
    rest = sorted((B & R) - Bp)
    try:
        return find_monochromatic_clique(colouring, rest, BLUE, C_prime) is None
    except Exception:
        return False


def _meta_clique(weights: np.ndarray, red: np.ndarray, K: int, budget: int = 200000):
    """A K-clique in the boolean meta graph ``red``, heaviest vertices first."""
    m = red.shape[0]
    order = sorted(range(m), key=lambda v: (-weights[v], v))
    nb = [sum(1 << order.index(u) for u in range(m) if red[v, u]) for v in order]
    steps = [0]

    def rec(chosen, cand):
        if len(chosen) == K:
            return chosen
        while cand:
            steps[0] += 1
            if steps[0] > budget:
                return None
            if bin(cand).count("1") < K - len(chosen):
                return None
            low = (cand & -cand).bit_length() - 1
            cand &= ~(1 << low)
            hit = rec(chosen + [low], cand & nb[low])
            if hit:
                return hit
        return None

    hit = rec([], (1 << m) - 1)
    return None if hit is None else [order[i] for i in hit]


def meta_threshold(params, counts: np.ndarray, n: int, p: float, t_total: int) -> float:
    if params.meta_mode == "relative":
        return params.meta_fraction * (counts.max() if counts.size else 0.0)
    b = 2 * params.C_prime
    f = params.beta / 10 ** params.K
    return f * params.xi ** 2 * n * n * p / (16 * b * t_total ** 2)


def find_regular_red_sets_from_cliques(g: Graph, colouring: TwoColoring, R, certificates, K: int, params,
                                       design, seed: int = 0, t0: int | None = None, eps: float | None = None,
                                       p_scale: float | None = None) -> RedSetsResult:
    """K parts of R, pairwise regular and red-dense in the red subgraph of g.

    ``colouring`` colours a supergraph of g (it is restricted to g).
    """
    R = sorted(int(v) for v in R)
    valid = [c for c in certificates if validate_certificate(c, design, colouring, R, params.rho, params.C_prime)]
    if not valid:
        return RedSetsResult(False, "certificates", details={"supplied": len(certificates), "valid": 0})
    eps = params.eps3 if eps is None else eps
    p_scale = params.p if p_scale is None else p_scale
    red = colouring.restrict(g).subgraph(RED) if colouring.host is not g else colouring.subgraph(RED)
    t0 = max(K, params.t0) if t0 is None else t0
    if len(R) < t0:
        return RedSetsResult(False, "partition", details={"vertices": len(R), "t0": t0})
    part = regularity_partition(red, eps, p_scale, t0, max(t0, params.t_max), seed, vertices=R,
                                trials=params.reg_trials)
    parts = part.parts
    t = len(parts)
    m = max(1, len(parts[0]))
    outside = sorted(set(range(g.n)) - set(R))
    t_out = math.ceil(len(outside) / m) if outside else 0
    B0 = {c.block: [v for v in design.block(c.block) if v not in set(c.B_prime)] for c in valid}
    # the bar counts R-parts and the arbitrary parts of the complement together
    nice = nicely_distributed_blocks(parts, B0, 1.0, design.block_size, t + t_out, params.xi)
    part_of = part.vertex_map()
    bar = nice.bar
    score = np.zeros(t)
    for b in valid:
        hits = np.bincount([part_of[v] for v in B0[b.block] if v in part_of], minlength=t)
        score += hits >= bar - TOL
    M = red.matrix()
    counts = np.zeros((t, t))
    for i, j in itertools.combinations(range(t), 2):
        counts[i, j] = counts[j, i] = M[np.ix_(parts[i], parts[j])].sum()
    thr = meta_threshold(params, counts[np.triu_indices(t, 1)], g.n, p_scale, t + t_out)
    meta = (counts >= thr - TOL) & (counts > 0)
    for (i, j), r in part.reports.items():
        if not r.regular:
            meta[i, j] = meta[j, i] = False
    np.fill_diagonal(meta, False)
    details = {"parts": t, "valid_certificates": len(valid), "irregular_pairs": len(part.irregular),
               "threshold": float(thr), "history": part.history}
    if t < K:
        return RedSetsResult(False, "partition", details=details)
    clique = _meta_clique(score, meta, K)
    if clique is None:
        return RedSetsResult(False, "meta-clique", details=details)
    clique = sorted(clique)
    sets = [parts[i] for i in clique]
    reports = {(a, b): part.reports[(min(i, j), max(i, j))] for (a, i), (b, j) in itertools.combinations(enumerate(clique), 2)}
    dens = {(a, b): float(pair_density(red, sets[a], sets[b])) for (a, b) in reports}
    return RedSetsResult(True, "done", sets, reports, dens, details)


def find_regular_red_sets_from_densifiers(layers, colouring: TwoColoring, R, densifiers: dict, K: int, params,
                                          seed: int = 0, beta: float | None = None, eps: float | None = None,
                                          p_scale: float | None = None, tuple_cap: int = 20000) -> RedSetsResult:
    """K parts of R scoring the most nice (tuple, layer) pairs in the red layer union."""
    R = sorted(int(v) for v in R)
    z = layers.z
    good = {}
    for i, dz in densifiers.items():
        if dz is not None and not validate_densifier(dz, layers, colouring, R):
            good[i] = dz
    if z == 0 or 2 * len(good) < z:
        return RedSetsResult(False, "precondition", details={"layers": z, "densifiers": len(good)})
    union = Graph.from_keys(layers.n, np.unique(np.concatenate([layers.A(i).edge_keys() for i in range(z)])))
    red = colouring.restrict(union).subgraph(RED)
    eps = params.eps2 if eps is None else eps
    p_scale = (params.p_dprime or 1.0) if p_scale is None else p_scale
    beta = params.beta if beta is None else beta
    t0 = max(K, params.t0)
    if len(R) < t0:
        return RedSetsResult(False, "partition", details={"vertices": len(R), "t0": t0})
    part = regularity_partition(red, eps, p_scale, t0, max(t0, params.t_max), seed, vertices=R, trials=params.reg_trials)
    parts = part.parts
    t = len(parts)
    if t < K:
        return RedSetsResult(False, "partition", details={"parts": t})
    part_of = part.vertex_map()
    # heavy[i][k]: parts meeting family k of layer i in >= beta |V| vertices
    heavy = {}
    for i, dz in good.items():
        rows = []
        for fam in dz.families:
            cnt = np.bincount([part_of[v] for P in fam for v in P if v in part_of], minlength=t)
            rows.append(cnt >= beta * np.array([len(p) for p in parts]) - TOL)
        heavy[i] = np.array(rows)
    irregular = set(part.irregular)

    def nice_layers(tup):
        if any((min(a, b), max(a, b)) in irregular for a, b in itertools.combinations(tup, 2)):
            return 0
        total = 0
        for i, H in heavy.items():
            if _distinct_families(H, tup):
                total += 1
        return total

    if math.comb(t, K) <= tuple_cap:
        best = max(itertools.combinations(range(t), K), key=lambda tp: (nice_layers(tp), [-x for x in tp]))
    else:
        best = _greedy_tuple(t, K, nice_layers)
    score = nice_layers(best)
    details = {"parts": t, "densifiers": len(good), "nice_layers": score, "history": part.history}
    if score == 0:
        return RedSetsResult(False, "nice-pairs", details=details)
    sets = [parts[i] for i in best]
    reports = {(a, b): part.reports[(i, j)] for (a, i), (b, j) in itertools.combinations(enumerate(best), 2)}
    dens = {(a, b): float(pair_density(red, sets[a], sets[b])) for (a, b) in reports}
    details["density_target"] = params.tau * p_scale
    details["density_target_met"] = all(d >= params.tau * p_scale for d in dens.values())
    return RedSetsResult(True, "done", sets, reports, dens, details)


def _distinct_families(H: np.ndarray, tup) -> bool:
    """Can each tuple part be matched to its own family with a heavy intersection?"""
    match = {}

    def aug(j, seen):
        for k in range(H.shape[0]):
            if H[k, j] and k not in seen:
                seen.add(k)
                if k not in match or aug(match[k], seen):
                    match[k] = j
                    return True
        return False

    return all(aug(j, set()) for j in tup)


def _greedy_tuple(t, K, score):
    chosen = []
    for _ in range(K):
        rest = [x for x in range(t) if x not in chosen]
        best = max(rest, key=lambda x: (score(tuple(sorted(chosen + [x]))) if len(chosen) + 1 == K else 0, -x))
        chosen.append(best)
    return tuple(sorted(chosen))


# ------------------------------------------------------------ subsampling transfer

@dataclass
class TransferReport:
    before: RegularPairReport
    after: RegularPairReport
    before_density: float
    after_density: float
    regular_ok: bool
    density_ok: bool

    @property
    def transfers(self) -> bool:
        return self.regular_ok and self.density_ok


def subsample_regularity_transfer_check(g_before: Graph, sets, eps: float, scale_before: float,
                                        g_after: Graph, scale_after: float, density_floor: float | None = None,
                                        mode: str = "auto", trials: int = 20, seed: int = 0) -> TransferReport:
    """Does (4 eps, scale_after)-regularity with half the relative density survive subsampling?

    ``density_floor`` is the relative density gamma of the before side
    (default: its measured density / scale_before).
    """
    A, B = sets
    if mode == "auto":
        mode = "exact" if max(len(A), len(B)) <= 12 else "randomized"
    before = regularity_check(g_before, A, B, eps, scale_before, mode, trials, seed)
    after = regularity_check(g_after, A, B, min(1.0, 4 * eps), scale_after, mode, trials, seed + 1)
    gamma = before.density / scale_before if density_floor is None else density_floor
    dens_ok = after.density >= gamma * scale_after / 2 - TOL
    return TransferReport(before, after, before.density, after.density, after.regular, dens_ok)
