"""Random graph samplers and the exact couplings between them.

sample_gnp               G(n, p)
sample_block_model       G^C(n, p): every block's clique present with probability p
subsample_blocks         G~: per present block, a non-empty edge subset with the
                         conditional law p~^k (1-p~)^(m-k) / p
build_layers             skeletons G_i ~ G(n_i, p') over block matchings, blown up
                         to A_i (and A'_i from the cube of G_i)
subsample_layers         A~_i: per present biclique, the analogous conditional subset
couple_layers_into_gnp   F_i ~ G(n, p~'), L_i = F_i edges between distinct blocks of M_i

All randomness is drawn from ``rng.stream(seed, phase, index)``; layer i
always uses its own stream, so adding layers does not disturb earlier ones.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .designs import BlockDesign
from .errors import BlockTooLarge
from .graph import Graph
from .ops import graph_power
from .rng import stream

OUTCOME_CAP_BITS = 15


# ------------------------------------------------------------ G(n, p)

def _pair_from_index(n: int, k: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Invert the lexicographic numbering of pairs u < v of [n]."""
    k = k.astype(np.int64)
    if k.size == 0:
        return k, k.copy()
    b = 2 * n - 1
    u = np.floor((b - np.sqrt(np.maximum(b * b - 8.0 * k, 0.0))) / 2).astype(np.int64)
    off = u * (2 * n - u - 1) // 2
    # guard against rounding at row boundaries
    low = off > k
    u[low] -= 1
    off = u * (2 * n - u - 1) // 2
    high = k - off >= n - 1 - u
    u[high] += 1
    off = u * (2 * n - u - 1) // 2
    return u, u + 1 + (k - off)


def _gnp_keys(n: int, p: float, rng: np.random.Generator) -> np.ndarray:
    total = n * (n - 1) // 2
    if total == 0 or p <= 0:
        return np.zeros(0, dtype=np.int64)
    if p >= 1:
        idx = np.arange(total, dtype=np.int64)
    else:
        m = int(rng.binomial(total, p))
        idx = np.sort(rng.choice(total, size=m, replace=False)).astype(np.int64)
    u, v = _pair_from_index(n, idx)
    return u * n + v


def sample_gnp(n: int, p: float, seed: int, phase: str = "gnp", index: tuple = ()) -> Graph:
    """G(n, p): edge count ~ Bin(C(n,2), p), then a uniform edge set of that size."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    return Graph.from_keys(n, _gnp_keys(n, p, stream(seed, phase, *index)))


# ------------------------------------------------------------ G^C(n, p) and G~

def _block_pairs(C: int):
    iu, ju = np.triu_indices(C, 1)
    return iu, ju


def _blocks_graph(d: BlockDesign, blocks: np.ndarray) -> Graph:
    n = d.n
    if blocks.size == 0:
        return Graph(n)
    rows = d.blocks[blocks]
    iu, ju = _block_pairs(d.block_size)
    keys = (rows[:, iu] * n + rows[:, ju]).ravel()
    return Graph.from_keys(n, np.sort(keys))


def sample_block_model(d: BlockDesign, p: float, seed: int) -> tuple[Graph, np.ndarray]:
    """G^C(n, p). Returns the graph and the sorted present block indices."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    u = stream(seed, "blocks").random(d.num_blocks)
    present = np.flatnonzero(u < p)
    return _blocks_graph(d, present), present


def _outcome_table(m: int, x: float) -> tuple[np.ndarray, np.ndarray]:
    """Non-empty subsets of m slots as bitmasks with cumulative law x^k (1-x)^(m-k)."""
    masks = np.arange(1, 1 << m, dtype=np.int64)
    sizes = np.zeros(masks.size, dtype=np.int64)
    for b in range(m):
        sizes += (masks >> b) & 1
    if x >= 1.0:
        w = (sizes == m).astype(float)
    else:
        w = np.exp(sizes * math.log(x) + (m - sizes) * math.log1p(-x)) if x > 0 else (sizes == 0).astype(float)
    cdf = np.cumsum(w)
    return masks, cdf


def conditional_outcomes(m: int, x: float, rng: np.random.Generator, count: int) -> np.ndarray:
    """Draw ``count`` non-empty subsets of m slots (as bitmasks), each slot weighted x.

    Exact inverse-CDF over the 2^m - 1 outcomes up to OUTCOME_CAP_BITS slots,
    rejection sampling of independent coins above.
    """
    if count == 0:
        return np.zeros(0, dtype=np.int64)
    if x <= 0:
        raise ValueError("slot probability must be positive")
    if m <= OUTCOME_CAP_BITS:
        masks, cdf = _outcome_table(m, x)
        u = rng.random(count) * cdf[-1]
        pos = np.minimum(np.searchsorted(cdf, u, side="right"), masks.size - 1)
        return masks[pos]
    out = np.zeros(count, dtype=np.int64)
    todo = np.arange(count)
    weights = np.int64(1) << np.arange(m, dtype=np.int64)
    while todo.size:
        coins = rng.random((todo.size, m)) < x
        vals = coins.astype(np.int64) @ weights
        ok = vals != 0
        out[todo[ok]] = vals[ok]
        todo = todo[~ok]
    return out


def subsample_blocks(g: Graph, present, d: BlockDesign, p_tilde: float, seed: int) -> Graph:
    """G~ from a G^C(n, p) sample: per present block an exact conditional draw."""
    present = np.asarray(present, dtype=np.int64)
    C = d.block_size
    m = C * (C - 1) // 2
    if m > OUTCOME_CAP_BITS:
        raise BlockTooLarge(f"C = {C} gives {m} edges per block, above the enumeration cap", C=C)
    if present.size == 0:
        return Graph(d.n)
    outcomes = conditional_outcomes(m, p_tilde, stream(seed, "subsample-blocks"), present.size)
    rows = d.blocks[present]
    iu, ju = _block_pairs(C)
    keys = rows[:, iu] * d.n + rows[:, ju]
    bits = (outcomes[:, None] >> np.arange(m)) & 1
    return Graph.from_keys(d.n, np.sort(keys[bits.astype(bool)]))


# ------------------------------------------------------------ layers

@dataclass
class LayerSet:
    """Skeletons G_i over block matchings M_i and their blow-ups.

    Skeleton vertex v of layer i stands for block ``matchings[i][v]``.
    A_i and A'_i are built on demand and cached.
    """

    design: BlockDesign
    matchings: list
    skeletons: list
    _a: dict = field(default_factory=dict, repr=False)
    _ap: dict = field(default_factory=dict, repr=False)
    _cubes: dict = field(default_factory=dict, repr=False)

    @property
    def z(self) -> int:
        return len(self.matchings)

    @property
    def n(self) -> int:
        return self.design.n

    def block_of(self, i: int, v: int) -> int:
        return int(self.matchings[i][v])

    def block_points(self, i: int, v: int) -> tuple[int, ...]:
        return self.design.block(self.block_of(i, v))

    def vertex_block(self, i: int) -> np.ndarray:
        """Host vertex -> skeleton vertex of layer i, or -1 when uncovered."""
        out = np.full(self.n, -1, dtype=np.int64)
        if len(self.matchings[i]):
            rows = self.design.blocks[np.asarray(self.matchings[i], dtype=np.int64)]
            out[rows] = np.arange(len(self.matchings[i]))[:, None]
        return out

    def cube(self, i: int) -> Graph:
        if i not in self._cubes:
            self._cubes[i] = graph_power(self.skeletons[i], 3)
        return self._cubes[i]

    def biclique_keys(self, i: int, skeleton: Graph) -> np.ndarray:
        """Host-edge keys of the blow-up, shape (edges, C*C), slot x*C+y."""
        n, C = self.n, self.design.block_size
        if skeleton.m == 0:
            return np.zeros((0, C * C), dtype=np.int64)
        blocks = np.asarray(self.matchings[i], dtype=np.int64)
        ra = self.design.blocks[blocks[skeleton.edges[:, 0]]]
        rb = self.design.blocks[blocks[skeleton.edges[:, 1]]]
        a = np.repeat(ra, C, axis=1)
        b = np.tile(rb, (1, C))
        return np.minimum(a, b) * n + np.maximum(a, b)

    def _blow(self, i: int, skeleton: Graph) -> Graph:
        keys = self.biclique_keys(i, skeleton).ravel()
        return Graph.from_keys(self.n, np.unique(keys))

    def A(self, i: int) -> Graph:
        if i not in self._a:
            self._a[i] = self._blow(i, self.skeletons[i])
        return self._a[i]

    def A_prime(self, i: int) -> Graph:
        if i not in self._ap:
            self._ap[i] = self._blow(i, self.cube(i))
        return self._ap[i]

    @property
    def layer_graphs(self) -> list:
        return [(self.A(i), self.A_prime(i)) for i in range(self.z)]

    def block_clique_graph(self, i: int) -> Graph:
        """The cliques on the blocks of M_i."""
        blocks = np.asarray(self.matchings[i], dtype=np.int64)
        return _blocks_graph(self.design, blocks)


def build_layers(design: BlockDesign, matchings, p_prime: float, seed: int) -> LayerSet:
    """G_i ~ G(|M_i|, p') on stream ("skeleton", i) for each matching."""
    matchings = [sorted(int(b) for b in m) for m in matchings]
    skeletons = [sample_gnp(len(m), p_prime, seed, "skeleton", (i,)) for i, m in enumerate(matchings)]
    return LayerSet(design, matchings, skeletons)


def layers_from_skeletons(design: BlockDesign, matchings, skeletons) -> LayerSet:
    """Wrap explicitly given skeleton graphs (for planted instances)."""
    matchings = [list(int(b) for b in m) for m in matchings]
    for m, s in zip(matchings, skeletons):
        if s.n != len(m):
            raise ValueError("skeleton size must match its matching")
    return LayerSet(design, matchings, list(skeletons))


def subsample_layers(layers: LayerSet, p_tilde_prime: float, seed: int) -> list[Graph]:
    """A~_i for every layer, stream ("subsample-layers", i)."""
    C = layers.design.block_size
    m = C * C
    out = []
    for i in range(layers.z):
        keys = layers.biclique_keys(i, layers.skeletons[i])
        if keys.shape[0] == 0:
            out.append(Graph(layers.n))
            continue
        outcomes = conditional_outcomes(m, p_tilde_prime, stream(seed, "subsample-layers", i), keys.shape[0])
        bits = ((outcomes[:, None] >> np.arange(m)) & 1).astype(bool)
        out.append(Graph.from_keys(layers.n, np.unique(keys[bits])))
    return out


@dataclass
class Coupling:
    F: Graph
    L: Graph
    F_layers: list
    L_layers: list
    contained: bool
    violations: int


def couple_layers_into_gnp(matchings, design: BlockDesign, p_tilde_prime: float, seed: int) -> Coupling:
    """Multiple exposure: F = union of F_i ~ G(n, p~'), L_i = F_i edges across blocks of M_i."""
    n = design.n
    F_layers, L_layers = [], []
    for i, m in enumerate(matchings):
        fk = _gnp_keys(n, p_tilde_prime, stream(seed, "couple", i))
        owner = np.full(n, -1, dtype=np.int64)
        if len(m):
            owner[design.blocks[np.asarray(list(m), dtype=np.int64)]] = np.arange(len(m))[:, None]
        u, v = fk // n, fk % n
        keep = (owner[u] >= 0) & (owner[v] >= 0) & (owner[u] != owner[v])
        F_layers.append(Graph.from_keys(n, fk))
        L_layers.append(Graph.from_keys(n, fk[keep]))
    fkeys = np.unique(np.concatenate([f.edge_keys() for f in F_layers])) if F_layers else np.zeros(0, np.int64)
    lkeys = np.unique(np.concatenate([l.edge_keys() for l in L_layers])) if L_layers else np.zeros(0, np.int64)
    missing = int((~np.isin(lkeys, fkeys)).sum())
    return Coupling(Graph.from_keys(n, fkeys), Graph.from_keys(n, lkeys), F_layers, L_layers, missing == 0, missing)
