"""Explicit Steiner systems S(2, C, n).

steiner_triple(n)   C = 3: Bose (n = 3 mod 6) and Skolem (n = 1 mod 6) constructions
affine_plane(q)     C = q, n = q^2, lines of the plane over Z_q, q prime
validate_design(d)  pair coverage, block sizes and parallel classes, as data

Blocks are stored as an int array of shape (b, C) with sorted rows, the rows
themselves in lexicographic order, so a design is determined by (n, C).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import NoTripleSystem, PrimeRequired, UnbuildableDesign


@dataclass(eq=False)
class BlockDesign:
    n: int
    block_size: int
    blocks: np.ndarray
    parallel_classes: list[list[int]] | None = None

    @property
    def num_blocks(self) -> int:
        return int(self.blocks.shape[0])

    def block(self, i: int) -> tuple[int, ...]:
        return tuple(int(x) for x in self.blocks[i])

    def point_blocks(self) -> list[list[int]]:
        """For every point, the indices of the blocks containing it."""
        out = [[] for _ in range(self.n)]
        for i, row in enumerate(self.blocks.tolist()):
            for x in row:
                out[x].append(i)
        return out

    def pair_block_index(self) -> np.ndarray:
        """Dense n x n table: block index covering each pair (-1 on the diagonal)."""
        idx = np.full((self.n, self.n), -1, dtype=np.int64)
        C = self.block_size
        b = np.arange(self.num_blocks)
        for i in range(C):
            for j in range(C):
                if i != j:
                    idx[self.blocks[:, i], self.blocks[:, j]] = b
        return idx

    def to_json(self) -> str:
        return json.dumps({
            "n": self.n,
            "C": self.block_size,
            "blocks": self.blocks.tolist(),
            "parallel_classes": self.parallel_classes,
        }) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "BlockDesign":
        obj = json.loads(text)
        blocks = np.asarray(obj["blocks"], dtype=np.int64).reshape(-1, int(obj["C"]))
        return cls(int(obj["n"]), int(obj["C"]), blocks, obj.get("parallel_classes"))

    def __eq__(self, other) -> bool:
        return (isinstance(other, BlockDesign) and self.n == other.n and self.block_size == other.block_size
                and np.array_equal(self.blocks, other.blocks) and self.parallel_classes == other.parallel_classes)


def _canonical(n: int, C: int, blocks: np.ndarray, classes=None) -> BlockDesign:
    blocks = np.asarray(blocks, dtype=np.int64).reshape(-1, C)
    if C > 1 and not (np.diff(blocks, axis=1) > 0).all():
        blocks = np.sort(blocks, axis=1)
    if blocks.size and float(n) ** C < 2 ** 62:
        key = np.zeros(blocks.shape[0], dtype=np.int64)
        for col in range(C):
            key = key * n + blocks[:, col]
        order = np.argsort(key, kind="stable")
    else:
        order = np.lexsort(blocks.T[::-1]) if blocks.size else np.zeros(0, dtype=np.int64)
    blocks = blocks[order]
    if classes is not None:
        rank = np.empty_like(order)
        rank[order] = np.arange(order.size)
        classes = sorted(sorted(int(rank[i]) for i in cl) for cl in classes)
    return BlockDesign(n, C, blocks, classes)


def _triple(a, b, c, wrap):
    # a < b within one column group; c sits in the next group, which is
    # the highest unless the group index wrapped around to 0
    return np.stack([c, a, b] if wrap else [a, b, c], axis=1)


def steiner_triple(n: int) -> BlockDesign:
    """Steiner triple system on n points, n = 1 or 3 (mod 6).

    n = 6k+3 (Bose): points (x, i) -> x + i*(2k+1) over the idempotent
    commutative quasigroup x.y = (k+1)(x+y) mod 2k+1.
    n = 6k+1 (Skolem): points (x, i) -> x + i*2k plus infinity = 6k, over the
    half-idempotent quasigroup x.y = sigma((x+y) mod 2k) with sigma(2j) = j,
    sigma(2j+1) = k+j.
    """
    if n < 3 or n % 6 not in (1, 3):
        raise NoTripleSystem(f"n = {n} must satisfy n = 1 or 3 (mod 6) with n >= 3", n=n)
    if n % 6 == 3:
        m = n // 3
        k = (m - 1) // 2
        pt = lambda x, i: x + (i % 3) * m  # noqa: E731
        xs = np.arange(m)
        rows = [np.stack([pt(xs, 0), pt(xs, 1), pt(xs, 2)], axis=1)]
        x, y = np.triu_indices(m, 1)
        prod = ((k + 1) * (x + y)) % m
        for i in range(3):
            rows.append(_triple(pt(x, i), pt(y, i), pt(prod, i + 1), i == 2))
        return _canonical(n, 3, np.concatenate(rows))
    k = (n - 1) // 6
    m = 2 * k
    inf = n - 1
    pt = lambda x, i: x + (i % 3) * m  # noqa: E731
    rows = []
    xs = np.arange(k)
    rows.append(np.stack([pt(xs, 0), pt(xs, 1), pt(xs, 2)], axis=1))
    for i in range(3):
        rows.append(np.stack([np.full(k, inf), pt(k + xs, i), pt(xs, i + 1)], axis=1))
    x, y = np.triu_indices(m, 1)
    s = (x + y) % m
    prod = np.where(s % 2 == 0, s // 2, k + s // 2)
    for i in range(3):
        rows.append(_triple(pt(x, i), pt(y, i), pt(prod, i + 1), i == 2))
    return _canonical(n, 3, np.concatenate(rows))


def is_prime(q: int) -> bool:
    if q < 2:
        return False
    f = 2
    while f * f <= q:
        if q % f == 0:
            return False
        f += 1
    return True


def affine_plane(q: int) -> BlockDesign:
    """Affine plane of prime order q: points (x, y) -> x*q + y."""
    if not is_prime(q):
        raise PrimeRequired(f"q = {q} is not prime", q=q)
    x = np.arange(q)
    rows, classes = [], []
    for a in range(q):
        cl = []
        for b in range(q):
            rows.append(x * q + (a * x + b) % q)
            cl.append(len(rows) - 1)
        classes.append(cl)
    cl = []
    for c in range(q):
        rows.append(c * q + x)
        cl.append(len(rows) - 1)
    classes.append(cl)
    return _canonical(q * q, q, np.array(rows), classes)


def design_for(n: int, C: int) -> BlockDesign:
    """The design this module can build for (n, C), or UnbuildableDesign."""
    if C == 3 and n % 6 in (1, 3) and n >= 3:
        return steiner_triple(n)
    if C * C == n and is_prime(C):
        return affine_plane(C)
    if C == 2 and n >= 2:
        iu = np.triu_indices(n, 1)
        return _canonical(n, 2, np.stack(iu, axis=1))
    raise UnbuildableDesign(f"no construction for n = {n}, C = {C}", n=n, C=C)


@dataclass
class DesignReport:
    pair_violations: list = field(default_factory=list)  # (u, v, count) with count != 1
    block_size_violations: list = field(default_factory=list)  # block indices
    class_violations: list = field(default_factory=list)  # (class index, reason)
    pairs_checked: int = 0

    @property
    def valid(self) -> bool:
        return not (self.pair_violations or self.block_size_violations or self.class_violations)

    def as_dict(self) -> dict:
        return {
            "valid": self.valid,
            "pairs_checked": self.pairs_checked,
            "pair_violations": [list(v) for v in self.pair_violations],
            "block_size_violations": list(self.block_size_violations),
            "class_violations": [list(v) for v in self.class_violations],
        }


def validate_design(d: BlockDesign) -> DesignReport:
    rep = DesignReport()
    n, C = d.n, d.block_size
    blocks = np.asarray(d.blocks, dtype=np.int64).reshape(-1, C) if d.blocks.size else np.zeros((0, C), dtype=np.int64)
    if C > 1 and blocks.size and (np.diff(blocks, axis=1) > 0).all() and blocks[:, 0].min() >= 0 and blocks[:, -1].max() < n:
        good = blocks
    else:
        srt = np.sort(blocks, axis=1)
        bad_size = ((srt[:, 1:] == srt[:, :-1]).any(axis=1) if C > 1 else np.zeros(len(srt), bool)) | (srt < 0).any(axis=1) | (srt >= n).any(axis=1)
        rep.block_size_violations = [int(i) for i in np.flatnonzero(bad_size)]
        good = srt[~bad_size]
    slots = [good[:, i] * n + good[:, j] for i in range(C) for j in range(i + 1, C)]
    keys = np.concatenate(slots) if slots else np.zeros(0, dtype=np.int64)
    counts = np.bincount(keys, minlength=n * n)
    rep.pairs_checked = n * (n - 1) // 2
    # keys only land above the diagonal, so "all ones there" is a cheap test
    if not (counts.max(initial=0) <= 1 and np.count_nonzero(counts) == rep.pairs_checked):
        iu, ju = np.triu_indices(n, 1)
        pc = counts.reshape(n, n)[iu, ju]
        bad = np.flatnonzero(pc != 1)
        rep.pair_violations = [(int(iu[k]), int(ju[k]), int(pc[k])) for k in bad]
    if d.parallel_classes is not None:
        seen = []
        for ci, cl in enumerate(d.parallel_classes):
            pts = blocks[list(cl)].ravel() if len(cl) else np.zeros(0, dtype=np.int64)
            if len(np.unique(pts)) != pts.size:
                rep.class_violations.append((ci, "blocks not disjoint"))
            if len(np.unique(pts)) != n:
                rep.class_violations.append((ci, "class does not cover all points"))
            seen.extend(cl)
        if sorted(seen) != list(range(d.num_blocks)):
            rep.class_violations.append((-1, "classes do not partition the blocks"))
    return rep
