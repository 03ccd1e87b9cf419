"""Block matchings: greedy partition of present blocks and the counting checks on them."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .designs import BlockDesign


@dataclass
class MatchingCollection:
    matchings: list            # surviving matchings, lists of block indices
    coverage: list             # covered vertex count per surviving matching
    leftover_blocks: list      # blocks of dissolved matchings
    dissolved: int = 0         # number of matchings removed by the coverage bar
    n: int = 0
    eta: float = 0.0
    z_target: int | None = None

    @property
    def z(self) -> int:
        return len(self.matchings)

    @property
    def reached_target(self) -> bool | None:
        return None if self.z_target is None else self.z >= self.z_target

    def to_json(self) -> str:
        return json.dumps({"matchings": [list(m) for m in self.matchings], "leftover": list(self.leftover_blocks)}) + "\n"

    @classmethod
    def from_json(cls, text: str, d: BlockDesign | None = None) -> "MatchingCollection":
        obj = json.loads(text)
        ms = [[int(b) for b in m] for m in obj["matchings"]]
        cov = [len(m) * d.block_size for m in ms] if d is not None else [0] * len(ms)
        return cls(ms, cov, [int(b) for b in obj.get("leftover", [])], n=d.n if d is not None else 0)

    def as_dict(self) -> dict:
        return {
            "z": self.z,
            "z_target": self.z_target,
            "coverage": list(self.coverage),
            "leftover": len(self.leftover_blocks),
            "dissolved": self.dissolved,
        }


def block_order(present, d: BlockDesign) -> list[int]:
    """Present blocks by descending degree in the present-block conflict graph.

    The degree of a block is the number of other present blocks it meets,
    i.e. the sum over its points of (blocks at that point - 1). Ties keep
    canonical design order.
    """
    present = np.asarray(sorted(int(b) for b in present), dtype=np.int64)
    if present.size == 0:
        return []
    rows = d.blocks[present]
    point_deg = np.bincount(rows.ravel(), minlength=d.n)
    deg = (point_deg[rows] - 1).sum(axis=1)
    order = np.argsort(-deg, kind="stable")
    return [int(b) for b in present[order]]


def partition_blocks_into_matchings(present, d: BlockDesign, eta: float, z_target: int | None = None) -> MatchingCollection:
    """First-fit conflict colouring, then drop matchings covering fewer than (1-eta) n points."""
    if not 0.0 <= eta < 1.0:
        raise ValueError("eta must lie in [0, 1)")
    n, C = d.n, d.block_size
    used = [0] * n  # bitmask of matchings touching each point
    members: list[list[int]] = []
    for b in block_order(present, d):
        pts = d.blocks[b].tolist()
        busy = 0
        for x in pts:
            busy |= used[x]
        slot = (~busy & (busy + 1)).bit_length() - 1  # lowest free matching
        if slot == len(members):
            members.append([])
        members[slot].append(b)
        bit = 1 << slot
        for x in pts:
            used[x] |= bit
    keep, coverage, leftover, dissolved = [], [], [], 0
    bar = (1.0 - eta) * n
    for m in members:
        cov = len(m) * C
        if cov >= bar - 1e-9:
            keep.append(sorted(m))
            coverage.append(cov)
        else:
            dissolved += 1
            leftover.extend(m)
    return MatchingCollection(keep, coverage, sorted(leftover), dissolved, n, eta, z_target)


def expected_matching_window(n: int, p: float, C: int, eta: float) -> tuple[float, float]:
    centre = (n - 1) * p / (C - 1)
    return (1 - eta) * centre, (1 + eta) * centre


def check_matchings(mc: MatchingCollection, d: BlockDesign, total_blocks: int | None = None) -> list[str]:
    """Structural problems in a collection; empty when consistent."""
    problems = []
    seen = set()
    for i, m in enumerate(mc.matchings):
        pts = d.blocks[np.asarray(m, dtype=np.int64)].ravel() if m else np.zeros(0, np.int64)
        if len(np.unique(pts)) != pts.size:
            problems.append(f"matching {i} has intersecting blocks")
        if seen.intersection(m):
            problems.append(f"matching {i} reuses blocks")
        seen.update(m)
    if seen.intersection(mc.leftover_blocks):
        problems.append("leftover blocks also matched")
    if total_blocks is not None and len(seen) + len(mc.leftover_blocks) != total_blocks:
        problems.append("blocks lost or duplicated")
    return problems


@dataclass
class MeetingReport:
    blocks: list
    threshold: float
    required: float
    bound_holds: bool
    applicable: bool
    reasons: list = field(default_factory=list)


def blocks_meeting_set(matching, S, d: BlockDesign, gamma: float) -> MeetingReport:
    """Blocks h of the matching with |h & S| >= gamma C / 2, and whether there are >= |S|/(2C).

    The count bound is only promised when the matching covers (1-gamma) n points
    and |S| >= 4 gamma n; otherwise the report is marked inapplicable but the
    blocks and flag are still computed.
    """
    S = set(int(v) for v in S)
    n, C = d.n, d.block_size
    threshold = gamma * C / 2
    hits = []
    for b in matching:
        k = sum(1 for x in d.block(int(b)) if x in S)
        if k >= threshold - 1e-12:
            hits.append(int(b))
    reasons = []
    covered = len(matching) * C
    if covered < (1 - gamma) * n - 1e-9:
        reasons.append("matching covers fewer than (1-gamma) n points")
    if len(S) < 4 * gamma * n - 1e-9:
        reasons.append("|S| < 4 gamma n")
    required = len(S) / (2 * C)
    return MeetingReport(hits, threshold, required, len(hits) >= required - 1e-12, not reasons, reasons)


@dataclass
class MultiplicityReport:
    histogram: dict  # multiplicity -> number of edges
    n: int

    @property
    def repeated(self) -> int:
        return sum(c for k, c in self.histogram.items() if k >= 2)

    @property
    def has_five_or_more(self) -> bool:
        return any(k >= 5 for k in self.histogram)

    @property
    def repeated_exceeds_bound(self) -> bool:
        return self.repeated > self.n ** 1.5

    def as_dict(self) -> dict:
        return {
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
            "repeated": self.repeated,
            "bound": self.n ** 1.5,
            "repeated_exceeds_bound": self.repeated_exceeds_bound,
            "has_five_or_more": self.has_five_or_more,
        }


def edge_multiplicity_report(layers) -> MultiplicityReport:
    """How many of A_1..A_z contain each edge."""
    parts = [layers.A(i).edge_keys() for i in range(layers.z)]
    if not parts:
        return MultiplicityReport({}, layers.n)
    _, counts = np.unique(np.concatenate(parts), return_counts=True)
    ks, cs = np.unique(counts, return_counts=True)
    return MultiplicityReport({int(k): int(c) for k, c in zip(ks, cs)}, layers.n)
