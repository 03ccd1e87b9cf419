"""Cycle embedding into candidate sets and the anchored multi-cycle pipeline."""
from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import CycleEmbeddingFailed, EmbeddingFailed
from ..graph import EmbeddingMap, Graph
from .pattern import embed_pattern


@dataclass
class CandidateAssignment:
    """Per cycle vertex: class label phi, an optional back-neighbour whose image
    anchors it, and optional explicit candidates."""

    phi: dict                                       # vertex -> class in 1..n_classes
    back: dict = field(default_factory=dict)        # vertex -> earlier pattern vertex
    anchors: dict = field(default_factory=dict)     # vertex -> host vertex (resolved anchors)
    candidates: dict = field(default_factory=dict)  # vertex -> explicit candidate set
    n_classes: int = 10

    def violations(self, f: Graph) -> list:
        """Distance-2 colouring of f and at most three uses per anchor."""
        problems = []
        for v, c in self.phi.items():
            if not 1 <= c <= self.n_classes:
                problems.append(f"class of {v} out of range")
        verts = set(self.phi)
        for v in verts:
            near = set(f.neighbours(v))
            for w in list(near):
                near |= f.neighbours(w)
            near.discard(v)
            for w in near:
                if w in verts and w > v and self.phi[w] == self.phi[v]:
                    problems.append(f"{v} and {w} within distance 2 share class {self.phi[v]}")
        uses = {}
        for v, u in self.anchors.items():
            uses[u] = uses.get(u, 0) + 1
        for u, k in uses.items():
            if k > 3:
                problems.append(f"anchor {u} used {k} times")
        return problems

    @classmethod
    def build(cls, h: Graph, cycles, earlier=(), n_classes: int = 10, anchors: dict | None = None):
        """Greedy distance-2 colouring of H[cycle vertices] plus back-neighbours.

        A cycle vertex's back-neighbour is its neighbour in ``earlier`` (the
        tree part) or in a previously listed cycle. Degree at most 3 leaves at
        most 9 vertices within distance 2, so 10 classes always suffice.
        """
        cyc_verts = [v for c in cycles for v in c]
        inside = set(cyc_verts)
        f = h.restrict(inside)
        phi = {}
        for v in cyc_verts:
            near = set(f.neighbours(v))
            for w in list(near):
                near |= f.neighbours(w)
            taken = {phi[w] for w in near if w in phi}
            free = [c for c in range(1, n_classes + 1) if c not in taken]
            if not free:
                raise EmbeddingFailed("not enough classes for a distance-2 colouring", vertex=v)
            phi[v] = free[0]
        seen = set(earlier)
        back = {}
        for c in cycles:
            cs = set(c)
            for v in c:
                prior = [w for w in h.neighbours(v) if w in seen and w not in cs]
                if len(prior) > 1:
                    raise EmbeddingFailed("vertex has more than one earlier neighbour", vertex=v)
                if prior:
                    back[v] = prior[0]
            seen |= cs
        return cls(phi, back, dict(anchors or {}), {}, n_classes)


def embed_cycle(host, length: int, candidates, forbidden=(), budget: int = 200_000) -> EmbeddingMap:
    """Cycle v_0 .. v_{length-1} with v_i placed in candidates[i] and every cycle edge in host.

    ``host`` is a Graph or a list of neighbour sets.
    """
    if length < 3:
        raise ValueError("cycle length must be at least 3")
    if len(candidates) != length:
        raise ValueError("one candidate set per cycle position")
    adj = host.adjacency() if isinstance(host, Graph) else host
    pattern = Graph.cycle(length)
    cands = {i: set(c) for i, c in enumerate(candidates)}
    res = embed_pattern(adj, pattern, candidates=cands, forbidden=forbidden, budget=budget)
    if res.image is None:
        raise CycleEmbeddingFailed("no copy of the cycle in the candidate sets", deepest=res.deepest,
                                   exhausted=res.exhausted, nodes=res.nodes)
    return EmbeddingMap(pattern, dict(res.image))


@dataclass
class CyclePipelineResult:
    image: dict                    # pattern vertex -> host vertex, cycles only
    choices: dict                  # vertex -> (b, |S_v|)
    log: list = field(default_factory=list)
    candidate_sets: dict = field(default_factory=dict)   # vertex -> S_v


def embed_cycles_pipeline(host, sets, cycles, assignment: CandidateAssignment, d: float, embedded: dict | None = None,
                          budget: int = 200_000, n_classes: int | None = None) -> CyclePipelineResult:
    """Embed the cycles one after another into the half-families of ``sets``.

    Class j (1-based) owns sets[j-1] (half 0) and sets[j-1+m] (half 1), m the
    number of classes. For an anchored vertex the first half holding at least
    |V| d / 20 unoccupied host neighbours of its anchor is used and S_v is that
    neighbourhood; an unanchored vertex takes the whole first half with that
    many unoccupied vertices. ``embedded`` holds images fixed earlier.
    """
    m = assignment.n_classes if n_classes is None else n_classes
    if len(sets) < 2 * m:
        raise ValueError(f"need {2 * m} sets, got {len(sets)}")
    adj = host.adjacency() if isinstance(host, Graph) else host
    sets = [set(int(x) for x in s) for s in sets]
    size = min(len(s) for s in sets[: 2 * m])
    need = max(1.0, size * d / 20)
    image = dict(embedded or {})
    occupied = set(image.values())
    out, choices, log, cand_sets = {}, {}, [], {}
    for ci, cyc in enumerate(cycles):
        cands = []
        for v in cyc:
            cls = assignment.phi[v] - 1
            anchor = assignment.anchors.get(v)
            if anchor is None and v in assignment.back and assignment.back[v] in image:
                anchor = image[assignment.back[v]]
            chosen = None
            for b in (0, 1):
                half = sets[cls + b * m]
                pool = (half & adj[anchor]) if anchor is not None else set(half)
                if v in assignment.candidates:
                    pool &= set(assignment.candidates[v])
                pool -= occupied
                if len(pool) >= need:
                    chosen = (b, pool)
                    break
            if chosen is None:
                log.append({"cycle": ci, "vertex": v, "stage": "half-selection", "anchor": anchor})
                raise CycleEmbeddingFailed("no half-family offers enough unoccupied neighbours", cycle=ci, vertex=v,
                                           anchor=anchor, need=need, log=log)
            choices[v] = (chosen[0], len(chosen[1]))
            cand_sets[v] = sorted(chosen[1])
            cands.append(chosen[1])
        try:
            emb = embed_cycle(adj, len(cyc), cands, forbidden=occupied, budget=budget)
        except CycleEmbeddingFailed as exc:
            log.append({"cycle": ci, "stage": "cycle-search", "length": len(cyc)})
            raise CycleEmbeddingFailed("cycle search failed", cycle=ci, log=log, deepest=exc.details.get("deepest"))
        for pos, v in enumerate(cyc):
            image[v] = emb.image[pos]
            out[v] = emb.image[pos]
            occupied.add(emb.image[pos])
        log.append({"cycle": ci, "stage": "embedded", "length": len(cyc)})
    return CyclePipelineResult(out, choices, log, cand_sets)
