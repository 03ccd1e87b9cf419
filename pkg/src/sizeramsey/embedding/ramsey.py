"""End-to-end orchestration: probe, Case I / Case II, red sets, tree part, then cycles."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ..decomposition import build_tree_blowup_container, decompose_cubic, tree_decomposition_small
from ..errors import (BlockTooLarge, CleanupCollapsed, ContainerBoundsExceeded, CycleEmbeddingFailed,
                      EmbeddingFailed, PatternTooLarge, SearchCapped)
from ..graph import BLUE, RED, EmbeddingMap, Graph, TwoColoring, other
from ..ops import auxiliary_coloring, find_monochromatic_clique
from ..random_models import subsample_blocks, subsample_layers
from ..regularity import (CliqueCertificate, Densifier, RedSetsResult, _meta_clique, cleanup_partition,
                          find_regular_red_sets_from_cliques, find_regular_red_sets_from_densifiers, meta_threshold,
                          pair_density, regularity_check, regularity_partition, validate_densifier)
from ..rng import stream, subseed
from .cycles import CandidateAssignment, embed_cycles_pipeline
from .pattern import embed_pattern
from .trees import tree_or_qpartite

TOL = 1e-9


def flip(c: TwoColoring) -> TwoColoring:
    return TwoColoring(c.host, ~c.red_mask)


# ------------------------------------------------------------ q-partition or cliques

@dataclass
class LayerOutcome:
    layer: int                      # -1 stands for the blocks of G when there are no layers
    case: str                       # "densifier" | "cliques" | "none"
    qualifying: int                 # blocks meeting S in enough vertices
    stopped_short: int              # of those, blocks whose extraction covered < rho C
    certificates: list = field(default_factory=list)
    densifier: Densifier | None = None
    problems: list = field(default_factory=list)


@dataclass
class QPartitionResult:
    layers: list
    branch: str                     # majority: "densifier" | "cliques" | "none"

    @property
    def certificates(self) -> list:
        seen, out = set(), []
        for lo in self.layers:
            for c in lo.certificates:
                if c.block not in seen:
                    seen.add(c.block)
                    out.append(c)
        return out

    @property
    def densifiers(self) -> dict:
        return {lo.layer: lo.densifier for lo in self.layers if lo.densifier is not None}


def _extract_cliques(c: TwoColoring, pts, size):
    """Disjoint blue K_size's, removed greedily until none is left."""
    rest = sorted(pts)
    found = []
    while len(rest) >= size:
        K = find_monochromatic_clique(c, rest, BLUE, size)
        if K is None:
            break
        found.append(tuple(sorted(K)))
        rest = [v for v in rest if v not in set(K)]
    return found, rest


def _certificate(block, inside, covered, target):
    """B' = covered vertices padded to exactly ``target`` with other vertices of B & S."""
    if len(inside) < target:
        return None
    Bp = sorted(covered)
    for v in inside:
        if len(Bp) >= target:
            break
        if v not in Bp:
            Bp.append(v)
    return CliqueCertificate(int(block), tuple(sorted(Bp[:target])))


def qpartition_or_cliques(host, colouring: TwoColoring, S, params, n0: int = 2, d: int = 3) -> QPartitionResult:
    """Per layer: clique certificates (most blocks stop short) or a densifier.

    ``colouring`` colours the host's Gamma. Blocks of M_i meeting S in at least
    gamma C / 8 vertices qualify; inside each, disjoint blue K_C' are removed
    greedily. Without layers the present blocks of G stand in as one layer.
    """
    S = set(int(v) for v in S)
    design = host.design
    C = design.block_size
    target = round(params.rho * C)
    bar = max(1, math.ceil(params.gamma * C / 8 - TOL))
    layers = host.layers
    if layers.z:
        groups = [(i, list(layers.matchings[i])) for i in range(layers.z)]
    else:
        groups = [(-1, [int(b) for b in host.present_blocks])]
    outcomes = []
    for i, blocks in groups:
        qual, short, certs, full_parts = 0, 0, [], []
        for b in blocks:
            inside = [v for v in design.block(b) if v in S]
            if len(inside) < bar:
                continue
            qual += 1
            found, rest = _extract_cliques(colouring, inside, params.C_prime)
            covered = sorted(v for K in found for v in K)
            if len(covered) < params.rho * C - TOL:
                short += 1
                cert = _certificate(b, inside, covered, target)
                if cert is not None:
                    certs.append(cert)
            else:
                full_parts.extend((K, b) for K in found)
        if qual == 0:
            outcomes.append(LayerOutcome(i, "none", 0, 0))
            continue
        if 2 * short >= qual:
            outcomes.append(LayerOutcome(i, "cliques", qual, short, certs))
            continue
        lo = LayerOutcome(i, "densifier", qual, short)
        if i < 0:
            lo.problems.append("no layer to carry a densifier")
            outcomes.append(lo)
            continue
        parts = [K for K, _ in full_parts]
        parent = {K: b for K, b in full_parts}
        A = layers.A(i)
        c_layer = colouring.restrict(A)
        aux = auxiliary_coloring(c_layer, parts, params.s)
        dich = tree_or_qpartite(aux, n0, d * d, params.q)
        if dich.kind != "red-qpartite":
            lo.problems.append(f"dichotomy gave {dich.kind}")
        else:
            fams = [[parts[j] for j in p] for p in dich.parts]
            dz = Densifier(fams, params.C_prime, {P: parent[P] for f in fams for P in f}, i, params.C_prime,
                           params.gamma, params.s, params.q)
            lo.problems = validate_densifier(dz, layers, colouring, S)
            lo.densifier = dz if not lo.problems else None
        outcomes.append(lo)
    votes = [lo.case for lo in outcomes if lo.case != "none"]
    if not votes:
        branch = "none"
    else:
        branch = "densifier" if 2 * votes.count("densifier") > len(votes) else "cliques"
    return QPartitionResult(outcomes, branch)


# ------------------------------------------------------------ results

@dataclass
class RamseyResult:
    ok: bool
    colour: str | None
    embedding: EmbeddingMap | None
    case: str | None
    stage: str
    log: list = field(default_factory=list)
    attempts: int = 0

    def as_dict(self) -> dict:
        return {
            "ok": self.ok,
            "colour": self.colour,
            "case": self.case,
            "stage": self.stage,
            "attempts": self.attempts,
            "embedding": None if self.embedding is None else {str(k): int(v) for k, v in sorted(self.embedding.image.items())},
            "log": self.log,
        }


class _StageFailure(Exception):
    def __init__(self, stage, **details):
        super().__init__(stage)
        self.stage = stage
        self.details = details


# ------------------------------------------------------------ helpers

def _colour_sets(g: Graph, work: TwoColoring, R, K: int, params, seed: int, eps: float, p_scale: float) -> RedSetsResult:
    """K parts of R, pairwise regular and dense in the red subgraph of g."""
    red = work.restrict(g).subgraph(RED) if work.host is not g else work.subgraph(RED)
    R = sorted(R)
    t0 = max(K, params.t0)
    if len(R) < t0:
        return RedSetsResult(False, "partition", details={"vertices": len(R), "t0": t0})
    part = regularity_partition(red, eps, p_scale, t0, max(t0, params.t_max), seed, vertices=R,
                                trials=params.reg_trials)
    parts = part.parts
    t = len(parts)
    M = red.matrix()
    counts = np.zeros((t, t))
    for i, j in itertools.combinations(range(t), 2):
        counts[i, j] = counts[j, i] = M[np.ix_(parts[i], parts[j])].sum()
    thr = meta_threshold(params, counts[np.triu_indices(t, 1)], g.n, p_scale, t)
    meta = (counts >= thr - TOL) & (counts > 0)
    for (i, j), r in part.reports.items():
        if not r.regular:
            meta[i, j] = meta[j, i] = False
    np.fill_diagonal(meta, False)
    details = {"parts": t, "irregular_pairs": len(part.irregular), "threshold": float(thr), "history": part.history}
    clique = _meta_clique(counts.sum(axis=1), meta, K)
    if clique is None:
        return RedSetsResult(False, "meta-clique", details=details)
    clique = sorted(clique)
    sets = [parts[i] for i in clique]
    reports = {(a, b): part.reports[(min(i, j), max(i, j))] for (a, i), (b, j) in itertools.combinations(enumerate(clique), 2)}
    dens = {(a, b): float(pair_density(red, sets[a], sets[b])) for (a, b) in reports}
    return RedSetsResult(True, "done", sets, reports, dens, details)


def _probe(adj_by_colour, J: Graph, U, budget):
    """Per colour: 'contains' | 'lacks' | 'unknown' for a copy of J inside U."""
    out = {}
    for colour, adj in adj_by_colour.items():
        if J.m == 0:
            out[colour] = "contains" if J.n <= len(U) else "lacks"
            continue
        res = embed_pattern(adj, J, allowed=U, budget=budget)
        out[colour] = "contains" if res.found else ("lacks" if res.exhausted else "unknown")
    return out


def _endgame(host, work: TwoColoring, sets, G0: Graph, scale: float, params, H: Graph, J: list, cycles,
             budget: int, log: list):
    """Cleanup, tree part in the last set, cycles in the first 2m sets; colour red in ``work``."""
    m = params.n_classes
    red0 = work.restrict(G0).subgraph(RED)
    dens = [float(pair_density(red0, a, b)) for a, b in itertools.combinations(sets, 2)]
    d = min(dens) if dens else 0.0
    try:
        clean = cleanup_partition(red0, sets, params.cleanup_factor * d)
    except CleanupCollapsed as exc:
        raise _StageFailure("cleanup", error=str(exc), density=d)
    log.append({"stage": "cleanup", "min_density": d, "retention": [round(r, 4) for r in clean.retention]})
    sets = clean.sets
    tree_set = sets[-1]
    image = {}
    if J:
        Jg, ids = H.induced_subgraph(J)
        gamma_red = work.subgraph(RED).adjacency()
        res = embed_pattern(gamma_red, Jg, allowed=tree_set, budget=budget)
        log.append({"stage": "tree-part", "found": res.found, "nodes": res.nodes, "set_size": len(tree_set)})
        if not res.found:
            raise _StageFailure("tree-part", nodes=res.nodes, exhausted=res.exhausted)
        image = {ids[v]: int(x) for v, x in res.image.items()}
    if cycles:
        assign = CandidateAssignment.build(H, cycles, earlier=J, n_classes=m)
        problems = assign.violations(H.restrict([v for c in cycles for v in c]))
        if problems:
            raise _StageFailure("assignment", problems=problems[:5])
        F = red0.restrict(set().union(*map(set, sets)))
        try:
            out = embed_cycles_pipeline(F, sets[: 2 * m], cycles, assign, d, embedded=image, budget=budget)
        except CycleEmbeddingFailed as exc:
            raise _StageFailure("cycles", error=str(exc), log=exc.details.get("log", [])[-3:])
        log.append({"stage": "cycles", "count": len(cycles)})
        log.append(_typical_pairs(F, cycles, out.candidate_sets, params, scale))
        image.update(out.image)
    return image


def _typical_pairs(F: Graph, cycles, cand_sets, params, scale: float) -> dict:
    """Regularity of consecutive candidate-set pairs actually used (diagnostic only).

    Stands in for excluding a bad vertex set up front: the pairs the cycle
    search relied on are checked after the fact and violations are logged.
    """
    checked, irregular = 0, []
    for ci, cyc in enumerate(cycles):
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            Sa, Sb = cand_sets.get(a), cand_sets.get(b)
            if not Sa or not Sb or set(Sa) & set(Sb):
                continue
            rep = regularity_check(F, Sa, Sb, params.eps2, scale, "randomized", trials=3,
                                   seed=subseed(params.n, "typical", ci, a))
            checked += 1
            if not rep.regular:
                irregular.append([int(a), int(b)])
    return {"stage": "typical-pairs", "checked": checked, "irregular": len(irregular), "pairs": irregular[:10]}


def _case_one(host, work, params, seed, log):
    p_tilde = params.p_tilde
    try:
        Gt = subsample_blocks(host.base, host.present_blocks, host.design, p_tilde, subseed(seed, "case-one"))
    except BlockTooLarge as exc:
        raise _StageFailure("subsample", error=str(exc))
    K = 2 * params.n_classes + 1
    attempts = []
    red_edges = work.restrict(Gt).count(RED)
    order = [RED, BLUE] if 2 * red_edges >= Gt.m else [BLUE, RED]
    for colour in order:
        w = work if colour == RED else flip(work)
        res = _colour_sets(Gt, w, range(host.n), K, params, subseed(seed, "case-one-sets"), params.eps1, p_tilde)
        attempts.append({"colour": colour, "stage": res.stage, **_jsonable(res.details)})
        if res.ok:
            log.append({"stage": "red-sets", "case": "I", "colour": colour, "details": _jsonable(res.details)})
            return colour, w, res.sets, Gt, p_tilde
    raise _StageFailure("red-sets", attempts=attempts)


def _case_two(host, work, U, params, seed, log):
    K = 2 * params.n_classes + 1
    qp = qpartition_or_cliques(host, work, U, params)
    log.append({"stage": "qpartition", "branch": qp.branch,
                "layers": [{"layer": lo.layer, "case": lo.case, "qualifying": lo.qualifying,
                            "short": lo.stopped_short, "certificates": len(lo.certificates)} for lo in qp.layers]})
    if qp.branch == "densifier":
        res = find_regular_red_sets_from_densifiers(host.layers, work, U, qp.densifiers, K, params,
                                                    seed=subseed(seed, "densifier-sets"))
        if not res.ok:
            raise _StageFailure("red-sets", branch="densifier", **res.details)
        layers_t = subsample_layers(host.layers, params.p_tilde_prime, subseed(seed, "case-two"))
        G0 = layers_t[0]
        for g in layers_t[1:]:
            G0 = G0.union(g)
        scale = params.p_tilde_dprime or params.p_tilde_prime
    elif qp.branch == "cliques":
        res = find_regular_red_sets_from_cliques(host.base, work, U, qp.certificates, K, params, host.design,
                                                 seed=subseed(seed, "clique-sets"))
        if not res.ok:
            raise _StageFailure("red-sets", branch="cliques", **res.details)
        try:
            G0 = subsample_blocks(host.base, host.present_blocks, host.design, params.p_tilde, subseed(seed, "case-two"))
        except BlockTooLarge as exc:
            raise _StageFailure("subsample", error=str(exc))
        scale = params.p_tilde
    else:
        raise _StageFailure("qpartition", branch="none")
    log.append({"stage": "red-sets", "case": "II", "branch": qp.branch, "details": _jsonable(res.details)})
    return res.sets, G0, scale


# ------------------------------------------------------------ orchestration

def ramsey_embed(host, colouring: TwoColoring, H: Graph, params=None, seed: int = 0) -> RamseyResult:
    """Monochromatic copy of H (max degree 3) in the coloured host.

    Each attempt: decompose H; probe Gamma and random vertex subsets for a
    colour lacking the tree part; Case II when such a subset is large, Case I
    otherwise; then the shared endgame. Every attempt's stages are logged and
    the final map is checked by the independent validator.
    """
    from ..validate import validate_embedding

    params = host.params if params is None else params
    if params.p_tilde is None:
        params = params.with_probabilities(host.z or None)
    if H.n > host.n:
        raise PatternTooLarge(f"pattern has {H.n} vertices, host {host.n}", pattern=H.n, host=host.n)
    if H.n == 0:
        return RamseyResult(True, RED, EmbeddingMap(H, {}, RED), None, "done", [{"stage": "empty"}], 0)
    dec = decompose_cubic(H, params.ell)
    J, cycles = sorted(dec.J), [list(c) for c in dec.cycles]
    base_log = [{"stage": "decompose", "J": len(J), "cycles": [len(c) for c in cycles]}]
    if J:
        try:
            sub, _ = H.induced_subgraph(J)
            td = tree_decomposition_small(sub)
            cont = build_tree_blowup_container(H, td, vertices=J)
            base_log.append({"stage": "container", "tree": len(cont.tree), "k": cont.k, "width": td.width})
        except (ContainerBoundsExceeded, SearchCapped) as exc:
            base_log.append({"stage": "container", "error": str(exc)})
    Jg = H.induced_subgraph(J)[0] if J else Graph(0)
    budget = params.search_budget
    adj = {RED: colouring.subgraph(RED).adjacency(), BLUE: colouring.subgraph(BLUE).adjacency()}
    n = host.n
    threshold = math.ceil(params.case_fraction * n)
    log = list(base_log)
    last = "start"
    for attempt in range(max(1, params.attempts)):
        aseed = subseed(seed, "attempt", attempt)
        alog = {"attempt": attempt, "stages": []}
        log.append(alog)
        stages = alog["stages"]
        # probe the whole vertex set, then random subsets at the case threshold
        found = None
        probes = [list(range(n))]
        rng = stream(aseed, "probe")
        for _ in range(params.probe_trials):
            probes.append(sorted(rng.choice(n, threshold, replace=False).tolist()))
        for U in probes:
            verdict = _probe(adj, Jg, U, budget)
            stages.append({"stage": "probe", "size": len(U), **verdict})
            lacking = [c for c in (BLUE, RED) if verdict[c] == "lacks"]
            if lacking and len(U) >= threshold:
                found = (lacking[0], U)
                break
        try:
            if found is not None:
                bad, U = found
                case = "II"
                work = colouring if bad == BLUE else flip(colouring)
                good = other(bad)
                sets, G0, scale = _case_two(host, work, U, params, aseed, stages)
            else:
                case = "I"
                good, work, sets, G0, scale = _case_one(host, colouring, params, aseed, stages)
            image = _endgame(host, work, sets, G0, scale, params, H, J, cycles, budget, stages)
        except _StageFailure as exc:
            stages.append({"stage": exc.stage, "failed": True, **_jsonable(exc.details)})
            last = exc.stage
            continue
        emb = EmbeddingMap(H, image, good)
        problems = validate_embedding(H, colouring.host, image, colouring=colouring, colour=good)
        if problems:
            stages.append({"stage": "validate", "failed": True, "problems": problems[:5]})
            last = "validate"
            continue
        stages.append({"stage": "validate", "ok": True})
        return RamseyResult(True, good, emb, case, "done", log, attempt + 1)
    return RamseyResult(False, None, None, None, last, log, max(1, params.attempts))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (int, float, str, bool)) or obj is None:
        return obj
    return str(obj)
