"""Monochromatic blow-ups of trees in a layer: chopping, lifting and the two-branch pipeline."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..errors import EmbeddingFailed, PatternTooLarge, WitnessIncomplete
from ..graph import BLUE, RED, EmbeddingMap, Graph, RootedTree, TwoColoring, other
from ..ops import auxiliary_coloring, find_monochromatic_clique, truncate_tree
from .pattern import embed_pattern
from .trees import embed_tree_fp, tree_or_qpartite


def tree_blowup_pattern(t: RootedTree, k: int) -> tuple[Graph, list]:
    """T x K_k as a Graph; vertex i stands for labels[i] = (tree vertex, slot)."""
    order = t.bfs_order()
    labels = [(x, j) for x in order for j in range(k)]
    pos = {lab: i for i, lab in enumerate(labels)}
    edges = []
    for x in order:
        for a in range(k):
            for b in range(a + 1, k):
                edges.append((pos[(x, a)], pos[(x, b)]))
    for p, x in t.edges():
        for a in range(k):
            for b in range(k):
                edges.append((pos[(p, a)], pos[(x, b)]))
    return Graph(len(labels), edges), labels


def _is_colour_clique(c: TwoColoring, verts, colour) -> bool:
    verts = list(verts)
    for i, u in enumerate(verts):
        for v in verts[i + 1:]:
            if not c.host.has_edge(u, v) or c.colour(u, v) != colour:
                return False
    return True


def check_colour_embedding(c: TwoColoring, pattern: Graph, image: dict, colour: str) -> list:
    problems = []
    if len(set(image.values())) != len(image):
        problems.append("not injective")
    for u, v in pattern.edge_list():
        a, b = image.get(u), image.get(v)
        if a is None or b is None:
            problems.append(f"edge {u}-{v} not mapped")
        elif not c.host.has_edge(a, b):
            problems.append(f"edge {u}-{v} -> {a}-{b} missing")
        elif c.colour(a, b) != colour:
            problems.append(f"edge {u}-{v} -> {a}-{b} not {colour}")
    return problems


# ------------------------------------------------------------ chopping

def lift_blue_tree(c: TwoColoring, parts, s: int, t_prime_embedding: dict, tree: RootedTree, k: int,
                   witnesses: dict, colour: str = BLUE, branch: int = 4) -> EmbeddingMap:
    """Blue T x K_k from a blue embedding of the truncation T' into the part colouring.

    Kept vertices of T (root and odd depth) sit in the part their T' image
    names; each removed vertex sits in its parent's part. Slots are chosen
    vertex by vertex, first from the sides of the recorded bicliques, so that
    every cross-part pair is blue; ``witnesses`` maps part pairs (i, j), i < j,
    to (X in part i, Y in part j).
    """
    parts = [sorted(p) for p in parts]
    for i, p in enumerate(parts):
        if len(p) < k:
            raise ValueError(f"part {i} smaller than k")
        if not _is_colour_clique(c, p, colour):
            raise ValueError(f"part {i} is not a {colour} clique")
    tp = truncate_tree(tree)
    missing = [v for v in tp.parent if v not in t_prime_embedding]
    if missing:
        raise WitnessIncomplete("truncated tree not fully embedded", missing=missing)
    for x, y in tp.edges():
        a, b = t_prime_embedding[x], t_prime_embedding[y]
        if a == b or (min(a, b), max(a, b)) not in witnesses:
            raise WitnessIncomplete(f"no biclique witness for parts {a}, {b}", pair=(a, b))
    place = {}
    for v, p in tree.parent.items():
        place[v] = t_prime_embedding[v] if v in tp.parent else t_prime_embedding[p]
    side = {}
    for (i, j), (X, Y) in witnesses.items():
        side[(i, j)] = set(X)
        side[(j, i)] = set(Y)
    tnb = {v: set() for v in tree.parent}
    for u, v in tree.edges():
        tnb[u].add(v)
        tnb[v].add(u)
    order = tree.bfs_order()
    slots, used = {}, set()

    def pool(x):
        px = place[x]
        cand = [v for v in parts[px] if v not in used]
        for y in tnb[x]:
            if y in slots and place[y] != px:
                cand = [v for v in cand if all(c.host.has_edge(v, w) and c.colour(v, w) == colour for w in slots[y])]
        score = {v: sum(1 for y in tnb[x] if place[y] != px and v in side.get((px, place[y]), ())) for v in cand}
        return sorted(cand, key=lambda v: (-score[v], v))

    def rec(idx):
        if idx == len(order):
            return True
        x = order[idx]
        cand = pool(x)
        if len(cand) < k:
            return False
        tried = 0
        for start in range(len(cand) - k + 1):
            choice = cand[start:start + k]
            slots[x] = choice
            used.update(choice)
            if rec(idx + 1):
                return True
            used.difference_update(choice)
            del slots[x]
            tried += 1
            if tried >= branch:
                break
        return False

    if not rec(0):
        raise EmbeddingFailed("no slot assignment realises the blow-up", stage="chopping")
    pattern, labels = tree_blowup_pattern(tree, k)
    image = {i: slots[x][j] for i, (x, j) in enumerate(labels)}
    problems = check_colour_embedding(c, pattern, image, colour)
    if problems:
        raise EmbeddingFailed("lifted copy failed validation", problems=problems[:5])
    return EmbeddingMap(pattern, image, colour)


# ------------------------------------------------------------ lifting

@dataclass
class LiftResult:
    embedding: EmbeddingMap | None
    hypothesis_ok: bool
    deficient: list = field(default_factory=list)   # f-edges below the density bar
    nodes: int = 0
    exhausted: bool = False


def dense_pairs_lift(f: Graph, f_prime: Graph, t: int, delta_max: int | None = None, classes=None,
                     budget: int = 200_000) -> LiftResult:
    """One representative per class realising every edge of f inside f_prime.

    ``classes[v]`` lists the vertices of f_prime standing for f-vertex v
    (default v t .. v t + t - 1). The density bar (1 - 1/(8 Delta)) t^2 per
    f-edge is the condition under which a choice always exists; it is reported
    and the search runs either way.
    """
    if classes is None:
        classes = [list(range(v * t, v * t + t)) for v in range(f.n)]
    classes = [list(cl) for cl in classes]
    dm = f.max_degree() if delta_max is None else delta_max
    bar = (1 - 1 / (8 * max(dm, 1))) * t * t
    adj = f_prime.adjacency()
    deficient = []
    for u, v in f.edge_list():
        cnt = sum(1 for a in classes[u] for b in classes[v] if b in adj[a])
        if cnt < bar - 1e-9:
            deficient.append((u, v, cnt))
    res = embed_pattern(adj, f, candidates={v: classes[v] for v in range(f.n)}, budget=budget)
    emb = EmbeddingMap(f, dict(res.image)) if res.image is not None else None
    return LiftResult(emb, not deficient, deficient, res.nodes, res.exhausted)


# ------------------------------------------------------------ the two-branch pipeline

@dataclass
class BlowupResult:
    colour: str | None
    embedding: EmbeddingMap | None
    stage: str
    log: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.embedding is not None


def _max_bipartite_matching(adj, left, right):
    """Augmenting paths; returns dict left vertex -> right vertex."""
    right = set(right)
    match_r = {}

    def augment(u, seen):
        for w in sorted(adj[u]):
            if w in right and w not in seen:
                seen.add(w)
                if w not in match_r or augment(match_r[w], seen):
                    match_r[w] = u
                    return True
        return False

    for u in sorted(left):
        augment(u, set())
    return {u: w for w, u in match_r.items()}


def layer_host(layers, i: int) -> Graph:
    """A'_i together with the cliques of the blocks in M_i."""
    return layers.A_prime(i).union(layers.block_clique_graph(i))


def monochromatic_tree_blowup(layers, i: int, colouring: TwoColoring, tree: RootedTree, k: int, S=None,
                              t: int = 2, s: int = 2, q: int | None = None, budget: int = 200_000) -> BlowupResult:
    """Monochromatic T x K_k inside L[S] for L = A'_i plus the M_i block cliques.

    Steps: a monochromatic K_t per block inside S; the majority colour class W;
    the biclique colouring of K_|W|; then either the majority-colour truncated
    tree (lifted through the bicliques) or 2k + 1 parts with the other colour
    between them, matchings from V_0 into each other part, a skeleton tree on
    the surviving V_0 vertices, and a lift through the dense pairs.
    """
    log = []
    L = layer_host(layers, i)
    c = colouring.restrict(L) if colouring.host is not L else colouring
    n = layers.n
    S = set(range(n)) if S is None else set(int(v) for v in S)
    pattern, labels = tree_blowup_pattern(tree, k)
    if pattern.n > len(S):
        raise PatternTooLarge("blow-up larger than S", pattern=pattern.n, S=len(S))
    skel = layers.skeletons[i]
    B, col = {}, {}
    for v in range(skel.n):
        pts = [x for x in layers.block_points(i, v) if x in S]
        if len(pts) < t:
            continue
        for colour in (RED, BLUE):
            K = find_monochromatic_clique(c, pts, colour, t)
            if K is not None:
                B[v], col[v] = sorted(K), colour
                break
    if not B:
        log.append({"stage": "cliques", "blocks": 0})
        return BlowupResult(None, None, "cliques", log)
    reds = sum(1 for v in B if col[v] == RED)
    major = RED if reds * 2 >= len(B) else BLUE
    minor = other(major)
    W = sorted(v for v in B if col[v] == major)
    log.append({"stage": "cliques", "blocks": len(B), "majority": major, "W": len(W)})
    witnesses = {}
    aux = auxiliary_coloring(c, [B[v] for v in W], s, colour=major, witnesses=witnesses)
    # the dichotomy is phrased with blue as the biclique colour
    aux_blue = aux if major == BLUE else TwoColoring(aux.host, ~aux.red_mask)
    tp = truncate_tree(tree)
    d = max(tree.max_degree(), 1)
    qq = 2 * k + 1 if q is None else q
    dich = tree_or_qpartite(aux_blue, len(tp), d * d, qq, tree=tp, budget=budget)
    log.append({"stage": "dichotomy", "kind": dich.kind, "size_hypothesis": dich.size_hypothesis,
                "min_part": dich.min_part})
    if dich.kind == "blue-tree":
        try:
            emb = lift_blue_tree(c, [B[v] for v in W], s, dich.embedding.image, tree, k, witnesses, colour=major)
            log.append({"stage": "chopping", "ok": True})
            return BlowupResult(major, emb, "chopping", log)
        except (EmbeddingFailed, WitnessIncomplete, ValueError) as exc:
            log.append({"stage": "chopping", "ok": False, "error": str(exc)})
    if dich.kind != "red-qpartite":
        return BlowupResult(None, None, "chopping" if dich.kind == "blue-tree" else "dichotomy", log)
    parts = [[W[j] for j in p] for p in dich.parts]
    sk_adj = skel.adjacency()
    S_cur = list(parts[0])
    partner = {}
    for j in range(1, len(parts)):
        mt = _max_bipartite_matching(sk_adj, S_cur, parts[j])
        log.append({"stage": "matching", "j": j, "size": len(mt), "of": len(S_cur)})
        S_cur = sorted(mt)
        for v in S_cur:
            partner.setdefault(v, {})[j] = mt[v]
        partner = {v: partner[v] for v in S_cur}
    if len(S_cur) < len(tree):
        log.append({"stage": "matching", "ok": False, "survivors": len(S_cur)})
        return BlowupResult(None, None, "matching", log)
    try:
        temb = embed_tree_fp(skel, tree, vertices=S_cur, budget=budget)
    except (EmbeddingFailed, PatternTooLarge) as exc:
        log.append({"stage": "skeleton-tree", "ok": False, "error": str(exc)})
        return BlowupResult(None, None, "skeleton-tree", log)
    depth = tree.depths()
    classes = []
    for x, j in labels:
        v = temb.image[x]
        idx = j + 1 if depth[x] % 2 == 0 else k + j + 1
        classes.append(B[partner[v][idx]])
    minor_graph = c.subgraph(minor)
    lift = dense_pairs_lift(pattern, minor_graph, t, pattern.max_degree(), classes=classes, budget=budget)
    log.append({"stage": "lifting", "hypothesis_ok": lift.hypothesis_ok, "deficient": len(lift.deficient),
                "found": lift.embedding is not None})
    if lift.embedding is None:
        return BlowupResult(None, None, "lifting", log)
    emb = EmbeddingMap(pattern, lift.embedding.image, minor)
    problems = check_colour_embedding(c, pattern, emb.image, minor)
    if problems:
        log.append({"stage": "validate", "problems": problems[:5]})
        return BlowupResult(None, None, "validate", log)
    return BlowupResult(minor, emb, "lifting", log)
