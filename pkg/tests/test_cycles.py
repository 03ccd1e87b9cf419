from itertools import product

import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sizeramsey.decomposition import decompose_cubic
from sizeramsey.embedding.cycles import CandidateAssignment, embed_cycle, embed_cycles_pipeline
from sizeramsey.errors import CycleEmbeddingFailed
from sizeramsey.graph import Graph
from sizeramsey.harness import random_cubic_graph


def petersen():
    return Graph(10, list(nx.petersen_graph().edges()))


def is_cycle_image(g, image, length, candidates=None):
    vals = [image[i] for i in range(length)]
    if len(set(vals)) != length:
        return False
    if candidates is not None and any(vals[i] not in candidates[i] for i in range(length)):
        return False
    return all(g.has_edge(vals[i], vals[(i + 1) % length]) for i in range(length))


def test_complete_host_disjoint_candidates():
    cands = [{0, 1}, {2, 3}, {4, 5}, {6, 7}, {8, 9}]
    emb = embed_cycle(Graph.complete(10), 5, cands)
    assert is_cycle_image(Graph.complete(10), emb.image, 5, cands)


def test_empty_candidate_set_fails():
    with pytest.raises(CycleEmbeddingFailed) as exc:
        embed_cycle(Graph.complete(10), 4, [{0}, {1}, set(), {3}])
    assert exc.value.details["exhausted"]


def test_bad_arguments():
    with pytest.raises(ValueError):
        embed_cycle(Graph.complete(5), 2, [{0}, {1}])
    with pytest.raises(ValueError):
        embed_cycle(Graph.complete(5), 3, [{0}, {1}])


def _brute_cycle(g, length, candidates, forbidden=()):
    for img in product(*[sorted(set(c) - set(forbidden)) for c in candidates]):
        if is_cycle_image(g, dict(enumerate(img)), length):
            return True
    return False


@st.composite
def cycle_instances(draw):
    length = draw(st.integers(3, 6))
    nv = draw(st.integers(length, 12))
    seed = draw(st.integers(0, 10_000))
    rng = np.random.default_rng(seed)
    p = draw(st.sampled_from([0.3, 0.5, 0.8]))
    g = Graph(nv, [(u, v) for u in range(nv) for v in range(u + 1, nv) if rng.random() < p])
    cands = [set(np.flatnonzero(rng.random(nv) < 0.4).tolist()) for _ in range(length)]
    return g, length, cands


@given(cycle_instances())
def test_embed_cycle_matches_enumeration(inst):
    g, length, cands = inst
    try:
        emb = embed_cycle(g, length, cands)
    except CycleEmbeddingFailed:
        assert not _brute_cycle(g, length, cands)
        return
    assert is_cycle_image(g, emb.image, length, cands)


def test_forbidden_vertices_avoided():
    g = Graph.complete(6)
    cands = [{0, 1}, {2}, {3, 4}]
    emb = embed_cycle(g, 3, cands, forbidden={0, 3})
    assert emb.image[0] == 1 and emb.image[2] == 4


def _planted_cycle_host(seed, length=8, size=10, p=0.5):
    rng = np.random.default_rng(seed)
    sets = [list(range(i * size, (i + 1) * size)) for i in range(length)]
    edges = []
    for i in range(length):
        a, b = sets[i], sets[(i + 1) % length]
        edges += [(u, v) for u in a for v in b if rng.random() < p]
    return Graph(length * size, edges), [set(s) for s in sets]


def test_planted_length_eight_success_rate():
    wins = 0
    for seed in range(100):
        g, sets = _planted_cycle_host(seed)
        try:
            emb = embed_cycle(g, 8, sets)
            assert is_cycle_image(g, emb.image, 8, sets)
            wins += 1
        except CycleEmbeddingFailed:
            pass
    assert wins >= 95


# ------------------------------------------------------------ assignments

def test_assignment_on_petersen_uses_ten_classes():
    h = petersen()
    dec = decompose_cubic(h, 5)
    a = CandidateAssignment.build(h, dec.cycles, earlier=dec.J)
    assert a.violations(h.restrict([v for c in dec.cycles for v in c])) == []
    # diameter two: every cycle vertex needs its own class
    if not dec.J:
        assert sorted(a.phi.values()) == list(range(1, 11))


@given(st.integers(0, 10_000), st.sampled_from([10, 16, 24, 40]))
def test_assignment_valid_on_random_cubic(seed, n):
    h = random_cubic_graph(n, seed)
    dec = decompose_cubic(h, 5)
    if not dec.cycles:
        return
    a = CandidateAssignment.build(h, dec.cycles, earlier=dec.J)
    inside = [v for c in dec.cycles for v in c]
    assert a.violations(h.restrict(inside)) == []
    assert set(a.phi) == set(inside)
    assert set(a.phi.values()) <= set(range(1, 11))
    seen = set(dec.J)
    for c in dec.cycles:
        for v in c:
            prior = [w for w in h.neighbours(v) if w in seen and w not in c]
            assert a.back.get(v) == (prior[0] if prior else None)
        seen |= set(c)


def test_violations_detects_clash_and_overused_anchor():
    f = Graph.path(3)
    a = CandidateAssignment({0: 1, 1: 2, 2: 1}, anchors={0: 9, 1: 9, 2: 9, 3: 9})
    problems = a.violations(f)
    assert any("share class" in p for p in problems)
    assert any("anchor 9" in p for p in problems)


# ------------------------------------------------------------ pipeline

def test_pipeline_single_cycle_complete_host():
    h = Graph.cycle(5)
    a = CandidateAssignment.build(h, [list(range(5))])
    sets = [list(range(4 * i, 4 * i + 4)) for i in range(20)]
    host = Graph.complete(80)
    out = embed_cycles_pipeline(host, sets, [list(range(5))], a, 1.0)
    assert is_cycle_image(host, out.image, 5)
    for v, x in out.image.items():
        b, _ = out.choices[v]
        assert x in sets[a.phi[v] - 1 + 10 * b]


def test_pipeline_anchor_with_empty_neighbourhood():
    h = Graph.cycle(5)
    a = CandidateAssignment.build(h, [list(range(5))], anchors={0: 99})
    sets = [list(range(4 * i, 4 * i + 4)) for i in range(20)]
    host = Graph(100, [(u, v) for u in range(80) for v in range(u + 1, 80)])
    with pytest.raises(CycleEmbeddingFailed) as exc:
        embed_cycles_pipeline(host, sets, [list(range(5))], a, 1.0)
    assert exc.value.details["vertex"] == 0 and exc.value.details["anchor"] == 99


def test_pipeline_needs_twenty_sets():
    a = CandidateAssignment.build(Graph.cycle(5), [list(range(5))])
    with pytest.raises(ValueError):
        embed_cycles_pipeline(Graph.complete(20), [[0]] * 5, [list(range(5))], a, 1.0)


def test_pipeline_planted_sets_with_anchors():
    """Outer Petersen cycle fixed beforehand; the inner cycle must follow the anchors."""
    h = petersen()
    outer = [0, 1, 2, 3, 4]
    inner = [5, 7, 9, 6, 8]
    assert all(h.has_edge(inner[i], inner[(i + 1) % 5]) for i in range(5))
    rng = np.random.default_rng(5)
    size = 12
    n = 20 * size + 5
    sets = [list(range(i * size, (i + 1) * size)) for i in range(20)]
    anchors_host = list(range(20 * size, n))
    edges = [(u, v) for u in range(20 * size) for v in range(u + 1, 20 * size) if rng.random() < 0.7]
    edges += [(a, v) for a in anchors_host for v in range(20 * size) if rng.random() < 0.7]
    host = Graph(n, edges)
    embedded = dict(zip(outer, anchors_host))
    a = CandidateAssignment.build(h, [inner], earlier=outer)
    assert all(a.back[v] in outer for v in inner)
    out = embed_cycles_pipeline(host, sets, [inner], a, 0.7, embedded=embedded)
    for v in inner:
        x = out.image[v]
        assert host.has_edge(x, embedded[a.back[v]])
        b, _ = out.choices[v]
        assert x in sets[a.phi[v] - 1 + 10 * b]
    for i in range(5):
        assert host.has_edge(out.image[inner[i]], out.image[inner[(i + 1) % 5]])
    assert len(set(out.image.values()) | set(embedded.values())) == 10
