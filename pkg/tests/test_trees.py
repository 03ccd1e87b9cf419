import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from networkx.algorithms import isomorphism

from oracles import nx_graph
from sizeramsey.embedding.expansion import expansion_check
from sizeramsey.embedding.trees import embed_tree_fp, red_qpartite_ok, tree_or_qpartite
from sizeramsey.errors import EmbeddingFailed, PatternTooLarge
from sizeramsey.graph import BLUE, RED, Graph, RootedTree, TwoColoring
from sizeramsey.validate import validate_embedding
from test_graph import graphs


@st.composite
def trees(draw, max_n=8):
    n = draw(st.integers(1, max_n))
    parent = {0: None}
    for v in range(1, n):
        parent[v] = draw(st.integers(0, v - 1))
    return RootedTree(parent, 0)


def tree_graph(t):
    return Graph(len(t), t.edges())


def petersen():
    return Graph(10, list(nx.petersen_graph().edges()))


def test_complete_host_path():
    t = RootedTree.from_graph(Graph.path(4))
    emb = embed_tree_fp(Graph.complete(10), t, d=2)
    assert validate_embedding(tree_graph(t), Graph.complete(10), emb.image) == []


def test_pattern_too_large():
    with pytest.raises(PatternTooLarge):
        embed_tree_fp(Graph.complete(3), RootedTree.from_graph(Graph.path(4)))


def test_degree_above_d_rejected():
    star = RootedTree({0: None, 1: 0, 2: 0, 3: 0}, 0)
    with pytest.raises(ValueError):
        embed_tree_fp(Graph.complete(6), star, d=2)


def test_petersen_path():
    t = RootedTree.from_graph(Graph.path(5))
    emb = embed_tree_fp(petersen(), t, d=2)
    assert validate_embedding(tree_graph(t), petersen(), emb.image) == []


def test_failure_reports_hypothesis():
    star = RootedTree({0: None, 1: 0, 2: 0, 3: 0}, 0)
    with pytest.raises(EmbeddingFailed) as exc:
        embed_tree_fp(Graph.cycle(8), star, check_hypothesis=True)
    assert exc.value.details["hypothesis_passed"] is False


def _contains(host, t):
    return isomorphism.GraphMatcher(nx_graph(host), nx_graph(tree_graph(t))).subgraph_is_monomorphic()


@given(graphs(10), trees(6))
def test_search_is_complete_on_small_instances(host, t):
    """The backtracking finds a copy exactly when one exists."""
    if len(t) > host.n:
        with pytest.raises(PatternTooLarge):
            embed_tree_fp(host, t)
        return
    try:
        emb = embed_tree_fp(host, t)
    except EmbeddingFailed:
        assert not _contains(host, t)
        return
    assert validate_embedding(tree_graph(t), host, emb.image) == []


@given(graphs(14), trees(8))
def test_expansion_hypothesis_implies_success(host, t):
    if len(t) > host.n or len(t) < 2:
        return
    d = t.max_degree()
    if expansion_check(host, 2 * len(t) - 2, d + 1, mode="exhaustive").passed:
        emb = embed_tree_fp(host, t, d=d)
        assert validate_embedding(tree_graph(t), host, emb.image) == []


def test_all_blue_meta_gives_blue_tree():
    meta = TwoColoring.uniform(Graph.complete(12), BLUE)
    res = tree_or_qpartite(meta, 3, 2, 2)
    assert res.kind == "blue-tree"
    assert validate_embedding(Graph.path(3), meta.subgraph(BLUE), res.embedding.image) == []


def test_all_red_meta_gives_parts():
    meta = TwoColoring.uniform(Graph.complete(12), RED)
    res = tree_or_qpartite(meta, 3, 1, 3)
    assert res.kind == "red-qpartite" and len(res.parts) == 3
    assert all(len(p) >= res.min_part for p in res.parts)
    assert red_qpartite_ok(meta, res.parts)


def test_red_complete_bipartite_meta():
    g = Graph.complete(12)
    side = np.arange(12) < 6
    red = side[g.edges[:, 0]] != side[g.edges[:, 1]]
    meta = TwoColoring(g, red)
    res = tree_or_qpartite(meta, 7, 1, 2)
    assert res.kind == "red-qpartite"
    assert sorted(map(sorted, res.parts)) == [list(range(6)), list(range(6, 12))]
    assert red_qpartite_ok(meta, res.parts)
    assert not res.size_hypothesis


@given(st.integers(0, 10_000))
def test_dichotomy_outputs_are_valid(seed):
    rng = np.random.default_rng(seed)
    g = Graph.complete(12)
    meta = TwoColoring(g, rng.random(g.m) < 0.8)
    res = tree_or_qpartite(meta, 4, 1, 2)
    if res.kind == "blue-tree":
        assert validate_embedding(Graph.path(4), meta.subgraph(BLUE), res.embedding.image) == []
    elif res.kind == "red-qpartite":
        assert red_qpartite_ok(meta, res.parts)
        flat = [v for p in res.parts for v in p]
        assert len(flat) == len(set(flat))
        assert all(len(p) >= res.min_part for p in res.parts)
