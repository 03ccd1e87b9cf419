import math
from fractions import Fraction
from itertools import combinations

import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import coloured_edges, edge_set, has_biclique, has_clique, induced_cycles_at_least, nx_graph
from sizeramsey.errors import GraphError, SearchCapped
from sizeramsey.graph import BLUE, RED, Graph, RootedTree, TwoColoring
from sizeramsey.ops import (auxiliary_coloring, blow_up, find_induced_cycle, find_monochromatic_biclique,
                            find_monochromatic_clique, graph_power, kst_bound, truncate_tree, turan_bound)
from test_graph import graphs


def petersen():
    return Graph(10, list(nx.petersen_graph().edges()))


def _is_induced_cycle(g, cyc):
    k = len(cyc)
    sub = g.restrict(cyc)
    return len(set(cyc)) == k and sub.m == k and all(g.has_edge(cyc[i], cyc[(i + 1) % k]) for i in range(k))


# ---------------------------------------------------------------- induced cycles

def test_cycle_is_its_own_induced_cycle():
    assert sorted(find_induced_cycle(Graph.cycle(6), 5)) == list(range(6))


def test_k4_has_no_long_induced_cycle():
    assert find_induced_cycle(Graph.complete(4), 5) is None


def test_petersen_has_induced_c5():
    cyc = find_induced_cycle(petersen(), 5)
    assert len(cyc) == 5 and _is_induced_cycle(petersen(), cyc)


def test_min_len_precondition():
    with pytest.raises(ValueError):
        find_induced_cycle(Graph.cycle(4), 2)


@given(graphs(max_n=10), st.integers(3, 6))
def test_induced_cycle_agrees_with_enumeration(g, min_len):
    got = find_induced_cycle(g, min_len)
    every = induced_cycles_at_least(g, min_len)
    assert (got is None) == (not every)
    if got is not None:
        assert len(got) >= min_len and _is_induced_cycle(g, got)
        assert len(got) == min(len(c) for c in every)


def test_heuristic_path_above_cap_still_valid():
    g = Graph.cycle(30)
    cyc = find_induced_cycle(g, 5, cap=10)
    assert sorted(cyc) == list(range(30))


# ---------------------------------------------------------------- powers

def test_power_identity():
    g = Graph.path(5)
    assert graph_power(g, 1) == g


def test_c5_cubed_is_k5():
    assert graph_power(Graph.cycle(5), 3) == Graph.complete(5)


def test_p4_squared():
    # distances in P4 computed by BFS: only the endpoints are 3 apart
    expected = Graph(4, [(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)])
    assert graph_power(Graph.path(4), 2) == expected


@given(graphs(max_n=10), st.integers(1, 4))
def test_power_matches_bfs_and_is_monotone(g, k):
    dist = dict(nx.all_pairs_shortest_path_length(nx_graph(g)))
    expected = {(u, v) for u in range(g.n) for v in range(u + 1, g.n) if 1 <= dist[u].get(v, math.inf) <= k}
    assert edge_set(graph_power(g, k)) == expected
    assert graph_power(g, k).is_subgraph_of(graph_power(g, k + 1))


# ---------------------------------------------------------------- blow-ups

def test_edge_blowup_is_k33():
    b, classes = blow_up(Graph(2, [(0, 1)]), 3)
    assert b.n == 6 and b.m == 9
    assert nx.is_isomorphic(nx_graph(b), nx.complete_bipartite_graph(3, 3))
    assert classes == [[0, 1, 2], [3, 4, 5]]


def test_k1_clique_blowup_is_k4():
    assert blow_up(Graph(1), 4, "clique")[0] == Graph.complete(4)


def test_p3_strong_product():
    # strong product P3 x K2 enumerated directly: 2*(1+1) intra + 2 edges * 4 cross = 3 + 8
    b, _ = blow_up(Graph.path(3), 2, "clique")
    assert (b.n, b.m) == (6, 11)


@given(graphs(max_n=7), st.integers(1, 3))
def test_blowup_properties(g, t):
    ind, classes = blow_up(g, t)
    cl, _ = blow_up(g, t, "clique")
    assert ind.is_subgraph_of(cl) and ind.n == cl.n == g.n * t
    assert sorted(x for c in classes for x in c) == list(range(g.n * t))
    cls_of = {x: v for v, c in enumerate(classes) for x in c}
    for a, b in ind.edges.tolist():
        assert g.has_edge(cls_of[a], cls_of[b])
    assert ind.m == g.m * t * t
    assert cl.m == g.m * t * t + g.n * t * (t - 1) // 2
    if t == 1:
        assert ind == g


# ---------------------------------------------------------------- bicliques and cliques

def test_blue_k33_found():
    g = Graph(6, [(a, b) for a in range(3) for b in range(3, 6)])
    c = TwoColoring.uniform(g, BLUE)
    assert find_monochromatic_biclique(c, [0, 1, 2], [3, 4, 5], BLUE, 3) == ([0, 1, 2], [3, 4, 5])


def test_all_red_has_no_blue_edge():
    g = Graph(6, [(a, b) for a in range(3) for b in range(3, 6)])
    assert find_monochromatic_biclique(TwoColoring.uniform(g, RED), [0, 1, 2], [3, 4, 5], BLUE, 1) is None


def test_biclique_preconditions():
    c = TwoColoring.uniform(Graph.complete(4), RED)
    with pytest.raises(GraphError):
        find_monochromatic_biclique(c, [0, 1], [1, 2], RED, 1)
    with pytest.raises(SearchCapped):
        find_monochromatic_biclique(c, [0, 1], [2, 3], RED, 1, cap=1)


@given(st.randoms(use_true_random=False), st.integers(1, 3))
def test_biclique_matches_exhaustive_scan(rnd, s):
    A, B = list(range(6)), list(range(6, 12))
    edges = [(a, b) for a in A for b in B if rnd.random() < 0.8]
    g = Graph(12, edges)
    c = TwoColoring(g, [rnd.random() < 0.5 for _ in range(g.m)])
    blue = coloured_edges(c, BLUE)
    got = find_monochromatic_biclique(c, A, B, BLUE, s)
    assert (got is not None) == has_biclique(blue, A, B, s)
    if got is not None:
        X, Y = got
        assert len(X) == len(Y) == s and set(X) <= set(A) and set(Y) <= set(B)
        assert all((min(x, y), max(x, y)) in blue for x in X for y in Y)
    else:
        # no blue K_{s,s}: the extremal bound must hold
        blue_between = sum(1 for a in A for b in B if (a, b) in blue)
        assert blue_between <= kst_bound(s, len(A) + len(B))


def test_red_k6_triangle():
    assert len(find_monochromatic_clique(TwoColoring.uniform(Graph.complete(6), RED), range(6), RED, 3)) == 3


def test_pentagon_pentagram_has_no_triangle():
    g = Graph.complete(5)
    red = [abs(u - v) in (1, 4) for u, v in g.edges.tolist()]
    c = TwoColoring(g, red)
    assert find_monochromatic_clique(c, range(5), RED, 3) is None
    assert find_monochromatic_clique(c, range(5), BLUE, 3) is None


@given(st.randoms(use_true_random=False))
def test_k6_always_has_monochromatic_triangle(rnd):
    g = Graph.complete(6)
    c = TwoColoring(g, [rnd.random() < 0.5 for _ in range(g.m)])
    assert any(find_monochromatic_clique(c, range(6), col, 3) for col in (RED, BLUE))


@given(st.randoms(use_true_random=False), st.integers(2, 4))
def test_clique_matches_exhaustive(rnd, k):
    g = Graph.complete(8)
    c = TwoColoring(g, [rnd.random() < 0.6 for _ in range(g.m)])
    got = find_monochromatic_clique(c, range(8), RED, k)
    red = coloured_edges(c, RED)
    assert (got is not None) == has_clique(red, range(8), k)
    if got:
        assert all((a, b) in red for a, b in combinations(got, 2))


def test_clique_needs_host_clique():
    with pytest.raises(GraphError):
        find_monochromatic_clique(TwoColoring.uniform(Graph.path(3), RED), range(3), RED, 2)


# ---------------------------------------------------------------- bounds

def test_turan_values():
    assert turan_bound(3, 6).max_edges == 12
    assert turan_bound(1, 9).max_edges == 0
    assert turan_bound(2, 4).max_edges == 4
    assert turan_bound(2, 5).red_lower_bound == Fraction(10, 3)


def test_kst_values():
    assert kst_bound(2, 4) == pytest.approx(9)
    assert kst_bound(1, 5) == 0
    assert kst_bound(2, 100) == pytest.approx(1001)


# ---------------------------------------------------------------- trees

def test_truncate_path():
    t = RootedTree.from_graph(Graph.path(5), root=0)
    tt = truncate_tree(t)
    assert dict(tt.parent) == {0: None, 1: 0, 3: 1}


def test_truncate_star_unchanged():
    star = RootedTree.from_graph(Graph(4, [(0, 1), (0, 2), (0, 3)]), root=0)
    assert truncate_tree(star) == star


def test_truncate_binary_tree_degree():
    g = Graph(31, [(v, (v - 1) // 2) for v in range(1, 31)])
    tt = truncate_tree(RootedTree.from_graph(g, 0))
    assert tt.max_degree() <= 9


@st.composite
def rooted_trees(draw, max_n=14):
    n = draw(st.integers(1, max_n))
    parent = {0: None}
    for v in range(1, n):
        parent[v] = draw(st.integers(0, v - 1))
    return RootedTree(parent, 0)


@given(rooted_trees())
def test_truncation_properties(t):
    tt = truncate_tree(t)
    depth = t.depths()
    assert set(tt.parent) == {v for v, d in depth.items() if d == 0 or d % 2 == 1}
    in_depth, out_depth = max(depth.values()), max(tt.depths().values())
    assert out_depth <= math.ceil(in_depth / 2) + 1
    assert tt.max_degree() <= max(t.max_degree(), 1) ** 2


# ---------------------------------------------------------------- auxiliary colouring

def test_auxiliary_all_blue_and_all_red():
    g = Graph.complete(9)
    parts = [[0, 1, 2], [3, 4, 5], [6, 7, 8]]
    assert auxiliary_coloring(TwoColoring.uniform(g, BLUE), parts, 1).count(BLUE) == 3
    assert auxiliary_coloring(TwoColoring.uniform(g, RED), parts, 2).count(RED) == 3


def test_auxiliary_planted_biclique():
    g = Graph.complete(9)
    parts = [[0, 1, 2], [3, 4, 5], [6, 7, 8]]
    blue = {(0, 3), (0, 4), (1, 3), (1, 4)}
    c = TwoColoring(g, [(u, v) not in blue for u, v in g.edges.tolist()])
    wit = {}
    aux = auxiliary_coloring(c, parts, 2, witnesses=wit)
    assert [tuple(e) for e, r in zip(aux.host.edges.tolist(), aux.red_mask) if not r] == [(0, 1)]
    assert wit == {(0, 1): ([0, 1], [3, 4])}


def test_auxiliary_rejects_overlap():
    with pytest.raises(GraphError):
        auxiliary_coloring(TwoColoring.uniform(Graph.complete(4), RED), [[0, 1], [1, 2]], 1)
