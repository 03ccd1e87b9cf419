from itertools import permutations

import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sizeramsey.decomposition import (Decomposition, build_tree_blowup_container, check_tree_decomposition,
                                      container_violations, decompose_cubic, tree_decomposition_small,
                                      validate_decomposition)
from sizeramsey.errors import DegreeExceeded
from sizeramsey.graph import Graph
from sizeramsey.harness import random_cubic_graph
from test_graph import graphs


def petersen():
    return Graph(10, list(nx.petersen_graph().edges()))


def grid(r, c):
    return Graph(r * c, [(i * c + j, i * c + j + 1) for i in range(r) for j in range(c - 1)]
                 + [(i * c + j, (i + 1) * c + j) for i in range(r - 1) for j in range(c)])


def brute_treewidth(g):
    """Minimum over all elimination orders of the largest eliminated neighbourhood (n <= 7)."""
    best = g.n - 1 if g.n else 0
    for order in permutations(range(g.n)):
        adj = {v: set(g.neighbours(v)) for v in range(g.n)}
        w = 0
        for v in order:
            nb = adj.pop(v)
            w = max(w, len(nb))
            for a in nb:
                adj[a] |= nb - {a}
                adj[a].discard(v)
        best = min(best, w)
    return best


# ---------------------------------------------------------------- decompose_cubic

def test_c12_is_one_cycle():
    d = decompose_cubic(Graph.cycle(12), 5)
    assert d.J == [] and len(d.cycles) == 1 and sorted(d.cycles[0]) == list(range(12))


def test_k4_stays_in_j():
    d = decompose_cubic(Graph.complete(4), 5)
    assert sorted(d.J) == [0, 1, 2, 3] and d.cycles == []


def test_petersen_two_c5():
    h = petersen()
    d = decompose_cubic(h, 5)
    assert d.J == [] and [len(c) for c in d.cycles] == [5, 5]
    assert validate_decomposition(h, d).valid


def test_degree_precondition():
    with pytest.raises(DegreeExceeded):
        decompose_cubic(Graph(5, [(0, i) for i in range(1, 5)]), 5)


def test_swapped_vertices_flagged():
    h = petersen()
    d = decompose_cubic(h, 5)
    a, b = d.cycles[0], d.cycles[1]
    bad = Decomposition(h, [], [[b[0]] + a[1:], [a[0]] + b[1:]], 5)
    rep = validate_decomposition(h, bad)
    assert not rep.valid and rep.cycle_violations


def test_missing_vertex_flagged():
    h = Graph.cycle(6)
    rep = validate_decomposition(h, Decomposition(h, [0], [], 5))
    assert not rep.partition_ok and not rep.valid


def test_long_cycle_left_in_j_flagged():
    h = Graph.cycle(7)
    rep = validate_decomposition(h, Decomposition(h, list(range(7)), [], 5))
    assert rep.J_long_cycle is not None and not rep.valid


def test_treewidth_formula():
    rep = validate_decomposition(petersen(), decompose_cubic(petersen(), 5))
    assert rep.treewidth_bound == (5 - 1) * (3 - 1) + 2 <= 2 * 5


@given(st.integers(4, 40).map(lambda k: 2 * k), st.integers(0, 10 ** 6), st.integers(5, 7))
def test_random_cubic_decompositions_validate(n, seed, ell):
    h = random_cubic_graph(n, seed)
    d = decompose_cubic(h, ell)
    rep = validate_decomposition(h, d)
    assert rep.valid, rep.as_dict()
    assert len(d.cycles) <= n // ell
    assert sum(len(p) for p in d.order) == n


def test_json_round_trip():
    h = petersen()
    d = decompose_cubic(h, 5)
    back = Decomposition.from_json(d.to_json(), h)
    assert back.J == d.J and back.cycles == d.cycles


# ---------------------------------------------------------------- tree decompositions

def test_tree_width_one():
    td = tree_decomposition_small(Graph.path(6))
    assert td.width == 1 and not check_tree_decomposition(Graph.path(6), td)


def test_k4_width_three():
    assert tree_decomposition_small(Graph.complete(4)).width == 3


def test_grid_width_three():
    g = grid(3, 3)
    td = tree_decomposition_small(g)
    assert td.width == 3 and td.exact and not check_tree_decomposition(g, td)


def test_width_cap_reported():
    td = tree_decomposition_small(Graph.complete(5), width_cap=2)
    assert not td.within_cap and td.width == 4


@given(graphs(max_n=7))
def test_exact_width_matches_brute_force(g):
    td = tree_decomposition_small(g)
    assert not check_tree_decomposition(g, td)
    assert td.width == brute_treewidth(g)


def test_checker_rejects_broken_decomposition():
    g = Graph.path(3)
    td = tree_decomposition_small(g)
    td.bags = [frozenset({0, 1})]
    td.tree_edges = []
    assert check_tree_decomposition(g, td)


# ---------------------------------------------------------------- containers

def test_single_vertex_container():
    c = build_tree_blowup_container(Graph(1))
    assert len(c.tree) == 1 and c.k == 1


def test_path_container():
    g = Graph.path(7)
    c = build_tree_blowup_container(g)
    assert not container_violations(g, c)


def test_k4_container_bound():
    g = Graph.complete(4)
    c = build_tree_blowup_container(g, tree_decomposition_small(g), d_max=3)
    assert c.k <= 18 * 3 * 3 and not container_violations(g, c)


@given(st.integers(4, 30).map(lambda k: 2 * k), st.integers(0, 10 ** 6))
def test_containers_for_j_parts(n, seed):
    h = random_cubic_graph(n, seed)
    d = decompose_cubic(h, 5)
    if not d.J:
        return
    c = build_tree_blowup_container(h, vertices=d.J)
    assert not container_violations(h, c, d.J)
    assert c.k <= 18 * max(c.width, 1) * c.d_max
