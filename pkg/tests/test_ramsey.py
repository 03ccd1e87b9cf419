import json

import networkx as nx
import numpy as np
import pytest

from oracles import coloured_edges, is_subgraph_copy
from sizeramsey.designs import affine_plane
from sizeramsey.embedding.ramsey import flip, qpartition_or_cliques, ramsey_embed
from sizeramsey.errors import PatternTooLarge
from sizeramsey.graph import BLUE, RED, Graph, TwoColoring
from sizeramsey.host import assemble_host, host_from_parts
from sizeramsey.params import ParameterSet
from sizeramsey.random_models import layers_from_skeletons, sample_block_model
from sizeramsey.validate import is_valid_embedding, validate_embedding

# desk scale at which end-to-end runs succeed on uniform colourings
END_TO_END = ParameterSet(n=501, delta=0.45, eta=0.25, max_layers=4, eps3=0.5, eps1=0.8, case_fraction=0.5)
QP = ParameterSet(n=49, C=7, C_prime=2, gamma=0.5, rho=0.5, q=3, s=2)


def petersen():
    return Graph(10, list(nx.petersen_graph().edges()))


@pytest.fixture(scope="module")
def qp_host():
    d = affine_plane(7)
    L = layers_from_skeletons(d, [d.parallel_classes[0]], [Graph.complete(7)])
    base, present = sample_block_model(d, 1.0, 0)
    h = host_from_parts(QP, d, base, present, L)
    g = h.gamma_graph
    vb = L.vertex_block(0)
    same = vb[g.edges[:, 0]] == vb[g.edges[:, 1]]
    return h, g, vb, same


def test_flip_swaps_colours():
    c = TwoColoring(Graph.complete(4), [True, False, True, False, True, False])
    assert flip(c).count(RED) == c.count(BLUE) and flip(flip(c)) == c


def test_no_blue_in_blocks_gives_certificates(qp_host):
    h, g, vb, same = qp_host
    res = qpartition_or_cliques(h, TwoColoring.uniform(g, RED), range(49), QP)
    assert res.branch == "cliques"
    lo = res.layers[0]
    assert lo.case == "cliques" and lo.qualifying == lo.stopped_short == 7
    blocks = [c.block for c in res.certificates]
    assert sorted(blocks) == sorted(h.layers.matchings[0])
    for cert in res.certificates:
        assert set(cert.B_prime) <= set(h.design.block(cert.block))


def test_blue_blocks_take_densifier_path(qp_host):
    h, g, vb, same = qp_host
    res = qpartition_or_cliques(h, TwoColoring(g, ~same), range(49), QP)
    assert res.branch == "densifier"
    assert res.layers[0].stopped_short == 0 and not res.certificates


def _greedy_cover(blue, pts, size):
    """Per-block reference: vertices covered by greedily removed blue cliques."""
    from itertools import combinations
    rest, covered = sorted(pts), 0
    while True:
        found = next((K for K in combinations(rest, size)
                      if all((min(a, b), max(a, b)) in blue for a, b in combinations(K, 2))), None)
        if found is None:
            return covered
        covered += size
        rest = [v for v in rest if v not in found]


@pytest.mark.parametrize("seed", range(6))
def test_planted_half_blocks_match_per_block_count(qp_host, seed):
    h, g, vb, same = qp_host
    rng = np.random.default_rng(seed)
    blue_blocks = rng.random(7) < 0.5
    c = TwoColoring(g, ~(same & blue_blocks[vb[g.edges[:, 0]]]))
    blue = coloured_edges(c, BLUE)
    short = sum(1 for b in h.layers.matchings[0]
                if _greedy_cover(blue, h.design.block(b), QP.C_prime) < QP.rho * QP.C)
    expected = "cliques" if 2 * short >= 7 else "densifier"
    assert qpartition_or_cliques(h, c, range(49), QP).branch == expected


def test_pattern_larger_than_host():
    h = assemble_host(ParameterSet(n=7, delta=0.4, eta=0.3, max_layers=0), 0)
    with pytest.raises(PatternTooLarge):
        ramsey_embed(h, TwoColoring.uniform(h.gamma_graph, RED), Graph.complete(8))


def test_empty_pattern():
    h = assemble_host(ParameterSet(n=7, delta=0.4, eta=0.3, max_layers=0), 0)
    res = ramsey_embed(h, TwoColoring.uniform(h.gamma_graph, RED), Graph(0))
    assert res.ok and res.embedding.image == {}


@pytest.fixture(scope="module")
def big_host():
    return assemble_host(END_TO_END, 7)


@pytest.mark.parametrize("colour", [RED, BLUE])
def test_uniform_colouring_petersen(big_host, colour):
    c = TwoColoring.uniform(big_host.gamma_graph, colour)
    res = ramsey_embed(big_host, c, petersen(), seed=1)
    assert res.ok and res.colour == colour and res.stage == "done"
    assert is_subgraph_copy(petersen(), coloured_edges(c, colour), res.embedding.image)
    stages = [s["stage"] for s in res.log[-1]["stages"]]
    assert stages[-1] == "validate" and "cycles" in stages
    json.dumps(res.as_dict())


def test_failure_report_names_stage():
    h = assemble_host(ParameterSet(n=63, delta=0.4, eta=0.3, attempts=1), 7)
    res = ramsey_embed(h, TwoColoring.uniform(h.gamma_graph, RED), petersen(), seed=1)
    assert not res.ok and res.embedding is None
    assert res.stage == res.log[-1]["stages"][-1]["stage"]
    assert res.log[-1]["stages"][-1]["failed"]


# ------------------------------------------------------------ validator

def test_validator_accepts_and_rejects():
    c5 = Graph.cycle(5)
    host = Graph.complete(6)
    col = TwoColoring.uniform(host, RED)
    good = {i: i for i in range(5)}
    assert is_valid_embedding(c5, host, good, col, RED)
    assert "map is not injective" in validate_embedding(c5, host, {i: 0 for i in range(5)})
    assert any("unmapped" in p for p in validate_embedding(c5, host, {0: 0}))
    assert any("outside the host" in p for p in validate_embedding(c5, host, {**good, 4: 9}))
    assert any("red edge" in p for p in validate_embedding(c5, host, good, col, BLUE))
    assert any("non-edge" in p for p in validate_embedding(c5, Graph.path(6), good))
    assert any("candidate" in p for p in validate_embedding(c5, host, good, candidates={0: [5]}))
    assert any("not on the host" in p for p in validate_embedding(c5, host, good, TwoColoring.uniform(Graph.complete(5), RED), RED))
