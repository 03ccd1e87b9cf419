"""Acceptance criteria 1-11, one test each (criterion 10 in two parts).

Every test prints a single line: criterion number, PASS or FAIL, wall time
and a short measurement summary. Run with ``pytest tests/test_acceptance.py``.
"""
import math
import time

import networkx as nx
import numpy as np
import pytest

from oracles import bipartite_instance, brute_regularity, density_envelope
from sizeramsey.decomposition import decompose_cubic, validate_decomposition
from sizeramsey.designs import affine_plane, is_prime, steiner_triple, validate_design
from sizeramsey.embedding.expansion import expansion_check
from sizeramsey.embedding.trees import embed_tree_fp
from sizeramsey.graph import Graph, RootedTree
from sizeramsey.harness import (STRATEGIES, ExperimentConfig, block_law_test, block_marginal_test, colour_host,
                                layer_union_test, random_cubic_graph, run_experiment)
from sizeramsey.host import assemble_host
from sizeramsey.matchings import check_matchings, edge_multiplicity_report, partition_blocks_into_matchings
from sizeramsey.params import ParameterSet
from sizeramsey.random_models import (build_layers, conditional_outcomes, couple_layers_into_gnp, sample_block_model,
                                      sample_gnp, subsample_blocks, subsample_layers)
from sizeramsey.regularity import regularity_check, subset_inheritance_check, witness_violates
from sizeramsey.rng import stream
from sizeramsey.validate import validate_embedding

END_TO_END = ParameterSet(n=501, delta=0.45, eta=0.25, max_layers=4, eps3=0.5, eps1=0.8, case_fraction=0.5)
BUDGET = ParameterSet(n=1999, C=3, delta=0.15, eta=0.2, resample_budget=0)


@pytest.fixture
def criterion(request, capsys):
    """Collects a summary and prints the criterion's verdict line after the test body."""
    info = {"label": request.node.name.split("_")[2], "detail": ""}
    start = time.perf_counter()
    yield info
    elapsed = time.perf_counter() - start
    rep = getattr(request.node, "call_report", None)
    verdict = "PASS" if rep is not None and rep.passed else "FAIL"
    with capsys.disabled():
        print(f"\ncriterion {info['label']:>3} {verdict} {elapsed:7.1f}s  {info['detail']}")


def _within(limit, start):
    took = time.perf_counter() - start
    assert took < limit, f"took {took:.1f}s, limit {limit}s"


def test_criterion_1_designs(criterion):
    start = time.perf_counter()
    sts = [n for n in range(3, 1001) if n % 6 in (1, 3)]
    bad = [n for n in sts if not validate_design(steiner_triple(n)).valid]
    primes = [q for q in range(2, 32) if is_prime(q)]
    bad += [f"AG{q}" for q in primes if not validate_design(affine_plane(q)).valid]
    criterion["detail"] = f"{len(sts)} triple systems, {len(primes)} affine planes, {len(bad)} invalid"
    assert not bad
    _within(10, start)


def test_criterion_2_block_marginal(criterion):
    start = time.perf_counter()
    rep = block_marginal_test(3, 0.271, 100_000, 2)
    criterion["detail"] = f"marginal {rep['marginal']:.5f} target {rep['target']:.5f} z {rep['z']:+.2f}"
    assert rep["p_tilde"] == pytest.approx(0.1, abs=1e-12)
    assert rep["within_3sigma"]
    _within(30, start)


def test_criterion_3_block_law(criterion):
    start = time.perf_counter()
    rep = block_law_test(0.271, 100_000, 3)
    criterion["detail"] = f"pooled p-value {rep['p_value']:.4f}, min per-block {min(rep['per_block_p_values']):.4f}"
    assert rep["p_value"] > 0.01
    _within(60, start)


def test_criterion_4_layer_union(criterion):
    start = time.perf_counter()
    rep = layer_union_test(0.1, 100_000, 4)
    criterion["detail"] = (f"violations {rep['violations']}, coupled p {rep['coupled_p_value']:.4f}, "
                           f"two-step p {rep['two_step_p_value']:.4f}")
    assert rep["violations"] == 0
    assert rep["coupled_p_value"] > 0.01 and rep["two_step_p_value"] > 0.01
    _within(60, start)


def test_criterion_5_decomposition(criterion):
    start = time.perf_counter()
    rng = stream(5, "acceptance-cubic")
    bad = []
    for i in range(100):
        n = 2 * int(rng.integers(5, 101))
        h = random_cubic_graph(n, i)
        if not validate_decomposition(h, decompose_cubic(h, 5), ell=5).valid:
            bad.append((n, i))
    pet = Graph(10, list(nx.petersen_graph().edges()))
    dec = decompose_cubic(pet, 5)
    criterion["detail"] = f"100 random cubic graphs, {len(bad)} invalid; Petersen cycles {[len(c) for c in dec.cycles]}"
    assert not bad
    assert sorted(len(c) for c in dec.cycles) == [5, 5] and not dec.J
    assert validate_decomposition(pet, dec, ell=5).valid
    _within(60, start)


def test_criterion_6_regularity_oracle(criterion):
    start = time.perf_counter()
    rng = np.random.default_rng(6)
    disagree, bad_witness, inherit_fail, envelope_fail, applicable = 0, 0, 0, 0, 0
    for _ in range(200):
        g, A, B, X, eps, p = bipartite_instance(rng, max_side=12)
        rep = regularity_check(g, A, B, eps, p, "exact")
        ok, _ = brute_regularity(X, eps, p)
        disagree += rep.regular != ok
        if not rep.regular:
            bad_witness += not witness_violates(g, rep)
        eps1 = float(rng.uniform(0.1, 0.45))
        eps2 = float(rng.uniform(eps1, 0.5))
        inh = subset_inheritance_check(g, A, B, eps1, eps2, p)
        regular1, _ = brute_regularity(X, eps1, p)
        if inh.applicable != regular1:
            disagree += 1
        if not regular1:
            continue
        applicable += 1
        inherit_fail += not inh.holds
        # every eps1-large sub-pair, hence every sub-pair of an eps2-large pair, lies in this envelope
        d = X.sum() / X.size
        lo, hi = density_envelope(X, math.ceil(eps1 * len(A) - 1e-9), math.ceil(eps1 * len(B) - 1e-9))
        tol = 1e-9
        envelope_fail += not (hi - lo <= eps1 / eps2 * p + tol and hi - d <= eps1 * p + tol and d - lo <= eps1 * p + tol)
    criterion["detail"] = (f"200 instances: {disagree} verdict disagreements, {bad_witness} bad witnesses, "
                           f"inheritance applicable {applicable}, package fails {inherit_fail}, oracle fails {envelope_fail}")
    assert disagree == 0 and bad_witness == 0
    assert inherit_fail == 0 and envelope_fail == 0
    _within(300, start)


def _host_corpus():
    """Complete graphs, near-complete graphs and random graphs on 2..14 vertices."""
    rng = np.random.default_rng(7)
    hosts = []
    for n in range(2, 15):
        hosts.append(Graph.complete(n))
        pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
        for p in (0.3, 0.6, 0.8, 0.9, 0.95):
            for _ in range(6):
                hosts.append(Graph(n, [e for e in pairs if rng.random() < p]))
    return hosts


def test_criterion_7_tree_embedding(criterion):
    start = time.perf_counter()
    trees = [RootedTree.from_graph(Graph(t.number_of_nodes(), list(t.edges())))
             for k in range(2, 9) for t in nx.nonisomorphic_trees(k)]
    hosts = _host_corpus()
    cache, checked, failures = {}, 0, []
    for host_id, host in enumerate(hosts):
        for t in trees:
            if len(t) > host.n:
                continue
            d = t.max_degree()
            key = (host_id, 2 * len(t) - 2, d + 1)
            if key not in cache:
                cache[key] = expansion_check(host, 2 * len(t) - 2, d + 1, mode="exhaustive").passed
            if not cache[key]:
                continue
            checked += 1
            try:
                emb = embed_tree_fp(host, t, d=d)
                if validate_embedding(Graph(len(t), t.edges()), host, emb.image):
                    failures.append((host_id, len(t)))
            except Exception:
                failures.append((host_id, len(t)))
    sizes = sorted({len(t) for t in trees})
    criterion["detail"] = (f"{len(trees)} trees on {sizes[0]}..{sizes[-1]} vertices x {len(hosts)} hosts: "
                           f"{checked} pairs meet the expansion hypothesis, {len(failures)} failures "
                           "(hypothesis unsatisfiable on <= 14 vertices for trees with >= 4 vertices)")
    assert not failures
    _within(300, start)


def test_criterion_8_matchings(criterion):
    start = time.perf_counter()
    ag = affine_plane(3)
    mc = partition_blocks_into_matchings(range(ag.num_blocks), ag, 0.0)
    perfect = all(len(m) * 3 == ag.n for m in mc.matchings)
    fano = steiner_triple(7)
    mf = partition_blocks_into_matchings(range(7), fano, 0.1)
    criterion["detail"] = f"AG(2,3): {mc.z} matchings, perfect {perfect}; Fano: {mf.z} matchings"
    assert mc.z == 4 and perfect and not check_matchings(mc, ag, ag.num_blocks)
    assert mf.z == 0
    _within(1, start)


@pytest.fixture(scope="module")
def end_to_end_host():
    return assemble_host(END_TO_END, 7)


@pytest.mark.parametrize("strategy,need", [("all-red", 10), ("layer-flip", 8)])
def test_criterion_9_end_to_end(criterion, end_to_end_host, strategy, need):
    criterion["label"] = "9" + ("a" if strategy == "all-red" else "b")
    start = time.perf_counter()
    cfg = ExperimentConfig(END_TO_END, ("random-cubic", 30, 11), strategy, 0.5, 10, 7)
    rep = run_experiment(cfg, host=end_to_end_host)
    wins = rep.aggregate["successes"]
    criterion["detail"] = f"{strategy}: {wins}/10 validated, cases {rep.aggregate['cases']}"
    assert all(r["validated"] for r in rep.rows if r["ok"])
    assert wins >= need
    _within(600, start)


@pytest.fixture(scope="module")
def budget_runs():
    start = time.perf_counter()
    rows = []
    for seed in range(100):
        h = assemble_host(BUDGET, seed)
        mult = edge_multiplicity_report(h.layers)
        rows.append((h.base.m / (math.comb(h.n, 2) * h.params.p), h.z, max(mult.histogram, default=0),
                     mult.has_five_or_more))
    return rows, time.perf_counter() - start


def test_criterion_10a_edge_budget(criterion, budget_runs):
    rows, took = budget_runs
    ratios = [r[0] for r in rows]
    criterion["detail"] = f"100 seeds, e(G)/(C(n,2) p) in [{min(ratios):.4f}, {max(ratios):.4f}], sampling {took:.0f}s"
    assert all(0.9 < r < 1.1 for r in ratios)
    assert took < 300


@pytest.mark.xfail(strict=True, reason="at delta = 0.15 the first-moment bound n^(10 delta - 1/2) grows; "
                                       "edges in five layers are expected at n = 1999")
def test_criterion_10b_multiplicity(criterion, budget_runs):
    rows, _ = budget_runs
    hits = sum(r[3] for r in rows)
    criterion["detail"] = (f"layers per host {min(r[1] for r in rows)}..{max(r[1] for r in rows)}, "
                           f"max multiplicity {max(r[2] for r in rows)}, seeds with multiplicity >= 5: {hits}/100")
    assert min(r[1] for r in rows) > 0
    assert hits == 0


def _bytes_of(g):
    return g.edges.tobytes()


def test_criterion_11_determinism(criterion, end_to_end_host, tmp_path):
    start = time.perf_counter()
    d = steiner_triple(63)
    plane = affine_plane(7)
    P = ParameterSet(n=63, delta=0.4, eta=0.3, attempts=1).with_probabilities()

    def samples():
        out = []
        out.append(_bytes_of(sample_gnp(80, 0.2, 1)))
        base, present = sample_block_model(d, P.p, 2)
        out += [_bytes_of(base), present.tobytes()]
        out.append(conditional_outcomes(3, 0.1, np.random.default_rng(3), 500).tobytes())
        out.append(_bytes_of(subsample_blocks(base, present, d, P.p_tilde, 4)))
        layers = build_layers(plane, [plane.parallel_classes[0], plane.parallel_classes[1]], 0.3, 5)
        out += [_bytes_of(s) for s in layers.skeletons]
        out += [_bytes_of(g) for g in subsample_layers(layers, 0.2, 6)]
        cp = couple_layers_into_gnp(layers.matchings, plane, 0.2, 7)
        out += [_bytes_of(cp.F), _bytes_of(cp.L)]
        out.append(_bytes_of(random_cubic_graph(40, 8)))
        h = assemble_host(P, 9)
        out.append(_bytes_of(h.gamma_graph))
        out += [colour_host(h, s, 10).red_mask.tobytes() for s in STRATEGIES]
        rep = run_experiment(ExperimentConfig(P, ("random-cubic", 10, 1), "uniform-random", 0.5, 3, 11), host=h)
        out += [rep.to_csv().encode(), rep.to_json().encode()]
        return out

    first, second = samples(), samples()
    same = sum(a == b for a, b in zip(first, second))
    dirs = [tmp_path / "a", tmp_path / "b"]
    for out in dirs:
        run_experiment(ExperimentConfig(END_TO_END, ("random-cubic", 30, 11), "all-red", 0.5, 1, 7, str(out)),
                       host=end_to_end_host)
    files = ("report.csv", "report.json", "stages.jsonl")
    same_files = sum((dirs[0] / f).read_bytes() == (dirs[1] / f).read_bytes() for f in files)
    criterion["detail"] = f"{same}/{len(first)} sampler outputs identical, {same_files}/{len(files)} report files identical"
    assert same == len(first) and same_files == len(files)
