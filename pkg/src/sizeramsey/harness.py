"""Colouring strategies, experiment campaigns and the statistical coupling tests."""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
import os
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .designs import design_for
from .errors import ConfigError
from .graph import BLUE, RED, Graph, TwoColoring, read_graph
from .host import LayeredHost, assemble_host
from .params import ParameterSet, format_params
from .random_models import conditional_outcomes, couple_layers_into_gnp
from .rng import stream, subseed
from .validate import validate_embedding

STRATEGIES = ("all-red", "all-blue", "uniform-random", "block-monochrome", "layer-flip", "greedy-anti-tree")

REPORT_COLUMNS = ["trial", "seed", "strategy", "pattern_n", "ok", "colour", "case", "stage", "attempts",
                  "base_edges", "host_edges", "validated"]


def tool_version() -> str:
    from . import __version__
    return __version__


# ------------------------------------------------------------ colourings

def colour_host(h: LayeredHost, strategy: str, seed: int, bias: float = 0.5) -> TwoColoring:
    """Total red/blue colouring of Gamma by a named adversary.

    uniform-random colours each edge red with probability ``bias``.
    block-monochrome gives every present block's clique one random colour and
    every layer-only edge an independent fair colour. layer-flip makes base
    edges red and layer-only edges blue. greedy-anti-tree walks the edges in
    random order and colours an edge blue when it joins two blue components
    (growing a blue forest), red otherwise.
    """
    g = h.gamma_graph
    rng = stream(seed, "colour", STRATEGIES.index(strategy) if strategy in STRATEGIES else 99)
    if strategy == "all-red":
        return TwoColoring.uniform(g, RED)
    if strategy == "all-blue":
        return TwoColoring.uniform(g, BLUE)
    if strategy == "uniform-random":
        if not 0.0 <= bias <= 1.0:
            raise ConfigError("bias must lie in [0, 1]")
        return TwoColoring(g, rng.random(g.m) < bias)
    if strategy == "layer-flip":
        return TwoColoring(g, h.base_mask.copy())
    if strategy == "block-monochrome":
        n = g.n
        red = rng.random(g.m) < 0.5
        present = np.asarray(h.present_blocks, dtype=np.int64)
        block_red = rng.random(present.size) < 0.5
        keys = g.edge_keys()
        C = h.design.block_size
        for a, b in itertools.combinations(range(C), 2):
            if present.size == 0:
                break
            u = h.design.blocks[present, a]
            v = h.design.blocks[present, b]
            k = np.minimum(u, v) * n + np.maximum(u, v)
            idx = np.searchsorted(keys, k)
            red[idx] = block_red
        return TwoColoring(g, red)
    if strategy == "greedy-anti-tree":
        parent = list(range(g.n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        red = np.ones(g.m, dtype=bool)
        edges = g.edges
        for idx in rng.permutation(g.m).tolist():
            a, b = find(int(edges[idx, 0])), find(int(edges[idx, 1]))
            if a != b:
                parent[a] = b
                red[idx] = False
        return TwoColoring(g, red)
    raise ConfigError(f"unknown colouring strategy {strategy!r}", choices=STRATEGIES)


# ------------------------------------------------------------ patterns

def random_cubic_graph(n: int, seed: int, max_tries: int = 1000) -> Graph:
    """Uniform simple cubic graph by the pairing model with rejection."""
    if n % 2 or n < 4:
        raise ConfigError("a cubic graph needs an even number of at least 4 vertices")
    rng = stream(seed, "cubic")
    points = np.repeat(np.arange(n), 3)
    for _ in range(max_tries):
        perm = rng.permutation(points).reshape(-1, 2)
        u, v = perm[:, 0], perm[:, 1]
        if np.any(u == v):
            continue
        keys = np.minimum(u, v) * n + np.maximum(u, v)
        if np.unique(keys).size != keys.size:
            continue
        return Graph(n, perm.tolist())
    raise ConfigError("pairing model kept producing loops or multi-edges")


# ------------------------------------------------------------ experiments

@dataclass
class ExperimentConfig:
    params: ParameterSet = field(default_factory=ParameterSet)
    pattern_source: tuple = ("random-cubic", 30, 0)     # or ("file", path)
    colouring_strategy: str = "all-red"
    bias: float = 0.5
    trials: int = 1
    seed: int = 0
    output_dir: str | None = None

    def check(self) -> None:
        if self.trials < 1:
            raise ConfigError("trials must be at least 1", trials=self.trials)
        if self.colouring_strategy not in STRATEGIES:
            raise ConfigError(f"unknown colouring strategy {self.colouring_strategy!r}")
        kind = self.pattern_source[0] if self.pattern_source else None
        if kind not in ("random-cubic", "file"):
            raise ConfigError(f"unknown pattern source {kind!r}")


@dataclass
class ExperimentReport:
    rows: list
    aggregate: dict
    runtimes: list = field(default_factory=list)     # kept out of the byte-identical outputs

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# sizeramsey {self.aggregate['version']} seed {self.aggregate['seed']}\n")
        w = csv.DictWriter(buf, fieldnames=REPORT_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow({k: r[k] for k in REPORT_COLUMNS})
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"aggregate": self.aggregate, "rows": self.rows}, indent=1, sort_keys=True) + "\n"


def _pattern(cfg: ExperimentConfig, trial: int) -> Graph:
    kind = cfg.pattern_source[0]
    if kind == "file":
        return read_graph(cfg.pattern_source[1])
    n, base = int(cfg.pattern_source[1]), int(cfg.pattern_source[2])
    return random_cubic_graph(n, subseed(base, "pattern", trial))


def run_experiment(cfg: ExperimentConfig, host: LayeredHost | None = None) -> ExperimentReport:
    """One host, then per trial: pattern, colouring, ramsey_embed, validation, one row."""
    from .embedding.ramsey import ramsey_embed

    cfg.check()
    h = host if host is not None else assemble_host(cfg.params, cfg.seed)
    rows, runtimes, logs = [], [], []
    for trial in range(cfg.trials):
        tseed = subseed(cfg.seed, "trial", trial)
        H = _pattern(cfg, trial)
        c = colour_host(h, cfg.colouring_strategy, subseed(tseed, "colour"), cfg.bias)
        t0 = time.perf_counter()
        res = ramsey_embed(h, c, H, h.params, seed=subseed(tseed, "embed"))
        runtimes.append(time.perf_counter() - t0)
        validated = False
        if res.ok:
            validated = not validate_embedding(H, h.gamma_graph, res.embedding.image, colouring=c, colour=res.colour)
        ok = bool(res.ok and validated)
        rows.append({
            "trial": trial, "seed": tseed, "strategy": cfg.colouring_strategy, "pattern_n": H.n,
            "ok": ok, "colour": res.colour if ok else "", "case": res.case or "", "stage": res.stage,
            "attempts": res.attempts, "base_edges": h.base.m, "host_edges": h.gamma_graph.m, "validated": validated,
            "embedding": {str(k): int(v) for k, v in sorted(res.embedding.image.items())} if ok else None,
        })
        logs.append({"trial": trial, "log": res.log})
    succ = sum(r["ok"] for r in rows)
    cases = {}
    for r in rows:
        key = r["case"] or "none"
        cases[key] = cases.get(key, 0) + 1
    fails = {}
    for r in rows:
        if not r["ok"]:
            fails[r["stage"]] = fails.get(r["stage"], 0) + 1
    agg = {
        "version": tool_version(), "seed": cfg.seed, "strategy": cfg.colouring_strategy, "trials": cfg.trials,
        "successes": succ, "success_rate": succ / cfg.trials, "cases": cases, "failure_stages": fails,
        "params": format_params(h.params), "audit": {k: v for k, v in h.audit.items() if k != "history"},
    }
    rep = ExperimentReport(rows, agg, runtimes)
    if cfg.output_dir:
        write_report(rep, cfg.output_dir, logs)
    return rep


def write_report(rep: ExperimentReport, out_dir, logs=()) -> None:
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "report.csv"), "w") as fh:
        fh.write(rep.to_csv())
    with open(os.path.join(out_dir, "report.json"), "w") as fh:
        fh.write(rep.to_json())
    with open(os.path.join(out_dir, "stages.jsonl"), "w") as fh:
        for entry in logs:
            fh.write(json.dumps(entry, sort_keys=True) + "\n")
    with open(os.path.join(out_dir, "timings.csv"), "w") as fh:
        fh.write("trial,seconds\n")
        for i, t in enumerate(rep.runtimes):
            fh.write(f"{i},{t:.6f}\n")


# ------------------------------------------------------------ coupling statistics

def _chi_square(observed: np.ndarray, probs: np.ndarray) -> tuple[float, float]:
    expected = probs * observed.sum()
    keep = expected > 0
    res = stats.chisquare(observed[keep], expected[keep] * observed[keep].sum() / expected[keep].sum())
    return float(res.statistic), float(res.pvalue)


def _product_law(m: int, x: float) -> np.ndarray:
    """Probability of each m-bit pattern under independent Bernoulli(x) bits."""
    ones = np.array([bin(k).count("1") for k in range(1 << m)])
    return x ** ones * (1 - x) ** (m - ones)


def _marginal(m: int, x: float, p_outer: float, trials: int, rng) -> dict:
    target = x / p_outer
    out = conditional_outcomes(m, x, rng, trials)
    bits = ((out[:, None] >> np.arange(m)) & 1).astype(np.float64)
    marg = float(bits[:, 0].mean())
    sigma = math.sqrt(target * (1 - target) / trials) if 0 < target < 1 else 0.0
    z = (marg - target) / sigma if sigma else (0.0 if marg == target else math.inf)
    return {"trials": trials, "target": target, "marginal": marg, "all_edges_marginal": float(bits.mean()),
            "sigma": sigma, "z": z, "within_3sigma": abs(z) <= 3}


def block_marginal_test(C: int, p: float, trials: int, seed: int) -> dict:
    """Per-edge marginal of the subsample given the block is present, against p~/p."""
    m = C * (C - 1) // 2
    p_tilde = 1 - (1 - p) ** (1 / m)
    out = _marginal(m, p_tilde, p, trials, stream(seed, "couple-test", 0))
    return {"kind": "block", "C": C, "p": p, "p_tilde": p_tilde, **out}


def biclique_marginal_test(C: int, p_prime: float, trials: int, seed: int) -> dict:
    """Per-edge marginal of a subsampled biclique given its skeleton edge, against p~'/p'."""
    m = C * C
    ptp = 1 - (1 - p_prime) ** (1 / m)
    out = _marginal(m, ptp, p_prime, trials, stream(seed, "couple-test", 3))
    return {"kind": "biclique", "C": C, "p_prime": p_prime, "p_tilde_prime": ptp, **out}


def block_law_test(p: float, trials: int, seed: int, n: int = 7, C: int = 3) -> dict:
    """Two-step samples of a design's blocks (present w.p. p, then the conditional
    subsample) against the independent G(n, p~) law on each block's pairs."""
    d = design_for(n, C)
    m = C * (C - 1) // 2
    p_tilde = 1 - (1 - p) ** (1 / m)
    rng = stream(seed, "couple-test", 1)
    nb = d.num_blocks
    present = rng.random((trials, nb)) < p
    outcomes = np.zeros((trials, nb), dtype=np.int64)
    k = int(present.sum())
    outcomes[present] = conditional_outcomes(m, p_tilde, rng, k)
    law = _product_law(m, p_tilde)
    per_block = []
    for b in range(nb):
        obs = np.bincount(outcomes[:, b], minlength=1 << m)
        per_block.append(_chi_square(obs.astype(np.float64), law)[1])
    pooled = np.bincount(outcomes.ravel(), minlength=1 << m).astype(np.float64)
    stat, pval = _chi_square(pooled, law)
    return {"kind": "block-law", "n": n, "C": C, "p": p, "p_tilde": p_tilde, "trials": trials,
            "chi2": stat, "p_value": pval, "per_block_p_values": per_block, "passed": pval > 0.01}


def layer_union_test(p_tilde_prime: float, trials: int, seed: int, p_prime: float | None = None) -> dict:
    """Coupling of the layer subsamples into G(n, p~') for C = 2 on four points.

    Per trial: zero L-outside-F violations; the pooled biclique outcomes of L
    and of a direct two-step subsample are both tested against independent
    Bernoulli(p~') bits.
    """
    d = design_for(4, 2)
    matchings = [[0, 5], [1, 4], [2, 3]]
    n = d.n
    p_prime = 1 - (1 - p_tilde_prime) ** 4 if p_prime is None else p_prime
    law = _product_law(4, p_tilde_prime)
    pairs = []
    for m in matchings:
        a, b = d.block(m[0]), d.block(m[1])
        pairs.append([min(x, y) * n + max(x, y) for x in a for y in b])
    coupled = np.zeros(16, dtype=np.int64)
    violations = 0
    for t in range(trials):
        cp = couple_layers_into_gnp(matchings, d, p_tilde_prime, subseed(seed, "couple-test", t))
        violations += cp.violations
        for i, keys in enumerate(pairs):
            have = set(cp.L_layers[i].edge_keys().tolist())
            coupled[sum(1 << j for j, k in enumerate(keys) if k in have)] += 1
    # the two-step law of the subsampled blow-up, pooled over layers and trials
    two_step = np.zeros(16, dtype=np.int64)
    rng = stream(seed, "couple-test", 2)
    present = rng.random(trials * len(matchings)) < p_prime
    outs = np.zeros(present.size, dtype=np.int64)
    outs[present] = conditional_outcomes(4, p_tilde_prime, rng, int(present.sum()))
    two_step += np.bincount(outs, minlength=16)
    _, p_coupled = _chi_square(coupled.astype(np.float64), law)
    _, p_two = _chi_square(two_step.astype(np.float64), law)
    return {"kind": "layer-union", "C": 2, "p_tilde_prime": p_tilde_prime, "p_prime": p_prime, "trials": trials,
            "violations": violations, "coupled_p_value": p_coupled, "two_step_p_value": p_two,
            "passed": violations == 0 and p_coupled > 0.01 and p_two > 0.01}


def coupling_marginal_test(kind: str, params: ParameterSet | None = None, trials: int = 10_000, seed: int = 0) -> dict:
    """Statistic report for one coupling.

    block: edge marginal given block presence, plus the two-step block law
    against G(n, p~); biclique: edge marginal of a subsampled K_{C,C};
    layer-union: containment of the layer subsamples in G(n, p~') and the
    biclique law (C = 2).
    """
    params = params or ParameterSet()
    if kind == "block":
        p = params.p if params.p is not None else 0.271
        rep = block_marginal_test(params.C, p, trials, seed)
        rep["law"] = block_law_test(p, trials, seed, n=7 if params.C == 3 else 4 * params.C, C=params.C)
        return rep
    if kind == "biclique":
        pp = params.p_prime if params.p_prime is not None else 0.5
        return biclique_marginal_test(params.C, pp, trials, seed)
    if kind == "layer-union":
        ptp = params.p_tilde_prime if params.p_tilde_prime is not None else 0.1
        return layer_union_test(ptp, trials, seed)
    raise ConfigError(f"unknown coupling test {kind!r}", choices=("block", "biclique", "layer-union"))
