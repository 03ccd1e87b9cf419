"""Host assembly: Gamma = G + A'_1 + ... + A'_z, with provenance, audits and bundles."""
from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .designs import BlockDesign, design_for
from .graph import Graph, format_edge_list
from .matchings import MatchingCollection, edge_multiplicity_report, partition_blocks_into_matchings
from .params import ParameterSet, format_params
from .random_models import LayerSet, build_layers, sample_block_model
from .rng import subseed


@dataclass
class LayeredHost:
    params: ParameterSet
    base: Graph
    design: BlockDesign
    present_blocks: np.ndarray
    matchings: MatchingCollection
    layers: LayerSet
    gamma_graph: Graph
    base_mask: np.ndarray       # per Gamma edge: present in G
    layer_edges: np.ndarray     # (k, 2) array of (Gamma edge index, layer index)
    seed: int = 0
    audit: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def z(self) -> int:
        return self.layers.z

    def provenance(self, u: int, v: int) -> list:
        """Tags of edge uv: "base" and/or layer indices."""
        idx = self.gamma_graph.edge_index(u, v)
        tags = ["base"] if self.base_mask[idx] else []
        rows = self.layer_edges[self.layer_edges[:, 0] == idx, 1]
        return tags + [int(i) for i in rows]

    def tag_counts(self) -> np.ndarray:
        """Number of provenance tags per Gamma edge."""
        return self.base_mask.astype(np.int64) + np.bincount(self.layer_edges[:, 0], minlength=self.gamma_graph.m)


def union_with_provenance(base: Graph, layer_graphs) -> tuple[Graph, np.ndarray, np.ndarray]:
    n = base.n
    parts = [base.edge_keys()] + [g.edge_keys() for g in layer_graphs]
    keys = np.unique(np.concatenate(parts)) if parts else np.zeros(0, np.int64)
    gamma = Graph.from_keys(n, keys)
    base_mask = np.isin(keys, base.edge_keys())
    rows = []
    for i, g in enumerate(layer_graphs):
        idx = np.searchsorted(keys, g.edge_keys())
        rows.append(np.stack([idx, np.full(idx.size, i)], axis=1))
    layer_edges = np.concatenate(rows).astype(np.int64) if rows else np.zeros((0, 2), np.int64)
    return gamma, base_mask, layer_edges


def audit_host(base: Graph, layers: LayerSet, params: ParameterSet) -> dict:
    """The checkable conclusions the construction relies on for a fixed outcome."""
    n = base.n
    p = params.p
    bound = (1 + params.gamma) * math.comb(n, 2) * p
    mult = edge_multiplicity_report(layers)
    out = {
        "base_edges": base.m,
        "base_edge_bound": bound,
        "base_edges_ok": base.m <= bound,
        "multiplicity_below_five": not mult.has_five_or_more,
        "repeated_edges_ok": not mult.repeated_exceeds_bound,
    }
    out["passed"] = out["base_edges_ok"] and out["multiplicity_below_five"] and out["repeated_edges_ok"]
    return out


def assemble_host(params: ParameterSet, seed: int, design: BlockDesign | None = None) -> LayeredHost:
    """design -> G^C(n, p) -> block matchings -> skeleton layers -> union.

    The probabilities are derived when missing. On an audit failure the whole
    sample is redrawn from a fresh subseed, up to ``resample_budget`` times;
    the last attempt is returned with its audit either way.
    """
    if params.p is None or params.p_prime is None or params.p_tilde is None:
        params = params.with_probabilities()
    d = design if design is not None else design_for(params.n, params.C)
    history = []
    for attempt in range(params.resample_budget + 1):
        s = seed if attempt == 0 else subseed(seed, "resample", attempt)
        base, present = sample_block_model(d, params.p, s)
        mc = partition_blocks_into_matchings(present, d, params.eta, params.z)
        ms = mc.matchings if params.max_layers is None else mc.matchings[: params.max_layers]
        layers = build_layers(d, ms, params.p_prime, s)
        audit = audit_host(base, layers, params)
        history.append(audit["passed"])
        if audit["passed"]:
            break
    audit["attempts"] = len(history)
    audit["history"] = history
    gamma, base_mask, layer_edges = union_with_provenance(base, [layers.A_prime(i) for i in range(layers.z)])
    return LayeredHost(params, base, d, present, mc, layers, gamma, base_mask, layer_edges, seed, audit)


def host_from_parts(params: ParameterSet, design: BlockDesign, base: Graph, present, layers: LayerSet,
                    matchings: MatchingCollection | None = None, seed: int = 0) -> LayeredHost:
    """Assemble a host from explicitly chosen pieces (planted instances)."""
    if matchings is None:
        matchings = MatchingCollection([list(m) for m in layers.matchings], [len(m) * design.block_size for m in layers.matchings], [], n=design.n)
    gamma, base_mask, layer_edges = union_with_provenance(base, [layers.A_prime(i) for i in range(layers.z)])
    return LayeredHost(params, base, design, np.asarray(present, dtype=np.int64), matchings, layers, gamma,
                       base_mask, layer_edges, seed, audit_host(base, layers, params) if params.p is not None else {})


@dataclass
class EdgeBudget:
    base_edges: int
    layer_edges: int
    host_edges: int
    base_bound: float
    host_bound: float

    @property
    def base_ok(self) -> bool:
        return self.base_edges <= self.base_bound

    @property
    def host_ok(self) -> bool:
        return self.host_edges <= self.host_bound

    def as_dict(self) -> dict:
        return {
            "base_edges": self.base_edges,
            "layer_edges": self.layer_edges,
            "host_edges": self.host_edges,
            "base_bound": self.base_bound,
            "host_bound": self.host_bound,
            "base_ok": self.base_ok,
            "host_ok": self.host_ok,
        }


def host_edge_budget_report(h: LayeredHost) -> EdgeBudget:
    n, pr = h.n, h.params
    layer_total = sum(h.layers.A_prime(i).m for i in range(h.z))
    p = pr.p if pr.p is not None else 0.0
    return EdgeBudget(h.base.m, layer_total, h.gamma_graph.m,
                      (1 + pr.gamma) * math.comb(n, 2) * p, float(n) ** (1.5 + 2 * pr.delta))


# ------------------------------------------------------------ parameter audit

# each link reads "left >> right"
CHAIN = [
    ("1/eta", "C"), ("1/c", "C"), ("C", "T3"), ("T3", "1/eps3"), ("1/eps3", "C_prime"),
    ("C_prime", "T2"), ("T2", "1/eps2"), ("1/eps2", "T1"), ("T1", "1/eps1"), ("1/eps1", "ell"), ("ell", "1/delta"),
]


def _term(p: ParameterSet, name: str) -> float:
    if name.startswith("1/"):
        v = getattr(p, name[2:])
        return math.inf if v == 0 else 1.0 / v
    return float(getattr(p, name))


@dataclass
class ParameterReport:
    hard_ok: bool
    delta_threshold: float
    links: list          # (left, right, left value, right value, passed)
    probability_issues: list

    @property
    def chain_ok(self) -> bool:
        return all(l[4] for l in self.links)

    def as_dict(self) -> dict:
        return {
            "hard_ok": self.hard_ok,
            "delta_threshold": self.delta_threshold,
            "chain_ok": self.chain_ok,
            "links": [{"left": a, "right": b, "left_value": x, "right_value": y, "passed": ok} for a, b, x, y, ok in self.links],
            "probability_issues": list(self.probability_issues),
        }


def validate_parameters(p: ParameterSet) -> ParameterReport:
    """Hard: delta > 1/(4 ell - 6). Soft: every '>>' link holds by a factor chain_ratio."""
    thr = 1.0 / (4 * p.ell - 6)
    links = []
    for a, b in CHAIN:
        x, y = _term(p, a), _term(p, b)
        links.append((a, b, x, y, x >= p.chain_ratio * y))
    issues = []
    C2 = p.C * (p.C - 1) / 2
    checks = [
        ("p", "p_tilde", C2), ("p_prime", "p_tilde_prime", p.C * p.C),
    ]
    for outer, inner, k in checks:
        a, b = getattr(p, outer), getattr(p, inner)
        if a is None or b is None:
            continue
        if abs(a - (1 - (1 - b) ** k)) > 1e-9 * max(a, 1e-300):
            issues.append(f"{outer} inconsistent with {inner}")
    if p.z is not None:
        for outer, inner in (("p_dprime", "p_prime"), ("p_tilde_dprime", "p_tilde_prime")):
            a, b = getattr(p, outer), getattr(p, inner)
            if a is not None and b is not None and abs(a - (1 - (1 - b) ** p.z)) > 1e-9 * max(a, 1e-300):
                issues.append(f"{outer} inconsistent with {inner}")
    for name in ("p", "p_tilde", "p_prime", "p_tilde_prime", "p_dprime", "p_tilde_dprime"):
        v = getattr(p, name)
        if v is not None and not 0.0 <= v <= 1.0:
            issues.append(f"{name} outside [0, 1]")
    return ParameterReport(p.delta > thr, thr, links, issues)


# ------------------------------------------------------------ bundle

def _sha(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def write_bundle(h: LayeredHost, out_dir, version: str = "") -> dict:
    """Params, design, G, each A'_i, Gamma and matchings, plus a manifest of hashes."""
    os.makedirs(out_dir, exist_ok=True)
    header = [f"seed {h.seed}", f"n {h.n} C {h.design.block_size} z {h.z}"]
    files = {
        "params.txt": format_params(h.params),
        "design.json": h.design.to_json(),
        "G.edges": format_edge_list(h.base, header),
        "Gamma.edges": format_edge_list(h.gamma_graph, header),
        "matchings.json": h.matchings.to_json(),
    }
    for i in range(h.z):
        files[f"A_prime_{i}.edges"] = format_edge_list(h.layers.A_prime(i), header + [f"layer {i}"])
    manifest = {"tool": "sizeramsey", "version": version, "seed": h.seed, "files": {}}
    for name, text in files.items():
        with open(os.path.join(out_dir, name), "w") as fh:
            fh.write(text)
        manifest["files"][name] = _sha(text)
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        fh.write(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return manifest
