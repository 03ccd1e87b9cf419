"""Batch command line: ``sizeramsey <command> [options]``.

Exit status is 0 unless a hard error occurred (bad input, infeasible
parameters, I/O failure, an invalid design or decomposition handed to a
validator). Statistical misses and failed embeddings are reported, not fatal.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

from . import __version__
from .decomposition import decompose_cubic, validate_decomposition
from .designs import BlockDesign, design_for, validate_design
from .errors import SizeRamseyError
from .graph import format_colouring, read_graph
from .harness import STRATEGIES, ExperimentConfig, colour_host, coupling_marginal_test, random_cubic_graph, run_experiment
from .host import assemble_host, host_edge_budget_report, validate_parameters, write_bundle
from .params import ParameterSet, read_params
from .validate import validate_embedding


class HardError(Exception):
    pass


def _manifest(args) -> dict:
    return {"tool": "sizeramsey", "version": __version__, "seed": args.seed}


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, (list, tuple)) and obj and all(isinstance(x, (dict, list, tuple)) for x in obj):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}.{i}")
    else:
        yield prefix, json.dumps(obj) if isinstance(obj, (list, tuple)) else obj


def _render(args, payload: dict) -> str:
    """JSON object with a manifest key, or key,value CSV under a manifest comment line."""
    if args.format == "json":
        return json.dumps({"manifest": _manifest(args), **payload}, indent=1, sort_keys=True, default=str) + "\n"
    buf = io.StringIO()
    buf.write(f"# sizeramsey {__version__} seed {args.seed}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])
    for k, v in _flatten(payload):
        w.writerow([k, v])
    return buf.getvalue()


def _emit(args, payload: dict, name: str) -> None:
    text = _render(args, payload)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, f"{name}.{args.format}"), "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _params(args) -> ParameterSet:
    p = read_params(args.params) if args.params else ParameterSet()
    overrides = {}
    for name in ("n", "C"):
        v = getattr(args, name, None)
        if v is not None:
            overrides[name] = v
    return p.replace(**overrides) if overrides else p


def _pattern(args):
    if getattr(args, "pattern", None):
        return read_graph(args.pattern)
    return random_cubic_graph(args.pattern_n, args.pattern_seed)


# ------------------------------------------------------------ commands

def cmd_design_build(args):
    p = _params(args)
    d = design_for(p.n, p.C)
    rep = validate_design(d)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "design.json"), "w") as fh:
            fh.write(d.to_json())
    _emit(args, {"n": d.n, "C": d.block_size, "blocks": d.num_blocks,
                 "resolvable": d.parallel_classes is not None, "validation": rep.as_dict()}, "design_report")


def cmd_design_validate(args):
    with open(args.file) as fh:
        d = BlockDesign.from_json(fh.read())
    rep = validate_design(d)
    _emit(args, {"file": args.file, "validation": rep.as_dict()}, "design_report")
    if not rep.valid:
        raise HardError(f"{args.file} is not a valid design")


def cmd_host_assemble(args):
    h = assemble_host(_params(args), args.seed)
    payload = {"n": h.n, "z": h.z, "audit": {k: v for k, v in h.audit.items() if k != "history"},
               "budget": host_edge_budget_report(h).as_dict()}
    if args.out:
        payload["bundle"] = write_bundle(h, args.out, __version__)
    _emit(args, payload, "host_report")


def cmd_host_audit(args):
    p = _params(args)
    prep = validate_parameters(p.with_probabilities() if p.p is None else p)
    if not prep.hard_ok:
        raise HardError(f"delta = {p.delta} is not above 1/(4 ell - 6) = {prep.delta_threshold:.6g}")
    h = assemble_host(p, args.seed)
    _emit(args, {"parameters": prep.as_dict(), "audit": h.audit, "budget": host_edge_budget_report(h).as_dict(),
                 "z": h.z}, "audit")


def cmd_decompose(args):
    g = read_graph(args.graph) if args.graph else random_cubic_graph(args.pattern_n, args.pattern_seed)
    dec = decompose_cubic(g, args.ell)
    rep = validate_decomposition(g, dec)
    _emit(args, {"n": g.n, "J": sorted(dec.J), "cycles": [list(c) for c in dec.cycles],
                 "validation": rep.as_dict()}, "decomposition")
    if not rep.valid:
        raise HardError("decomposition failed its own validation")


def cmd_colour(args):
    h = assemble_host(_params(args), args.seed)
    c = colour_host(h, args.strategy, args.seed, args.bias)
    text = f"# sizeramsey {__version__} seed {args.seed} strategy {args.strategy}\n" + format_colouring(c)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "colouring.txt"), "w") as fh:
            fh.write(text)
        _emit(args, {"strategy": args.strategy, "red": c.count("red"), "blue": c.count("blue")}, "colour_report")
    else:
        sys.stdout.write(text)


def cmd_embed(args):
    from .embedding.ramsey import ramsey_embed

    h = assemble_host(_params(args), args.seed)
    H = _pattern(args)
    c = colour_host(h, args.strategy, args.seed, args.bias)
    res = ramsey_embed(h, c, H, h.params, seed=args.seed)
    out = res.as_dict()
    if res.ok:
        out["validation"] = validate_embedding(H, h.gamma_graph, res.embedding.image, colouring=c, colour=res.colour)
    _emit(args, out, "embedding")


def cmd_couple_test(args):
    rep = coupling_marginal_test(args.kind, _params(args), args.trials, args.seed)
    _emit(args, rep, f"coupling_{args.kind}")


def cmd_experiment_run(args):
    source = ("file", args.pattern) if args.pattern else ("random-cubic", args.pattern_n, args.pattern_seed)
    cfg = ExperimentConfig(_params(args), source, args.strategy, args.bias, args.trials, args.seed, args.out)
    rep = run_experiment(cfg)
    if args.out:
        return
    sys.stdout.write(rep.to_csv() if args.format == "csv" else rep.to_json())


# ------------------------------------------------------------ parser

def _common_flags(default):
    """Global flags; subcommand copies use SUPPRESS so they never clobber values given earlier."""
    ap = argparse.ArgumentParser(add_help=False)
    pick = (lambda v: v) if default is None else (lambda v: default)
    ap.add_argument("--seed", type=int, default=pick(0), help="master seed")
    ap.add_argument("--params", default=pick(None), help="key=value parameter file")
    ap.add_argument("--out", default=pick(None), help="output directory (default: stdout)")
    ap.add_argument("--format", choices=("json", "csv"), default=pick("json"))
    ap.add_argument("--n", type=int, default=pick(None), help="override the host size")
    ap.add_argument("--C", type=int, default=pick(None), help="override the block size")
    return ap


def build_parser() -> argparse.ArgumentParser:
    top = _common_flags(None)
    common = _common_flags(argparse.SUPPRESS)

    pattern = argparse.ArgumentParser(add_help=False)
    pattern.add_argument("--pattern", help="pattern graph file (edge list or JSON)")
    pattern.add_argument("--pattern-n", type=int, default=30, help="random cubic pattern size")
    pattern.add_argument("--pattern-seed", type=int, default=0)

    colouring = argparse.ArgumentParser(add_help=False)
    colouring.add_argument("--strategy", choices=STRATEGIES, default="all-red")
    colouring.add_argument("--bias", type=float, default=0.5, help="red probability for uniform-random")

    ap = argparse.ArgumentParser(prog="sizeramsey", description=__doc__.splitlines()[0], parents=[top])
    ap.add_argument("--version", action="version", version=f"sizeramsey {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    design = sub.add_parser("design", help="block designs").add_subparsers(dest="action", required=True)
    design.add_parser("build", parents=[common]).set_defaults(func=cmd_design_build)
    v = design.add_parser("validate", parents=[common])
    v.add_argument("file")
    v.set_defaults(func=cmd_design_validate)

    host = sub.add_parser("host", help="layered host graphs").add_subparsers(dest="action", required=True)
    host.add_parser("assemble", parents=[common]).set_defaults(func=cmd_host_assemble)
    host.add_parser("audit", parents=[common]).set_defaults(func=cmd_host_audit)

    d = sub.add_parser("decompose", parents=[common, pattern], help="cycle + bounded-treewidth decomposition")
    d.add_argument("graph", nargs="?", help="graph file; a random cubic graph when omitted")
    d.add_argument("--ell", type=int, default=5)
    d.set_defaults(func=cmd_decompose)

    sub.add_parser("colour", parents=[common, colouring], help="colour a host").set_defaults(func=cmd_colour)
    sub.add_parser("embed", parents=[common, pattern, colouring], help="monochromatic embedding").set_defaults(func=cmd_embed)

    ct = sub.add_parser("couple-test", parents=[common], help="coupling statistics")
    ct.add_argument("--kind", choices=("block", "biclique", "layer-union"), default="block")
    ct.add_argument("--trials", type=int, default=10_000)
    ct.set_defaults(func=cmd_couple_test)

    exp = sub.add_parser("experiment", help="experiment campaigns").add_subparsers(dest="action", required=True)
    r = exp.add_parser("run", parents=[common, pattern, colouring])
    r.add_argument("--trials", type=int, default=1)
    r.set_defaults(func=cmd_experiment_run)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        args.func(args)
    except (HardError, SizeRamseyError, OSError, ValueError) as exc:
        print(f"sizeramsey: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
