"""Run one experiment campaign per colouring strategy on a shared host.

Example:
    python3 scripts/run_campaign.py --params scripts/end_to_end.params --trials 10 --out runs/
"""
import argparse
import os

from sizeramsey.harness import STRATEGIES, ExperimentConfig, run_experiment
from sizeramsey.host import assemble_host
from sizeramsey.params import ParameterSet, read_params


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--params", help="key=value parameter file")
    ap.add_argument("--strategies", nargs="+", default=["all-red", "layer-flip"], choices=STRATEGIES)
    ap.add_argument("--pattern-n", type=int, default=30)
    ap.add_argument("--pattern-seed", type=int, default=11)
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()
    params = read_params(args.params) if args.params else ParameterSet()
    host = assemble_host(params, args.seed)
    for strategy in args.strategies:
        out = os.path.join(args.out, strategy) if args.out else None
        cfg = ExperimentConfig(params, ("random-cubic", args.pattern_n, args.pattern_seed), strategy, 0.5,
                               args.trials, args.seed, out)
        rep = run_experiment(cfg, host=host)
        agg = rep.aggregate
        print(f"{strategy:18s} {agg['successes']}/{agg['trials']} cases {agg['cases']} "
              f"failures {agg['failure_stages']} time {sum(rep.runtimes):.1f}s")


if __name__ == "__main__":
    main()
