"""Run the traffic experiment for the four (gamma0, eta0) panels and write one trace per panel.

Usage: python3 scripts/traffic_panels.py --out results/traffic [--epochs 10000] [--seed 0]
"""

import argparse
from pathlib import Path

from pairig.experiments import SCHEMA, ExperimentConfig, run_experiment

PANELS = [(0.1, 0.1), (0.1, 1.0), (1.0, 0.1), (1.0, 1.0)]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="results/traffic", help="output directory")
    parser.add_argument("--epochs", type=int, default=10_000, help="epoch count (default 10000)")
    parser.add_argument("--seed", type=int, default=0, help="sampling seed (default 0)")
    parser.add_argument("--samples", type=int, default=1000, help="sample count (default 1000)")
    parser.add_argument("--agents", type=int, default=10, help="agent count (default 10)")
    parser.add_argument("--normalization", choices=["mean", "sum"], default="mean", help="sample scaling (default mean)")
    args = parser.parse_args(argv)

    out = Path(args.out)
    for g0, e0 in PANELS:
        config = ExperimentConfig.from_dict(
            {
                "schema": SCHEMA,
                "problem": {
                    "kind": "traffic",
                    "traffic": {"samples": args.samples, "agents": args.agents, "normalization": args.normalization},
                },
                "schedule": {"kind": "rate", "gamma0": g0, "eta0": e0, "b": 0.25},
                "r": 0.0,
                "epochs": args.epochs,
                "seed": args.seed,
            }
        )
        result = run_experiment(config, out / f"traffic_g{g0:g}_e{e0:g}.csv")
        rec0, rec = result.trace.records[0], result.trace.final()
        print(
            f"gamma0={g0:g} eta0={e0:g}: phi {rec0.infeasibility.max():.3e} -> {rec.infeasibility.max():.3e}, "
            f"objective (agent 1) {rec.objective[0]:.6g} -> {result.csv_path}"
        )


if __name__ == "__main__":
    main()
