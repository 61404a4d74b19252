"""Run pair-IG and the three baselines on one synthetic SVM dataset.

Usage: python3 scripts/svm_comparison.py --out results/svm [--n 50] [--samples 100] [--epochs 10000]
"""

import argparse
from pathlib import Path

from pairig.experiments import SCHEMA, ExperimentConfig, run_experiment


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="results/svm", help="output directory")
    parser.add_argument("--n", type=int, default=50, help="feature dimension (default 50)")
    parser.add_argument("--samples", type=int, default=100, help="sample count (default 100)")
    parser.add_argument("--agents", type=int, default=20, help="agent count (default 20)")
    parser.add_argument("--epochs", type=int, default=10_000, help="epoch count (default 10000)")
    parser.add_argument("--seed", type=int, default=0, help="data seed (default 0)")
    parser.add_argument("--gamma0", type=float, default=0.02, help="pair-IG initial step (default 0.02)")
    parser.add_argument("--eta0", type=float, default=1.0, help="pair-IG initial regularization weight (default 1)")
    parser.add_argument("--baseline-step", type=float, default=0.01, help="baseline step size (default 0.01)")
    parser.add_argument("--baseline-epochs", type=int, default=200, help="baseline epoch count; each step projects onto the polyhedron (default 200)")
    args = parser.parse_args(argv)

    problem = {"kind": "svm", "svm": {"n": args.n, "samples": args.samples, "agents": args.agents}}
    common = {"schema": SCHEMA, "problem": problem, "epochs": args.epochs, "seed": args.seed}
    runs = {
        "pair-ig": {"schedule": {"kind": "rate", "gamma0": args.gamma0, "eta0": args.eta0, "b": 0.25}},
        "projected-ig": {"stepsize": args.baseline_step, "step_rule": "diminishing"},
        "proximal-iag": {"stepsize": args.baseline_step, "step_rule": "constant"},
        "saga": {"stepsize": args.baseline_step, "step_rule": "constant"},
    }
    out = Path(args.out)
    for solver, extra in runs.items():
        epochs = args.epochs if solver == "pair-ig" else args.baseline_epochs
        config = ExperimentConfig.from_dict({**common, "solver": solver, "epochs": epochs, **extra})
        result = run_experiment(config, out / f"svm_{solver}.csv")
        rec = result.trace.final()
        print(f"{solver}: residual {rec.infeasibility[-1]:.3e}, objective {rec.objective[-1]:.6g} -> {result.csv_path}")


if __name__ == "__main__":
    main()
