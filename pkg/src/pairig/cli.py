"""Command-line interface: ``pairig {run,validate,bounds,oracle}``.

Exit codes: 0 success, 1 a check failed (invariant violation, validation
finding), 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .baselines import brute_force_affine_vi
from .experiments import ConfigError, ExperimentConfig, build_problem, run_experiment
from .geometry import Box
from .metrics import ConstantsEstimate, InitTerms, rate_bound_gap, rate_bound_suboptimality, rate_threshold
from .problem import validate_problem

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


def _vector(text: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.split(",")], dtype=float)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _matrix(text: str) -> np.ndarray:
    """``identityN``, ``zerosN`` or rows separated by ``;`` (e.g. ``1,0;0,2``)."""
    for prefix, make in (("identity", np.eye), ("zeros", lambda n: np.zeros((n, n)))):
        if text.startswith(prefix):
            try:
                return make(int(text[len(prefix):]))
            except ValueError:
                raise argparse.ArgumentTypeError(f"bad matrix shorthand {text!r}") from None
    rows = [_vector(r) for r in text.split(";")]
    if len({len(r) for r in rows}) != 1:
        raise argparse.ArgumentTypeError("matrix rows have different lengths")
    return np.vstack(rows)


def _fmt_point(x: np.ndarray) -> str:
    vals = [float(np.round(v, 10)) + 0.0 for v in x]
    return "(" + ", ".join(f"{v:g}" for v in vals) + ")"


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pairig", description="Incremental gradient solver for VI-constrained optimization.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one or more JSON configs and write trace CSV files")
    p.add_argument("--config", nargs="+", required=True, help="config file path(s), schema pairig-config/1")
    p.add_argument("--out", help="trace CSV path (single config only; default: the config's 'output')")
    p.add_argument("--jobs", type=_positive_int, default=1, help="number of configs run concurrently (default 1)")

    p = sub.add_parser("validate", help="build the configured problem and run sampled convexity/monotonicity checks")
    p.add_argument("--config", required=True, help="config file path")
    p.add_argument("--samples", type=_positive_int, default=200, help="number of sampled points (default 200)")
    p.add_argument("--tol", type=float, default=1e-8, help="violation tolerance (default 1e-8)")
    p.add_argument("--seed", type=int, default=0, help="sampling seed (default 0)")
    p.add_argument("--box-radius", type=float, default=1e3, help="sampling box for unbounded sets (default 1e3)")

    p = sub.add_parser("bounds", help="evaluate the suboptimality and gap rate bounds for given constants")
    p.add_argument("--N", type=int, required=True, help="epoch count")
    p.add_argument("--C-f", dest="C_f", type=float, required=True, help="objective subgradient constant")
    p.add_argument("--C-F", dest="C_F", type=float, required=True, help="mapping norm constant")
    p.add_argument("--M-X", dest="M_X", type=float, default=1.0, help="bound on ||x|| over the set (default 1)")
    p.add_argument("--M-f", dest="M_f", type=float, default=0.0, help="bound on |f| over the set (default 0)")
    p.add_argument("--gamma0", type=float, default=1.0, help="initial step size (default 1)")
    p.add_argument("--eta0", type=float, default=1.0, help="initial regularization weight (default 1)")
    p.add_argument("--b", type=float, default=0.25, help="regularization decay exponent in (0, 0.5) (default 0.25)")
    p.add_argument("--r", type=float, default=0.0, help="averaging exponent in [0, 1) (default 0)")
    p.add_argument("--m", type=_positive_int, default=1, help="number of agents (default 1)")
    p.add_argument("--agent", type=_positive_int, default=None, help="one-based agent index (default m)")

    p = sub.add_parser("oracle", help="solve a small affine VI over a box by enumeration")
    p.add_argument("--M", type=_matrix, required=True, help="matrix: identityN, zerosN or rows like '1,0;0,1'")
    p.add_argument("--q", type=_vector, required=True, help="offset vector, e.g. --q=-0.5,3")
    p.add_argument("--box", type=_vector, required=True, help="'lo,hi' applied to every coordinate")
    return parser


def _run_one(path: str, out: str | None) -> tuple[str, bool, str]:
    config = ExperimentConfig.load(path)
    result = run_experiment(config, out)
    where = str(result.csv_path) if result.csv_path else "(not written: no output path)"
    return path, result.ok, where


def _cmd_run(args) -> int:
    if args.out is not None and len(args.config) > 1:
        print("error: --out needs exactly one --config", file=sys.stderr)
        return EXIT_USAGE
    for path in args.config:
        if not Path(path).is_file():
            print(f"error: config {path} not found", file=sys.stderr)
            return EXIT_USAGE
    try:
        if args.jobs > 1 and len(args.config) > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                results = list(pool.map(_run_one, args.config, [None] * len(args.config)))
        else:
            results = [_run_one(p, args.out) for p in args.config]
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    status = EXIT_OK
    for path, ok, where in results:
        print(f"{path}: {'ok' if ok else 'INVARIANT VIOLATION'} -> {where}")
        if not ok:
            status = EXIT_FAILED
    return status


def _cmd_validate(args) -> int:
    try:
        problem, _ = build_problem(ExperimentConfig.load(args.config))
    except (ConfigError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    box = None
    if not problem.set.compact:
        box = Box(np.zeros(problem.dim), np.full(problem.dim, args.box_radius))
    report = validate_problem(problem, sample_count=args.samples, tol=args.tol, sampling_box=box, seed=args.seed)
    print(report.summary())
    return EXIT_OK if report.passed else EXIT_FAILED


def _cmd_bounds(args) -> int:
    threshold = rate_threshold(args.r) if 0 <= args.r < 1 else float("nan")
    if not args.N >= threshold:
        print(f"refused: N={args.N} is below the validity threshold {threshold:.6g} for r={args.r}", file=sys.stderr)
        return EXIT_USAGE
    agent = args.m if args.agent is None else args.agent
    try:
        constants = ConstantsEstimate.given(args.C_f, args.C_F, args.M_X, args.M_f)
        common = (constants, args.gamma0, args.eta0, args.b, args.r, args.m, agent, args.N, InitTerms())
        sub = rate_bound_suboptimality(*common)
        gap = rate_bound_gap(*common)
    except ValueError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(f"suboptimality_bound {sub!r}")
    print(f"gap_bound {gap!r}")
    return EXIT_OK


def _cmd_oracle(args) -> int:
    M, q, box = args.M, args.q, args.box
    n = len(q)
    if M.shape != (n, n):
        print(f"error: M has shape {M.shape}, q has length {n}", file=sys.stderr)
        return EXIT_USAGE
    if box.size != 2 or not box[0] <= box[1]:
        print("error: --box expects 'lo,hi' with lo <= hi", file=sys.stderr)
        return EXIT_USAGE
    try:
        x = brute_force_affine_vi(M, q, Box(np.full(n, box[0]), np.full(n, box[1])))
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    print(_fmt_point(x))
    return EXIT_OK


def cli_main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handler = {"run": _cmd_run, "validate": _cmd_validate, "bounds": _cmd_bounds, "oracle": _cmd_oracle}[args.command]
    return handler(args)


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
