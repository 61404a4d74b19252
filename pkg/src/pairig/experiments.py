"""Experiment builders, JSON configuration, orchestration and trace files.

Two experiment families are provided:

* a stochastic traffic-equilibrium complementarity problem on a two-node,
  five-arc network, solved as a sample-average problem over the
  nonnegative orthant, and
* a distributed soft-margin SVM whose margin constraints are moved into
  each agent's mapping through the quadratic-penalty gradient.

Configuration documents are strict JSON (``schema: "pairig-config/1"``);
unknown keys raise ``ConfigError``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import baselines as bl
from .geometry import Box, Polyhedron, SetSpec
from .metrics import (
    ConstantsEstimate,
    estimate_constants,
    gap_metric,
    init_terms,
    phi_metric,
    rate_bound_gap,
    rate_bound_suboptimality,
    rate_threshold,
    residual_metric,
)
from .problem import (
    AgentOracle,
    ConstraintBlock,
    ProblemMetadata,
    VIConstrainedProblem,
    build_ncp_problem,
    build_penalty_agent,
    partition_evenly,
    validate_problem,
)
from .solver import InstrumentationOptions, RateSchedule, RunOptions, RunTrace, TikhonovSchedule, log_epochs, run

SCHEMA = "pairig-config/1"
TRACE_HEADER = ["epoch", "agent", "gamma", "eta", "objective", "infeasibility", "consensus_dist", "invariant_max_residual"]


class ConfigError(ValueError):
    """Malformed experiment configuration."""


# --- traffic network -----------------------------------------------------------------

TRAFFIC_COST_MATRIX = np.array(
    [
        [0.92, 0, 0, 5, 0],
        [0, 5.92, 0, 0, 5],
        [0, 0, 10.92, 0, 0],
        [2, 0, 0, 10.92, 0],
        [0, 1, 0, 0, 15.92],
    ]
)
TRAFFIC_COST_OFFSET = np.array([1000.0, 950.0, 3000.0, 1000.0, 1300.0])
TRAFFIC_INCIDENCE = np.array([[1, 1, 1, 0, 0], [0, 0, 0, 1, 1]], dtype=float)


@dataclass(frozen=True, eq=False)
class TrafficNetworkSpec:
    """Stochastic traffic network.

    ``normalization="mean"`` scales every sample by ``1/samples`` so the
    summed objective and mapping are sample averages; ``"sum"`` keeps raw
    sums.  Explicit ``demand_samples`` (``samples x 2``) and
    ``cost_samples`` (``samples x 5``) bypass the random draw.
    """

    seed: int | None = None
    samples: int = 1000
    agents: int = 10
    cost_matrix: np.ndarray = field(default_factory=lambda: TRAFFIC_COST_MATRIX.copy())
    cost_offset: np.ndarray = field(default_factory=lambda: TRAFFIC_COST_OFFSET.copy())
    incidence: np.ndarray = field(default_factory=lambda: TRAFFIC_INCIDENCE.copy())
    demand_mean: tuple[float, float] = (210.0, 120.0)
    demand_std: tuple[float, float] = (10.0, 10.0)
    cost_std: float = 300.0
    normalization: str = "mean"
    demand_samples: np.ndarray | None = None
    cost_samples: np.ndarray | None = None

    def __post_init__(self):
        B = np.asarray(self.incidence, float)
        if B.shape != (2, 5) or not np.all((B == 0) | (B == 1)):
            raise ValueError("incidence must be a 2x5 zero-one matrix")
        if self.samples % self.agents:
            raise ValueError("sample count must be divisible by the agent count")
        if self.normalization not in ("mean", "sum"):
            raise ValueError("normalization must be 'mean' or 'sum'")

    def block_matrix(self) -> np.ndarray:
        C = np.asarray(self.cost_matrix, float)
        B = np.asarray(self.incidence, float)
        return np.block([[C, -B.T], [B, np.zeros((2, 2))]])

    def draw(self) -> tuple[np.ndarray, np.ndarray]:
        if self.demand_samples is not None and self.cost_samples is not None:
            d = np.asarray(self.demand_samples, float).reshape(self.samples, 2)
            q = np.asarray(self.cost_samples, float).reshape(self.samples, 5)
            return d, q
        if self.seed is None:
            raise ValueError("traffic problem needs an explicit seed")
        rng = np.random.default_rng(self.seed)
        d = rng.normal(self.demand_mean, self.demand_std, size=(self.samples, 2))
        q = rng.normal(self.cost_offset, self.cost_std, size=(self.samples, 5))
        return d, q


def traffic_sample_oracles(spec: TrafficNetworkSpec) -> list[AgentOracle]:
    """One unnormalized oracle per sample: ``F = Kx + (q~, -d~)``, ``f = (Ch + q~)'1``."""
    K = spec.block_matrix()
    C = np.asarray(spec.cost_matrix, float)
    c = np.concatenate([C.T @ np.ones(5), np.zeros(2)])
    d, q = spec.draw()
    return [
        AgentOracle.affine(M=K, q=np.concatenate([q[s], -d[s]]), c=c, c0=float(q[s].sum()))
        for s in range(spec.samples)
    ]


def build_traffic_problem(spec: TrafficNetworkSpec) -> VIConstrainedProblem:
    """Sample-average traffic complementarity problem over ``R^7_+``; ``x = (h, u)``."""
    oracles = traffic_sample_oracles(spec)
    if spec.normalization == "mean":
        oracles = [o.scaled(1.0 / spec.samples) for o in oracles]
    part = partition_evenly(spec.samples, spec.agents)
    return build_ncp_problem(oracles, part, ProblemMetadata(name="traffic"))


# --- SVM ----------------------------------------------------------------------------------


@dataclass(frozen=True)
class SvmDatasetSpec:
    """Synthetic two-blob classification data and its distributed SVM.

    Blob centers are ``+-separation * 1_n / sqrt(n)`` with unit-variance
    noise; labels are exactly balanced (up to one) and shuffled.
    """

    n: int = 50
    samples: int = 100
    agents: int = 20
    lam: float = 10.0
    separation: float = 1.5
    seed: int = 0
    box_radius: float = 1e3

    def __post_init__(self):
        if self.samples < self.agents:
            raise ValueError("need at least one sample per agent")
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if self.n < 1 or self.agents < 1:
            raise ValueError("n and agents must be positive")
        if not self.box_radius > 0:
            raise ValueError("box radius must be positive")


@dataclass(frozen=True, eq=False)
class SvmDataset:
    features: np.ndarray  # (samples, n)
    labels: np.ndarray  # (samples,) in {-1, +1}


def generate_synthetic_svm_data(spec: SvmDatasetSpec) -> SvmDataset:
    rng = np.random.default_rng(spec.seed)
    S = spec.samples
    labels = np.where(np.arange(S) < (S + 1) // 2, 1.0, -1.0)
    labels = rng.permutation(labels)
    center = spec.separation * np.ones(spec.n) / math.sqrt(spec.n)
    features = labels[:, None] * center + rng.standard_normal((S, spec.n))
    return SvmDataset(features, labels)


def svm_layout(spec: SvmDatasetSpec) -> tuple[slice, int, slice]:
    """Slices of ``w``, index of ``b`` and slice of ``z`` inside ``x``."""
    n = spec.n
    return slice(0, n), n, slice(n + 1, n + 1 + spec.samples)


def svm_constraint_rows(spec: SvmDatasetSpec, data: SvmDataset, idx) -> tuple[np.ndarray, np.ndarray]:
    """Rows ``G x <= h`` for samples ``idx``: margin rows then ``-z_j <= 0`` rows."""
    n, S = spec.n, spec.samples
    dim = n + 1 + S
    idx = np.asarray(idx)
    G = np.zeros((2 * idx.size, dim))
    h = np.zeros(2 * idx.size)
    for r, j in enumerate(idx):
        v, u = data.labels[j], data.features[j]
        # 1 - z_j - v_j (w'u_j + b) <= 0
        G[r, :n] = -v * u
        G[r, n] = -v
        G[r, n + 1 + j] = -1.0
        h[r] = -1.0
        G[idx.size + r, n + 1 + j] = -1.0
    return G, h


def build_svm_problem(spec: SvmDatasetSpec, data: SvmDataset | None = None) -> VIConstrainedProblem:
    """Penalty-mapping form of the distributed soft-margin SVM.

    Decision vector ``x = (w, b, z)``.  Agent ``i`` minimizes
    ``||w||^2/(2m) + (1/lam) sum_{j in S_i} z_j`` and its mapping is the
    gradient of ``0.5 sum max(0, row)^2`` over its local constraint rows.
    The set is the box ``[-R, R]^dim``.
    """
    data = data or generate_synthetic_svm_data(spec)
    n, S, m = spec.n, spec.samples, spec.agents
    dim = n + 1 + S
    if data.features.shape != (S, n) or data.labels.shape != (S,):
        raise ValueError("dataset shape does not match SvmDatasetSpec")
    cells = partition_evenly(S, m)
    Q = np.zeros((dim, dim))
    Q[np.arange(n), np.arange(n)] = 1.0 / m
    agents = []
    for cell in cells:
        c = np.zeros(dim)
        c[n + 1 + np.asarray(cell)] = 1.0 / spec.lam
        block = ConstraintBlock(dim, linear_inequalities=svm_constraint_rows(spec, data, cell))
        agents.append(build_penalty_agent(block, objective_quadratic=(Q, c, 0.0)))
    R = spec.box_radius
    meta = ProblemMetadata(name="svm")
    return VIConstrainedProblem(tuple(agents), Box(np.full(dim, -R), np.full(dim, R)), meta)


def svm_feasible_polyhedron(spec: SvmDatasetSpec, data: SvmDataset | None = None) -> Polyhedron:
    """Feasible region of the SVM constraints intersected with the box (for baselines)."""
    data = data or generate_synthetic_svm_data(spec)
    G, h = svm_constraint_rows(spec, data, np.arange(spec.samples))
    dim = G.shape[1]
    witness = np.zeros(dim)
    witness[spec.n + 1 :] = 1.0  # w = 0, b = 0, z = 1
    R = spec.box_radius
    return Polyhedron(G, h, witness, np.full(dim, -R), np.full(dim, R))


def svm_objective_problem(spec: SvmDatasetSpec, data: SvmDataset | None = None) -> VIConstrainedProblem:
    """The SVM objective alone over the feasible polyhedron (mappings zero)."""
    data = data or generate_synthetic_svm_data(spec)
    P = svm_feasible_polyhedron(spec, data)
    pen = build_svm_problem(spec, data)
    agents = tuple(AgentOracle.affine(Q=a.objective_quadratic[0], c=a.objective_quadratic[1], dim=P.dim) for a in pen.agents)
    return VIConstrainedProblem(agents, P, ProblemMetadata(name="svm-objective"))


# --- custom problems --------------------------------------------------------------------


def _set_from_json(d: dict, n: int) -> SetSpec:
    from .geometry import Ball, NonnegativeOrthant, WholeSpace

    kind = d.get("kind")
    _check_keys(d, {"kind", "lower", "upper", "center", "radius", "A", "c", "witness"}, "set")
    if kind == "box":
        lo, hi = np.broadcast_to(np.asarray(d["lower"], float), n), np.broadcast_to(np.asarray(d["upper"], float), n)
        return Box(lo.copy(), hi.copy())
    if kind == "ball":
        return Ball(np.asarray(d.get("center", np.zeros(n)), float), d["radius"])
    if kind == "orthant":
        return NonnegativeOrthant(n)
    if kind == "whole":
        return WholeSpace(n)
    if kind == "polyhedron":
        return Polyhedron(d["A"], d["c"], d["witness"], d.get("lower"), d.get("upper"))
    raise ConfigError(f"unknown set kind {kind!r}")


def load_custom_problem(path: str | Path) -> VIConstrainedProblem:
    """Affine/quadratic problem from JSON.

    ``{"agents": [{"M":..,"q":..,"Q":..,"c":..,"c0":..}, ...], "set": {...},
    "metadata": {"name":.., "strong_convexity_modulus":.., ...}}``
    """
    doc = json.loads(Path(path).read_text())
    _check_keys(doc, {"agents", "set", "metadata"}, "custom problem")
    agents = []
    for j, a in enumerate(doc["agents"]):
        _check_keys(a, {"M", "q", "Q", "c", "c0"}, f"agent {j}")
        agents.append(AgentOracle.affine(a.get("M"), a.get("q"), a.get("Q"), a.get("c"), a.get("c0", 0.0)))
    n = agents[0].dim
    meta = doc.get("metadata", {})
    _check_keys(meta, {"name", "strong_convexity_modulus", "known_optimal_value", "known_optimal_point"}, "metadata")
    md = ProblemMetadata(
        known_optimal_value=meta.get("known_optimal_value"),
        known_optimal_point=None if meta.get("known_optimal_point") is None else np.asarray(meta["known_optimal_point"], float),
        strong_convexity_modulus=meta.get("strong_convexity_modulus"),
        name=meta.get("name", Path(path).stem),
    )
    return VIConstrainedProblem(tuple(agents), _set_from_json(doc["set"], n), md)


# --- configuration --------------------------------------------------------------------


def _check_keys(d: Any, allowed: set[str], where: str, required: set[str] = frozenset()):
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected an object")
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {sorted(unknown)}")
    missing = set(required) - set(d)
    if missing:
        raise ConfigError(f"{where}: missing key(s) {sorted(missing)}")


@dataclass(frozen=True)
class ExperimentConfig:
    problem: dict
    solver: str = "pair-ig"
    schedule: dict = field(default_factory=lambda: {"kind": "rate", "gamma0": 0.1, "eta0": 0.1, "b": 0.25})
    r: float = 0.0
    epochs: int = 1000
    seed: int = 0
    output: str | None = None
    instrumentation: str = "metrics-only"
    stepsize: float | None = None
    step_rule: str = "diminishing"
    log: dict = field(default_factory=lambda: {"dense_until": 100, "ratio": 1.1})

    SOLVERS = ("pair-ig", "projected-ig", "proximal-iag", "saga")

    def __post_init__(self):
        _check_keys(self.problem, {"kind", "traffic", "svm", "path"}, "problem", {"kind"})
        if self.problem["kind"] not in ("traffic", "svm", "custom"):
            raise ConfigError(f"unknown problem kind {self.problem['kind']!r}")
        if self.problem["kind"] == "custom" and "path" not in self.problem:
            raise ConfigError("custom problem needs 'path'")
        if self.solver not in self.SOLVERS:
            raise ConfigError(f"unknown solver {self.solver!r}")
        if self.instrumentation not in ("metrics-only", "full-invariants"):
            raise ConfigError(f"unknown instrumentation level {self.instrumentation!r}")
        if self.epochs < 0:
            raise ConfigError("epochs must be nonnegative")
        if not 0 <= self.r < 1:
            raise ConfigError("r must lie in [0, 1)")
        _check_keys(self.log, {"dense_until", "ratio"}, "log")
        if self.solver == "pair-ig":
            self.make_schedule()
        elif self.stepsize is None:
            raise ConfigError(f"solver {self.solver} needs 'stepsize'")

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        allowed = {"schema", "problem", "solver", "schedule", "r", "epochs", "seed", "output", "instrumentation", "stepsize", "step_rule", "log"}
        _check_keys(doc, allowed, "config", {"schema", "problem"})
        if doc["schema"] != SCHEMA:
            raise ConfigError(f"unsupported schema {doc['schema']!r}; expected {SCHEMA!r}")
        kw = {k: v for k, v in doc.items() if k != "schema"}
        try:
            return cls(**kw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        return cls.from_dict(doc)

    def to_dict(self) -> dict:
        d = {"schema": SCHEMA}
        d.update(asdict(self))
        return d

    def make_schedule(self) -> RateSchedule | TikhonovSchedule:
        s = dict(self.schedule)
        kind = s.pop("kind", "rate")
        try:
            if kind == "rate":
                _check_keys(s, {"gamma0", "eta0", "b"}, "schedule", {"gamma0", "eta0"})
                return RateSchedule(**s)
            if kind == "tikhonov":
                _check_keys(s, {"gamma", "eta", "a", "b", "Gamma"}, "schedule", {"gamma", "eta", "a", "b", "Gamma"})
                return TikhonovSchedule(**s)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        raise ConfigError(f"unknown schedule kind {kind!r}")


def build_problem(config: ExperimentConfig) -> tuple[VIConstrainedProblem, dict]:
    """Problem instance plus a description for the sidecar."""
    p = config.problem
    kind = p["kind"]
    if kind == "traffic":
        opts = dict(p.get("traffic", {}))
        _check_keys(opts, {"samples", "agents", "normalization", "seed", "cost_std", "demand_mean", "demand_std"}, "problem.traffic")
        opts.setdefault("seed", config.seed)
        spec = TrafficNetworkSpec(**{k: (tuple(v) if isinstance(v, list) else v) for k, v in opts.items()})
        return build_traffic_problem(spec), {"kind": kind, **opts}
    if kind == "svm":
        opts = dict(p.get("svm", {}))
        _check_keys(opts, {"n", "samples", "agents", "lam", "separation", "seed", "box_radius"}, "problem.svm")
        opts.setdefault("seed", config.seed)
        spec = SvmDatasetSpec(**opts)
        info = {"kind": kind, **asdict(spec)}
        if config.solver == "pair-ig":
            return build_svm_problem(spec), info
        return svm_objective_problem(spec), info
    return load_custom_problem(p["path"]), {"kind": kind, "path": p["path"]}


def default_metric(problem: VIConstrainedProblem, kind: str):
    if kind == "traffic":
        return phi_metric, "phi"
    if kind == "svm":
        return (residual_metric, "constraint-residual") if all(a.infeasibility is not None for a in problem.agents) else (None, "none")
    if problem.global_affine() is not None and problem.set.compact:
        return gap_metric("affine-exact"), "dual-gap"
    if problem.set.compact:
        return gap_metric("sampled"), "dual-gap-sampled"
    return None, "none"


# --- trace files ---------------------------------------------------------------------------


def _fmt(v: float) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(v)


def trace_to_csv(trace: RunTrace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_HEADER)
    for rec in trace.records:
        for j in range(len(rec.objective)):
            w.writerow(
                [
                    rec.epoch,
                    j + 1,
                    _fmt(rec.gamma),
                    _fmt(rec.eta),
                    _fmt(rec.objective[j]),
                    _fmt(rec.infeasibility[j]),
                    _fmt(rec.consensus_dist[j]),
                    _fmt(rec.invariant_max_residual),
                ]
            )
    if trace.truncated:
        buf.write("# truncated: " + trace.meta.get("error", "run stopped early").replace("\n", " ") + "\n")
    return buf.getvalue()


def read_trace_csv(path: str | Path) -> list[dict]:
    rows = []
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    for row in csv.DictReader(lines):
        rows.append({k: (int(v) if k in ("epoch", "agent") else float(v)) for k, v in row.items()})
    return rows


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


@dataclass
class ExperimentResult:
    trace: RunTrace
    csv_path: Path | None
    sidecar_path: Path | None
    sidecar: dict
    ok: bool


def _constants_or_none(problem: VIConstrainedProblem) -> ConstantsEstimate | None:
    if not problem.set.compact:
        return None
    return estimate_constants(problem, samples=200)


def _bounds_summary(problem, trace, schedule, constants, r) -> dict:
    if constants is None or not isinstance(schedule, RateSchedule) or trace.N < rate_threshold(r):
        return {}
    m = problem.m
    out = {}
    for i in (1, m):
        init = init_terms(problem, trace, i)
        out[f"agent_{i}"] = {
            "suboptimality": rate_bound_suboptimality(constants, schedule.gamma0, schedule.eta0, schedule.b, r, m, i, trace.N, init),
            "gap": rate_bound_gap(constants, schedule.gamma0, schedule.eta0, schedule.b, r, m, i, trace.N, init),
        }
    return out


def run_experiment(config: ExperimentConfig, output: str | Path | None = None) -> ExperimentResult:
    """Build, validate, solve, measure and persist one configured run.

    Returns ``ok=False`` when full-invariant instrumentation recorded a
    violation.  Validation findings are recorded in the sidecar but do not
    stop the run.
    """
    problem, info = build_problem(config)
    kind = config.problem["kind"]
    metric, metric_name = default_metric(problem, kind)
    box = None if problem.set.compact else Box(np.zeros(problem.dim), np.full(problem.dim, 1e3))
    checked = problem
    if kind == "svm" and config.solver != "pair-ig":
        # same objectives on the box; sampling the polyhedron would need a projection per point
        checked = build_svm_problem(SvmDatasetSpec(**{k: info[k] for k in asdict(SvmDatasetSpec())}))
    report = validate_problem(checked, sample_count=200, tol=1e-8, sampling_box=box, seed=config.seed)
    constants = None
    dense, ratio = config.log.get("dense_until", 100), config.log.get("ratio", 1.1)
    log_at = log_epochs(config.epochs, dense, ratio).tolist()
    schedule = None
    if config.solver == "pair-ig":
        schedule = config.make_schedule()
        instrument = None
        if config.instrumentation == "full-invariants":
            if not problem.set.compact:
                raise ConfigError("full-invariants instrumentation needs a compact set")
            constants = _constants_or_none(problem)
            instrument = InstrumentationOptions(constants.C_f, constants.C_F)
        opts = RunOptions(log_at=log_at, infeasibility=metric, instrument=instrument, on_nonfinite="truncate")
        trace = run(problem, schedule, config.r, config.epochs, seed=config.seed, options=opts).trace
    else:
        bc = bl.BaselineConfig(config.solver, config.stepsize, config.step_rule, config.epochs, config.seed, log_at=log_at)
        metric_b = metric
        if kind == "svm":
            # baselines run on the polyhedron; report the same constraint residual as pair-IG
            metric_b = lambda p, x: residual_metric(checked, x)
            metric_name = "constraint-residual"
        trace = bl.BASELINES[config.solver](problem, None, bc, metric=metric_b)
    ok = True
    if trace.invariant_worst:
        ok = not trace.invariant_worst.get("violations")
    if constants is None and problem.set.compact and config.solver == "pair-ig":
        constants = _constants_or_none(problem)
    sidecar = {
        "config": config.to_dict(),
        "problem": info,
        "dimension": problem.dim,
        "agents": problem.m,
        "infeasibility_metric": metric_name,
        "validation": {"passed": report.passed, "summary": report.summary(), "violations": [asdict(v) for v in report.violations]},
        "constants": None if constants is None else asdict(constants),
        "bounds": _bounds_summary(problem, trace, schedule, constants, config.r),
        "invariants": {k: v for k, v in trace.invariant_worst.items()},
        "truncated": trace.truncated,
        "records": len(trace.records),
    }
    if kind == "svm":
        sidecar["box_radius"] = info["box_radius"]
    if isinstance(problem.set, Polyhedron):
        sidecar["projection"] = {"method": "dykstra", "tol": problem.set.tol, "max_sweeps": problem.set.max_sweeps}
    out = output or config.output
    csv_path = side_path = None
    if out is not None:
        csv_path = Path(out)
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        csv_path.write_text(trace_to_csv(trace))
        side_path = csv_path.with_suffix(csv_path.suffix + ".json")
        side_path.write_text(json.dumps(_jsonable(sidecar), indent=2, sort_keys=True) + "\n")
    return ExperimentResult(trace, csv_path, side_path, sidecar, ok)


__all__ = [
    "SCHEMA",
    "TRACE_HEADER",
    "ConfigError",
    "TRAFFIC_COST_MATRIX",
    "TRAFFIC_COST_OFFSET",
    "TRAFFIC_INCIDENCE",
    "TrafficNetworkSpec",
    "traffic_sample_oracles",
    "build_traffic_problem",
    "SvmDatasetSpec",
    "SvmDataset",
    "generate_synthetic_svm_data",
    "build_svm_problem",
    "svm_feasible_polyhedron",
    "svm_objective_problem",
    "load_custom_problem",
    "ExperimentConfig",
    "ExperimentResult",
    "build_problem",
    "run_experiment",
    "trace_to_csv",
    "read_trace_csv",
]
