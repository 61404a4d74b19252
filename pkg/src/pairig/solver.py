"""Averaged iteratively regularized incremental subgradient method.

Each epoch ``k`` passes the iterate around the ring of agents.  Agent ``i``
takes a projected step along ``F_i + eta_k * subgradient(f_i)`` with
stepsize ``gamma_k``, then folds its new local iterate into its own
weighted running average with weight proportional to ``gamma_{k+1}^r``.

Index conventions (zero-based in code):

* ``state.local[j]`` holds the iterate before agent ``j`` acts in the
  current epoch, so ``local[0]`` is the epoch's starting point and
  ``local[m]`` is the starting point of the next epoch.
* ``state.avg[i]`` is agent ``i``'s averaged iterate.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .problem import VIConstrainedProblem, eval_global_objective, eval_global_mapping


class ScheduleError(ValueError):
    """Invalid stepsize/regularization schedule."""


class NonFiniteIterateError(FloatingPointError):
    """An oracle produced NaN or Inf during a step."""


# --- schedules ----------------------------------------------------------------


@dataclass(frozen=True)
class RateSchedule:
    """``gamma_k = gamma0 / sqrt(k+1)``, ``eta_k = eta0 / (k+1)^b``."""

    gamma0: float
    eta0: float
    b: float = 0.25

    def __post_init__(self):
        if not (self.gamma0 > 0 and self.eta0 > 0):
            raise ScheduleError("gamma0 and eta0 must be positive")
        if not 0 < self.b < 0.5:
            raise ScheduleError(f"b must lie in (0, 0.5), got {self.b}")

    def gamma(self, k):
        return self.gamma0 / np.sqrt(np.asarray(k, dtype=float) + 1.0)

    def eta(self, k):
        return self.eta0 / (np.asarray(k, dtype=float) + 1.0) ** self.b


@dataclass(frozen=True)
class TikhonovSchedule:
    """``gamma_k = gamma / (k+Gamma)^a``, ``eta_k = eta / (k+Gamma)^b``."""

    gamma: float
    eta: float
    a: float
    b: float
    Gamma: float

    def __post_init__(self):
        if not (self.gamma > 0 and self.eta > 0 and self.a > 0 and self.b > 0):
            raise ScheduleError("gamma, eta, a, b must be positive")
        if self.Gamma < 1:
            raise ScheduleError("Gamma must be at least 1")

    def gamma_at(self, k):
        return self.gamma / (np.asarray(k, dtype=float) + self.Gamma) ** self.a

    def eta_at(self, k):
        return self.eta / (np.asarray(k, dtype=float) + self.Gamma) ** self.b

    def structural_violations(self, mu_min: float | None = None) -> list[str]:
        """Closed-form prerequisites; the two Gamma tests need ``mu_min``."""
        out = []
        a, b, G = self.a, self.b, self.Gamma
        if not a > b:
            out.append("a > b")
        if not a + b < 1:
            out.append("a + b < 1")
        if not 3 * a + b < 2:
            out.append("3a + b < 2")
        if mu_min is not None and mu_min > 0:
            gem = self.gamma * self.eta * mu_min
            if not G ** (a + b) >= 2 * gem:
                out.append("Gamma^(a+b) >= 2 gamma eta mu")
            if not G ** (1 - a - b) >= 4 / gem:
                out.append("Gamma^(1-a-b) >= 4 / (gamma eta mu)")
        return out


Schedule = RateSchedule | TikhonovSchedule


def schedule_values(schedule: Schedule, k):
    """Return ``(gamma_k, eta_k)``; ``k`` may be an integer or an array."""
    if np.any(np.asarray(k) < 0):
        raise ValueError("epoch index must be nonnegative")
    if isinstance(schedule, RateSchedule):
        g, e = schedule.gamma(k), schedule.eta(k)
    elif isinstance(schedule, TikhonovSchedule):
        g, e = schedule.gamma_at(k), schedule.eta_at(k)
    else:
        raise TypeError(f"unknown schedule type {type(schedule).__name__}")
    if np.ndim(g) == 0:
        return float(g), float(e)
    return g, e


def gammas(schedule: Schedule, ks) -> np.ndarray:
    return np.asarray(schedule_values(schedule, np.asarray(ks))[0], dtype=float)


def averaging_weights(schedule: Schedule, r: float, N: int) -> np.ndarray:
    """``lambda_{k,N} = gamma_k^r / sum_{j<=N} gamma_j^r`` for ``k = 0..N``."""
    _check_r(r)
    if N < 0:
        raise ValueError("N must be nonnegative")
    w = gammas(schedule, np.arange(N + 1)) ** r
    return w / math.fsum(w)


def _check_r(r):
    if not 0 <= r < 1:
        raise ScheduleError(f"averaging exponent r must lie in [0, 1), got {r}")


# --- state ----------------------------------------------------------------------


@dataclass
class SolverState:
    """Mutable solver state for one run.

    ``S`` is the running weight sum ``sum_{t<=k} gamma_t^r`` kept with a
    Neumaier compensation term ``S_comp``; ``S_prev`` is the value before
    the latest advance.
    """

    k: int
    local: np.ndarray  # (m+1, n)
    avg: np.ndarray  # (m, n)
    r: float
    S: float
    S_comp: float = 0.0
    S_prev: float = float("nan")

    @property
    def m(self) -> int:
        return self.avg.shape[0]

    def cycle_start(self) -> np.ndarray:
        """Starting iterate of the current epoch (``x_k`` in the analysis)."""
        return self.local[0]

    def weight_sum(self) -> float:
        return self.S + self.S_comp

    def advance_weight(self, w: float) -> None:
        """Neumaier-compensated ``S += w``."""
        self.S_prev = self.weight_sum()
        t = self.S + w
        if abs(self.S) >= abs(w):
            self.S_comp += (self.S - t) + w
        else:
            self.S_comp += (w - t) + self.S
        self.S = t


def initial_state(problem: VIConstrainedProblem, schedule: Schedule, r: float, x0, avg0=None) -> SolverState:
    m, n = problem.m, problem.dim
    x0 = np.asarray(x0, dtype=float).reshape(n)
    if not problem.set.contains(x0, tol=1e-9):
        raise ValueError("initial point is not in the set")
    if avg0 is None:
        avg = np.tile(x0, (m, 1))
    else:
        avg = np.array(avg0, dtype=float).reshape(m, n)
        for i, p in enumerate(avg):
            if not problem.set.contains(p, tol=1e-9):
                raise ValueError(f"initial average of agent {i} is not in the set")
    local = np.empty((m + 1, n))
    local[0] = x0
    gamma0 = schedule_values(schedule, 0)[0]
    return SolverState(k=0, local=local, avg=avg, r=float(r), S=float(gamma0**r))


def step_agent(state: SolverState, i: int, problem: VIConstrainedProblem, schedule: Schedule) -> np.ndarray:
    """Agent ``i`` (zero-based) updates ``local[i+1]`` from ``local[i]``."""
    gamma, eta = schedule_values(schedule, state.k)
    agent = problem.agents[i]
    x = state.local[i]
    Fx = agent.mapping(x)
    gx = agent.subgradient(x)
    z = x - gamma * (Fx + eta * gx)
    if not np.all(np.isfinite(z)):
        raise NonFiniteIterateError(
            f"non-finite step at epoch {state.k}, agent {i}: "
            f"|F|={np.linalg.norm(Fx):.3g}, |g|={np.linalg.norm(gx):.3g}, gamma={gamma:.3g}, eta={eta:.3g}"
        )
    state.local[i + 1] = problem.set.project(z)
    return state.local[i + 1]


def update_average(state: SolverState, i: int, schedule: Schedule) -> np.ndarray:
    """Fold ``local[i+1]`` into agent ``i``'s average.

    Requires the weight sum to have been advanced to epoch ``k+1`` first.
    """
    S_next = state.weight_sum()
    w_next = schedule_values(schedule, state.k + 1)[0] ** state.r
    state.avg[i] = (state.S_prev / S_next) * state.avg[i] + (w_next / S_next) * state.local[i + 1]
    return state.avg[i]


def run_epoch(state: SolverState, problem: VIConstrainedProblem, schedule: Schedule) -> None:
    for i in range(problem.m):
        step_agent(state, i, problem, schedule)
    state.advance_weight(schedule_values(schedule, state.k + 1)[0] ** state.r)
    for i in range(problem.m):
        update_average(state, i, schedule)


def finish_epoch(state: SolverState) -> None:
    state.local[0] = state.local[-1]
    state.k += 1


# --- logging --------------------------------------------------------------------


def log_epochs(N: int, dense_until: int = 100, ratio: float = 1.1) -> np.ndarray:
    """Every epoch up to ``dense_until``, then a geometric stride; always includes ``N``."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    ks = list(range(min(N, dense_until) + 1))
    k = float(dense_until)
    while True:
        k *= ratio
        ki = int(math.ceil(k))
        if ki >= N:
            break
        if ki > ks[-1]:
            ks.append(ki)
    if ks[-1] != N:
        ks.append(N)
    return np.array(ks, dtype=int)


Metric = Callable[[VIConstrainedProblem, np.ndarray], float]


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    gamma: float
    eta: float
    objective: np.ndarray  # f at each agent's average
    infeasibility: np.ndarray  # metric at each agent's average (nan when unset)
    consensus_dist: np.ndarray  # ||avg_i - avg_m||
    invariant_max_residual: float  # max(lhs - rhs) over instrumented checks; nan when off
    elapsed: float
    avg: np.ndarray | None = None


@dataclass(frozen=True)
class RunTrace:
    """Immutable log of a run.

    ``history`` (only with ``record_history``) has shape ``(N+1, m+1, n)``:
    ``history[k, j]`` is the iterate before agent ``j`` acts in epoch ``k``;
    row ``N`` holds only the final starting point at index 0.
    """

    records: tuple[EpochRecord, ...]
    initial_avg: np.ndarray
    x0: np.ndarray
    r: float
    N: int
    schedule: Schedule | None
    history: np.ndarray | None = None
    invariant_worst: dict = field(default_factory=dict)
    truncated: bool = False
    method: str = "pair-ig"
    meta: dict = field(default_factory=dict)

    @property
    def epochs(self) -> np.ndarray:
        return np.array([rec.epoch for rec in self.records])

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(rec, name) for rec in self.records])

    def final(self) -> EpochRecord:
        return self.records[-1]


@dataclass(frozen=True)
class InstrumentationOptions:
    """Runtime checks of the per-epoch inequalities.

    ``C_f`` and ``C_F`` are the constants of the neighbor-distance and
    descent inequalities; ``test_points`` are the fixed comparison points
    ``y`` for the descent inequality.
    """

    C_f: float
    C_F: float
    test_points: np.ndarray | None = None
    neighbor_slack: float = 1e-9
    descent_slack: float = 1e-8


@dataclass(frozen=True)
class RunOptions:
    log_at: Sequence[int] | str = "all"  # "all", "geometric" or explicit epochs
    infeasibility: Metric | None = None
    record_history: bool = False
    record_avg: bool = False
    instrument: InstrumentationOptions | None = None
    fail_fast: bool = False
    on_nonfinite: str = "raise"  # or "truncate": return the partial trace


@dataclass
class RunResult:
    trace: RunTrace
    state: SolverState


def _log_set(option, N: int) -> set[int]:
    if isinstance(option, str):
        if option == "all":
            return set(range(N + 1))
        if option == "geometric":
            return set(log_epochs(N).tolist())
        raise ValueError(f"unknown log policy {option!r}")
    ks = {int(k) for k in option if 0 <= int(k) <= N}
    ks.add(N)
    return ks


def _record(problem, state, schedule, options, inv_residual, t0) -> EpochRecord:
    gamma, eta = schedule_values(schedule, state.k)
    objs = np.array([eval_global_objective(problem, p) for p in state.avg])
    if options.infeasibility is not None:
        infs = np.array([options.infeasibility(problem, p) for p in state.avg])
    else:
        infs = np.full(problem.m, np.nan)
    cons = np.linalg.norm(state.avg - state.avg[-1], axis=1)
    return EpochRecord(
        epoch=state.k,
        gamma=gamma,
        eta=eta,
        objective=objs,
        infeasibility=infs,
        consensus_dist=cons,
        invariant_max_residual=inv_residual,
        elapsed=time.perf_counter() - t0,
        avg=state.avg.copy() if options.record_avg else None,
    )


class _Checker:
    """Evaluates the neighbor-distance and descent inequalities for one epoch."""

    def __init__(self, problem, opts: InstrumentationOptions):
        self.problem = problem
        self.opts = opts
        ys = np.empty((0, problem.dim)) if opts.test_points is None else np.atleast_2d(opts.test_points)
        self.ys = ys
        self.fy = np.array([eval_global_objective(problem, y) for y in ys])
        self.Fy = np.array([eval_global_mapping(problem, y) for y in ys]).reshape(len(ys), problem.dim)
        self.worst = {"neighbor_a": -np.inf, "neighbor_b": -np.inf, "descent": -np.inf}
        self.violations: list[tuple[str, int, float]] = []

    def check(self, k: int, local: np.ndarray, gamma: float, eta: float) -> float:
        m = self.problem.m
        o = self.opts
        step = gamma * (o.C_F + eta * o.C_f) / m
        xk, xnext = local[0], local[m]
        idx = np.arange(m + 1)
        res_a = np.linalg.norm(local - xk, axis=1) - idx * step
        res_b = np.linalg.norm(local[1:] - xnext, axis=1) - (m - np.arange(1, m + 1)) * step
        worst = max(res_a.max(), res_b.max())
        self.worst["neighbor_a"] = max(self.worst["neighbor_a"], res_a.max())
        self.worst["neighbor_b"] = max(self.worst["neighbor_b"], res_b.max())
        if res_a.max() > o.neighbor_slack or res_b.max() > o.neighbor_slack:
            self.violations.append(("neighbor", k, worst))
        if len(self.ys):
            fxk = eval_global_objective(self.problem, xk)
            lhs = 2 * gamma * (eta * (fxk - self.fy) + self.Fy @ xk - np.einsum("ij,ij->i", self.Fy, self.ys))
            rhs = (
                np.sum((xk - self.ys) ** 2, axis=1)
                - np.sum((xnext - self.ys) ** 2, axis=1)
                + gamma**2 * (o.C_F + eta * o.C_f) ** 2
            )
            # both sides of the stated inequality carry gamma^(r-1); divided out here
            res_d = float(np.max(lhs - rhs))
            self.worst["descent"] = max(self.worst["descent"], res_d)
            if res_d > o.descent_slack:
                self.violations.append(("descent", k, res_d))
            worst = max(worst, res_d)
        return float(worst)


def run(
    problem: VIConstrainedProblem,
    schedule: Schedule,
    r: float = 0.0,
    N: int = 100,
    x0=None,
    avg0=None,
    seed: int | None = 0,
    options: RunOptions | None = None,
) -> RunResult:
    """Run ``N`` epochs and return the trace and final state.

    Parameters
    ----------
    problem : VIConstrainedProblem
    schedule : RateSchedule or TikhonovSchedule
    r : float
        Averaging exponent in ``[0, 1)``.
    N : int
        Number of epochs.
    x0 : array_like, optional
        Starting point (defaults to the projection of the origin).
    avg0 : array_like, optional
        ``(m, n)`` initial averages; defaults to ``x0`` for every agent.
    seed : int, optional
        Seed for instrumentation test points when none are supplied.
    options : RunOptions, optional
    """
    options = options or RunOptions()
    _check_r(r)
    if N < 0:
        raise ValueError("N must be nonnegative")
    if isinstance(schedule, TikhonovSchedule):
        bad = schedule.structural_violations(problem.metadata.strong_convexity_modulus)
        if bad:
            raise ScheduleError("Tikhonov schedule violates: " + "; ".join(bad))
    elif not isinstance(schedule, RateSchedule):
        raise ScheduleError(f"unknown schedule type {type(schedule).__name__}")
    if x0 is None:
        x0 = problem.set.project(np.zeros(problem.dim))
    state = initial_state(problem, schedule, r, x0, avg0)
    initial_avg = state.avg.copy()
    x_start = state.local[0].copy()

    checker = None
    if options.instrument is not None:
        inst = options.instrument
        if inst.test_points is None:
            rng = np.random.default_rng(seed)
            from .geometry import sample_points

            pts = sample_points(problem.set, rng, 10) if problem.set.compact else np.empty((0, problem.dim))
            inst = InstrumentationOptions(inst.C_f, inst.C_F, pts, inst.neighbor_slack, inst.descent_slack)
        checker = _Checker(problem, inst)

    log_set = _log_set(options.log_at, N)
    history = np.full((N + 1, problem.m + 1, problem.dim), np.nan) if options.record_history else None
    t0 = time.perf_counter()
    records = []
    truncated = False
    error = None
    inv = np.nan
    if 0 in log_set:
        records.append(_record(problem, state, schedule, options, np.nan, t0))
    try:
        for _ in range(N):
            run_epoch(state, problem, schedule)
            if history is not None:
                history[state.k] = state.local
            if checker is not None:
                gamma, eta = schedule_values(schedule, state.k)
                inv = checker.check(state.k, state.local, gamma, eta)
                if options.fail_fast and checker.violations:
                    raise AssertionError(f"invariant violated: {checker.violations[0]}")
            finish_epoch(state)
            if state.k in log_set:
                records.append(_record(problem, state, schedule, options, inv, t0))
    except NonFiniteIterateError as exc:
        if options.on_nonfinite != "truncate":
            raise
        truncated, error = True, str(exc)
    finally:
        if history is not None:
            history[state.k, 0] = state.local[0]
    worst = {}
    if checker is not None:
        worst = dict(checker.worst)
        worst["violations"] = list(checker.violations)
    trace = RunTrace(
        records=tuple(records),
        initial_avg=initial_avg,
        x0=x_start,
        r=float(r),
        N=N,
        schedule=schedule,
        history=history,
        invariant_worst=worst,
        truncated=truncated,
        meta={} if error is None else {"error": error},
    )
    return RunResult(trace, state)


def reconstruct_average(trace: RunTrace, i: int, N: int | None = None) -> np.ndarray:
    """Explicit convex combination of agent ``i``'s history at epoch ``N``.

    ``lambda_{0,N} avg_0 + sum_{k=1..N} lambda_{k,N} x_{k-1, i+1}``, summed
    with ``math.fsum`` per coordinate as an independent check on the
    recursive update.
    """
    if trace.history is None:
        raise ValueError("trace has no history; run with record_history=True")
    N = trace.N if N is None else N
    lam = averaging_weights(trace.schedule, trace.r, N)
    pts = trace.history[:N, i + 1]  # x_{k, i+1} for k = 0..N-1
    out = np.empty(pts.shape[1])
    for c in range(pts.shape[1]):
        terms = [lam[0] * trace.initial_avg[i, c]] + list(lam[1:] * pts[:, c])
        out[c] = math.fsum(terms)
    return out


__all__ = [
    "RateSchedule",
    "TikhonovSchedule",
    "ScheduleError",
    "NonFiniteIterateError",
    "SolverState",
    "EpochRecord",
    "RunTrace",
    "RunOptions",
    "RunResult",
    "InstrumentationOptions",
    "schedule_values",
    "averaging_weights",
    "initial_state",
    "step_agent",
    "update_average",
    "run_epoch",
    "finish_epoch",
    "log_epochs",
    "run",
    "reconstruct_average",
]
