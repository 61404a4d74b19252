"""Comparison solvers and the regularized-VI reference solver.

Incremental methods (one agent per inner step, ``m`` steps per epoch):

* projected IG:   ``x <- P(x - g_k * grad f_i(x))`` cycling ``i = 1..m``.
* proximal IAG:   keep the last gradient ``t_i`` of every agent; cycling
  ``i``, refresh ``t_i = grad f_i(x)`` then ``x <- P(x - g * sum_j t_j)``.
  The proximal operator of the indicator of ``X`` is the projection.
* projected SAGA: draw ``j`` uniformly; ``v = m (grad f_j(x) - t_j) + sum t``;
  ``t_j <- grad f_j(x)``; ``x <- P(x - g * v)``.  ``v`` is unbiased for
  ``grad f(x)`` with ``f = sum f_i``.

The Tikhonov reference points ``x*_eta`` solve ``VI(X, F + eta grad f)``
by the extragradient method.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from typing import Callable, Literal, Sequence

import numpy as np

from .geometry import Box, SetSpec, sample_points
from .problem import VIConstrainedProblem, eval_global_objective
from .solver import EpochRecord, RunTrace, Schedule, log_epochs, schedule_values


class ConvergenceError(RuntimeError):
    """Iterative solver stopped before reaching its tolerance."""

    def __init__(self, message: str, best_point=None, best_residual: float = float("inf")):
        super().__init__(message)
        self.best_point = best_point
        self.best_residual = best_residual


Method = Literal["projected-ig", "proximal-iag", "saga"]


@dataclass(frozen=True)
class BaselineConfig:
    method: Method
    stepsize: float
    rule: Literal["constant", "diminishing"] = "constant"
    epochs: int = 100
    seed: int = 0
    include_mapping: bool = False
    log_at: Sequence[int] | str = "all"

    def __post_init__(self):
        if not self.stepsize > 0:
            raise ValueError("stepsize must be positive")
        if self.rule not in ("constant", "diminishing"):
            raise ValueError(f"unknown stepsize rule {self.rule!r}")
        if self.method not in ("projected-ig", "proximal-iag", "saga"):
            raise ValueError(f"unknown baseline method {self.method!r}")
        if self.epochs < 0:
            raise ValueError("epochs must be nonnegative")

    def step(self, k: int) -> float:
        return self.stepsize if self.rule == "constant" else self.stepsize / np.sqrt(k + 1.0)


def _direction_fns(problem, include_mapping):
    if include_mapping:
        return [lambda x, a=a: a.subgradient(x) + a.mapping(x) for a in problem.agents]
    return [a.subgradient for a in problem.agents]


def _baseline_record(problem, x, k, gamma, metric, t0):
    obj = np.array([eval_global_objective(problem, x)])
    inf = np.array([metric(problem, x)]) if metric is not None else np.array([np.nan])
    return EpochRecord(k, gamma, 0.0, obj, inf, np.zeros(1), np.nan, time.perf_counter() - t0, x.copy()[None, :])


def _run_baseline(problem, X, config, x0, metric, inner) -> RunTrace:
    X = problem.set if X is None else X
    x = X.project(np.zeros(problem.dim) if x0 is None else np.asarray(x0, dtype=float))
    x_start = x.copy()
    N = config.epochs
    if isinstance(config.log_at, str):
        log_set = set(range(N + 1)) if config.log_at == "all" else set(log_epochs(N).tolist())
    else:
        log_set = {int(k) for k in config.log_at} | {N}
    t0 = time.perf_counter()
    records = [_baseline_record(problem, x, 0, config.step(0), metric, t0)] if 0 in log_set else []
    state = inner.init(x)
    for k in range(N):
        x = inner.epoch(x, k, X, state)
        if not np.all(np.isfinite(x)):
            raise FloatingPointError(f"{config.method}: non-finite iterate at epoch {k}")
        if k + 1 in log_set:
            records.append(_baseline_record(problem, x, k + 1, config.step(k + 1), metric, t0))
    return RunTrace(
        records=tuple(records),
        initial_avg=x_start[None, :],
        x0=x_start,
        r=0.0,
        N=N,
        schedule=None,
        method=config.method,
        meta={"final_point": x},
    )


class _ProjectedIG:
    def __init__(self, dirs, config):
        self.dirs, self.config = dirs, config

    def init(self, x):
        return None

    def epoch(self, x, k, X, _):
        g = self.config.step(k)
        for d in self.dirs:
            x = X.project(x - g * d(x))
        return x


class _ProximalIAG:
    def __init__(self, dirs, config):
        self.dirs, self.config = dirs, config

    def init(self, x):
        table = np.array([d(x) for d in self.dirs])
        return {"table": table, "total": table.sum(axis=0)}

    def epoch(self, x, k, X, st):
        g = self.config.step(k)
        table = st["table"]
        for i, d in enumerate(self.dirs):
            new = d(x)
            st["total"] += new - table[i]
            table[i] = new
            x = X.project(x - g * st["total"])
        # refresh the running sum to keep rounding drift bounded
        st["total"] = table.sum(axis=0)
        return x


class _Saga:
    def __init__(self, dirs, config):
        self.dirs, self.config = dirs, config
        self.rng = np.random.default_rng(config.seed)

    def init(self, x):
        table = np.array([d(x) for d in self.dirs])
        return {"table": table, "total": table.sum(axis=0)}

    def epoch(self, x, k, X, st):
        g = self.config.step(k)
        table = st["table"]
        m = len(self.dirs)
        for j in self.rng.integers(0, m, size=m):
            new = self.dirs[j](x)
            v = m * (new - table[j]) + st["total"]
            st["total"] += new - table[j]
            table[j] = new
            x = X.project(x - g * v)
        st["total"] = table.sum(axis=0)
        return x


def projected_ig_run(problem: VIConstrainedProblem, set: SetSpec | None, config: BaselineConfig, x0=None, metric=None) -> RunTrace:
    """Cyclic projected incremental (sub)gradient method."""
    return _run_baseline(problem, set, config, x0, metric, _ProjectedIG(_direction_fns(problem, config.include_mapping), config))


def proximal_iag_run(problem: VIConstrainedProblem, set: SetSpec | None, config: BaselineConfig, x0=None, metric=None) -> RunTrace:
    """Cyclic incremental aggregated gradient with a projection step."""
    return _run_baseline(problem, set, config, x0, metric, _ProximalIAG(_direction_fns(problem, config.include_mapping), config))


def saga_projected_run(problem: VIConstrainedProblem, set: SetSpec | None, config: BaselineConfig, x0=None, metric=None) -> RunTrace:
    """SAGA with uniform agent sampling and projection; an epoch is ``m`` draws."""
    return _run_baseline(problem, set, config, x0, metric, _Saga(_direction_fns(problem, config.include_mapping), config))


BASELINES: dict[str, Callable] = {
    "projected-ig": projected_ig_run,
    "proximal-iag": proximal_iag_run,
    "saga": saga_projected_run,
}


# --- regularized VI reference ------------------------------------------------------


@dataclass(frozen=True)
class TikhonovPoint:
    eta: float
    point: np.ndarray
    residual: float
    iterations: int = 0


def natural_residual(G: Callable, X: SetSpec, x: np.ndarray) -> float:
    """``||x - P_X(x - G(x))||``; zero exactly at solutions of ``VI(X, G)``."""
    return float(np.linalg.norm(x - X.project(x - G(x))))


def lipschitz_estimate(
    G: Callable, X: SetSpec, rng: np.random.Generator, samples: int = 200, box: Box | None = None
) -> float:
    """Largest observed ``||G(x)-G(y)|| / ||x-y||`` over sampled pairs.

    Half of the pairs are close together to catch local steepness.
    """
    xs = sample_points(X, rng, samples, box)
    ys = sample_points(X, rng, samples, box)
    near = xs + 1e-3 * rng.standard_normal(xs.shape)
    best = 0.0
    for x, y, z in zip(xs, ys, near):
        z = X.project(z)
        for other in (y, z):
            d = np.linalg.norm(x - other)
            if d > 1e-12:
                best = max(best, np.linalg.norm(G(x) - G(other)) / d)
    return best


def extragradient_solve(
    G: Callable,
    X: SetSpec,
    lipschitz: float,
    tol: float = 1e-10,
    max_iters: int = 100_000,
    x0=None,
) -> tuple[np.ndarray, float, int]:
    """Extragradient with constant step ``1/(2 L)`` until the natural residual is below ``tol``.

    Returns ``(x, residual, iterations)``; raises ``ConvergenceError`` otherwise.
    """
    if not lipschitz > 0:
        raise ValueError("Lipschitz estimate must be positive")
    step = 0.5 / lipschitz
    x = X.project(np.zeros(X.dim) if x0 is None else np.asarray(x0, dtype=float))
    best_x, best_res = x, np.inf
    for it in range(max_iters + 1):
        Gx = G(x)
        res = float(np.linalg.norm(x - X.project(x - Gx)))
        if res < best_res:
            best_x, best_res = x, res
        if res <= tol:
            return x, res, it
        y = X.project(x - step * Gx)
        x = X.project(x - step * G(y))
        if not np.all(np.isfinite(x)):
            break
    raise ConvergenceError(
        f"extragradient did not reach residual {tol:g} in {max_iters} iterations (best {best_res:.3e})",
        best_x,
        best_res,
    )


def regularized_mapping(problem: VIConstrainedProblem, eta: float) -> tuple[Callable, float | None]:
    """``G(x) = sum F_i(x) + eta * sum grad f_i(x)`` and its exact Lipschitz constant when structured."""
    aff, quad = problem.global_affine(), problem.global_quadratic()
    if aff is not None and quad is not None:
        A = aff[0] + eta * quad[0]
        c = aff[1] + eta * quad[1]
        return (lambda x: A @ x + c), float(np.linalg.norm(A, 2))
    agents = problem.agents

    def G(x):
        out = np.zeros(problem.dim)
        for a in agents:
            out += a.mapping(x) + eta * a.subgradient(x)
        return out

    return G, None


def solve_regularized_vi(
    problem: VIConstrainedProblem,
    eta: float,
    tol: float = 1e-10,
    max_iters: int = 200_000,
    x0=None,
    lipschitz: float | None = None,
    seed: int = 0,
    sampling_box: Box | None = None,
) -> TikhonovPoint:
    """Solve ``VI(X, F + eta grad f)``, strongly monotone when ``mu_min * eta > 0``.

    The step ``1/(2 L)`` uses the exact operator norm for affine/quadratic
    problems and otherwise 1.5 times a sampled Lipschitz estimate.
    """
    mu = problem.metadata.strong_convexity_modulus
    if mu is None or mu <= 0:
        raise ValueError("solve_regularized_vi needs metadata.strong_convexity_modulus > 0")
    if not eta > 0:
        raise ValueError("regularization level must be positive")
    G, L = regularized_mapping(problem, eta)
    if lipschitz is not None:
        L = lipschitz
    elif L is None:
        L = 1.5 * lipschitz_estimate(G, problem.set, np.random.default_rng(seed), box=sampling_box)
    x, res, it = extragradient_solve(G, problem.set, max(L, 1e-12), tol, max_iters, x0)
    return TikhonovPoint(float(eta), x, res, it)


def tikhonov_trajectory(
    problem: VIConstrainedProblem,
    schedule: Schedule,
    epochs: int | Sequence[int],
    tol: float = 1e-10,
    max_iters: int = 200_000,
    x0=None,
) -> list[TikhonovPoint]:
    """Reference points ``x*_{eta_k}``, each warm-started from the previous one."""
    ks = range(epochs) if isinstance(epochs, int) else epochs
    out: list[TikhonovPoint] = []
    prev = x0
    cache: dict[float, TikhonovPoint] = {}
    for k in ks:
        eta = schedule_values(schedule, k)[1]
        if eta in cache:
            pt = cache[eta]
        else:
            pt = solve_regularized_vi(problem, eta, tol, max_iters, x0=prev)
            cache[eta] = pt
        out.append(pt)
        prev = pt.point
    return out


# --- brute-force affine box VI oracle ------------------------------------------------


def _vi_conditions_hold(x, Fx, lo, hi, tol) -> bool:
    scale = tol * (1 + np.abs(Fx).max(initial=0.0) + np.abs(x).max(initial=0.0))
    for j in range(x.size):
        at_lo = abs(x[j] - lo[j]) <= scale
        at_hi = abs(x[j] - hi[j]) <= scale
        if x[j] < lo[j] - scale or x[j] > hi[j] + scale:
            return False
        if at_lo and at_hi:
            continue  # degenerate interval: any sign allowed
        if at_lo:
            if Fx[j] < -scale:
                return False
        elif at_hi:
            if Fx[j] > scale:
                return False
        elif abs(Fx[j]) > scale:
            return False
    return True


def brute_force_affine_vi(M, q, box: Box, tol: float = 1e-9) -> np.ndarray:
    """Solve ``VI(box, Mx+q)`` by enumerating all ``3^n`` face patterns.

    Each coordinate is fixed at its lower bound, its upper bound, or left
    free with its mapped component set to zero.  The induced linear system
    is solved in the least-norm sense; candidates passing the VI
    optimality test are kept and the smallest-norm one is returned.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    q = np.asarray(q, dtype=float).reshape(-1)
    n = q.size
    if M.shape != (n, n) or box.dim != n:
        raise ValueError("M, q and box dimensions disagree")
    if n > 8:
        raise ValueError("enumeration limited to n <= 8")
    lo, hi = box.lower, box.upper
    best = None
    for pattern in itertools.product((0, 1, 2), repeat=n):
        pat = np.array(pattern)
        x = np.where(pat == 0, lo, hi).astype(float)
        free = np.flatnonzero(pat == 2)
        if free.size:
            fixed = np.flatnonzero(pat != 2)
            rhs = -(q[free] + M[np.ix_(free, fixed)] @ x[fixed])
            sol, *_ = np.linalg.lstsq(M[np.ix_(free, free)], rhs, rcond=None)
            if np.linalg.norm(M[np.ix_(free, free)] @ sol - rhs) > 1e-9 * (1 + np.linalg.norm(rhs)):
                continue
            x[free] = sol
        if _vi_conditions_hold(x, M @ x + q, lo, hi, tol):
            if best is None or np.linalg.norm(x) < np.linalg.norm(best) - 1e-12:
                best = x
    if best is None:
        raise ArithmeticError("no face pattern satisfies the VI conditions")
    return best


__all__ = [
    "BaselineConfig",
    "BASELINES",
    "ConvergenceError",
    "TikhonovPoint",
    "projected_ig_run",
    "proximal_iag_run",
    "saga_projected_run",
    "natural_residual",
    "lipschitz_estimate",
    "extragradient_solve",
    "regularized_mapping",
    "solve_regularized_vi",
    "tikhonov_trajectory",
    "brute_force_affine_vi",
]
