"""Infeasibility and suboptimality metrics, constants, and bound evaluators.

The bound evaluators return the right-hand sides of the rate results as
plain numbers so that measured quantities can be compared against them.
They are only guaranteed to dominate when the constants are true upper
bounds, so every ``ConstantsEstimate`` records how it was obtained.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .baselines import brute_force_affine_vi
from .geometry import Ball, Box, SetSpec, UnboundedSetError, sample_points
from .problem import VIConstrainedProblem, eval_global_mapping
from .solver import RateSchedule, RunTrace, TikhonovSchedule, averaging_weights, schedule_values

SAFETY_FACTOR = 1.1


# --- dual gap and complementarity residual ---------------------------------------------


@dataclass(frozen=True)
class GapEstimate:
    value: float
    mode: str
    exact: bool  # False for sampled lower bounds
    unbounded: bool = False
    argmax: np.ndarray | None = None

    def __float__(self):
        return self.value


def _gap_objective(problem, x):
    def phi(y):
        return float(eval_global_mapping(problem, y) @ (x - y))

    return phi


def _detect_unbounded(problem, x, phi, rng, directions: int = 64) -> bool:
    """Ray test: the gap grows without bound along some feasible direction."""
    n = problem.dim
    for _ in range(directions):
        d = rng.standard_normal(n)
        vals = []
        for t in (1e3, 1e6, 1e9):
            y = problem.set.project(x + t * d)
            vals.append(phi(y))
        if vals[1] > 0 and vals[2] > 1e2 * vals[1] and vals[2] > 1e2 * max(1.0, abs(vals[0])):
            return True
    return False


def _affine_gap_maximizer(M, q, x, X: SetSpec, tol: float = 1e-8, max_iters: int = 100_000):
    """Maximize ``(My+q)'(x-y)`` over ``X`` (concave when ``M`` is monotone).

    Boxes of dimension up to 6 are solved exactly by face enumeration of
    the optimality conditions (an affine VI with the symmetric matrix
    ``M + M'``).  Other sets use accelerated projected gradient ascent
    from ``y = x``.
    """
    H = M + M.T  # negative Hessian
    lin = M.T @ x - q  # gradient at y = 0
    if isinstance(X, Box) and X.dim <= 6:
        try:
            return brute_force_affine_vi(H, -lin, X)
        except ArithmeticError:
            pass
    L = float(np.linalg.norm(H, 2))
    step = 1.0 / L if L > 1e-12 else 1e12
    val = lambda y: float((M @ y + q) @ (x - y))
    y = X.project(x)
    z, t = y.copy(), 1.0
    best_y, best_v = y, val(y)
    for _ in range(max_iters):
        y_new = X.project(z + step * (lin - H @ z))
        v_new = val(y_new)
        if v_new < best_v - 1e-15 * (1 + abs(best_v)):
            z, t = best_y.copy(), 1.0  # restart on non-monotone step
            continue
        t_new = 0.5 * (1 + math.sqrt(1 + 4 * t * t))
        z = y_new + ((t - 1) / t_new) * (y_new - y)
        moved = np.linalg.norm(y_new - y)
        y, t = y_new, t_new
        if v_new >= best_v:
            gain = v_new - best_v
            best_y, best_v = y_new, v_new
            if moved <= 1e-12 * (1 + np.linalg.norm(y)) or (gain <= tol * 1e-3 and moved <= tol):
                break
    return best_y


def dual_gap_details(
    problem: VIConstrainedProblem,
    x,
    mode: Literal["affine-exact", "sampled"] = "affine-exact",
    budget: int = 2000,
    seed: int = 0,
    sampling_box: Box | None = None,
) -> GapEstimate:
    """``GAP(x) = sup_{y in X} F(y)'(x - y)`` with provenance."""
    x = np.asarray(x, dtype=float)
    X = problem.set
    phi = _gap_objective(problem, x)
    rng = np.random.default_rng(seed)
    if not X.compact and _detect_unbounded(problem, x, phi, rng):
        return GapEstimate(math.inf, mode, exact=mode == "affine-exact", unbounded=True)
    if mode == "affine-exact":
        aff = problem.global_affine()
        if aff is None:
            raise ValueError("affine-exact gap needs every agent mapping to be affine")
        y = _affine_gap_maximizer(aff[0], aff[1], x, X)
        return GapEstimate(max(0.0, phi(y)), mode, exact=True, argmax=y)
    if mode == "sampled":
        ys = sample_points(X, rng, budget, sampling_box)
        vals = np.array([phi(y) for y in ys])
        j = int(np.argmax(vals)) if len(vals) else 0
        best = max(0.0, float(vals[j]) if len(vals) else 0.0)  # y = x gives 0
        return GapEstimate(best, mode, exact=False, argmax=ys[j] if len(vals) and vals[j] > 0 else x)
    raise ValueError(f"unknown gap mode {mode!r}")


def dual_gap(problem: VIConstrainedProblem, x, mode: str = "affine-exact", budget: int = 2000, seed: int = 0, sampling_box=None) -> float:
    """Dual gap value; ``inf`` when detected unbounded, a lower bound in sampled mode."""
    return dual_gap_details(problem, x, mode, budget, seed, sampling_box).value


def ncp_infeasibility_phi(x, Fx) -> float:
    """``||max(0,-x)||^2 + ||max(0,-F)||^2 + |x'F|``; zero iff ``0 <= x _|_ F >= 0``."""
    x = np.asarray(x, dtype=float)
    Fx = np.asarray(Fx, dtype=float)
    if x.shape != Fx.shape:
        raise ValueError("x and F(x) differ in shape")
    return float(np.sum(np.minimum(x, 0.0) ** 2) + np.sum(np.minimum(Fx, 0.0) ** 2) + abs(x @ Fx))


def gap_metric(mode: str = "affine-exact", budget: int = 2000):
    """Adapter for ``RunOptions.infeasibility``."""
    return lambda problem, x: dual_gap(problem, x, mode, budget)


def phi_metric(problem: VIConstrainedProblem, x) -> float:
    return ncp_infeasibility_phi(x, eval_global_mapping(problem, x))


def residual_metric(problem: VIConstrainedProblem, x) -> float:
    """Aggregated constraint residual of penalty agents."""
    return float(sum(a.infeasibility(x) for a in problem.agents))


# --- constants ---------------------------------------------------------------------


@dataclass(frozen=True)
class ConstantsEstimate:
    """Problem constants.

    ``C_f >= m * sup ||subgradient f_i||`` and ``C_F >= m * sup ||F_i||``
    over the set; ``M_X >= sup ||x||``; ``M_f >= sup |f|``.  ``methods``
    tags each entry ``exact`` or ``sampled``; sampled values include the
    1.1 safety factor, ``raw`` holds them before it.
    """

    C_f: float
    C_F: float
    M_X: float
    M_f: float
    method: str
    sample_count: int = 0
    methods: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("C_f", "C_F", "M_X", "M_f"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    @classmethod
    def given(cls, C_f, C_F, M_X=1.0, M_f=0.0) -> "ConstantsEstimate":
        return cls(float(C_f), float(C_F), float(M_X), float(M_f), "given")


def _ball_affine_norm_max(M, q, ball: Ball) -> tuple[float, bool]:
    """``max ||Mx+q||`` over a ball; exact when ``M c + q = 0``."""
    base = M @ ball.center + q
    s = float(np.linalg.norm(M, 2)) * ball.radius
    if np.linalg.norm(base) == 0:
        return s, True
    return float(np.linalg.norm(base)) + s, False


def estimate_constants(
    problem: VIConstrainedProblem,
    samples: int = 1000,
    safety: float = SAFETY_FACTOR,
    sampling_box: Box | None = None,
    seed: int = 0,
) -> ConstantsEstimate:
    """Estimate ``C_f, C_F, M_X, M_f``.

    Affine mappings and quadratic objectives on boxes (``n <= 20``) are
    handled exactly: a convex function attains its maximum over a box at a
    vertex, and the minimum of a convex quadratic over a box is found by
    face enumeration (``n <= 8``).  Everything else is sampled and scaled
    by ``safety``.
    """
    X = problem.set
    m, n = problem.m, problem.dim
    if not X.compact and sampling_box is None:
        raise ValueError("unbounded set: supply sampling_box")
    rng = np.random.default_rng(seed)
    pts = sample_points(X, rng, samples, sampling_box)
    vertices = None
    if isinstance(X, Box) and n <= 20:
        vertices = X.vertices()
        pts = np.vstack([pts, vertices])
    methods, raw = {}, {}

    def agent_max(norm_of, structured):
        if structured is not None:
            return structured, "exact"
        v = max(float(np.linalg.norm(norm_of(a, x))) for a in problem.agents for x in pts)
        return v, "sampled"

    # mapping bound
    sF = None
    if all(a.mapping_affine is not None for a in problem.agents):
        if vertices is not None:
            sF = max(float(np.max(np.linalg.norm(vertices @ a.mapping_affine[0].T + a.mapping_affine[1], axis=1))) for a in problem.agents)
        elif isinstance(X, Ball):
            vals = [_ball_affine_norm_max(*a.mapping_affine, X) for a in problem.agents]
            if all(ok for _, ok in vals):
                sF = max(v for v, _ in vals)
    vF, methods["C_F"] = agent_max(lambda a, x: a.mapping(x), sF)
    # subgradient bound
    sg = None
    if all(a.objective_quadratic is not None for a in problem.agents):
        if vertices is not None:
            sg = max(float(np.max(np.linalg.norm(vertices @ a.objective_quadratic[0].T + a.objective_quadratic[1], axis=1))) for a in problem.agents)
        elif isinstance(X, Ball):
            vals = [_ball_affine_norm_max(a.objective_quadratic[0], a.objective_quadratic[1], X) for a in problem.agents]
            if all(ok for _, ok in vals):
                sg = max(v for v, _ in vals)
    vg, methods["C_f"] = agent_max(lambda a, x: a.subgradient(x), sg)
    raw["C_F"], raw["C_f"] = m * vF, m * vg

    # objective magnitude
    quad = problem.global_quadratic()
    if quad is not None and vertices is not None and n <= 8:
        Q, c, c0 = quad
        fvals = 0.5 * np.einsum("ij,jk,ik->i", vertices, Q, vertices) + vertices @ c + c0
        xmin = brute_force_affine_vi(Q, c, X)
        fmin = 0.5 * xmin @ Q @ xmin + c @ xmin + c0
        raw["M_f"] = float(max(abs(fvals.max()), abs(fmin)))
        methods["M_f"] = "exact"
    else:
        raw["M_f"] = float(max(abs(sum(a.objective(x) for a in problem.agents)) for x in pts))
        methods["M_f"] = "sampled"

    if X.compact and sampling_box is None:
        mx, exact = X.norm_bound()
    else:
        mx, exact = sampling_box.norm_bound()[0], False
    raw["M_X"] = mx
    methods["M_X"] = "exact" if exact else "sampled"

    def final(name):
        return raw[name] * (safety if methods[name] == "sampled" else 1.0)

    overall = "exact" if all(v == "exact" for v in methods.values()) else "sampled"
    return ConstantsEstimate(final("C_f"), final("C_F"), final("M_X"), final("M_f"), overall, len(pts), methods, raw)


# --- rate bounds -------------------------------------------------------------------


@dataclass(frozen=True)
class InitTerms:
    """Initialization terms of the rate bounds.

    ``f_gap``: ``f(avg_{0,m}) - f(x_{0,1})`` (signed, not clipped);
    ``agent_spread``: ``||avg_{0,i} - avg_{0,m}||``;
    ``start_offset``: ``||avg_{0,m} - x_{0,1}||``.
    """

    f_gap: float = 0.0
    agent_spread: float = 0.0
    start_offset: float = 0.0


def rate_threshold(r: float) -> float:
    return 2.0 ** (2.0 / (1.0 - r)) - 1.0


def _check_rate_domain(b, r, m, i, N, gamma0, eta0):
    if not 0 < b < 0.5:
        raise ValueError(f"b must lie in (0, 0.5), got {b}")
    if not 0 <= r < 1:
        raise ValueError(f"r must lie in [0, 1), got {r}")
    if not (gamma0 > 0 and eta0 > 0):
        raise ValueError("gamma0 and eta0 must be positive")
    if not 1 <= i <= m:
        raise ValueError(f"agent index must lie in 1..{m}")
    if N < rate_threshold(r):
        raise ValueError(f"N={N} is below the validity threshold {rate_threshold(r):.4g} for r={r}")


def rate_bound_suboptimality(
    constants: ConstantsEstimate,
    gamma0: float,
    eta0: float,
    b: float,
    r: float,
    m: int,
    i: int,
    N: int,
    init: InitTerms = InitTerms(),
) -> float:
    """Upper bound on ``f(avg_{N,i}) - f*``; ``i`` is one-based."""
    _check_rate_domain(b, r, m, i, N, gamma0, eta0)
    c = constants
    g = c.C_F + eta0 * c.C_f
    bracket = (
        2 * c.M_X**2 / (eta0 * gamma0)
        + gamma0 * g**2 / (eta0 * (1 - r + 2 * b))
        + init.f_gap
        + c.C_f * init.agent_spread
        + 2 * (m - i) * gamma0 * c.C_f * g / (m * (1 - r))
    )
    return (2 - r) / (N + 1) ** (0.5 - b) * bracket


def rate_bound_gap(
    constants: ConstantsEstimate,
    gamma0: float,
    eta0: float,
    b: float,
    r: float,
    m: int,
    i: int,
    N: int,
    init: InitTerms = InitTerms(),
) -> float:
    """Upper bound on ``GAP(avg_{N,i})``; ``i`` is one-based."""
    _check_rate_domain(b, r, m, i, N, gamma0, eta0)
    c = constants
    g = c.C_F + eta0 * c.C_f
    bracket = (
        2 * c.M_X**2 / gamma0
        + 2 * c.M_f * eta0 / (1 - 0.5 * r - b)
        + c.C_F * init.start_offset
        + c.C_F * init.agent_spread
        + g**2 * gamma0 / (1 - r)
        + 2 * (m - i) * c.C_F * g * gamma0 / (m * (1 - r))
    )
    return (2 - r) / (N + 1) ** b * bracket


def init_terms(problem: VIConstrainedProblem, trace: RunTrace, i: int) -> InitTerms:
    """Initialization terms for one-based agent ``i`` from a trace."""
    from .problem import eval_global_objective

    avg0 = trace.initial_avg
    last = avg0[-1]
    return InitTerms(
        f_gap=eval_global_objective(problem, last) - eval_global_objective(problem, trace.x0),
        agent_spread=float(np.linalg.norm(avg0[i - 1] - last)),
        start_offset=float(np.linalg.norm(last - trace.x0)),
    )


def complexity_bracket(C_f: float, C_F: float, M_X: float = 1.0, M_f: float = 0.0, init: float = 0.0) -> float:
    """Sum of both rate brackets under ``r=0, b=1/4, gamma0=1/(C_F+C_f), eta0=1``.

    Using ``(m-i)/m <= 1`` the two agent-dependent terms add up to
    ``2 (C_F + C_f)``, so the total is ``C (4 M_X^2 + 11/3) + 8 M_f / 3 + init``
    with ``C = C_F + C_f``; ``init`` collects the initialization terms.
    """
    C = C_f + C_F
    return C * (4 * M_X**2 + 11.0 / 3.0) + 8.0 * M_f / 3.0 + init


def iteration_complexity(C_f: float, C_F: float, eps: float, M_X: float = 1.0, M_f: float = 0.0, init: float = 0.0) -> int:
    """Epochs after which ``f - f* + GAP <= eps`` is guaranteed for every agent.

    Both bounds decay like ``2 B / (N+1)^{1/4}`` with ``B`` from
    ``complexity_bracket``, giving ``N = ceil((2B/eps)^4)``; with the
    defaults this is ``ceil(c (C_F+C_f)^4 eps^-4)``, ``c = (46/3)^4``.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if C_f + C_F <= 0:
        raise ValueError("C_f + C_F must be positive")
    B = complexity_bracket(C_f, C_F, M_X, M_f, init)
    return max(3, math.ceil((2 * B / eps) ** 4))


# --- Tikhonov bound ----------------------------------------------------------------


@dataclass(frozen=True)
class TikhonovBoundParams:
    tau: float
    B0: float
    mu_min: float
    schedule: TikhonovSchedule
    m: int
    C_f: float
    C_F: float

    def __post_init__(self):
        if self.tau < 2:
            raise ValueError("tau must be at least 2")
        if not self.B0 > 0:
            raise ValueError("B0 must be positive")

    @classmethod
    def build(cls, schedule: TikhonovSchedule, mu_min: float, m: int, C_f: float, C_F: float, start_distance: float):
        """``start_distance`` is ``||x_1 - x*_{eta_0}||`` with ``x_1`` the iterate after epoch 0."""
        s = schedule
        bad = s.structural_violations(mu_min)
        if bad:
            raise ValueError("schedule invalid: " + "; ".join(bad))
        eta0 = s.eta / s.Gamma**s.b
        B0 = 1.5 * C_f**2 / (m**2 * mu_min**3 * s.gamma**3 * s.eta * s.Gamma ** (2 - 3 * s.a - s.b)) + (C_F + eta0 * C_f) ** 2
        tau = max(mu_min * s.eta / s.gamma / B0 * s.Gamma ** (s.a - s.b) * start_distance**2, 2.0)
        return cls(tau, B0, mu_min, s, m, C_f, C_F)


def tikhonov_bound(params: TikhonovBoundParams, k, i) -> float:
    """Bound on ``||x_{k+1,i} - x*_{eta_k}||^2``; ``i`` one-based, ``k >= 0``."""
    s = params.schedule
    eta0 = s.eta / s.Gamma**s.b
    k = np.asarray(k, dtype=float)
    i = np.asarray(i, dtype=float)
    first = 2 * (i - 1) ** 2 * (params.C_F + eta0 * params.C_f) ** 2 * s.gamma**2 / (params.m**2 * (k + s.Gamma + 1) ** (2 * s.a))
    second = 2 * params.tau * params.B0 * s.gamma / (params.mu_min * s.eta * (k + s.Gamma) ** (s.a - s.b))
    out = first + second
    return float(out) if out.ndim == 0 else out


def tikhonov_continuity_bound(C_f: float, m: int, mu_min: float, eta_new: float, eta_old: float) -> float:
    """``||x*_{eta_new} - x*_{eta_old}|| <= C_f/(m mu_min) |1 - eta_new/eta_old|``."""
    return C_f / (m * mu_min) * abs(1 - eta_new / eta_old)


# --- harmonic sums and schedule conditions ---------------------------------------------


def harmonic_threshold(beta: float, Gamma: float) -> float:
    return (2.0 ** (1.0 / (1.0 - beta)) - 1.0) * Gamma


def harmonic_sum_bounds(beta: float, Gamma: float, K: int) -> tuple[float, float, float]:
    """``(lower, sum_{k=0}^K (k+Gamma)^-beta, upper)`` for ``K`` above the threshold."""
    if not 0 <= beta < 1:
        raise ValueError("beta must lie in [0, 1)")
    if Gamma < 1:
        raise ValueError("Gamma must be at least 1")
    if K < harmonic_threshold(beta, Gamma) - 1e-12:
        raise ValueError(f"K={K} is below the threshold {harmonic_threshold(beta, Gamma):.6g}")
    exact = math.fsum((np.arange(K + 1) + Gamma) ** (-beta))
    top = (K + Gamma) ** (1 - beta) / (1 - beta)
    return top / 2, exact, top


@dataclass(frozen=True)
class ConditionResult:
    name: str
    passed: bool
    witness: int | None = None
    detail: str = ""


@dataclass(frozen=True)
class ScheduleReport:
    conditions: tuple[ConditionResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def __getitem__(self, name: str) -> ConditionResult:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)


def _eta_drop(s: TikhonovSchedule, k):
    """``1 - eta_k / eta_{k-1}`` computed without cancellation."""
    return -np.expm1(s.b * np.log1p(-1.0 / (k + s.Gamma)))


def check_schedule_conditions(
    schedule: TikhonovSchedule,
    mu_min: float,
    k_dense: int = 1000,
    k_log_max: float = 1e6,
    k_log_count: int = 2000,
    seed: int = 0,
) -> ScheduleReport:
    """Evaluate the closed-form prerequisites and properties (i)-(iv) on a ``k`` grid.

    The grid is ``1..k_dense``, ``k_log_count`` log-spaced points up to
    ``k_log_max`` and 200 random large ``k``.
    """
    s = schedule
    rng = np.random.default_rng(seed)
    ks = np.unique(
        np.concatenate(
            [
                np.arange(1, k_dense + 1),
                np.round(np.logspace(0, math.log10(k_log_max), k_log_count)),
                rng.integers(k_dense, int(k_log_max), size=200),
            ]
        ).astype(np.int64)
    )
    kf = ks.astype(float)
    out = []
    for name, ok in (
        ("a > b", s.a > s.b),
        ("a + b < 1", s.a + s.b < 1),
        ("3a + b < 2", 3 * s.a + s.b < 2),
        ("Gamma >= 1", s.Gamma >= 1),
        ("Gamma^(a+b) >= 2 gamma eta mu", s.Gamma ** (s.a + s.b) >= 2 * s.gamma * s.eta * mu_min),
        ("Gamma^(1-a-b) >= 4/(gamma eta mu)", s.Gamma ** (1 - s.a - s.b) >= 4 / (s.gamma * s.eta * mu_min)),
    ):
        out.append(ConditionResult(name, bool(ok)))

    def first_bad(mask):
        idx = np.flatnonzero(~mask)
        return (True, None) if idx.size == 0 else (False, int(ks[idx[0]]))

    gam, eta = s.gamma_at(np.concatenate([[0.0], kf])), s.eta_at(np.concatenate([[0.0], kf]))
    pos = np.all(gam > 0) and np.all(eta > 0)
    mono = np.all(np.diff(s.gamma_at(np.arange(0, k_dense + 1))) <= 0) and np.all(np.diff(s.eta_at(np.arange(0, k_dense + 1))) <= 0)
    g0e0 = gam[0] * eta[0] * mu_min
    out.append(
        ConditionResult(
            "(i) positive, nonincreasing, gamma0 eta0 mu <= 0.5",
            bool(pos and mono and g0e0 <= 0.5),
            None if g0e0 <= 0.5 else 0,
            f"gamma0*eta0*mu = {g0e0:.6g}",
        )
    )
    # (ii) on consecutive and wide pairs k1 < k2
    k1 = np.concatenate([ks[:-1], np.zeros(len(ks), dtype=np.int64)])
    k2 = np.concatenate([ks[1:], ks])
    # 1 - eta_{k2}/eta_{k1} = 1 - ((k1+G)/(k2+G))^b
    drop = -np.expm1(s.b * (np.log(k1 + s.Gamma) - np.log(k2 + s.Gamma)))
    rhs = (k2 - k1) / (k2 + s.Gamma)
    okii = drop <= rhs * (1 + 1e-12)
    idx = np.flatnonzero(~okii)
    out.append(ConditionResult("(ii) eta ratio", idx.size == 0, None if idx.size == 0 else int(k2[idx[0]])))
    # (iii)
    lhs3 = _eta_drop(s, kf) ** 2 / (s.gamma_at(kf) ** 3 * s.eta_at(kf))
    rhs3 = 1.0 / (s.gamma**3 * s.eta * s.Gamma ** (2 - 3 * s.a - s.b))
    ok, w = first_bad(lhs3 <= rhs3 * (1 + 1e-12))
    out.append(ConditionResult("(iii) regularization drift", ok, w))
    # (iv) gamma_{k-1}/eta_{k-1} <= gamma_k/eta_k (1 + 0.5 gamma_k eta_k mu)
    growth = np.expm1(-(s.a - s.b) * np.log1p(-1.0 / (kf + s.Gamma)))
    ok, w = first_bad(growth <= 0.5 * s.gamma_at(kf) * s.eta_at(kf) * mu_min * (1 + 1e-12))
    out.append(ConditionResult("(iv) gamma/eta growth", ok, w))
    return ScheduleReport(tuple(out))


# --- consensus bound ---------------------------------------------------------------


@dataclass(frozen=True)
class ConsensusReport:
    violations: tuple[tuple[str, int, int, float], ...]  # (which, epoch, agent one-based, excess)
    checked: int

    @property
    def passed(self) -> bool:
        return not self.violations


def check_consensus_bounds(
    trace: RunTrace,
    constants: ConstantsEstimate,
    schedule: RateSchedule | TikhonovSchedule,
    r: float,
    gap_column: bool = True,
    slack: float = 1e-8,
) -> ConsensusReport:
    """Verify the agent-wise consensus inequalities at every logged epoch ``N >= 1``.

    ``f(avg_{N,i}) - f(avg_{N,m})`` and (when the trace's infeasibility
    column holds the dual gap) ``GAP(avg_{N,i}) - GAP(avg_{N,m})`` are
    compared with ``C lambda_{0,N} ||avg_{0,i}-avg_{0,m}||
    + (m-i) C (C_F + eta_0 C_f)/m * sum_k lambda_{k,N} gamma_k`` where
    ``C`` is ``C_f`` or ``C_F`` respectively.
    """
    m = trace.initial_avg.shape[0]
    spread0 = np.linalg.norm(trace.initial_avg - trace.initial_avg[-1], axis=1)
    eta0 = schedule_values(schedule, 0)[1]
    g = constants.C_F + eta0 * constants.C_f
    viol = []
    count = 0
    for rec in trace.records:
        N = rec.epoch
        if N < 1:
            continue
        lam = averaging_weights(schedule, r, N)
        gam = np.asarray(schedule_values(schedule, np.arange(N + 1))[0])
        s = math.fsum(lam * gam)
        for j in range(m):
            i = j + 1
            tail = (m - i) * g / m * s
            bound_f = constants.C_f * (lam[0] * spread0[j] + tail)
            d = rec.objective[j] - rec.objective[-1]
            count += 1
            if d > bound_f + slack:
                viol.append(("objective", N, i, d - bound_f))
            if gap_column and np.isfinite(rec.infeasibility[j]):
                bound_g = constants.C_F * (lam[0] * spread0[j] + tail)
                d = rec.infeasibility[j] - rec.infeasibility[-1]
                if d > bound_g + slack:
                    viol.append(("gap", N, i, d - bound_g))
    return ConsensusReport(tuple(viol), count)


def fit_loglog_slope(N, values) -> float:
    """Least-squares slope of ``log(values)`` against ``log(N)``."""
    N = np.asarray(N, dtype=float)
    v = np.asarray(values, dtype=float)
    if np.any(v <= 0):
        raise ValueError("log-log slope needs positive values")
    return float(np.polyfit(np.log(N), np.log(v), 1)[0])


__all__ = [
    "GapEstimate",
    "dual_gap",
    "dual_gap_details",
    "ncp_infeasibility_phi",
    "gap_metric",
    "phi_metric",
    "residual_metric",
    "ConstantsEstimate",
    "estimate_constants",
    "InitTerms",
    "init_terms",
    "rate_threshold",
    "rate_bound_suboptimality",
    "rate_bound_gap",
    "complexity_bracket",
    "iteration_complexity",
    "TikhonovBoundParams",
    "tikhonov_bound",
    "tikhonov_continuity_bound",
    "harmonic_threshold",
    "harmonic_sum_bounds",
    "ConditionResult",
    "ScheduleReport",
    "check_schedule_conditions",
    "ConsensusReport",
    "check_consensus_bounds",
    "fit_loglog_slope",
    "UnboundedSetError",
]
