"""Distributed VI-constrained problem model.

A problem holds ``m`` agents, each with a local convex objective ``f_i``
(value and deterministic subgradient selection) and a local monotone
mapping ``F_i``.  The goal is to minimize ``sum f_i`` over the solution set
of the variational inequality ``VI(X, sum F_i)``.

Agents may carry structured data (affine mapping, quadratic objective).
Solvers ignore it; metrics and builders use it for exact computations and
for fast aggregation of many samples.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .geometry import Box, SetSpec, WholeSpace, NonnegativeOrthant, UnboundedSetError, sample_points

Vector = np.ndarray
ScalarFn = Callable[[Vector], float]
VectorFn = Callable[[Vector], Vector]


def _zero_value(x):
    return 0.0


@dataclass(frozen=True, eq=False)
class AgentOracle:
    """One agent's local objective, subgradient selection and mapping.

    Parameters
    ----------
    objective, subgradient, mapping
        Callables ``R^n -> R``, ``R^n -> R^n`` and ``R^n -> R^n``.  They
        must be pure functions of their argument.
    dim
        Dimension ``n``.
    mapping_affine
        Optional ``(M, q)`` with ``mapping(x) == M @ x + q``.
    objective_quadratic
        Optional ``(Q, c, c0)`` with ``objective(x) == 0.5 x'Qx + c'x + c0``.
    infeasibility
        Optional local constraint residual (``||Ax-b||^2 + sum max(0,g)^2``
        for penalty agents).
    """

    objective: ScalarFn
    subgradient: VectorFn
    mapping: VectorFn
    dim: int
    mapping_affine: tuple[np.ndarray, np.ndarray] | None = None
    objective_quadratic: tuple[np.ndarray, np.ndarray, float] | None = None
    infeasibility: ScalarFn | None = None

    @classmethod
    def affine(cls, M=None, q=None, Q=None, c=None, c0: float = 0.0, dim: int | None = None) -> "AgentOracle":
        """Agent with ``F(x) = Mx + q`` and ``f(x) = 0.5 x'Qx + c'x + c0``.

        Missing pieces default to zero.
        """
        n = dim
        for arr in (M, Q):
            if arr is not None:
                n = np.asarray(arr).shape[0]
        for arr in (q, c):
            if arr is not None and n is None:
                n = np.asarray(arr).size
        if n is None:
            raise ValueError("cannot infer dimension; pass dim")
        M = np.zeros((n, n)) if M is None else np.atleast_2d(np.asarray(M, dtype=float))
        q = np.zeros(n) if q is None else np.asarray(q, dtype=float).reshape(n)
        Q = np.zeros((n, n)) if Q is None else np.atleast_2d(np.asarray(Q, dtype=float))
        c = np.zeros(n) if c is None else np.asarray(c, dtype=float).reshape(n)
        if M.shape != (n, n) or Q.shape != (n, n):
            raise ValueError("M and Q must be n x n")
        c0 = float(c0)
        return cls(
            objective=lambda x: float(0.5 * x @ (Q @ x) + c @ x + c0),
            subgradient=lambda x: Q @ x + c,
            mapping=lambda x: M @ x + q,
            dim=n,
            mapping_affine=(M, q),
            objective_quadratic=(Q, c, c0),
        )

    def scaled(self, factor: float) -> "AgentOracle":
        """Return the agent with objective and mapping multiplied by ``factor``."""
        a = float(factor)
        aff = None if self.mapping_affine is None else (a * self.mapping_affine[0], a * self.mapping_affine[1])
        quad = None
        if self.objective_quadratic is not None:
            Q, c, c0 = self.objective_quadratic
            quad = (a * Q, a * c, a * c0)
        inf = self.infeasibility
        return AgentOracle(
            objective=lambda x, f=self.objective: a * f(x),
            subgradient=lambda x, g=self.subgradient: a * g(x),
            mapping=lambda x, F=self.mapping: a * F(x),
            dim=self.dim,
            mapping_affine=aff,
            objective_quadratic=quad,
            infeasibility=None if inf is None else (lambda x: a * inf(x)),
        )


def sum_oracles(oracles: Sequence[AgentOracle]) -> AgentOracle:
    """Sum of several oracles; structured data is summed when all carry it."""
    if not oracles:
        raise ValueError("cannot sum an empty list of oracles")
    n = oracles[0].dim
    if any(o.dim != n for o in oracles):
        raise ValueError("oracles disagree on dimension")
    if len(oracles) == 1:
        return oracles[0]
    aff = quad = None
    if all(o.mapping_affine is not None for o in oracles):
        aff = (sum(o.mapping_affine[0] for o in oracles), sum(o.mapping_affine[1] for o in oracles))
    if all(o.objective_quadratic is not None for o in oracles):
        quad = tuple(sum(o.objective_quadratic[j] for o in oracles) for j in range(3))
    if aff is not None:
        M, q = aff
        mapping = lambda x: M @ x + q
    else:
        fs = [o.mapping for o in oracles]
        mapping = lambda x: sum(F(x) for F in fs)
    if quad is not None:
        Q, c, c0 = quad
        objective = lambda x: float(0.5 * x @ (Q @ x) + c @ x + c0)
        subgradient = lambda x: Q @ x + c
    else:
        objs = [o.objective for o in oracles]
        subs = [o.subgradient for o in oracles]
        objective = lambda x: float(sum(f(x) for f in objs))
        subgradient = lambda x: sum(g(x) for g in subs)
    infeas = None
    if all(o.infeasibility is not None for o in oracles):
        ins = [o.infeasibility for o in oracles]
        infeas = lambda x: float(sum(h(x) for h in ins))
    return AgentOracle(objective, subgradient, mapping, n, aff, quad, infeas)


@dataclass(frozen=True)
class ProblemMetadata:
    known_optimal_value: float | None = None
    known_optimal_point: np.ndarray | None = None
    strong_convexity_modulus: float | None = None
    name: str = "problem"

    def __post_init__(self):
        mu = self.strong_convexity_modulus
        if mu is not None and mu < 0:
            raise ValueError("strong convexity modulus must be nonnegative")


@dataclass(frozen=True, eq=False)
class VIConstrainedProblem:
    agents: tuple[AgentOracle, ...]
    set: SetSpec
    metadata: ProblemMetadata = field(default_factory=ProblemMetadata)

    def __post_init__(self):
        agents = tuple(self.agents)
        if len(agents) < 1:
            raise ValueError("a problem needs at least one agent")
        n = agents[0].dim
        if any(a.dim != n for a in agents):
            raise ValueError("agents disagree on dimension")
        if self.set.dim != n:
            raise ValueError(f"set dimension {self.set.dim} differs from agent dimension {n}")
        object.__setattr__(self, "agents", agents)
        x_opt = self.metadata.known_optimal_point
        if x_opt is not None and self.set.compact and not self.set.contains(np.asarray(x_opt, float), tol=1e-6):
            raise ValueError("known optimal point lies outside the set")

    @property
    def m(self) -> int:
        return len(self.agents)

    @property
    def dim(self) -> int:
        return self.agents[0].dim

    def global_affine(self) -> tuple[np.ndarray, np.ndarray] | None:
        """``(M, q)`` of the summed mapping when every agent is affine."""
        if all(a.mapping_affine is not None for a in self.agents):
            return (sum(a.mapping_affine[0] for a in self.agents), sum(a.mapping_affine[1] for a in self.agents))
        return None

    def global_quadratic(self) -> tuple[np.ndarray, np.ndarray, float] | None:
        if all(a.objective_quadratic is not None for a in self.agents):
            return tuple(sum(a.objective_quadratic[j] for a in self.agents) for j in range(3))
        return None

    def with_metadata(self, **kw) -> "VIConstrainedProblem":
        return replace(self, metadata=replace(self.metadata, **kw))


def _point(problem: VIConstrainedProblem, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1)
    if x.shape != (problem.dim,):
        raise ValueError(f"point has shape {x.shape}, problem dimension is {problem.dim}")
    return x


def eval_global_objective(problem: VIConstrainedProblem, x) -> float:
    """``f(x) = sum_i f_i(x)``."""
    x = _point(problem, x)
    return float(sum(a.objective(x) for a in problem.agents))


def eval_global_mapping(problem: VIConstrainedProblem, x) -> np.ndarray:
    """``F(x) = sum_i F_i(x)``."""
    x = _point(problem, x)
    out = np.zeros(problem.dim)
    for a in problem.agents:
        out += a.mapping(x)
    return out


def eval_global_subgradient(problem: VIConstrainedProblem, x) -> np.ndarray:
    x = _point(problem, x)
    out = np.zeros(problem.dim)
    for a in problem.agents:
        out += a.subgradient(x)
    return out


def eval_global_infeasibility(problem: VIConstrainedProblem, x) -> float:
    """Sum of the agents' constraint residuals; requires penalty agents."""
    x = _point(problem, x)
    if any(a.infeasibility is None for a in problem.agents):
        raise ValueError("some agents do not carry a constraint residual")
    return float(sum(a.infeasibility(x) for a in problem.agents))


# --- constraint reformulation -------------------------------------------------


@dataclass(frozen=True, eq=False)
class ConstraintBlock:
    """Local constraints ``A x = b`` and ``g_j(x) <= 0`` of one agent.

    ``linear_inequalities`` is an optional vectorized family ``G x <= h``;
    it is equivalent to listing each row as an inequality with constant
    gradient, and is much faster for many rows.
    """

    dim: int
    equality: tuple[np.ndarray, np.ndarray] | None = None
    inequalities: tuple[tuple[ScalarFn, VectorFn], ...] = ()
    linear_inequalities: tuple[np.ndarray, np.ndarray] | None = None

    def __post_init__(self):
        n = self.dim
        if self.equality is not None:
            A, b = self.equality
            A = np.atleast_2d(np.asarray(A, dtype=float))
            b = np.asarray(b, dtype=float).reshape(-1)
            if A.shape[1] != n or A.shape[0] != b.size:
                raise ValueError("equality block has inconsistent shapes")
            object.__setattr__(self, "equality", (A, b))
        if self.linear_inequalities is not None:
            G, h = self.linear_inequalities
            G = np.atleast_2d(np.asarray(G, dtype=float))
            h = np.asarray(h, dtype=float).reshape(-1)
            if G.shape[1] != n or G.shape[0] != h.size:
                raise ValueError("linear inequality block has inconsistent shapes")
            object.__setattr__(self, "linear_inequalities", (G, h))
        object.__setattr__(self, "inequalities", tuple(self.inequalities))

    def penalty_value(self, x) -> float:
        """``Theta(x) = 0.5||Ax-b||^2 + 0.5 sum max(0, g_j(x))^2``."""
        return 0.5 * self.residual(x)

    def residual(self, x) -> float:
        """``||Ax-b||^2 + sum max(0, g_j(x))^2``."""
        x = np.asarray(x, dtype=float)
        r = 0.0
        if self.equality is not None:
            A, b = self.equality
            r += float(np.sum((A @ x - b) ** 2))
        for g, _ in self.inequalities:
            r += max(0.0, g(x)) ** 2
        if self.linear_inequalities is not None:
            G, h = self.linear_inequalities
            r += float(np.sum(np.maximum(0.0, G @ x - h) ** 2))
        return r

    def penalty_mapping(self, x) -> np.ndarray:
        """Gradient of ``penalty_value``."""
        x = np.asarray(x, dtype=float)
        out = np.zeros(self.dim)
        if self.equality is not None:
            A, b = self.equality
            out += A.T @ (A @ x - b)
        for g, dg in self.inequalities:
            gv = g(x)
            if gv > 0:
                out += gv * np.asarray(dg(x), dtype=float)
        if self.linear_inequalities is not None:
            G, h = self.linear_inequalities
            out += G.T @ np.maximum(0.0, G @ x - h)
        return out

    def check_gradients(self, points: np.ndarray, rel_tol: float = 1e-5, step: float = 1e-6) -> list[str]:
        """Compare each ``grad_g`` with central differences of ``g``."""
        problems = []
        for j, (g, dg) in enumerate(self.inequalities):
            for x in points:
                fd = np.array(
                    [(g(x + step * e) - g(x - step * e)) / (2 * step) for e in np.eye(self.dim)]
                )
                an = np.asarray(dg(x), dtype=float)
                if np.linalg.norm(fd - an) > rel_tol * max(1.0, np.linalg.norm(an)):
                    problems.append(f"inequality {j}: gradient mismatch at {x}")
                    break
        return problems


def build_penalty_agent(
    block: ConstraintBlock,
    objective: ScalarFn | None = None,
    subgradient: VectorFn | None = None,
    objective_quadratic: tuple | None = None,
) -> AgentOracle:
    """Agent whose mapping is the gradient of the block's quadratic penalty.

    The mapping ``A'(Ax-b) + sum max(0,g_j) grad g_j`` is monotone because it
    is the gradient of a convex function, and it vanishes exactly on the
    block's feasible set.  Without an objective the agent's ``f_i`` is zero.
    """
    n = block.dim
    if objective_quadratic is not None:
        Q, c, c0 = objective_quadratic
        Q = np.asarray(Q, float)
        c = np.asarray(c, float)
        c0 = float(c0)
        objective = lambda x: float(0.5 * x @ (Q @ x) + c @ x + c0)
        subgradient = lambda x: Q @ x + c
        objective_quadratic = (Q, c, c0)
    elif objective is None:
        if subgradient is not None:
            raise ValueError("subgradient given without objective")
        objective = _zero_value
        subgradient = lambda x: np.zeros(n)
        objective_quadratic = (np.zeros((n, n)), np.zeros(n), 0.0)
    elif subgradient is None:
        raise ValueError("objective given without subgradient")
    aff = None
    if block.equality is not None and not block.inequalities and block.linear_inequalities is None:
        A, b = block.equality
        aff = (A.T @ A, -A.T @ b)
    return AgentOracle(
        objective=objective,
        subgradient=subgradient,
        mapping=block.penalty_mapping,
        dim=n,
        mapping_affine=aff,
        objective_quadratic=objective_quadratic,
        infeasibility=block.residual,
    )


def partition_evenly(count: int, m: int) -> list[list[int]]:
    """Contiguous split of ``range(count)`` into ``m`` cells of near-equal size."""
    if m < 1 or count < m:
        raise ValueError(f"cannot split {count} items among {m} agents")
    bounds = np.linspace(0, count, m + 1).round().astype(int)
    return [list(range(bounds[i], bounds[i + 1])) for i in range(m)]


def build_ncp_problem(
    samples: Sequence[AgentOracle],
    partition: Sequence[Sequence[int]],
    metadata: ProblemMetadata | None = None,
) -> VIConstrainedProblem:
    """Sample-average complementarity problem over the nonnegative orthant.

    Agent ``i`` owns the samples listed in ``partition[i]`` and its ``f_i``,
    ``F_i`` are the sums over those samples.
    """
    samples = list(samples)
    if not samples:
        raise ValueError("no samples")
    seen = sorted(j for cell in partition for j in cell)
    if any(len(cell) == 0 for cell in partition):
        raise ValueError("empty partition cell")
    if seen != list(range(len(samples))):
        raise ValueError("partition must cover every sample exactly once")
    agents = [sum_oracles([samples[j] for j in cell]) for cell in partition]
    n = samples[0].dim
    return VIConstrainedProblem(tuple(agents), NonnegativeOrthant(n), metadata or ProblemMetadata(name="ncp"))


def build_equality_coupled_problem(
    agents: Sequence[AgentOracle], metadata: ProblemMetadata | None = None
) -> VIConstrainedProblem:
    """Problem over the whole space; the coupling ``sum F_i(x) = 0`` lives in the mapping."""
    agents = tuple(agents)
    if not agents:
        raise ValueError("at least one agent is required")
    return VIConstrainedProblem(agents, WholeSpace(agents[0].dim), metadata or ProblemMetadata(name="equality-coupled"))


# --- validation ---------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    kind: str  # "convexity" | "monotonicity" | "monotonicity-exact" | "gradient"
    agent: int | None  # None for the summed mapping
    amount: float
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]
    sample_count: int
    tol: float

    @property
    def passed(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        if self.passed:
            return f"ok ({self.sample_count} sampled pairs, tol {self.tol:g})"
        kinds = sorted({v.kind for v in self.violations})
        return f"{len(self.violations)} violation(s): {', '.join(kinds)}"


def _min_sym_eig(M: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(0.5 * (M + M.T))[0])


def validate_problem(
    problem: VIConstrainedProblem,
    sample_count: int = 200,
    tol: float = 1e-8,
    sampling_box: Box | None = None,
    seed: int = 0,
) -> ValidationReport:
    """Spot-check convexity of each ``f_i`` and monotonicity of each ``F_i``.

    Pairs ``(x, y)`` are drawn from the set (or from ``sampling_box``
    projected onto it).  Affine agents get an extra exact test on the
    smallest eigenvalue of ``(M + M')/2``.  Each check is scale-aware:
    a violation is recorded when the defect exceeds ``tol * (1 + scale)``.
    """
    if not problem.set.compact and sampling_box is None:
        raise ValueError("unbounded set: supply sampling_box")
    rng = np.random.default_rng(seed)
    xs = sample_points(problem.set, rng, sample_count, sampling_box)
    ys = sample_points(problem.set, rng, sample_count, sampling_box)
    found: list[Violation] = []
    for idx, agent in enumerate(problem.agents):
        worst_cvx = worst_mon = 0.0
        for x, y in zip(xs, ys):
            fx, fy = agent.objective(x), agent.objective(y)
            g = agent.subgradient(x)
            lin = g @ (y - x)
            defect = fx + lin - fy
            if defect > tol * (1 + abs(fx) + abs(fy) + abs(lin)):
                worst_cvx = max(worst_cvx, defect)
            Fx, Fy = agent.mapping(x), agent.mapping(y)
            inner = (Fx - Fy) @ (x - y)
            if -inner > tol * (1 + np.linalg.norm(Fx - Fy) * np.linalg.norm(x - y)):
                worst_mon = max(worst_mon, -inner)
        if worst_cvx > 0:
            found.append(Violation("convexity", idx, worst_cvx, "subgradient inequality fails on samples"))
        if worst_mon > 0:
            found.append(Violation("monotonicity", idx, worst_mon, "negative inner product on samples"))
        if agent.mapping_affine is not None:
            lam = _min_sym_eig(agent.mapping_affine[0])
            scale = 1 + np.abs(agent.mapping_affine[0]).max()
            if lam < -tol * scale:
                found.append(Violation("monotonicity-exact", idx, -lam, f"symmetric part has eigenvalue {lam:.6g}"))
    aff = problem.global_affine()
    if aff is not None:
        lam = _min_sym_eig(aff[0])
        if lam < -tol * (1 + np.abs(aff[0]).max()):
            found.append(Violation("monotonicity-exact", None, -lam, f"summed mapping symmetric eigenvalue {lam:.6g}"))
    return ValidationReport(tuple(found), sample_count, tol)


__all__ = [
    "AgentOracle",
    "ProblemMetadata",
    "VIConstrainedProblem",
    "ConstraintBlock",
    "Violation",
    "ValidationReport",
    "sum_oracles",
    "eval_global_objective",
    "eval_global_mapping",
    "eval_global_subgradient",
    "eval_global_infeasibility",
    "build_penalty_agent",
    "build_ncp_problem",
    "build_equality_coupled_problem",
    "partition_evenly",
    "validate_problem",
    "UnboundedSetError",
]
