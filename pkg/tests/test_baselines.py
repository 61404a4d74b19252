import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pairig import AgentOracle, Box, ProblemMetadata, TikhonovSchedule, VIConstrainedProblem, WholeSpace
from pairig.baselines import (
    BASELINES,
    BaselineConfig,
    ConvergenceError,
    brute_force_affine_vi,
    extragradient_solve,
    natural_residual,
    projected_ig_run,
    regularized_mapping,
    saga_projected_run,
    solve_regularized_vi,
    tikhonov_trajectory,
)
from pairig.metrics import dual_gap

from builders import quadratic_finite_sum, random_monotone_matrix


def half_square_problem(m=1):
    return VIConstrainedProblem(tuple(AgentOracle.affine(Q=np.eye(1)) for _ in range(m)), WholeSpace(1))


def test_projected_ig_halves_iterate():
    tr = projected_ig_run(half_square_problem(), None, BaselineConfig("projected-ig", 0.5, "constant", 6), x0=[1.0])
    np.testing.assert_allclose([rec.avg[0, 0] for rec in tr.records], 0.5 ** np.arange(7), rtol=1e-15)


@pytest.mark.parametrize("method", sorted(BASELINES))
def test_zero_objective_is_stationary(method):
    p = VIConstrainedProblem((AgentOracle.affine(dim=2), AgentOracle.affine(dim=2)), WholeSpace(2))
    tr = BASELINES[method](p, None, BaselineConfig(method, 0.3, "constant", 10), x0=[0.4, -0.2])
    np.testing.assert_array_equal(tr.meta["final_point"], [0.4, -0.2])


@pytest.mark.parametrize("method", ["proximal-iag", "saga"])
def test_single_agent_reduces_to_projected_gradient(method):
    p = VIConstrainedProblem((AgentOracle.affine(Q=np.diag([1.0, 3.0]), c=np.array([1.0, -1.0])),), Box.cube(2, -0.2, 2))
    cfg = BaselineConfig(method, 0.1, "constant", 30)
    ref = projected_ig_run(p, None, BaselineConfig("projected-ig", 0.1, "constant", 30), x0=[1.0, 1.0])
    tr = BASELINES[method](p, None, cfg, x0=[1.0, 1.0])
    np.testing.assert_allclose(tr.meta["final_point"], ref.meta["final_point"], atol=1e-14)


def test_saga_first_pass_uses_table_at_start():
    # two agents f_j = 0.5 (x - t_j)^2; table at x0 = 0 holds -t_j
    t = np.array([1.0, -3.0])
    agents = tuple(AgentOracle.affine(Q=np.eye(1), c=np.array([-tj]), dim=1) for tj in t)
    p = VIConstrainedProblem(agents, WholeSpace(1))
    cfg = BaselineConfig("saga", 0.1, "constant", 1, seed=7)
    draws = np.random.default_rng(7).integers(0, 2, size=2)
    x, table = 0.0, -t.copy()
    for j in draws:
        new = x - t[j]
        v = 2 * (new - table[j]) + table.sum()
        table[j] = new
        x = x - 0.1 * v
    assert saga_projected_run(p, None, cfg, x0=[0.0]).meta["final_point"][0] == pytest.approx(x, abs=1e-15)


@pytest.mark.parametrize("method,step", [("saga", 0.5), ("proximal-iag", 0.5)])
def test_variance_reduced_methods_converge_linearly(method, step):
    p, x_star, f_star, L = quadratic_finite_sum()
    tr = BASELINES[method](p, None, BaselineConfig(method, step / (L * p.m), "constant", 300), x0=np.full(5, 5.0))
    err = tr.column("objective")[:, 0] - f_star
    assert err[300] < 1e-3 * err[0]
    assert (err[300] / err[100]) ** (1 / 200) < 0.99


def test_projected_ig_diminishing_approaches_minimizer():
    # f_j = 0.5 ||x - t_j||^2, minimizer is the mean target
    rng = np.random.default_rng(0)
    targets = rng.normal(size=(10, 3))
    p = VIConstrainedProblem(tuple(AgentOracle.affine(Q=np.eye(3), c=-t, c0=0.5 * t @ t) for t in targets), WholeSpace(3))
    x_star = targets.mean(axis=0)
    tr = projected_ig_run(p, None, BaselineConfig("projected-ig", 0.05, "diminishing", 3000, log_at=[10, 100, 1000]), x0=np.full(3, 4.0))
    dist = [np.linalg.norm(rec.avg[0] - x_star) for rec in tr.records]
    assert dist[-1] < 1e-2 and all(a > b for a, b in zip(dist, dist[1:]))
    p2, _, f_star, _ = quadratic_finite_sum()
    tr2 = projected_ig_run(p2, None, BaselineConfig("projected-ig", 0.1, "diminishing", 3000, log_at="geometric"), x0=np.full(5, 5.0))
    err = tr2.column("objective")[:, 0] - f_star
    assert err[-1] < 1e-2 * err[0]


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), method=st.sampled_from(sorted(BASELINES)))
def test_baseline_iterates_are_feasible(seed, method):
    rng = np.random.default_rng(seed)
    X = Box.cube(3, -0.5, 0.5)
    agents = tuple(AgentOracle.affine(Q=np.eye(3), c=rng.normal(size=3) * 5) for _ in range(3))
    p = VIConstrainedProblem(agents, X)
    tr = BASELINES[method](p, None, BaselineConfig(method, 0.4, "constant", 15, seed=seed))
    assert all(X.contains(rec.avg[0]) for rec in tr.records)


def test_baseline_config_validation():
    with pytest.raises(ValueError):
        BaselineConfig("saga", 0.0)
    with pytest.raises(ValueError):
        BaselineConfig("newton", 0.1)
    with pytest.raises(ValueError):
        BaselineConfig("saga", 0.1, "adaptive")


def test_regularized_vi_interior_minimizer():
    p = VIConstrainedProblem((AgentOracle.affine(Q=np.eye(1)),), Box([-1.0], [1.0]), ProblemMetadata(strong_convexity_modulus=1.0))
    for eta in (1.0, 0.1, 1e-3):
        assert solve_regularized_vi(p, eta).point[0] == pytest.approx(0.0, abs=1e-10)


def test_regularized_vi_closed_form():
    # F(x) = x - 1, f = x^2/2: (1 + eta) x - 1 = 0
    p = VIConstrainedProblem((AgentOracle.affine(M=np.eye(1), q=-np.ones(1), Q=np.eye(1)),), Box([-10.0], [10.0]), ProblemMetadata(strong_convexity_modulus=1.0))
    for eta in (2.0, 0.5, 0.01):
        pt = solve_regularized_vi(p, eta, tol=1e-12)
        assert pt.point[0] == pytest.approx(1 / (1 + eta), abs=1e-10)
        assert pt.residual <= 1e-12


def test_regularized_vi_requires_modulus_and_positive_eta():
    p = VIConstrainedProblem((AgentOracle.affine(Q=np.eye(1)),), Box([-1.0], [1.0]))
    with pytest.raises(ValueError):
        solve_regularized_vi(p, 1.0)
    with pytest.raises(ValueError):
        solve_regularized_vi(p.with_metadata(strong_convexity_modulus=1.0), 0.0)


def test_regularized_vi_converges_to_selected_solution():
    # SOL(X, F) with F = (x1, 0) on [-1,1]^2 is the segment x1 = 0; f = |x - (0.5, 0.4)|^2 / 2 selects (0, 0.4)
    M = np.diag([1.0, 0.0])
    p = VIConstrainedProblem((AgentOracle.affine(M=M, Q=np.eye(2), c=-np.array([0.5, 0.4])),), Box.cube(2, -1, 1), ProblemMetadata(strong_convexity_modulus=1.0))
    pts = [solve_regularized_vi(p, eta, tol=1e-10).point for eta in (1e-1, 1e-2, 1e-3)]
    errs = [np.linalg.norm(x - [0.0, 0.4]) for x in pts]
    assert errs[-1] < 1e-3 and all(a > b for a, b in zip(errs, errs[1:]))


def test_trajectory_constant_eta_and_closed_form():
    p = VIConstrainedProblem((AgentOracle.affine(M=np.eye(1), q=-np.ones(1), Q=np.eye(1)),), Box([-10.0], [10.0]), ProblemMetadata(strong_convexity_modulus=1.0))
    s = TikhonovSchedule(1.0, 1.0, 0.4, 0.2, 1.0)
    traj = tikhonov_trajectory(p, s, 30, tol=1e-12)
    etas = 1 / (np.arange(30) + 1.0) ** 0.2
    np.testing.assert_allclose([t.point[0] for t in traj], 1 / (1 + etas), atol=1e-10)
    np.testing.assert_allclose([t.eta for t in traj], etas, rtol=1e-15)
    # a constant regularization level reuses a single reference point
    same = tikhonov_trajectory(p, s, [5, 5, 5], tol=1e-12)
    assert same[0] is same[1] is same[2]


def test_regularized_mapping_exact_norm():
    M = np.array([[1.0, 2.0], [-2.0, 0.0]])
    p = VIConstrainedProblem((AgentOracle.affine(M=M, Q=3 * np.eye(2)),), Box.cube(2, -1, 1), ProblemMetadata(strong_convexity_modulus=3.0))
    G, L = regularized_mapping(p, 0.5)
    assert L == pytest.approx(np.linalg.norm(M + 1.5 * np.eye(2), 2))
    np.testing.assert_allclose(G(np.ones(2)), (M + 1.5 * np.eye(2)) @ np.ones(2))


def test_extragradient_raises_when_budget_exhausted():
    with pytest.raises(ConvergenceError) as info:
        extragradient_solve(lambda x: np.array([[0.0, 1.0], [-1.0, 0.0]]) @ x + 1e-9 * x, Box.cube(2, -1, 1), 1.0, 1e-14, 10, x0=[1.0, 1.0])
    assert info.value.best_point.shape == (2,)


def test_natural_residual_zero_at_solution():
    X = Box([-1.0], [1.0])
    assert natural_residual(lambda x: x - 2.0, X, np.array([1.0])) == 0.0
    assert natural_residual(lambda x: x - 2.0, X, np.array([0.0])) == 1.0


def test_brute_force_examples():
    X1 = Box([-1.0], [1.0])
    assert brute_force_affine_vi(np.eye(1), [0.0], X1)[0] == 0.0
    assert brute_force_affine_vi(np.eye(1), [-2.0], X1)[0] == 1.0
    np.testing.assert_allclose(brute_force_affine_vi(np.eye(2), [-0.5, 3.0], Box.cube(2, 0, 1)), [0.5, 0.0])


def test_brute_force_least_norm_on_solution_set():
    # F = (x1, 0): every (0, t) solves; least norm picks (0, 0)
    np.testing.assert_allclose(brute_force_affine_vi(np.diag([1.0, 0.0]), [0.0, 0.0], Box.cube(2, -1, 1)), [0.0, 0.0])


def test_brute_force_rejects_bad_input():
    with pytest.raises(ValueError):
        brute_force_affine_vi(np.eye(2), [0.0], Box.cube(2, 0, 1))
    with pytest.raises(ValueError):
        brute_force_affine_vi(np.eye(9), np.zeros(9), Box.cube(9, 0, 1))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 3))
def test_small_eta_regularized_solution_matches_oracle(seed, n):
    rng = np.random.default_rng(seed)
    M = random_monotone_matrix(rng, n, strong=0.5)
    q = rng.normal(size=n) * 2
    X = Box.cube(n, -1, 1)
    x_star = brute_force_affine_vi(M, q, X)
    p = VIConstrainedProblem((AgentOracle.affine(M=M, q=q, Q=np.eye(n)),), X, ProblemMetadata(strong_convexity_modulus=1.0))
    x_eta = solve_regularized_vi(p, 1e-6, tol=1e-11).point
    assert np.linalg.norm(x_eta - x_star) < 1e-4
    assert dual_gap(p, x_star) <= 1e-6
    # the VI condition at the regularized solution, checked on sampled y
    G, _ = regularized_mapping(p, 1e-6)
    ys = rng.uniform(-1, 1, size=(100, n))
    g = G(x_eta)
    assert np.min((ys - x_eta) @ g) >= -1e-9 * (1 + np.linalg.norm(g))
