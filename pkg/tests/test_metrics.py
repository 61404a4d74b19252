import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pairig import AgentOracle, Ball, Box, NonnegativeOrthant, RateSchedule, TikhonovSchedule, VIConstrainedProblem
from pairig.baselines import brute_force_affine_vi, tikhonov_trajectory
from pairig.metrics import (
    ConstantsEstimate,
    InitTerms,
    TikhonovBoundParams,
    check_consensus_bounds,
    check_schedule_conditions,
    complexity_bracket,
    dual_gap,
    dual_gap_details,
    estimate_constants,
    fit_loglog_slope,
    gap_metric,
    harmonic_sum_bounds,
    harmonic_threshold,
    iteration_complexity,
    ncp_infeasibility_phi,
    rate_bound_gap,
    rate_bound_suboptimality,
    rate_threshold,
    tikhonov_bound,
    tikhonov_continuity_bound,
)
from pairig.solver import RunOptions, run

from builders import random_affine_box_problem, random_monotone_matrix, tikhonov_problem

UNIT = ConstantsEstimate.given(1.0, 1.0, 1.0, 0.0)


def identity_problem(set_=None):
    return VIConstrainedProblem((AgentOracle.affine(M=np.eye(1)),), set_ or Box([-1.0], [1.0]))


def test_gap_zero_at_solution_and_quarter_at_one():
    p = identity_problem()
    assert dual_gap(p, [0.0]) == 0.0
    # max_y y (1 - y) = 1/4 at y = 1/2
    d = dual_gap_details(p, [1.0])
    assert d.value == pytest.approx(0.25, abs=1e-12)
    assert d.argmax[0] == pytest.approx(0.5, abs=1e-9)
    assert dual_gap(p, [1.0], mode="sampled", budget=4000) == pytest.approx(0.25, abs=1e-3)


def test_gap_on_higher_dimension_uses_iterative_maximizer():
    rng = np.random.default_rng(0)
    n = 8
    M = random_monotone_matrix(rng, n, strong=0.2)
    p = VIConstrainedProblem((AgentOracle.affine(M=M, q=rng.normal(size=n)),), Box.cube(n, -1, 1))
    x = rng.uniform(-1, 1, n)
    exact = dual_gap(p, x)
    assert exact >= dual_gap(p, x, mode="sampled", budget=3000) - 1e-9


def test_gap_unbounded_on_orthant():
    # F(y) = (1, -1) on the orthant: F(y)'(x - y) = y2 - y1 + const grows along y2
    p = VIConstrainedProblem((AgentOracle.affine(M=np.zeros((2, 2)), q=np.array([1.0, -1.0])),), NonnegativeOrthant(2))
    d = dual_gap_details(p, [0.0, 0.0])
    assert d.unbounded and math.isinf(d.value)


def test_gap_rejects_unknown_mode():
    with pytest.raises(ValueError):
        dual_gap(identity_problem(), [0.0], mode="exactish")


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 4))
def test_gap_nonnegative_on_set(seed, n):
    rng = np.random.default_rng(seed)
    p = random_affine_box_problem(rng, 2, n)
    x = rng.uniform(-1, 1, n)
    assert dual_gap(p, x) >= -1e-9
    assert dual_gap(p, x, mode="sampled", budget=50, seed=seed) >= -1e-9


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 3))
def test_gap_vanishes_at_oracle_solution(seed, n):
    rng = np.random.default_rng(seed)
    M = random_monotone_matrix(rng, n)
    q = rng.normal(size=n)
    X = Box.cube(n, -1, 1)
    x_star = brute_force_affine_vi(M, q, X)
    assert dual_gap(VIConstrainedProblem((AgentOracle.affine(M=M, q=q),), X), x_star) <= 1e-6


def test_phi_examples():
    assert ncp_infeasibility_phi([1.0, 0.0], [0.0, 3.0]) == 0.0
    assert ncp_infeasibility_phi([-1.0, 2.0], [1.0, -2.0]) == 10.0
    assert ncp_infeasibility_phi(np.zeros(3), np.zeros(3)) == 0.0
    with pytest.raises(ValueError):
        ncp_infeasibility_phi([1.0], [1.0, 2.0])


@settings(max_examples=200, deadline=None)
@given(
    signs=arrays(np.int8, 4, elements=st.integers(-1, 1)),
    fsigns=arrays(np.int8, 4, elements=st.integers(-1, 1)),
    mags=arrays(np.float64, 8, elements=st.floats(0.1, 10)),
)
def test_phi_zero_exactly_on_complementary_pairs(signs, fsigns, mags):
    x = signs * mags[:4]
    F = fsigns * mags[4:]
    complementary = np.all(x >= 0) and np.all(F >= 0) and np.all(x * F == 0)
    phi = ncp_infeasibility_phi(x, F)
    if complementary:
        assert phi == 0.0
    else:
        # negative parts contribute squares; with nonnegative vectors x'F is a sum of positive products
        assert phi > 0.0


def test_constants_identity_on_unit_ball():
    p = VIConstrainedProblem((AgentOracle.affine(M=np.eye(2)),), Ball(np.zeros(2), 1.0))
    c = estimate_constants(p, samples=50)
    assert c.C_F == pytest.approx(1.0, abs=1e-12)
    assert c.methods["C_F"] == "exact"
    assert c.M_X == 1.0


def test_constants_abs_value_sampled():
    a = AgentOracle(objective=lambda x: float(abs(x[0])), subgradient=np.sign, mapping=lambda x: np.zeros(1), dim=1)
    c = estimate_constants(VIConstrainedProblem((a,), Box([-1.0], [1.0])), samples=100)
    assert c.raw["C_f"] == 1.0
    assert c.C_f == pytest.approx(1.1)
    assert c.methods["C_f"] == "sampled"
    # zero mapping: the safety factor keeps it at zero
    assert c.C_F == 0.0


def test_constants_exact_on_box_quadratic():
    # one agent, f = x^2/2 + x on [-1, 2]: |f'| max 3 at x=2, f ranges over [-0.5, 4]
    p = VIConstrainedProblem((AgentOracle.affine(M=2 * np.eye(1), q=np.ones(1), Q=np.eye(1), c=np.ones(1)),), Box([-1.0], [2.0]))
    c = estimate_constants(p, samples=10)
    assert (c.C_f, c.C_F, c.M_X, c.M_f) == (3.0, 5.0, 2.0, 4.0)
    assert c.method == "exact"


def test_constants_scale_with_agent_count():
    a = AgentOracle.affine(M=np.eye(1), Q=np.eye(1))
    c = estimate_constants(VIConstrainedProblem((a, a, a), Box([-1.0], [1.0])), samples=10)
    assert c.C_F == 3.0 and c.C_f == 3.0


def test_constants_need_box_for_unbounded_set():
    p = identity_problem(NonnegativeOrthant(1))
    with pytest.raises(ValueError):
        estimate_constants(p)
    c = estimate_constants(p, sampling_box=Box([0.0], [2.0]), samples=50)
    assert c.methods["M_X"] == "sampled" and c.M_X == pytest.approx(2.2)


def test_rate_bound_hand_value():
    # 2 (2 M_X^2/(eta0 gamma0) + gamma0 (C_F + eta0 C_f)^2 / (eta0 (1 + 2b))) / (N+1)^(1/2 - b)
    assert rate_bound_suboptimality(UNIT, 1.0, 1.0, 0.25, 0.0, 1, 1, 3) == pytest.approx(6.599663291074443, rel=1e-14)


def test_rate_bounds_refuse_below_threshold():
    assert rate_threshold(0.0) == 3.0
    assert rate_threshold(0.7) == pytest.approx(2 ** (2 / 0.3) - 1)
    with pytest.raises(ValueError):
        rate_bound_suboptimality(UNIT, 1.0, 1.0, 0.25, 0.0, 1, 1, 2)
    with pytest.raises(ValueError):
        rate_bound_gap(UNIT, 1.0, 1.0, 0.25, 0.7, 1, 1, 100)
    with pytest.raises(ValueError):
        rate_bound_gap(UNIT, 1.0, 1.0, 0.25, 0.0, 2, 3, 100)


def test_last_agent_drops_agent_terms():
    c = ConstantsEstimate.given(2.0, 3.0, 1.5, 4.0)
    init = InitTerms(f_gap=0.5, agent_spread=0.7, start_offset=0.2)
    base = rate_bound_suboptimality(c, 0.5, 2.0, 0.2, 0.3, 4, 4, 500, InitTerms(0.5, 0.0, 0.2))
    assert rate_bound_suboptimality(c, 0.5, 2.0, 0.2, 0.3, 4, 4, 500, init) > base
    assert rate_bound_suboptimality(c, 0.5, 2.0, 0.2, 0.3, 4, 1, 500, init) > rate_bound_suboptimality(c, 0.5, 2.0, 0.2, 0.3, 4, 4, 500, init)
    g_last = rate_bound_gap(c, 0.5, 2.0, 0.2, 0.3, 4, 4, 500, InitTerms())
    expect = (2 - 0.3) / 501**0.2 * (2 * 1.5**2 / 0.5 + 2 * 4.0 * 2.0 / (1 - 0.15 - 0.2) + (3 + 2 * 2) ** 2 * 0.5 / 0.7)
    assert g_last == pytest.approx(expect, rel=1e-14)


@pytest.mark.parametrize("b", [0.1, 0.25, 0.4])
def test_gap_bound_decays_like_power(b):
    ratio = rate_bound_gap(UNIT, 1.0, 1.0, b, 0.0, 2, 1, 2 * 10**9) / rate_bound_gap(UNIT, 1.0, 1.0, b, 0.0, 2, 1, 10**9)
    assert ratio == pytest.approx(2**-b, rel=1e-8)


def test_iteration_complexity_frozen_value_and_scaling():
    # B = 2 (4 + 11/3) = 46/3, N = ceil((2B/eps)^4) = ceil(920^4 / 81)
    assert complexity_bracket(1.0, 1.0) == pytest.approx(46 / 3)
    assert iteration_complexity(1.0, 1.0, 0.1) == 8844357531
    base = iteration_complexity(1.0, 2.0, 0.05)
    assert iteration_complexity(2.0, 4.0, 0.05) / base == pytest.approx(16, rel=1e-9)
    assert iteration_complexity(1.0, 2.0, 0.025) / base == pytest.approx(16, rel=1e-9)
    with pytest.raises(ValueError):
        iteration_complexity(1.0, 1.0, 0.0)


def test_harmonic_examples():
    assert harmonic_sum_bounds(0.0, 1.0, 3) == (2.0, 4.0, 4.0)
    lo, exact, hi = harmonic_sum_bounds(0.5, 1.0, 3)
    assert (lo, hi) == (2.0, 4.0)
    assert exact == pytest.approx(1 + 1 / math.sqrt(2) + 1 / math.sqrt(3) + 0.5, rel=1e-15)
    assert harmonic_sum_bounds(0.0, 1.0, 1) == (1.0, 2.0, 2.0)
    with pytest.raises(ValueError):
        harmonic_sum_bounds(0.5, 1.0, 2)
    with pytest.raises(ValueError):
        harmonic_sum_bounds(1.0, 1.0, 10)


@pytest.mark.parametrize("beta", [0.0, 0.1, 0.25, 0.49, 0.9])
@pytest.mark.parametrize("Gamma", [1.0, 2.0, 10.0])
def test_harmonic_sandwich_grid(beta, Gamma):
    start = math.ceil(harmonic_threshold(beta, Gamma) - 1e-12)
    for K in np.unique(np.round(np.geomspace(max(start, 1), max(start, 1) * 1000, 20)).astype(int)):
        lo, exact, hi = harmonic_sum_bounds(beta, Gamma, int(K))
        assert lo <= exact <= hi


def test_schedule_conditions_pass_and_fail():
    good = check_schedule_conditions(TikhonovSchedule(1.0, 1.0, 0.4, 0.2, 256.0), 1.0)
    assert good.passed, [c for c in good.conditions if not c.passed]
    bad = check_schedule_conditions(TikhonovSchedule(1.0, 1.0, 0.4, 0.2, 1.0), 1.0)
    assert not bad.passed
    assert not bad["Gamma^(1-a-b) >= 4/(gamma eta mu)"].passed
    first = bad["(i) positive, nonincreasing, gamma0 eta0 mu <= 0.5"]
    assert not first.passed and first.witness == 0
    same = check_schedule_conditions(TikhonovSchedule(1.0, 1.0, 0.3, 0.3, 256.0), 1.0)
    assert not same["a > b"].passed


def test_tikhonov_bound_structure():
    s = TikhonovSchedule(1.0, 1.0, 0.4, 0.2, 256.0)
    params = TikhonovBoundParams.build(s, 1.0, 3, 2.0, 1.0, start_distance=0.1)
    second = 2 * params.tau * params.B0 / (256.0 ** (0.4 - 0.2))
    assert tikhonov_bound(params, 0, 1) == pytest.approx(second, rel=1e-14)
    assert tikhonov_bound(params, 0, 3) > tikhonov_bound(params, 0, 1)
    k = 10.0**12
    ratio = tikhonov_bound(params, 2 * k, 1) / tikhonov_bound(params, k, 1)
    assert ratio == pytest.approx(2**-0.2, rel=1e-6)
    with pytest.raises(ValueError):
        TikhonovBoundParams.build(TikhonovSchedule(1.0, 1.0, 0.4, 0.2, 1.0), 1.0, 3, 2.0, 1.0, 0.1)


def test_tikhonov_trajectory_continuity():
    p = tikhonov_problem()
    s = TikhonovSchedule(1.0, 1.0, 0.4, 0.2, 256.0)
    c = estimate_constants(p)
    traj = tikhonov_trajectory(p, s, 200, tol=1e-11)
    for prev, cur in zip(traj, traj[1:]):
        bound = tikhonov_continuity_bound(c.C_f, p.m, 1.0, cur.eta, prev.eta)
        assert np.linalg.norm(cur.point - prev.point) <= bound + 1e-8


def test_consensus_bounds_on_instrumented_run():
    p = random_affine_box_problem(np.random.default_rng(11), 3, 2)
    c = estimate_constants(p)
    s = RateSchedule(1.0, 1.0)
    avg0 = np.array([[0.5, 0.5], [-0.5, 0.2], [0.0, -1.0]])
    tr = run(p, s, 0.3, 400, x0=np.zeros(2), avg0=avg0, options=RunOptions(log_at="geometric", infeasibility=gap_metric())).trace
    report = check_consensus_bounds(tr, c, s, 0.3)
    assert report.passed and report.checked > 0
    # the last agent compares with itself
    assert np.all(tr.column("consensus_dist")[:, -1] == 0.0)


def test_consensus_trivial_for_single_agent():
    p = random_affine_box_problem(np.random.default_rng(12), 1, 2)
    s = RateSchedule(1.0, 1.0)
    tr = run(p, s, 0.0, 50).trace
    assert check_consensus_bounds(tr, estimate_constants(p), s, 0.0).passed


def test_consensus_detects_understated_constants():
    p = random_affine_box_problem(np.random.default_rng(11), 3, 2)
    s = RateSchedule(1.0, 1.0)
    avg0 = np.array([[1.0, 1.0], [-1.0, -1.0], [0.0, 0.0]])
    tr = run(p, s, 0.0, 30, x0=np.zeros(2), avg0=avg0).trace
    assert not check_consensus_bounds(tr, ConstantsEstimate.given(1e-6, 1e-6), s, 0.0, gap_column=False).passed


def test_loglog_slope():
    N = np.array([10.0, 100.0, 1000.0])
    assert fit_loglog_slope(N, 3 * N**-0.25) == pytest.approx(-0.25, abs=1e-12)
    with pytest.raises(ValueError):
        fit_loglog_slope(N, [1.0, 0.0, 1.0])
