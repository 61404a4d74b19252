import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pairig.geometry import (
    Ball,
    Box,
    NonnegativeOrthant,
    Polyhedron,
    UnboundedSetError,
    WholeSpace,
    contains,
    diameter_bound,
    project,
    project_polyhedron,
    sample_points,
)

finite = st.floats(-50, 50, allow_nan=False, allow_infinity=False)


def vectors(n):
    return arrays(np.float64, n, elements=finite)


def test_orthant_projection_clamps():
    assert np.array_equal(project(NonnegativeOrthant(2), [-1.0, 2.0]), [0.0, 2.0])


def test_ball_projection_scales_radially():
    np.testing.assert_allclose(project(Ball(np.zeros(2), 1.0), [3.0, 4.0]), [0.6, 0.8], atol=1e-15)


def test_box_projection_identity_on_interior():
    assert np.array_equal(project(Box([0, 0], [1, 1]), [0.5, 0.5]), [0.5, 0.5])


def test_whole_space_projection_is_copy():
    z = np.array([1.0, -2.0])
    out = project(WholeSpace(2), z)
    assert np.array_equal(out, z) and out is not z


def test_projection_rejects_wrong_dimension():
    with pytest.raises(ValueError):
        project(Box([0, 0], [1, 1]), [1.0, 2.0, 3.0])


def test_single_halfspace_projection():
    P = Polyhedron(A=[[1.0, 0.0]], c=[0.0], witness=[-1.0, 0.0])
    res = project_polyhedron(P, [1.0, 1.0])
    assert res.converged
    np.testing.assert_allclose(res.point, [0.0, 1.0], atol=1e-12)


def test_two_orthogonal_halfspaces_projection():
    P = Polyhedron(A=np.eye(2), c=[0.0, 0.0], witness=[-1.0, -1.0])
    np.testing.assert_allclose(project(P, [1.0, 1.0]), [0.0, 0.0], atol=1e-12)


def test_feasible_point_returned_unchanged():
    P = Polyhedron(A=np.eye(2), c=[0.0, 0.0], witness=[-1.0, -1.0])
    res = project_polyhedron(P, [-0.3, -2.0])
    assert res.sweeps == 0
    assert np.array_equal(res.point, [-0.3, -2.0])


def test_dykstra_matches_closed_form_on_wedge():
    # x1 + x2 <= 1 and x1 - x2 <= 0: projection of (2, 0) is the vertex (0.5, 0.5)
    P = Polyhedron(A=[[1.0, 1.0], [1.0, -1.0]], c=[1.0, 0.0], witness=[0.0, 0.0])
    np.testing.assert_allclose(project(P, [2.0, 0.0]), [0.5, 0.5], atol=1e-9)


def test_dykstra_does_not_stop_while_corrections_move():
    # z - p = (2, 34, 31) = 38/3 (1,1,1) + 32/3 (-1,2,0) + 55/3 e3 with all multipliers >= 0
    P = Polyhedron(A=[[1.0, 1.0, 1.0], [-1.0, 2.0, 0.0]], c=[1.0, 2.0], witness=np.zeros(3), lower=-3 * np.ones(3), upper=3 * np.ones(3))
    res = project_polyhedron(P, [0.0, 34.0, 34.0])
    assert res.converged
    np.testing.assert_allclose(res.point, [-2.0, 0.0, 3.0], atol=1e-8)


def test_dykstra_reports_nonconvergence():
    P = Polyhedron(A=[[1.0, 1.0], [1.0, -1.0]], c=[1.0, 0.0], witness=[0.0, 0.0], max_sweeps=1)
    res = project_polyhedron(P, [5.0, -3.0], max_sweeps=1)
    assert not res.converged
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        P.project([5.0, -3.0])
    assert any(issubclass(w.category, RuntimeWarning) for w in caught)


def test_infeasible_witness_rejected():
    with pytest.raises(ValueError):
        Polyhedron(A=[[1.0]], c=[0.0], witness=[1.0])


def test_diameter_bounds():
    assert diameter_bound(Box([-1, -1], [1, 1])) == pytest.approx(math.sqrt(2))
    assert diameter_bound(Ball(np.zeros(3), 2.5)) == 2.5
    with pytest.raises(UnboundedSetError):
        diameter_bound(NonnegativeOrthant(2))


def test_contains_semantics():
    assert contains(NonnegativeOrthant(2), [0.0, 0.0])
    assert contains(Box([0.0], [1.0]), [1 + 1e-12], tol=1e-9)
    assert not contains(Ball(np.zeros(2), 1.0), [2.0, 0.0])


def test_box_validation():
    with pytest.raises(ValueError):
        Box([1.0], [0.0])
    with pytest.raises(ValueError):
        Box([0.0], [np.inf])


def test_sampled_points_are_feasible():
    rng = np.random.default_rng(0)
    for s in (Box([-1, 0], [1, 2]), Ball(np.ones(2), 0.5)):
        pts = sample_points(s, rng, 50)
        assert all(s.contains(p) for p in pts)
    pts = sample_points(NonnegativeOrthant(3), rng, 20, box=Box.cube(3, -1, 1))
    assert np.all(pts >= 0)
    with pytest.raises(ValueError):
        sample_points(NonnegativeOrthant(3), rng, 5)


SETS = [
    Box([-1.0, 0.0, -2.0], [1.0, 3.0, 0.5]),
    Ball(np.array([0.5, -1.0, 0.0]), 2.0),
    NonnegativeOrthant(3),
    WholeSpace(3),
    Polyhedron(A=[[1.0, 1.0, 1.0], [-1.0, 2.0, 0.0]], c=[1.0, 2.0], witness=np.zeros(3), lower=-3 * np.ones(3), upper=3 * np.ones(3)),
]


@pytest.mark.parametrize("s", SETS, ids=lambda s: type(s).__name__)
@settings(max_examples=60, deadline=None)
@given(u=vectors(3), v=vectors(3))
def test_projection_is_nonexpansive(s, u, v):
    pu, pv = s.project(u), s.project(v)
    assert np.linalg.norm(pu - pv) <= np.linalg.norm(u - v) + 1e-7


@pytest.mark.parametrize("s", SETS, ids=lambda s: type(s).__name__)
@settings(max_examples=60, deadline=None)
@given(z=vectors(3))
def test_projection_is_idempotent_and_feasible(s, z):
    p = s.project(z)
    assert s.contains(p, tol=1e-8)
    np.testing.assert_allclose(s.project(p), p, atol=1e-8)


@pytest.mark.parametrize("s", [x for x in SETS if x.compact], ids=lambda s: type(s).__name__)
@settings(max_examples=40, deadline=None)
@given(z=vectors(3), seed=st.integers(0, 2**32 - 1))
def test_projection_variational_characterization(s, z, seed):
    p = s.project(z)
    ys = sample_points(s, np.random.default_rng(seed), 20)
    scale = 1 + np.linalg.norm(z - p) * 10
    assert np.max((ys - p) @ (z - p)) <= 1e-7 * scale
