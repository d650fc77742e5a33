import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hullsep.bodies import BallBody, PointSetBody, PolytopeBody, find_pivot, find_weak_pivot
from hullsep.errors import EmptyBody, InfeasibleBody, UnboundedBody, ZeroDirection
from hullsep.linalg import Hyperplane, is_pivot

PENTAGON = np.array([[0, 0], [4, 3], [8, 2], [7, 0], [5, -2]], dtype=float)
UNIT_SQUARE = (np.array([[1, 0], [-1, 0], [0, 1], [0, -1]], dtype=float), np.array([1, 0, 1, 0], dtype=float))


def test_point_set_support():
    s = PointSetBody(PENTAGON).support([1, 0])
    assert np.array_equal(s.point, [8, 2]) and s.value == 8.0 and s.witness_id == 2


def test_ball_support():
    s = BallBody([0, 0], 1.0).support([3, 4])
    assert s.point == pytest.approx([0.6, 0.8])
    # value is w.x; per unit direction it is the radius
    assert s.value == pytest.approx(5.0) and s.value / 5.0 == pytest.approx(1.0)


def test_polytope_support_matches_vertex_scan():
    s = PolytopeBody(*UNIT_SQUARE).support([1, 1])
    verts = np.array([[0, 0], [1, 0], [0, 1], [1, 1.0]])
    assert s.point == pytest.approx(verts[np.argmax(verts @ [1, 1])])
    assert s.value == pytest.approx(2.0)


def test_support_ties_pick_lowest_index():
    s = PointSetBody([[0, 1], [0, 1], [0, -1]]).support([0, 1])
    assert s.witness_id == 0


def test_zero_direction():
    with pytest.raises(ZeroDirection):
        PointSetBody(PENTAGON).support([0, 0])


def test_empty_point_set():
    with pytest.raises(EmptyBody):
        PointSetBody(np.zeros((0, 2)))


def test_points_read_only():
    body = PointSetBody(PENTAGON)
    with pytest.raises(ValueError):
        body.points[0, 0] = 1.0


def test_unbounded_polytope():
    with pytest.raises(UnboundedBody):
        PolytopeBody(np.array([[1.0, 0.0]]), np.array([1.0])).support([-1, 0])


def test_infeasible_polytope():
    with pytest.raises(InfeasibleBody):
        PolytopeBody(np.array([[1.0], [-1.0]]), np.array([0.0, -1.0])).support([1.0])


def test_contains():
    assert PointSetBody(PENTAGON).contains([4, 1])
    assert not PointSetBody(PENTAGON).contains([1, 5])
    assert BallBody([0, 0], 1).contains([0.6, 0.8])
    assert not BallBody([0, 0], 1).contains([0.8, 0.8])
    assert PolytopeBody(*UNIT_SQUARE).contains([1, 1])
    assert not PolytopeBody(*UNIT_SQUARE).contains([1.1, 0.5])


def test_diameter_bounds():
    assert BallBody([1, 1], 2.1).diameter_bound() == 4.2
    assert PointSetBody([[0, 0], [2, 0]]).diameter_bound() == 2.0
    d0 = np.sqrt(68.0)
    rho = PointSetBody(PENTAGON).diameter_bound()
    assert d0 <= rho <= 2 * d0
    assert PointSetBody(PENTAGON).diameter_bound(exact=True) == pytest.approx(d0)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_diameter_bound_brackets_exact(seed):
    rng = np.random.default_rng(seed)
    body = PointSetBody(rng.normal(size=(int(rng.integers(1, 15)), int(rng.integers(1, 5)))))
    exact = body.diameter_bound(exact=True)
    assert exact - 1e-12 <= body.diameter_bound() <= 2 * exact + 1e-12


def test_pentagon_witness_state_has_no_pivot():
    assert find_pivot(PointSetBody(PENTAGON), [3, 1], [1, 5]) is None


def test_segment_pivot():
    r = find_pivot(PointSetBody([[0, 0], [4, 0]]), [0, 0], [2, 1])
    assert np.array_equal(r.point, [4, 0])


def test_ball_pivot():
    r = find_pivot(BallBody([0, 0], 1.0), [0, 0], [0, 0.5])
    assert r.point == pytest.approx([0, 1])


@pytest.mark.parametrize("strategy", ["max-violation", "first-violation", "min-angle"])
def test_strategies_return_true_pivots(strategy):
    rng = np.random.default_rng(11)
    for _ in range(100):
        V = rng.normal(size=(10, 3))
        body = PointSetBody(V)
        mover = V.T @ rng.dirichlet(np.ones(10))
        anchor = rng.normal(size=3)
        r = find_pivot(body, mover, anchor, strategy, np.random.default_rng(0))
        base = find_pivot(body, mover, anchor)
        assert (r is None) == (base is None)
        if r is not None:
            assert is_pivot(mover, anchor, r.point)


def test_weak_pivot_ball():
    r = find_weak_pivot(BallBody([-4, 0], 2.1), [-4, 0], Hyperplane([1, 0], 0))
    assert r.point == pytest.approx([-1.9, 0])


def test_weak_pivot_singleton_absent():
    assert find_weak_pivot(PointSetBody([[-4, 0]]), [-4, 0], Hyperplane([1, 0], 0)) is None


def test_weak_pivot_tie_lowest_index():
    r = find_weak_pivot(PointSetBody([[-4, 0], [-3, 1], [-3, -1]]), [-4, 0], Hyperplane([1, 0], 0))
    assert np.array_equal(r.point, [-3, 1]) and r.witness_id == 1
