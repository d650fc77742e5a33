import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hullsep.bodies import BallBody
from hullsep.errors import TooManyVertices
from hullsep.oracles import (
    ball_distance,
    grid_distance,
    hulls_intersect_lp,
    membership_lp,
    project_to_hull,
    simplex_grid,
)

PENTAGON = np.array([[0, 0], [4, 3], [8, 2], [7, 0], [5, -2]], dtype=float)


def test_ball_distance_examples():
    assert ball_distance(BallBody([-4, 0], 2.1), BallBody([4, 0], 2.1)).value == pytest.approx(3.8, abs=1e-15)
    assert ball_distance(BallBody([1, 1], 1), BallBody([1, 1], 3)).value == 0.0
    assert ball_distance(BallBody([0, 0], 1), BallBody([3, 0], 2)).value == 0.0


def test_singletons_exact():
    r = grid_distance([[0, 0]], [[3, 4]], 1e-2)
    assert r.value == 5.0 and r.error_bound == 0.0


def test_segment_vs_point():
    r = grid_distance([[0, -1], [0, 1]], [[2, 0]], 1e-2)
    lo, hi = r.bracket
    assert lo <= 2.0 <= hi + 1e-12


def test_pentagon_subhull_reference():
    r = grid_distance(PENTAGON[:3], [[1, 5]], 1e-3)
    # (1,5) projects onto the edge (0,0)-(4,3) at distance 17/5
    assert r.value == pytest.approx(3.4, abs=1e-12)


def test_too_many_vertices():
    with pytest.raises(TooManyVertices):
        grid_distance(PENTAGON, [[1, 5]], 1e-2)


def test_grid_size():
    W = simplex_grid(3, 0.1)
    assert W.shape == (66, 3)
    assert np.allclose(W.sum(axis=1), 1.0) and W.min() >= 0


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_projection_beats_random_hull_points(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(2, 5))
    W = rng.normal(size=(int(rng.integers(1, 5)), m))
    x = rng.normal(size=(1, m)) * 3
    d, y = project_to_hull(W, x)
    samples = rng.dirichlet(np.ones(W.shape[0]), 500) @ W
    assert d[0] <= np.min(np.linalg.norm(samples - x, axis=1)) + 1e-9
    assert membership_lp(W, y[0]) or W.shape[0] == 1


def test_membership():
    assert membership_lp(PENTAGON, PENTAGON.mean(axis=0))
    assert membership_lp(PENTAGON, PENTAGON[2])
    assert not membership_lp(PENTAGON, [1, 5])


def test_hulls_intersect():
    assert hulls_intersect_lp([[0, 0], [2, 0], [0, 2]], [[1, 1], [3, 3]])
    assert not hulls_intersect_lp([[0, 0], [1, 0], [0, 1]], [[2, 2], [3, 3]])
