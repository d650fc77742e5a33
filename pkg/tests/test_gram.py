import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hullsep.bodies import PointSetBody
from hullsep.errors import StaleCache
from hullsep.gram import angle_table, apply_step, fast_pivot, min_angle_pivot, precompute
from hullsep.triangle_i import SIDE_K, NaiveSearch, PairState

from instances import random_state

PENTAGON = np.array([[0, 0], [4, 3], [8, 2], [7, 0], [5, -2]], dtype=float)


def test_orthonormal_gram():
    c = precompute([[1, 0], [0, 1]], [[1, 1]])
    assert np.array_equal(c.Q, np.eye(2))


def test_cross_gram():
    assert np.array_equal(precompute([[1, 0]], [[2, 0]]).G, [[2.0]])


def test_pentagon_cross_column():
    assert precompute(PENTAGON, [[1, 5]]).G[:, 0].tolist() == [0, 19, 18, 7, -5]


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_fast_pivot_matches_naive(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, 6))
    V, Vp = rng.normal(size=(int(rng.integers(1, 21)), m)), rng.normal(size=(int(rng.integers(1, 21)), m))
    p, pp, y, yp = random_state(rng, V, Vp)
    if np.linalg.norm(p - pp) < 1e-9:
        return
    cache = precompute(V, Vp, y, yp)
    state = PairState.make(p, pp)
    naive = NaiveSearch(PointSetBody(V), PointSetBody(Vp)).find(SIDE_K, state)
    j = fast_pivot(cache, "K")
    assert (j is None) == (naive is None)
    if j is not None:
        assert j == naive.witness_id


def test_pentagon_witness_state_no_pivot():
    y = np.linalg.lstsq(np.vstack([PENTAGON.T, np.ones(5)]), [3, 1, 1], rcond=None)[0]
    cache = precompute(PENTAGON, [[1, 5]], np.clip(y, 0, None) / np.clip(y, 0, None).sum())
    cache.p = np.array([3.0, 1.0])
    assert fast_pivot(cache, "K") is None


def test_single_vertex_body():
    cache = precompute([[0, 0]], [[1, 0], [3, 0]], None, [0.0, 1.0])
    # the only vertex is the mover itself: not a pivot
    assert fast_pivot(cache, "K") is None
    # K' side: p'=(3,0), anchor (0,0): vertex (1,0) is closer to p than to p'? no, it is a pivot
    assert fast_pivot(cache, "K_prime") == 0


def test_apply_step_full_jump():
    c = precompute([[0, 0], [4, 0], [1, 1]], [[9, 9]])
    apply_step(c, "K", 2, 1.0)
    assert np.array_equal(c.y, [0, 0, 1])


def test_apply_step_half():
    c = precompute([[0, 0], [4, 0]], [[9, 9]])
    apply_step(c, "K", 1, 0.5)
    assert np.array_equal(c.p, [2, 0]) and np.array_equal(c.y, [0.5, 0.5])


def test_random_walk_reconstruction():
    rng = np.random.default_rng(4)
    V, Vp = rng.normal(size=(15, 4)), rng.normal(size=(9, 4))
    c = precompute(V, Vp)
    for _ in range(100):
        side = "K" if rng.random() < 0.5 else "K_prime"
        n = c.n if side == "K" else c.n_prime
        apply_step(c, side, int(rng.integers(n)), float(rng.uniform(0.01, 1.0)))
    assert np.allclose(c.p, V.T @ c.y, atol=1e-9)
    assert np.allclose(c.pp, Vp.T @ c.yp, atol=1e-9)
    assert np.allclose(c.Qy, c.Q @ c.y, atol=1e-9)


def test_min_angle_example():
    # p=(0,0), p'=(4,0): both vertices are pivots, (4,1) has the smaller angle
    c = precompute([[0, 0], [4, 1], [2, 3]], [[4, 0]])
    assert min_angle_pivot(c, angle_table(c, "K")) == 1


def test_min_angle_single_pivot():
    c = precompute([[0, 0], [-1, 0], [3, 3]], [[4, 0]])
    assert min_angle_pivot(c, angle_table(c, "K")) == fast_pivot(c, "K") == 2


def test_min_angle_no_pivot():
    c = precompute([[0, 0], [-1, 0]], [[4, 0]])
    assert min_angle_pivot(c, angle_table(c, "K")) is None and fast_pivot(c, "K") is None


def test_stale_table():
    c = precompute([[0, 0], [4, 1], [2, 3]], [[4, 0]])
    t = angle_table(c, "K")
    apply_step(c, "K", 1, 0.5)
    with pytest.raises(StaleCache):
        min_angle_pivot(c, t)
    with pytest.raises(StaleCache):
        fast_pivot(c, "K", expected_revision=0)
