import numpy as np
import pytest

from hullsep import triangle_i, triangle_ii
from hullsep.errors import NotPositiveDefinite, UnboundedFeasibleSet
from hullsep.qp import reduce_qp


def box(lo, hi, m=2):
    A = np.vstack([np.eye(m), -np.eye(m)])
    return A, np.concatenate([np.full(m, hi), np.full(m, -lo)])


def solve_reduced(red, eps=1e-4):
    cert, trace = triangle_i.run(red.K, red.K_prime, eps)
    if cert.kind == "Intersection":
        return red.back_map(cert.pair.p)
    dc, _ = triangle_ii.run(red.K, red.K_prime, cert.pair, eps, trace=trace)
    return red.back_map(dc.pair.p)


def test_identity_square():
    A, b = box(-1, 1)
    red = reduce_qp(np.eye(2), np.zeros(2), A, b)
    assert np.array_equal(red.x0, [0, 0])
    x, f = solve_reduced(red)
    assert np.allclose(x, 0, atol=1e-3) and f == pytest.approx(0.0, abs=1e-3)


def test_halfplane_in_box():
    A, b = box(-3, 3)
    A = np.vstack([A, [-1, 0]])
    b = np.append(b, -1.0)
    x, f = solve_reduced(reduce_qp(np.diag([1.0, 4.0]), np.zeros(2), A, b))
    assert np.allclose(x, [1, 0], atol=1e-3)
    assert f == pytest.approx(1.0, abs=1e-3)


def test_interior_minimizer():
    A, b = box(0, 1)
    Q, c = np.array([[2.0, 1.0], [1.0, 2.0]]), np.array([-2.0, -2.0])
    red = reduce_qp(Q, c, A, b)
    assert red.x0 == pytest.approx(np.linalg.solve(Q, -0.5 * c))
    assert red.x0 == pytest.approx([1 / 3, 1 / 3])
    x, f = solve_reduced(red)
    assert np.allclose(x, [1 / 3, 1 / 3], atol=1e-3)
    assert f == pytest.approx(-2 / 3, abs=1e-3)


def test_objective_identity():
    A, b = box(0, 1)
    Q, c = np.array([[2.0, 1.0], [1.0, 2.0]]), np.array([1.0, -3.0])
    red = reduce_qp(Q, c, A, b)
    x = np.array([0.3, 0.9])
    y = red.B @ (x - red.x0)
    _, f = red.back_map(y)
    assert red.objective_from_distance(np.linalg.norm(y)) == pytest.approx(f)
    assert red.K.contains(y)


def test_not_positive_definite():
    A, b = box(0, 1)
    with pytest.raises(NotPositiveDefinite):
        reduce_qp(np.diag([1.0, -1.0]), np.zeros(2), A, b)


def test_unbounded_feasible_set():
    with pytest.raises(UnboundedFeasibleSet):
        reduce_qp(np.eye(2), np.zeros(2), np.array([[1.0, 0.0], [0.0, 1.0]]), np.array([1.0, 1.0]))
