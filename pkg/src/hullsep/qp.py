"""Strictly convex QP over a bounded polytope as a nearest-point problem.

    min x^T Q x + c^T x  s.t.  A x <= b

With Q = B^T B (Cholesky) and Q x0 = -c/2, the substitution y = B (x - x0)
turns the objective into |y|^2 - x0^T Q x0 and the constraints into
(A B^-1) y <= b - A x0. The minimizer is the point of that polytope
nearest the origin.
"""
from dataclasses import dataclass

import numpy as np

from .bodies import PointSetBody, PolytopeBody
from .errors import DimensionMismatch, NotPositiveDefinite, UnboundedBody, UnboundedFeasibleSet


@dataclass(frozen=True)
class QpReduction:
    K: PolytopeBody
    K_prime: PointSetBody
    B: np.ndarray
    x0: np.ndarray
    Q: np.ndarray
    c: np.ndarray

    def back_map(self, y):
        """(x, objective value) for a point y of the transformed polytope."""
        y = np.asarray(y, dtype=float)
        x = np.linalg.solve(self.B, y) + self.x0
        return x, float(x @ self.Q @ x + self.c @ x)

    def objective_from_distance(self, dist):
        return float(dist * dist - self.x0 @ self.Q @ self.x0)


def reduce_qp(Q, c, A, b):
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    c = np.asarray(c, dtype=float).reshape(-1)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).reshape(-1)
    m = Q.shape[0]
    if Q.shape != (m, m) or c.shape[0] != m or A.shape[1] != m or A.shape[0] != b.shape[0]:
        raise DimensionMismatch(f"inconsistent shapes Q{Q.shape}, c{c.shape}, A{A.shape}, b{b.shape}")
    if not np.allclose(Q, Q.T, rtol=1e-12, atol=1e-12):
        raise NotPositiveDefinite("Q is not symmetric")
    try:
        L = np.linalg.cholesky(Q)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite("Cholesky factorization of Q failed") from None
    B = L.T
    x0 = np.linalg.solve(Q, -0.5 * c)
    A_prime = np.linalg.solve(B.T, A.T).T  # A B^-1
    K = PolytopeBody(A_prime, b - A @ x0)
    try:
        K.reference_point()  # triggers the boundedness check
    except UnboundedBody as exc:
        raise UnboundedFeasibleSet(str(exc)) from None
    return QpReduction(K, PointSetBody(np.zeros((1, m))), B, x0, Q, c)
