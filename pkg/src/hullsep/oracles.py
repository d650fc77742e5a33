"""Independent ground truth for tests and certificate audits.

None of these share code with the iterative algorithms beyond the LP solver:
analytic ball distances, brute-force barycentric grids for tiny hulls, and
exact LP membership / overlap tests.
"""
import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, TooManyVertices
from .simplex import equality_feasible, simplex_weights

MAX_GRID_VERTICES = 4
CHUNK = 100_000


@dataclass(frozen=True)
class OracleResult:
    value: float
    argmin_pair: tuple | None = None
    resolution: float = 0.0
    error_bound: float = 0.0

    @property
    def bracket(self):
        """Interval guaranteed to contain the true distance."""
        return max(0.0, self.value - self.error_bound), self.value


def ball_distance(B, B_prime):
    c, c2 = B.center, B_prime.center
    d = float(np.linalg.norm(c2 - c))
    value = max(0.0, d - B.radius - B_prime.radius)
    if d == 0.0:
        return OracleResult(value, (c.copy(), c2.copy()))
    u = (c2 - c) / d
    return OracleResult(value, (c + B.radius * u, c2 - B_prime.radius * u))


def simplex_grid(n, resolution):
    """All barycentric weight vectors in n parts with spacing 1/round(1/resolution)."""
    N = int(round(1.0 / resolution))
    if n == 1:
        return np.ones((1, 1))
    # stars and bars: choose n-1 bar positions among N + n - 1 slots
    bars = np.array(list(itertools.combinations(range(N + n - 1), n - 1)), dtype=np.int64)
    edges = np.hstack([np.full((bars.shape[0], 1), -1), bars, np.full((bars.shape[0], 1), N + n - 1)])
    return (np.diff(edges, axis=1) - 1).astype(float) / N


def _faces(W):
    """Affinely independent vertex subsets of W as (origin, D, pinv(D)) triples."""
    out = []
    n = W.shape[0]
    for k in range(1, n + 1):
        for T in itertools.combinations(range(n), k):
            t0 = W[T[0]]
            D = (W[list(T[1:])] - t0).T  # m x (k-1)
            if k > 1 and np.linalg.matrix_rank(D) < k - 1:
                continue
            P = np.linalg.pinv(D) if k > 1 else np.zeros((0, W.shape[1]))
            out.append((t0, D, P))
    return out


def project_to_hull(W, X):
    """Exact Euclidean projection of each row of X onto conv(W), for |W| <= 4.

    The nearest point lies in the relative interior of some affinely
    independent face, so projecting onto every face's affine hull and keeping
    the candidates with nonnegative barycentric weights is exhaustive.
    """
    W = np.atleast_2d(np.asarray(W, dtype=float))
    X = np.atleast_2d(np.asarray(X, dtype=float))
    best_d = np.full(X.shape[0], np.inf)
    best_y = np.zeros_like(X)
    for t0, D, P in _faces(W):
        R = X - t0
        if D.shape[1] == 0:
            cand = np.broadcast_to(t0, X.shape)
            ok = np.ones(X.shape[0], dtype=bool)
        else:
            mu = R @ P.T
            lam0 = 1.0 - mu.sum(axis=1)
            ok = (mu >= -1e-12).all(axis=1) & (lam0 >= -1e-12)
            cand = t0 + mu @ D.T
        d = np.linalg.norm(X - cand, axis=1)
        d = np.where(ok, d, np.inf)
        better = d < best_d
        best_d = np.where(better, d, best_d)
        best_y[better] = cand[better]
    return best_d, best_y


def grid_distance(V, V_prime, resolution):
    """Brute-force d(conv V, conv V') for at most four vertices per side.

    The body with fewer vertices is sampled on a barycentric grid; every grid
    point is projected exactly onto the other hull. The result overestimates
    the distance by at most 2 * rho * resolution, rho the sampled body's
    diameter bound.
    """
    V = np.atleast_2d(np.asarray(V, dtype=float))
    Vp = np.atleast_2d(np.asarray(V_prime, dtype=float))
    if V.shape[1] != Vp.shape[1]:
        raise DimensionMismatch(f"dimensions {V.shape[1]} and {Vp.shape[1]} differ")
    if V.shape[0] > MAX_GRID_VERTICES or Vp.shape[0] > MAX_GRID_VERTICES:
        raise TooManyVertices(f"grid oracle handles at most {MAX_GRID_VERTICES} vertices per body")
    if not 0.0 < resolution <= 0.1:
        raise ValueError(f"resolution must lie in (0, 0.1], got {resolution}")
    swapped = V.shape[0] > Vp.shape[0]
    S, T = (Vp, V) if swapped else (V, Vp)
    weights = simplex_grid(S.shape[0], resolution)
    best, pair = np.inf, None
    for i in range(0, weights.shape[0], CHUNK):
        X = weights[i : i + CHUNK] @ S
        d, Y = project_to_hull(T, X)
        j = int(np.argmin(d))
        if d[j] < best:
            best, pair = float(d[j]), (X[j].copy(), Y[j].copy())
    if S.shape[0] == 1:
        err = 0.0
    else:
        c = S.mean(axis=0)
        err = 2.0 * (2.0 * float(np.max(np.linalg.norm(S - c, axis=1)))) * resolution
    if swapped:
        pair = (pair[1], pair[0])
    return OracleResult(best, pair, resolution if S.shape[0] > 1 else 0.0, err)


def membership_lp(V, q):
    """True iff q lies in conv(V), decided by Phase I."""
    V = np.atleast_2d(np.asarray(V, dtype=float))
    return simplex_weights(V, q) is not None


def hulls_intersect_lp(V, V_prime):
    """True iff conv(V) and conv(V') share a point: V^T l = V'^T mu with l, mu in simplices."""
    V = np.atleast_2d(np.asarray(V, dtype=float))
    Vp = np.atleast_2d(np.asarray(V_prime, dtype=float))
    if V.shape[1] != Vp.shape[1]:
        raise DimensionMismatch(f"dimensions {V.shape[1]} and {Vp.shape[1]} differ")
    n, n_p = V.shape[0], Vp.shape[0]
    A = np.zeros((V.shape[1] + 2, n + n_p))
    A[: V.shape[1], :n] = V.T
    A[: V.shape[1], n:] = -Vp.T
    A[-2, :n] = 1.0
    A[-1, n:] = 1.0
    b = np.zeros(V.shape[1] + 2)
    b[-2:] = 1.0
    return equality_feasible(A, b) is not None
