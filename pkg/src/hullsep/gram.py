"""Gram-matrix acceleration for two finite point sets.

After an O(m (n + n')^2) preprocessing, the pivot functional over every
vertex is available from cached products in O(n + n') per step, with no
dependence on the ambient dimension beyond the O(m) iterate update.

K side:  V (p' - p)  = G y' - Q y
K' side: V'(p - p')  = G^T y - Q' y'
"""
import logging
from dataclasses import dataclass

import numpy as np

from .bodies import PointSetBody, SupportResult
from .errors import DimensionMismatch, PreconditionError, StaleCache
from .linalg import angle_sin2, pivot_slack, step_gap_ratio2

log = logging.getLogger(__name__)

REFRESH_EVERY = 1000
DRIFT_RTOL = 1e-6


class GramCache:
    def __init__(self, V, V_prime, y=None, y_prime=None):
        V = np.atleast_2d(np.asarray(V, dtype=float))
        Vp = np.atleast_2d(np.asarray(V_prime, dtype=float))
        if V.shape[0] == 0 or Vp.shape[0] == 0:
            raise PreconditionError("vertex sets must be nonempty")
        if V.shape[1] != Vp.shape[1]:
            raise DimensionMismatch(f"vertex dimensions {V.shape[1]} and {Vp.shape[1]} differ")
        self.V, self.Vp = V, Vp
        self.Q = V @ V.T
        self.Qp = Vp @ Vp.T
        self.G = V @ Vp.T
        self.diagQ = np.diag(self.Q).copy()
        self.diagQp = np.diag(self.Qp).copy()
        self.revision = 0
        self.updates = 0
        self.ops = 0
        self.refreshes = 0
        n, n_p = V.shape[0], Vp.shape[0]
        self.y = np.eye(n)[0] if y is None else np.asarray(y, dtype=float).copy()
        self.yp = np.eye(n_p)[0] if y_prime is None else np.asarray(y_prime, dtype=float).copy()
        self._recompute()

    @property
    def n(self):
        return self.V.shape[0]

    @property
    def n_prime(self):
        return self.Vp.shape[0]

    def _recompute(self):
        self.Qy = self.Q @ self.y
        self.Gyp = self.G @ self.yp
        self.GTy = self.G.T @ self.y
        self.Qpyp = self.Qp @ self.yp
        self.p = self.V.T @ self.y
        self.pp = self.Vp.T @ self.yp

    def set_weights(self, y=None, y_prime=None):
        if y is not None:
            self.y = np.asarray(y, dtype=float).copy()
        if y_prime is not None:
            self.yp = np.asarray(y_prime, dtype=float).copy()
        self._recompute()
        self.revision += 1

    def functional(self, side="K"):
        if side == "K":
            self.ops += self.n
            return self.Gyp - self.Qy
        self.ops += self.n_prime
        return self.GTy - self.Qpyp

    def check_drift(self):
        """Compare cached products with a fresh recomputation; refresh if they drifted."""
        fresh = (self.Q @ self.y, self.G @ self.yp, self.G.T @ self.y, self.Qp @ self.yp)
        cached = (self.Qy, self.Gyp, self.GTy, self.Qpyp)
        worst = 0.0
        for f, c in zip(fresh, cached):
            scale = 1.0 + float(np.max(np.abs(f)))
            worst = max(worst, float(np.max(np.abs(f - c))) / scale)
        if worst > DRIFT_RTOL:
            log.info("gram cache drift %.3e after %d updates; refreshing", worst, self.updates)
            self.refreshes += 1
            self.Qy, self.Gyp, self.GTy, self.Qpyp = fresh
        return worst


def precompute(V, V_prime, y=None, y_prime=None):
    return GramCache(V, V_prime, y, y_prime)


def _check_revision(cache, expected):
    if expected is not None and expected != cache.revision:
        raise StaleCache(f"cache revision {cache.revision}, caller expected {expected}")


def fast_pivot(cache, side="K", expected_revision=None):
    """Index of the max-violation vertex if it is a pivot, else None."""
    _check_revision(cache, expected_revision)
    f = cache.functional(side)
    j = int(np.argmax(f))
    p, pp = cache.p, cache.pp
    mover, anchor = (p, pp) if side == "K" else (pp, p)
    cache.ops += 2 * p.shape[0]
    rhs = float(anchor @ anchor) - float(mover @ mover)
    return j if 2.0 * f[j] >= rhs - pivot_slack(mover, anchor) else None


def apply_step(cache, side, j, alpha):
    """Blend the ``side`` weights toward e_j by ``alpha`` and update the cached products."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    n = cache.n if side == "K" else cache.n_prime
    if not 0 <= j < n:
        raise IndexError(f"pivot index {j} out of range for {n} vertices")
    b = 1.0 - alpha
    if side == "K":
        cache.y *= b
        cache.y[j] += alpha
        if alpha == 1.0:
            cache.y[:] = 0.0
            cache.y[j] = 1.0
        cache.Qy = b * cache.Qy + alpha * cache.Q[:, j]
        cache.GTy = b * cache.GTy + alpha * cache.G[j, :]
        cache.p = b * cache.p + alpha * cache.V[j]
    else:
        cache.yp *= b
        cache.yp[j] += alpha
        if alpha == 1.0:
            cache.yp[:] = 0.0
            cache.yp[j] = 1.0
        cache.Qpyp = b * cache.Qpyp + alpha * cache.Qp[:, j]
        cache.Gyp = b * cache.Gyp + alpha * cache.G[:, j]
        cache.pp = b * cache.pp + alpha * cache.Vp[j]
    cache.ops += 3 * (cache.n + cache.n_prime) + cache.p.shape[0]
    cache.revision += 1
    cache.updates += 1
    if cache.updates % REFRESH_EVERY == 0:
        cache.check_drift()
    return cache


@dataclass
class AngleTable:
    """Squared side lengths a2 = d(p,p')^2, b2_i = d(mover,v_i)^2, c2_i = d(anchor,v_i)^2."""

    side: str
    revision: int
    a2: float
    b2: np.ndarray
    c2: np.ndarray

    @property
    def sin2(self):
        return angle_sin2(self.a2, self.b2, self.c2)


def angle_table(cache, side="K"):
    y, yp = cache.y, cache.yp
    pp_norm2 = float(y @ cache.Qy)
    qq_norm2 = float(yp @ cache.Qpyp)
    cross = float(y @ cache.Gyp)
    a2 = max(pp_norm2 + qq_norm2 - 2.0 * cross, 0.0)
    if side == "K":
        b2 = cache.diagQ - 2.0 * cache.Qy + pp_norm2
        c2 = cache.diagQ - 2.0 * cache.Gyp + qq_norm2
        cache.ops += 4 * cache.n
    else:
        b2 = cache.diagQp - 2.0 * cache.Qpyp + qq_norm2
        c2 = cache.diagQp - 2.0 * cache.GTy + pp_norm2
        cache.ops += 4 * cache.n_prime
    cache.ops += 2 * (cache.n + cache.n_prime)
    return AngleTable(side, cache.revision, a2, np.maximum(b2, 0.0), np.maximum(c2, 0.0))


def min_angle_pivot(cache, table):
    """Among true pivots, the vertex giving the smallest gap after the segment step.

    Unless the step clamps at the vertex this is the smallest sin^2 of the
    angle at the mover; the ratio is read off the table in O(n).
    """
    _check_revision(cache, table.revision)
    f = cache.functional(table.side)
    p, pp = cache.p, cache.pp
    mover, anchor = (p, pp) if table.side == "K" else (pp, p)
    rhs = float(anchor @ anchor) - float(mover @ mover)
    mask = 2.0 * f >= rhs - pivot_slack(mover, anchor)
    if not mask.any():
        return None
    keys = np.where(mask, step_gap_ratio2(table.a2, table.b2, table.c2), np.inf)
    return int(np.argmin(keys))


class GramSearch:
    """Drop-in replacement for the naive scan on two point-set bodies."""

    name = "gram"

    def __init__(self, K, K_prime, strategy="max-violation"):
        if not (isinstance(K, PointSetBody) and isinstance(K_prime, PointSetBody)):
            raise PreconditionError("the Gram engine needs two point-set bodies")
        if strategy not in ("max-violation", "min-angle"):
            raise PreconditionError(f"the Gram engine does not support strategy {strategy!r}")
        self.K, self.K_prime = K, K_prime
        self.strategy = strategy
        self.cache = GramCache(K.points, K_prime.points)
        self.support_calls = 0

    @property
    def ops(self):
        return self.cache.ops

    def sync(self, state):
        if state.coeffs_K is None or state.coeffs_K_prime is None:
            raise PreconditionError("Gram engine needs barycentric weights for both iterates")
        self.cache.set_weights(state.coeffs_K, state.coeffs_K_prime)
        # keep the explicit iterates bit-identical to the run's state
        self.cache.p = np.array(state.p, dtype=float)
        self.cache.pp = np.array(state.p_prime, dtype=float)

    def find(self, side, state):
        self.support_calls += 1
        if self.strategy == "min-angle":
            j = min_angle_pivot(self.cache, angle_table(self.cache, side))
        else:
            j = fast_pivot(self.cache, side)
        if j is None:
            return None
        V = self.K.points if side == "K" else self.K_prime.points
        w = (state.p_prime - state.p) if side == "K" else (state.p - state.p_prime)
        return SupportResult(V[j].copy(), float(V[j] @ w), j)

    def commit(self, side, index, alpha, state):
        if alpha > 0.0:
            apply_step(self.cache, side, index, alpha)
        # explicit iterates follow the run's own arithmetic
        self.cache.p = np.array(state.p, dtype=float)
        self.cache.pp = np.array(state.p_prime, dtype=float)
