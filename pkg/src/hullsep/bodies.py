"""Compact convex bodies accessed through a support oracle.

A body only has to answer "which of your points maximizes w.x?". The pivot
and weak-pivot searches are built on that single call.
"""
import abc
import threading
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyBody,
    InfeasibleBody,
    PreconditionError,
    UnboundedBody,
    ZeroDirection,
)
from .linalg import as_vector, is_pivot, pivot_slack, signed_margin, step_gap_ratio2
from .simplex import LpProblem, LpStatus, simplex_weights, solve

MEMBERSHIP_RTOL = 1e-9
PIVOT_STRATEGIES = ("max-violation", "first-violation", "min-angle")


@dataclass(frozen=True)
class SupportResult:
    point: np.ndarray
    value: float
    witness_id: int | None = None


class ConvexBody(abc.ABC):
    dim: int

    @abc.abstractmethod
    def support(self, w) -> SupportResult:
        """Maximizer of w.x over the body."""

    @abc.abstractmethod
    def contains(self, x, rtol=MEMBERSHIP_RTOL) -> bool: ...

    @abc.abstractmethod
    def reference_point(self) -> np.ndarray: ...

    @abc.abstractmethod
    def diameter_bound(self, exact=False) -> float: ...

    def _direction(self, w):
        w = as_vector(w, "direction")
        if w.shape[0] != self.dim:
            raise DimensionMismatch(f"direction has dimension {w.shape[0]}, body has {self.dim}")
        if not np.linalg.norm(w) > 0:
            raise ZeroDirection("support direction must be nonzero")
        return w


class PointSetBody(ConvexBody):
    """conv(points) for a finite list of points (rows)."""

    def __init__(self, points):
        V = np.atleast_2d(np.asarray(points, dtype=float))
        if V.size == 0 or V.shape[0] < 1:
            raise EmptyBody("point set needs at least one point")
        if not np.all(np.isfinite(V)):
            raise ValueError("point coordinates must be finite")
        self.points = V
        self.points.setflags(write=False)
        self.n, self.dim = V.shape

    def __repr__(self):
        return f"PointSetBody(n={self.n}, dim={self.dim})"

    @property
    def is_singleton(self):
        return self.n == 1

    def support(self, w):
        w = self._direction(w)
        vals = self.points @ w
        j = int(np.argmax(vals))  # first maximum, so ties go to the lowest index
        return SupportResult(self.points[j].copy(), float(vals[j]), j)

    def barycentric(self, x):
        """Convex weights reproducing x, or None if x is outside the hull."""
        x = as_vector(x)
        if x.shape[0] != self.dim:
            raise DimensionMismatch(f"point has dimension {x.shape[0]}, body has {self.dim}")
        if self.n == 1:
            scale = 1.0 + float(np.linalg.norm(self.points[0]))
            ok = np.linalg.norm(x - self.points[0]) <= MEMBERSHIP_RTOL * scale
            return np.ones(1) if ok else None
        return simplex_weights(self.points, x)

    def contains(self, x, rtol=MEMBERSHIP_RTOL):
        return self.barycentric(x) is not None

    def reference_point(self):
        return self.points.mean(axis=0)

    def diameter_bound(self, exact=False):
        if exact:
            diff = self.points[:, None, :] - self.points[None, :, :]
            return float(np.sqrt(np.max(np.einsum("ijk,ijk->ij", diff, diff))))
        c = self.reference_point()
        return 2.0 * float(np.max(np.linalg.norm(self.points - c, axis=1)))


class BallBody(ConvexBody):
    def __init__(self, center, radius):
        self.center = as_vector(center, "center")
        self.center.setflags(write=False)
        self.radius = float(radius)
        if not (np.isfinite(self.radius) and self.radius > 0):
            raise ValueError("ball radius must be positive")
        self.dim = self.center.shape[0]

    def __repr__(self):
        return f"BallBody(center={self.center.tolist()}, radius={self.radius})"

    def support(self, w):
        w = self._direction(w)
        norm = float(np.linalg.norm(w))
        point = self.center + self.radius * (w / norm)
        return SupportResult(point, float(w @ point), None)

    def contains(self, x, rtol=MEMBERSHIP_RTOL):
        x = as_vector(x)
        return float(np.linalg.norm(x - self.center)) <= self.radius * (1.0 + rtol) + rtol

    def reference_point(self):
        return self.center.copy()

    def diameter_bound(self, exact=False):
        return 2.0 * self.radius


class PolytopeBody(ConvexBody):
    """{x : A x <= b}; must be nonempty and bounded (checked on first use)."""

    def __init__(self, A, b):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.asarray(b, dtype=float).reshape(-1)
        if A.shape[0] != b.shape[0]:
            raise DimensionMismatch(f"A has {A.shape[0]} rows but b has {b.shape[0]}")
        if A.shape[0] == 0:
            raise EmptyBody("polytope needs at least one constraint")
        self.A, self.b = A, b
        self.A.setflags(write=False)
        self.b.setflags(write=False)
        self.dim = A.shape[1]
        self._lock = threading.Lock()
        self._extremes = None

    def __repr__(self):
        return f"PolytopeBody(rows={self.A.shape[0]}, dim={self.dim})"

    @property
    def boundedness_checked(self):
        return self._extremes is not None

    def _solve(self, w):
        out = solve(LpProblem(w, self.A, self.b))
        if out.status is LpStatus.INFEASIBLE:
            raise InfeasibleBody("polytope {x : Ax <= b} is empty")
        if out.status is LpStatus.UNBOUNDED:
            raise UnboundedBody(f"polytope is unbounded in direction {np.asarray(w).tolist()}")
        return out

    def _axis_extremes(self):
        # maximize +e_i and -e_i once; memoized so concurrent callers share one check
        if self._extremes is None:
            with self._lock:
                if self._extremes is None:
                    pts = []
                    for i in range(self.dim):
                        for sign in (1.0, -1.0):
                            e = np.zeros(self.dim)
                            e[i] = sign
                            pts.append(self._solve(e).x)
                    self._extremes = np.array(pts)
        return self._extremes

    def support(self, w):
        w = self._direction(w)
        self._axis_extremes()
        out = self._solve(w)
        return SupportResult(out.x, float(w @ out.x), hash(out.basis) & 0x7FFFFFFF)

    def contains(self, x, rtol=MEMBERSHIP_RTOL):
        x = as_vector(x)
        return bool(np.all(self.A @ x <= self.b + rtol * (1.0 + np.abs(self.b))))

    def reference_point(self):
        # average of points of the body, hence inside it
        return self._axis_extremes().mean(axis=0)

    def diameter_bound(self, exact=False):
        ext = self._axis_extremes()
        spreads = [ext[2 * i, i] - ext[2 * i + 1, i] for i in range(self.dim)]
        return 2.0 * float(max(spreads))


def support(body, w):
    return body.support(w)


def diameter_bound(body, exact=False):
    return body.diameter_bound(exact=exact)


def find_pivot(body, mover, anchor, strategy="max-violation", rng=None):
    """Search ``body`` (the set holding ``mover``) for an anchor-pivot of mover.

    A pivot is a point v with d(mover, v) >= d(anchor, v). Returns a
    SupportResult or None; None certifies that no point of the body is a pivot
    (for max-violation this follows from maximizing the pivot functional).
    ``first-violation`` and ``min-angle`` need a vertex list and fall back to
    max-violation on other bodies.
    """
    mover, anchor = as_vector(mover), as_vector(anchor)
    w = anchor - mover
    if not np.linalg.norm(w) > 0:
        raise PreconditionError("mover and anchor coincide")
    if strategy not in PIVOT_STRATEGIES:
        raise ValueError(f"unknown pivot strategy {strategy!r}")
    if isinstance(body, PointSetBody) and strategy != "max-violation":
        V = body.points
        lhs = 2.0 * (V @ w)
        rhs = float(anchor @ anchor) - float(mover @ mover)
        mask = lhs >= rhs - pivot_slack(mover, anchor)
        if not mask.any():
            return None
        if strategy == "first-violation":
            order = rng.permutation(body.n) if rng is not None else np.arange(body.n)
            j = int(order[np.argmax(mask[order])])
        else:
            a2 = float(w @ w)
            b2 = np.sum((V - mover) ** 2, axis=1)
            c2 = np.sum((V - anchor) ** 2, axis=1)
            keys = np.where(mask, step_gap_ratio2(a2, b2, c2), np.inf)
            j = int(np.argmin(keys))
        return SupportResult(V[j].copy(), float(V[j] @ w), j)
    res = body.support(w)
    return res if is_pivot(mover, anchor, res.point) else None


def find_weak_pivot(body, mover, plane):
    """Point of ``body`` strictly closer to ``plane`` than ``mover`` is, or None.

    Minimizes the signed distance on mover's side of the plane with one
    support call; None means mover already attains the body's closest value.
    """
    mover = as_vector(mover)
    m0 = signed_margin(mover, plane)
    if m0 == 0.0:
        raise PreconditionError("mover lies on the hyperplane")
    side = 1.0 if m0 > 0 else -1.0
    res = body.support(-side * plane.normal)
    m1 = signed_margin(res.point, plane)
    if side * m1 < side * m0 - 1e-12 * (1.0 + abs(m0)):
        return res
    return None
