"""Dense vector primitives: distances, the segment step, pivot test, bisectors.

Points are 1-D float64 numpy arrays. Everything here is a pure function.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePair, DegenerateSegment, DimensionMismatch, ZeroNormal

PIVOT_RTOL = 1e-12
DEGENERACY_RTOL = 1e-14


def as_vector(x, name="vector"):
    v = np.array(x, dtype=float).reshape(-1) if np.ndim(x) else np.array([float(x)])
    if v.size < 1:
        raise DimensionMismatch(f"{name} must have at least one coordinate")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite entries")
    return v


def _same_dim(*vectors):
    m = vectors[0].shape[0]
    for v in vectors[1:]:
        if v.shape[0] != m:
            raise DimensionMismatch(f"dimension {v.shape[0]} != {m}")


def distance(x, y):
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    _same_dim(x, y)
    return float(np.linalg.norm(x - y))


@dataclass(frozen=True)
class Hyperplane:
    """The set {x : normal . x = offset}."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        h = as_vector(self.normal, "normal")
        if not np.linalg.norm(h) > 0:
            raise ZeroNormal("hyperplane normal must be nonzero")
        object.__setattr__(self, "normal", h)
        object.__setattr__(self, "offset", float(self.offset))

    def value(self, x):
        return float(self.normal @ np.asarray(x, dtype=float)) - self.offset

    def flipped(self):
        return Hyperplane(-self.normal, -self.offset)


@dataclass(frozen=True)
class SegmentStep:
    point: np.ndarray
    alpha: float
    raw_alpha: float


def nearest_on_segment(x, y, z):
    """Point of segment [y, z] closest to x.

    ``alpha`` is the step (x-y).(z-y)/|z-y|^2 clamped to [0, 1]; ``raw_alpha``
    keeps the unclamped value.
    """
    x, y, z = (as_vector(t) for t in (x, y, z))
    _same_dim(x, y, z)
    d = z - y
    dd = float(d @ d)
    if dd == 0.0:
        raise DegenerateSegment("segment endpoints coincide")
    raw = float((x - y) @ d) / dd
    if raw >= 1.0:
        return SegmentStep(z.copy(), 1.0, raw)
    if raw <= 0.0:
        return SegmentStep(y.copy(), 0.0, raw)
    return SegmentStep((1.0 - raw) * y + raw * z, raw, raw)


def pivot_slack(p, pp):
    return PIVOT_RTOL * (1.0 + float(p @ p) + float(pp @ pp))


def is_pivot(p, pp, v):
    """True iff v is a pp-pivot for p, i.e. d(p, v) >= d(pp, v) up to a relative slack."""
    p, pp, v = (as_vector(t) for t in (p, pp, v))
    _same_dim(p, pp, v)
    lhs = 2.0 * float(v @ (pp - p))
    rhs = float(pp @ pp) - float(p @ p)
    return lhs >= rhs - pivot_slack(p, pp)


def degeneracy_threshold(p, pp):
    return DEGENERACY_RTOL * (1.0 + float(np.linalg.norm(p)) + float(np.linalg.norm(pp)))


def bisector(p, pp):
    """Orthogonal bisecting hyperplane of segment [p, pp], oriented so p is on the positive side."""
    p, pp = as_vector(p), as_vector(pp)
    _same_dim(p, pp)
    if np.linalg.norm(p - pp) <= degeneracy_threshold(p, pp):
        raise DegeneratePair("p and p' coincide; no bisector")
    return Hyperplane(p - pp, 0.5 * (float(p @ p) - float(pp @ pp)))


def signed_margin(x, plane):
    x = as_vector(x)
    _same_dim(x, plane.normal)
    return plane.value(x) / float(np.linalg.norm(plane.normal))


def hyperplane_distance(h1, h2):
    """Distance between parallel hyperplanes whose normals point the same way."""
    if np.array_equal(h1.normal, h2.normal):
        return abs(h1.offset - h2.offset) / float(np.linalg.norm(h1.normal))
    n1 = np.linalg.norm(h1.normal)
    n2 = np.linalg.norm(h2.normal)
    return abs(h1.offset / n1 - h2.offset / n2)


def angle_sin2(a2, b2, c2):
    """sin^2 of the angle at p in triangle (p, p', v) from squared side lengths.

    a2 = d(p,p')^2, b2 = d(p,v)^2, c2 = d(p',v)^2 (law of cosines).
    """
    a2, b2, c2 = (np.asarray(t, dtype=float) for t in (a2, b2, c2))
    with np.errstate(divide="ignore", invalid="ignore"):
        s = 1.0 - (a2 + b2 - c2) ** 2 / (4.0 * a2 * b2)
    return np.where(b2 > 0, np.clip(s, 0.0, 1.0), np.inf)


def step_gap_ratio2(a2, b2, c2):
    """(gap after the segment step / gap before)^2 for moving p toward v.

    Equals sin^2 of the angle at p while the foot of p' lies inside [p, v];
    once the step clamps at v the new gap is d(p', v) itself.
    """
    a2, b2, c2 = (np.asarray(t, dtype=float) for t in (a2, b2, c2))
    dot = 0.5 * (a2 + b2 - c2)
    with np.errstate(divide="ignore", invalid="ignore"):
        clamped = dot >= b2
        ratio = np.where(clamped, c2 / a2, angle_sin2(a2, b2, c2))
    return np.where(b2 > 0, ratio, np.inf)


def _norm(x):
    return math.sqrt(float(x @ x))


def segment_step_fast(x, y, z):
    """nearest_on_segment without input validation, for trusted float arrays."""
    d = z - y
    dd = float(d @ d)
    if dd == 0.0:
        raise DegenerateSegment("segment endpoints coincide")
    raw = float((x - y) @ d) / dd
    if raw >= 1.0:
        return SegmentStep(z.copy(), 1.0, raw)
    if raw <= 0.0:
        return SegmentStep(y.copy(), 0.0, raw)
    return SegmentStep((1.0 - raw) * y + raw * z, raw, raw)
