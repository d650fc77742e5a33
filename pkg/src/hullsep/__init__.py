"""Intersection and separation certificates for compact convex sets."""
from .bodies import BallBody, PointSetBody, PolytopeBody, find_pivot, find_weak_pivot
from .errors import HullsepError
from .linalg import Hyperplane, bisector, is_pivot, nearest_on_segment, signed_margin
from .qp import reduce_qp
from .triangle_i import PairState, initialize
from .triangle_i import run as intersect
from .triangle_ii import run as refine_distance

__all__ = [
    "BallBody",
    "PointSetBody",
    "PolytopeBody",
    "find_pivot",
    "find_weak_pivot",
    "HullsepError",
    "Hyperplane",
    "bisector",
    "is_pivot",
    "nearest_on_segment",
    "signed_margin",
    "reduce_qp",
    "PairState",
    "initialize",
    "intersect",
    "refine_distance",
]
__version__ = "0.1.0"
