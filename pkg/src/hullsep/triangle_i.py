"""Pivot iteration deciding intersection vs separation of two convex bodies.

Each step looks for a pivot on one side: a point v of the mover's body that
is at least as far from the mover as from the other iterate. Moving the mover
to the point of segment [mover, v] nearest the other iterate strictly shrinks
the gap. When neither body has a pivot, the bisector of the pair separates
the bodies and the pair is returned as a witness.
"""
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .bodies import PointSetBody, SupportResult, find_pivot
from .errors import (
    DimensionMismatch,
    MaxIterExceeded,
    NumericalBreakdown,
    PreconditionError,
    StartNotInBody,
)
from .linalg import (
    Hyperplane,
    _norm,
    as_vector,
    bisector,
    degeneracy_threshold,
    pivot_slack,
    segment_step_fast,
)

log = logging.getLogger(__name__)

SIDE_K = "K"
SIDE_KP = "K_prime"
MAX_ITER_CAP = 10_000_000
CONTRACTION_RTOL = 1e-12


@dataclass(frozen=True)
class PairState:
    p: np.ndarray
    p_prime: np.ndarray
    gap: float
    last_pivot_K: np.ndarray | None = None
    last_pivot_K_prime: np.ndarray | None = None
    coeffs_K: np.ndarray | None = None
    coeffs_K_prime: np.ndarray | None = None

    @classmethod
    def make(cls, p, p_prime, **kw):
        p, p_prime = as_vector(p, "p"), as_vector(p_prime, "p_prime")
        return cls(p, p_prime, float(np.linalg.norm(p - p_prime)), **kw)


@dataclass(frozen=True)
class ContractionCheck:
    """Gap-contraction audit for one pivot step.

    ``r`` is the distance from the fixed iterate to the pivot. ``case`` is
    one of "i".."iv"; ``theta`` is the angle at the pivot (only when delta > r).
    ``near_bound`` is the delta*sqrt(1 - delta^2/(4 r_m^2)) form with
    r_m = d(mover, pivot), applicable whenever delta <= r_m.
    """

    case: str
    r: float
    theta: float | None
    bound: float
    holds: bool
    r_mover: float
    near_bound: float | None
    near_holds: bool | None


def _near_form(delta, r):
    return delta * math.sqrt(max(0.0, 1.0 - delta * delta / (4.0 * r * r)))


def contraction_check(delta, delta_new, fixed, mover, pivot):
    fixed, mover, pivot = (np.asarray(t, dtype=float) for t in (fixed, mover, pivot))
    tol = CONTRACTION_RTOL * delta
    r = _norm(fixed - pivot)
    r_m = _norm(mover - pivot)
    theta = None
    if delta <= r:
        case, bound = "i", _near_form(delta, r)
    elif r == 0.0 or r_m == 0.0:
        # pivot coincides with the fixed point: the segment passes through it
        case, bound = "iv", r
    else:
        cos_t = float((fixed - pivot) @ (mover - pivot)) / (r * r_m)
        theta = math.acos(min(1.0, max(-1.0, cos_t)))
        dbar = 2.0 * r * math.sin(theta / 2.0)
        if theta <= math.pi / 3:
            case, bound = "ii", _near_form(dbar, r)
        elif theta < math.pi / 2:
            case, bound = "iii", math.sqrt(3.0) / 2.0 * dbar
        else:
            case, bound = "iv", r
    near = near_ok = None
    if r_m > 0.0 and delta <= r_m:
        near = _near_form(delta, r_m)
        near_ok = delta_new <= near + tol
    return ContractionCheck(case, r, theta, bound, delta_new <= bound + tol, r_m, near, near_ok)


@dataclass(frozen=True)
class StepRecord:
    iteration: int
    kind: str  # "pivot" or "weak"
    side: str
    gap_before: float
    gap_after: float
    pivot: np.ndarray
    pivot_index: int | None
    alpha: float
    check: object = None


@dataclass
class RunTrace:
    steps: list = field(default_factory=list)
    termination: str = ""
    support_calls: int = 0
    iterations: int = 0
    ops: int = 0
    budget: float | None = None
    flags: list = field(default_factory=list)

    @property
    def gap_history(self):
        if not self.steps:
            return []
        return [self.steps[0].gap_before] + [s.gap_after for s in self.steps]

    def contraction_violations(self):
        bad = []
        for s in self.steps:
            c = s.check
            if c is None:
                continue
            if not c.holds or getattr(c, "near_holds", None) is False:
                bad.append(s)
        return bad


@dataclass(frozen=True)
class CertificateI:
    kind: str  # "Intersection" or "Witness"
    pair: PairState
    bisector: Hyperplane | None
    relative_gap_basis: float
    stop: str = ""


def intersect_budget(delta0, rho, eps):
    """Iteration bound for reaching an eps-approximate common point."""
    return (23.0 + (delta0 / rho) ** 2) * 2.0 / eps**2 if rho > 0 else 0.0


def disjoint_budget(rho, lower):
    """Iteration bound for reaching a witness pair when the distance is at least ``lower``."""
    return 192.0 * rho**2 / lower**2 if lower > 0 else math.inf


def _weights_for(body, x):
    if isinstance(body, PointSetBody):
        w = body.barycentric(x)
        if w is None:
            raise StartNotInBody(f"start point {np.asarray(x).tolist()} is not in {body!r}")
        return w
    return None


def _nearest_vertex(body, x):
    d = np.linalg.norm(body.points - x, axis=1)
    j = int(np.argmin(d))
    e = np.zeros(body.n)
    e[j] = 1.0
    return body.points[j].copy(), e


def _support_or_reference(body, w):
    if np.linalg.norm(w) > 0:
        res = body.support(w)
        coeffs = None
        if isinstance(body, PointSetBody):
            coeffs = np.zeros(body.n)
            coeffs[res.witness_id] = 1.0
        return res.point, coeffs
    x = body.reference_point()
    coeffs = np.full(body.n, 1.0 / body.n) if isinstance(body, PointSetBody) else None
    return x, coeffs


def initialize(K, K_prime, start=None):
    if K.dim != K_prime.dim:
        raise DimensionMismatch(f"bodies have dimensions {K.dim} and {K_prime.dim}")
    if start is not None:
        if isinstance(start, PairState):
            p, pp = start.p, start.p_prime
        else:
            p, pp = start
        p, pp = as_vector(p, "start p"), as_vector(pp, "start p_prime")
        if p.shape[0] != K.dim or pp.shape[0] != K.dim:
            raise DimensionMismatch("start pair dimension differs from the bodies")
        if not K.contains(p):
            raise StartNotInBody(f"start p={p.tolist()} is not in K")
        if not K_prime.contains(pp):
            raise StartNotInBody(f"start p'={pp.tolist()} is not in K'")
        return PairState.make(p, pp, coeffs_K=_weights_for(K, p), coeffs_K_prime=_weights_for(K_prime, pp))

    ps_K, ps_Kp = isinstance(K, PointSetBody), isinstance(K_prime, PointSetBody)
    if ps_K and ps_Kp and K_prime.is_singleton:
        pp = K_prime.points[0].copy()
        p, y = _nearest_vertex(K, pp)
        return PairState.make(p, pp, coeffs_K=y, coeffs_K_prime=np.ones(1))
    if ps_K and ps_Kp and K.is_singleton:
        p = K.points[0].copy()
        pp, yp = _nearest_vertex(K_prime, p)
        return PairState.make(p, pp, coeffs_K=np.ones(1), coeffs_K_prime=yp)
    p, y = _support_or_reference(K, K_prime.reference_point() - K.reference_point())
    pp, yp = _support_or_reference(K_prime, p - K_prime.reference_point())
    return PairState.make(p, pp, coeffs_K=y, coeffs_K_prime=yp)


class NaiveSearch:
    """Pivot search through the bodies' own support oracles."""

    name = "naive"

    def __init__(self, K, K_prime, strategy="max-violation", seed=None):
        self.K, self.K_prime = K, K_prime
        self.strategy = strategy
        self.rng = np.random.default_rng(seed) if strategy == "first-violation" else None
        self.support_calls = 0
        self.ops = 0

    def sync(self, state):
        pass

    def find(self, side, state):
        body, mover, anchor = (
            (self.K, state.p, state.p_prime) if side == SIDE_K else (self.K_prime, state.p_prime, state.p)
        )
        self.support_calls += 1
        if isinstance(body, PointSetBody):
            self.ops += body.n * body.dim
            if self.strategy == "max-violation":
                # inline scan: same arithmetic as support() + is_pivot(), without revalidation
                w = anchor - mover
                vals = body.points @ w
                j = int(np.argmax(vals))
                rhs = float(anchor @ anchor) - float(mover @ mover)
                if 2.0 * float(vals[j]) >= rhs - pivot_slack(mover, anchor):
                    return SupportResult(body.points[j].copy(), float(vals[j]), j)
                return None
        else:
            self.ops += body.dim
        return find_pivot(body, mover, anchor, self.strategy, self.rng)

    def commit(self, side, index, alpha, state):
        pass


def make_search(K, K_prime, engine="naive", strategy="max-violation", seed=None):
    if engine == "naive":
        return NaiveSearch(K, K_prime, strategy, seed)
    if engine == "gram":
        from .gram import GramSearch

        return GramSearch(K, K_prime, strategy)
    raise ValueError(f"unknown engine {engine!r}")


def _blend(coeffs, index, alpha):
    if coeffs is None or index is None:
        return None
    out = (1.0 - alpha) * coeffs
    out[index] += alpha
    return out


def apply_pivot(state, side, pivot, index, step_fn=segment_step_fast):
    """Move the ``side`` iterate toward ``pivot``; returns (new_state, alpha)."""
    if side == SIDE_K:
        st = step_fn(state.p_prime, state.p, pivot)
        new = PairState(
            st.point,
            state.p_prime,
            _norm(st.point - state.p_prime),
            np.array(pivot, dtype=float),
            state.last_pivot_K_prime,
            _blend(state.coeffs_K, index, st.alpha),
            state.coeffs_K_prime,
        )
    else:
        st = step_fn(state.p, state.p_prime, pivot)
        new = PairState(
            state.p,
            st.point,
            _norm(st.point - state.p),
            state.last_pivot_K,
            np.array(pivot, dtype=float),
            state.coeffs_K,
            _blend(state.coeffs_K_prime, index, st.alpha),
        )
    return new, st.alpha


def step(state, K, K_prime, search=None, order=(SIDE_K, SIDE_KP), skip=()):
    """One pivot step. Returns ("Moved", state', record) or ("NoPivot", state, None)."""
    if state.gap <= degeneracy_threshold(state.p, state.p_prime):
        raise PreconditionError("step needs a positive gap")
    search = search or NaiveSearch(K, K_prime)
    for side in order:
        if side in skip:
            continue
        res = search.find(side, state)
        if res is None:
            continue
        new, alpha = apply_pivot(state, side, res.point, res.witness_id)
        fixed, mover = (state.p_prime, state.p) if side == SIDE_K else (state.p, state.p_prime)
        chk = contraction_check(state.gap, new.gap, fixed, mover, res.point)
        rec = StepRecord(0, "pivot", side, state.gap, new.gap, res.point, res.witness_id, alpha, chk)
        if not new.gap < state.gap:
            # accepted only through the pivot slack: no real progress on this side
            return "Stalled", state, rec
        search.commit(side, res.witness_id, alpha, new)
        return "Moved", new, rec
    return "NoPivot", state, None


def separation_residuals(K, K_prime, plane):
    """(min over K of h.x - a, a - max over K' of h.x); both > 0 iff the plane separates."""
    h, a = plane.normal, plane.offset
    low = K.support(-h)
    high = K_prime.support(h)
    return float(h @ low.point) - a, a - float(h @ high.point)


def rho_hat(K, K_prime, exact=False):
    return max(K.diameter_bound(exact), K_prime.diameter_bound(exact))


def run(
    K,
    K_prime,
    eps,
    start=None,
    max_iter=None,
    eps_abs=None,
    strategy="max-violation",
    seed=None,
    alternate_sides=False,
    engine="naive",
    stop_rule="pivot-distance",
    exact_diameter=False,
    relative_stop=True,
    search=None,
    trace=None,
):
    """Run the pivot iteration to an intersection or witness certificate.

    ``stop_rule="diameter"`` replaces the pivot-distance test with gap <= eps*rho.
    ``relative_stop=False`` keeps only the absolute floor (used when the
    caller already knows the bodies are disjoint).
    """
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if stop_rule not in ("pivot-distance", "diameter"):
        raise ValueError(f"unknown stop rule {stop_rule!r}")
    state = start if isinstance(start, PairState) else initialize(K, K_prime, start)
    rho = rho_hat(K, K_prime, exact_diameter)
    if eps_abs is None:
        eps_abs = 1e-12 * rho
    if max_iter is None:
        floor = eps_abs if eps_abs > 0 else 1e-12
        max_iter = int(min(MAX_ITER_CAP, 10 * 192 * (rho / floor) ** 2 + 1))
    if search is None:
        search = make_search(K, K_prime, engine, strategy, seed)
        search.sync(state)
    trace = trace if trace is not None else RunTrace()
    calls0, ops0 = search.support_calls, search.ops
    trace.budget = intersect_budget(state.gap, rho, eps)

    def finish(kind, basis, stop, st):
        trace.support_calls += search.support_calls - calls0
        trace.ops += search.ops - ops0
        trace.termination = stop
        if trace.budget and k > trace.budget:
            trace.flags.append("intersect-budget-exceeded")
        plane = bisector(st.p, st.p_prime) if kind == "Witness" else None
        return CertificateI(kind, st, plane, basis, stop), trace

    k = 0
    while True:
        # stop test
        if state.gap <= eps_abs:
            return finish("Intersection", 0.0, "absolute", state)
        if stop_rule == "diameter":
            if state.gap <= eps * rho:
                return finish("Intersection", rho, "diameter", state)
        elif relative_stop:
            for v, x in ((state.last_pivot_K, state.p), (state.last_pivot_K_prime, state.p_prime)):
                if v is not None:
                    basis = _norm(x - v)
                    if state.gap <= eps * basis:
                        return finish("Intersection", basis, "pivot-distance", state)
        if k >= max_iter:
            trace.support_calls += search.support_calls - calls0
            trace.ops += search.ops - ops0
            trace.termination = "max-iter"
            raise MaxIterExceeded(f"no certificate after {max_iter} iterations", state, trace)
        order = (SIDE_KP, SIDE_K) if alternate_sides and k % 2 else (SIDE_K, SIDE_KP)
        skip = set()
        while True:
            outcome, new, rec = step(state, K, K_prime, search, order, skip)
            if outcome != "Stalled":
                break
            skip.add(rec.side)
        if outcome == "NoPivot":
            if skip:
                plane = bisector(state.p, state.p_prime)
                lo, hi = separation_residuals(K, K_prime, plane)
                if not (lo > 0 and hi > 0):
                    raise NumericalBreakdown(f"pivot steps stalled at gap {state.gap:.3e} without a separating bisector")
            return finish("Witness", state.gap, "no-pivot", state)
        k += 1
        trace.iterations += 1
        trace.steps.append(replace(rec, iteration=trace.iterations))
        state = new
        log.debug("iter %d side=%s gap=%.6e alpha=%.4f", k, rec.side, new.gap, rec.alpha)
