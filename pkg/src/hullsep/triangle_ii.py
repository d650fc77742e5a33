"""Distance refinement from a witness pair.

With h = p - p', the supports v = argmin h.x over K and v' = argmax h.x over
K' give two parallel supporting hyperplanes H_v, H_v'. Their distance is a
lower bound on d(K, K') while d(p, p') is an upper bound. When the bracket
is too wide, one of v, v' is a weak pivot (closer to the bisector than its
iterate) and moving toward it shrinks the gap. Pivot steps then restore the
witness property before the next round.
"""
import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvariantViolation, MaxIterExceeded, NotAWitness, NumericalBreakdown
from .linalg import Hyperplane, bisector
from .triangle_i import (
    SIDE_K,
    SIDE_KP,
    PairState,
    RunTrace,
    StepRecord,
    apply_pivot,
    make_search,
    rho_hat,
    separation_residuals,
)
from .triangle_i import run as run_pivots

log = logging.getLogger(__name__)

WEAK_RTOL = 1e-12


@dataclass(frozen=True)
class SupportGap:
    v: np.ndarray
    v_prime: np.ndarray
    v_index: int | None
    v_prime_index: int | None
    plane: Hyperplane
    delta: float
    lower: float
    delta_v: float
    delta_v_prime: float
    E: float
    E_v: float
    E_v_prime: float
    rho: float
    rho_prime: float

    @property
    def H_v(self):
        return Hyperplane(self.plane.normal, float(self.plane.normal @ self.v))

    @property
    def H_v_prime(self):
        return Hyperplane(self.plane.normal, float(self.plane.normal @ self.v_prime))


def support_gap(K, K_prime, pair):
    plane = bisector(pair.p, pair.p_prime)
    h, a = plane.normal, plane.offset
    nh = float(np.linalg.norm(h))
    sv = K.support(-h)
    svp = K_prime.support(h)
    hv, hvp = float(h @ sv.point), float(h @ svp.point)
    delta = float(np.linalg.norm(pair.p - pair.p_prime))
    # unit-normal form rounds once; for an optimal pair it reproduces d(p, p') exactly
    lower = float((h / nh) @ (sv.point - svp.point))
    dv = (hv - a) / nh
    dvp = (a - hvp) / nh
    return SupportGap(
        v=sv.point,
        v_prime=svp.point,
        v_index=sv.witness_id,
        v_prime_index=svp.witness_id,
        plane=plane,
        delta=delta,
        lower=lower,
        delta_v=dv,
        delta_v_prime=dvp,
        E=delta - lower,
        E_v=0.5 * delta - dv,
        E_v_prime=0.5 * delta - dvp,
        rho=float(np.linalg.norm(pair.p - sv.point)),
        rho_prime=float(np.linalg.norm(pair.p_prime - svp.point)),
    )


@dataclass(frozen=True)
class WeakCheck:
    """Contraction audit for one weak step.

    ``lemma_bound`` = delta*sqrt(1 - E_side^2/max(rho, delta)^2) always applies.
    The eps-dependent bound applies only when E_side >= eps*delta/2.
    """

    E_side: float
    rho_side: float
    lemma_bound: float
    lemma_holds: bool
    eps_applies: bool
    eps_bound: float | None
    eps_holds: bool | None

    @property
    def holds(self):
        return self.lemma_holds and self.eps_holds is not False


def weak_check(delta, delta_new, E_side, rho_side, eps, lower, rho_bound):
    tol = WEAK_RTOL * delta
    m = max(rho_side, delta)
    lemma = delta * math.sqrt(max(0.0, 1.0 - (E_side / m) ** 2))
    applies = E_side >= 0.5 * eps * delta
    bound = ok = None
    if applies:
        if rho_side >= delta:
            lo = max(lower, 0.0)
            bound = delta * math.sqrt(max(0.0, 1.0 - (eps * lo) ** 2 / (4.0 * rho_bound**2)))
        else:
            bound = delta * math.sqrt(1.0 - eps * eps / 4.0)
        ok = delta_new <= bound + tol
    return WeakCheck(E_side, rho_side, lemma, delta_new <= lemma + tol, applies, bound, ok)


def is_converged(g, eps):
    slack = WEAK_RTOL * g.delta  # bracket already tight to rounding
    return g.E <= eps * g.rho + slack or g.E <= eps * g.rho_prime + slack


def weak_step(pair, g, eps):
    """Returns ("Converged", pair, None) or ("Moved", pair', (side, alpha, index))."""
    if is_converged(g, eps):
        return "Converged", pair, None
    # rho == 0 means the support point is the iterate itself; E_v is then pure rounding
    if g.rho > 0 and g.E_v > 0.5 * eps * g.rho:
        new, alpha = apply_pivot(pair, SIDE_K, g.v, g.v_index)
        return "Moved", new, (SIDE_K, alpha, g.v_index)
    if g.rho_prime > 0 and g.E_v_prime > 0.5 * eps * g.rho_prime:
        new, alpha = apply_pivot(pair, SIDE_KP, g.v_prime, g.v_prime_index)
        return "Moved", new, (SIDE_KP, alpha, g.v_prime_index)
    raise InvariantViolation(
        f"E={g.E:.3e} exceeds eps*rho but neither E_v={g.E_v:.3e} nor E_v'={g.E_v_prime:.3e} allows a step"
    )


@dataclass(frozen=True)
class DistanceCertificate:
    pair: PairState
    delta: float
    lower: float
    best_lower: float
    H_v: Hyperplane
    H_v_prime: Hyperplane
    eps_achieved: float
    gap_info: SupportGap


def distance_budget(rho, lower, eps, delta0):
    """Step bound for the weak-step phase, with ``lower`` standing in for the true distance."""
    if lower <= 0:
        return math.inf
    return 8.0 * rho**2 / (eps * lower) ** 2 * max(1.0, math.log(max(delta0, lower) / lower)) + 192.0 * rho**2 / lower**2


def validate_witness(K, K_prime, pair):
    plane = bisector(pair.p, pair.p_prime)
    lo, hi = separation_residuals(K, K_prime, plane)
    if not (lo > 0 and hi > 0):
        raise NotAWitness(f"bisector does not separate: residuals {lo:.3e}, {hi:.3e}")
    return plane


def run(
    K,
    K_prime,
    witness,
    eps,
    max_iter=None,
    eps_abs=None,
    strategy="max-violation",
    engine="naive",
    exact_diameter=False,
    search=None,
    trace=None,
):
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if not isinstance(witness, PairState):
        witness = PairState.make(*witness)
    trace = trace if trace is not None else RunTrace()
    validate_witness(K, K_prime, witness)
    trace.support_calls += 2
    rho = rho_hat(K, K_prime, exact_diameter)
    if eps_abs is None:
        eps_abs = 1e-12 * rho
    if max_iter is None:
        max_iter = 10_000_000
    if search is None:
        search = make_search(K, K_prime, engine, strategy)
        search.sync(witness)
    state = witness
    delta0 = witness.gap
    best = -math.inf
    while True:
        g = support_gap(K, K_prime, state)
        trace.support_calls += 2
        best = max(best, g.lower)
        if g.lower > g.delta * (1.0 + 1e-12):
            raise InvariantViolation(f"lower bound {g.lower!r} exceeds gap {g.delta!r}")
        outcome, new, info = weak_step(state, g, eps)
        if outcome == "Converged":
            trace.termination = "converged"
            trace.budget = distance_budget(max(rho, g.rho, g.rho_prime), best, eps, delta0)
            if trace.iterations > trace.budget:
                trace.flags.append("distance-budget-exceeded")
            ratio = g.E / max(g.rho, g.rho_prime) if max(g.rho, g.rho_prime) > 0 else 0.0
            cert = DistanceCertificate(state, g.delta, g.lower, best, g.H_v, g.H_v_prime, ratio, g)
            return cert, trace
        if trace.iterations >= max_iter:
            trace.termination = "max-iter"
            raise MaxIterExceeded(f"distance not certified after {max_iter} steps", state, trace)
        side, alpha, index = info
        if not new.gap < state.gap:
            raise NumericalBreakdown(f"weak step did not reduce the gap {state.gap!r}")
        search.commit(side, index, alpha, new)
        E_side, rho_side = (g.E_v, g.rho) if side == SIDE_K else (g.E_v_prime, g.rho_prime)
        chk = weak_check(g.delta, new.gap, E_side, rho_side, eps, best, max(rho, g.rho, g.rho_prime))
        pivot = g.v if side == SIDE_K else g.v_prime
        trace.iterations += 1
        trace.steps.append(StepRecord(trace.iterations, "weak", side, g.delta, new.gap, pivot, index, alpha, chk))
        log.debug("weak step %d side=%s gap=%.6e lower=%.6e", trace.iterations, side, new.gap, best)
        # restore the witness property; the bodies are known to be disjoint, so only the
        # absolute floor may stop the pivot phase and that would be a contradiction
        try:
            cert, _ = run_pivots(
                K,
                K_prime,
                eps,
                start=new,
                max_iter=max_iter - trace.iterations,
                eps_abs=eps_abs,
                relative_stop=False,
                search=search,
                trace=trace,
            )
        except MaxIterExceeded as exc:
            trace.termination = "max-iter"
            raise MaxIterExceeded(str(exc), exc.state, trace) from None
        if cert.kind != "Witness":
            raise InvariantViolation(f"pivot phase reached gap {cert.pair.gap!r} although a positive lower bound {best!r} is known")
        state = replace(cert.pair, last_pivot_K=None, last_pivot_K_prime=None)
