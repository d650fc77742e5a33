"""Run reports and their independent re-verification."""
import json
import time
from dataclasses import dataclass

import numpy as np

from . import triangle_i, triangle_ii
from .bodies import BallBody, PointSetBody
from .errors import MaxIterExceeded, VerificationFailed
from .linalg import Hyperplane, bisector, hyperplane_distance
from .oracles import ball_distance, grid_distance
from .triangle_ii import is_converged, support_gap

FORMAT = "hullsep-report/1"
ORACLE_MAX_GRID_SIDE = 3
ORACLE_RESOLUTION = 1e-2


def _vec(x):
    return None if x is None else np.asarray(x, dtype=float).tolist()


def _plane(h):
    return None if h is None else {"normal": _vec(h.normal), "offset": float(h.offset)}


def _pair_dict(state):
    return {
        "p": _vec(state.p),
        "p_prime": _vec(state.p_prime),
        "gap": float(state.gap),
        "coeffs_K": _vec(state.coeffs_K),
        "coeffs_K_prime": _vec(state.coeffs_K_prime),
        "last_pivot_K": _vec(state.last_pivot_K),
        "last_pivot_K_prime": _vec(state.last_pivot_K_prime),
    }


def trace_records(trace):
    rows = []
    for s in trace.steps:
        chk = {k: getattr(s.check, k) for k in s.check.__dataclass_fields__} if s.check is not None else None
        rows.append(
            {
                "iteration": s.iteration,
                "kind": s.kind,
                "side": s.side,
                "gap_before": s.gap_before,
                "gap_after": s.gap_after,
                "pivot": _vec(s.pivot),
                "pivot_index": s.pivot_index,
                "alpha": s.alpha,
                "check": chk,
            }
        )
    return rows


@dataclass
class Outcome:
    report: dict
    trace: object
    status: str  # "ok" or "limits-exceeded"


def solve(inst, command="intersect", eps=1e-3, max_iter=None, strategy="max-violation", seed=None,
          engine="naive", alternate_sides=False, exact_diameter=False):
    """Run the pipeline for ``command`` and build a report."""
    K, Kp = inst.K, inst.K_prime
    rho = triangle_i.rho_hat(K, Kp, exact_diameter)
    eps_abs = 1e-12 * rho
    config = {
        "eps": eps,
        "eps_abs": eps_abs,
        "max_iter": max_iter,
        "strategy": strategy,
        "seed": seed,
        "engine": engine,
        "alternate_sides": alternate_sides,
        "exact_diameter": exact_diameter,
    }
    trace = triangle_i.RunTrace()
    t0 = time.perf_counter()
    status = "ok"
    note = None
    try:
        cert, trace = triangle_i.run(
            K, Kp, eps, start=inst.start, max_iter=max_iter, eps_abs=eps_abs, strategy=strategy, seed=seed,
            alternate_sides=alternate_sides, engine=engine, exact_diameter=exact_diameter, trace=trace,
        )
        if cert.kind == "Intersection":
            certificate = {
                "kind": "Intersection",
                **_pair_dict(cert.pair),
                "relative_gap_basis": cert.relative_gap_basis,
                "stop": cert.stop,
            }
            if command != "intersect":
                note = "bodies intersect; no distance certificate exists"
        elif command == "intersect":
            certificate = {"kind": "Witness", **_pair_dict(cert.pair), "bisector": _plane(cert.bisector)}
        else:
            remaining = None if max_iter is None else max(max_iter - trace.iterations, 0)
            dc, trace = triangle_ii.run(
                K, Kp, cert.pair, eps, max_iter=remaining, eps_abs=eps_abs, strategy=strategy,
                engine=engine, exact_diameter=exact_diameter, trace=trace,
            )
            g = dc.gap_info
            certificate = {
                "kind": "Distance",
                **_pair_dict(dc.pair),
                "bisector": _plane(g.plane),
                "delta": dc.delta,
                "lower": dc.lower,
                "best_lower": dc.best_lower,
                "H_v": _plane(dc.H_v),
                "H_v_prime": _plane(dc.H_v_prime),
                "v": _vec(g.v),
                "v_prime": _vec(g.v_prime),
                "E": g.E,
                "rho": g.rho,
                "rho_prime": g.rho_prime,
                "eps_achieved": dc.eps_achieved,
                "first_witness_gap": cert.pair.gap,
            }
    except MaxIterExceeded as exc:
        status = "limits-exceeded"
        trace = exc.trace or trace
        certificate = {"kind": "None", **(_pair_dict(exc.state) if exc.state is not None else {})}
    wall_ms = (time.perf_counter() - t0) * 1e3
    weak = sum(1 for s in trace.steps if s.kind == "weak")
    report = {
        "format": FORMAT,
        "command": command,
        "status": status,
        "instance": inst.name,
        "config": config,
        "certificate": certificate,
        "counters": {
            "iterations": trace.iterations,
            "pivot_steps": trace.iterations - weak,
            "weak_steps": weak,
            "support_calls": trace.support_calls,
            "ops": trace.ops,
        },
        "termination": trace.termination,
        "flags": list(trace.flags),
        "gap_history": trace.gap_history,
        "wall_ms": wall_ms,
    }
    if note:
        report["note"] = note
    return Outcome(report, trace, status)


def dumps(report):
    return json.dumps(report, indent=2) + "\n"


def load_report(path):
    from .errors import ParseError

    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict) or doc.get("format") != FORMAT or "certificate" not in doc:
        raise ParseError(f"{path}: not a {FORMAT} document")
    return doc


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    residual: float
    detail: str = ""


def _arr(x):
    return None if x is None else np.asarray(x, dtype=float)


def _plane_from(d):
    return Hyperplane(np.asarray(d["normal"], dtype=float), float(d["offset"]))


def verify_report(report, inst):
    """Re-check every certificate claim against the instance; returns the list of checks."""
    K, Kp = inst.K, inst.K_prime
    cert = report["certificate"]
    cfg = report.get("config", {})
    eps = float(cfg.get("eps", 0.0))
    checks = []

    def add(name, ok, residual, detail=""):
        checks.append(Check(name, bool(ok), float(residual), detail))

    kind = cert.get("kind")
    if kind not in ("Intersection", "Witness", "Distance"):
        add("certificate-present", False, 1.0, f"kind={kind!r}")
        return checks
    p, pp = _arr(cert["p"]), _arr(cert["p_prime"])
    add("membership-p", K.contains(p), 0.0)
    add("membership-p_prime", Kp.contains(pp), 0.0)
    d = float(np.linalg.norm(p - pp))
    add("gap", abs(d - cert["gap"]) <= 1e-12 * (1 + d), abs(d - cert["gap"]))
    for side, body, x in (("K", K, p), ("K_prime", Kp, pp)):
        y = _arr(cert.get(f"coeffs_{side}"))
        if y is None or not isinstance(body, PointSetBody):
            continue
        if y.shape[0] != body.n:
            add(f"barycentric-{side}", False, np.inf, "weight count differs from vertex count")
            continue
        res = max(abs(y.sum() - 1.0), max(0.0, -y.min()), float(np.linalg.norm(body.points.T @ y - x)) / (1 + np.linalg.norm(x)))
        add(f"barycentric-{side}", res <= 1e-9, res)

    if kind == "Intersection":
        if cert.get("stop") == "absolute":
            lim = float(cfg.get("eps_abs", 0.0))
        elif cert.get("stop") == "diameter":
            lim = eps * float(cert["relative_gap_basis"])
        else:
            bases = []
            for v, x, body in ((cert.get("last_pivot_K"), p, K), (cert.get("last_pivot_K_prime"), pp, Kp)):
                if v is not None:
                    v = _arr(v)
                    add("pivot-membership", body.contains(v), 0.0)
                    bases.append(float(np.linalg.norm(x - v)))
            lim = eps * max(bases, default=0.0)
        add("intersection-gap", d <= lim * (1 + 1e-12), d - lim)
        return checks

    plane = _plane_from(cert["bisector"])
    ref = bisector(p, pp)
    scale = 1.0 + float(np.linalg.norm(ref.normal)) + abs(ref.offset)
    mis = float(np.linalg.norm(plane.normal - ref.normal)) + abs(plane.offset - ref.offset)
    add("bisector-matches-pair", mis <= 1e-12 * scale, mis)
    lo, hi = triangle_i.separation_residuals(K, Kp, plane)
    add("separation", lo > 0 and hi > 0, min(lo, hi))
    if kind == "Witness":
        return checks

    delta, lower = float(cert["delta"]), float(cert["lower"])
    add("sandwich", lower <= delta * (1 + 1e-12), lower - delta)
    Hv, Hvp = _plane_from(cert["H_v"]), _plane_from(cert["H_v_prime"])
    h = plane.normal
    kmin = float(h @ K.support(-h).point)
    kpmax = float(h @ Kp.support(h).point)
    para = float(np.linalg.norm(Hv.normal - h) + np.linalg.norm(Hvp.normal - h))
    add("parallel-supports", para <= 1e-12 * (1 + np.linalg.norm(h)), para)
    r1 = abs(Hv.offset - kmin)
    add("support-contact-K", r1 <= 1e-9 * (1 + abs(kmin)), r1)
    r2 = abs(Hvp.offset - kpmax)
    add("support-contact-K_prime", r2 <= 1e-9 * (1 + abs(kpmax)), r2)
    hd = hyperplane_distance(Hv, Hvp)
    add("hyperplane-distance", abs(hd - lower) <= 1e-12 * max(1.0, lower), hd - lower)
    from .triangle_i import PairState

    g = support_gap(K, Kp, PairState.make(p, pp))
    add("approximation", is_converged(g, eps * (1 + 1e-9)), g.E - eps * max(g.rho, g.rho_prime))

    oracle = None
    if isinstance(K, BallBody) and isinstance(Kp, BallBody):
        oracle = ball_distance(K, Kp)
    elif isinstance(K, PointSetBody) and isinstance(Kp, PointSetBody):
        if max(K.n, Kp.n) <= 4 and min(K.n, Kp.n) <= ORACLE_MAX_GRID_SIDE:
            oracle = grid_distance(K.points, Kp.points, ORACLE_RESOLUTION)
    if oracle is not None:
        lo_o, hi_o = oracle.bracket
        tol = 1e-9 * (1 + delta)
        ok = hi_o >= lower - tol and lo_o <= delta + tol
        add("oracle-distance", ok, delta - oracle.value, f"oracle bracket [{lo_o:.12g}, {hi_o:.12g}]")
    return checks


def cmd_verify(report_path, instance_path):
    from .instance import parse_instance

    report = load_report(report_path)
    inst = parse_instance(instance_path)
    checks = verify_report(report, inst)
    failed = [c for c in checks if not c.passed]
    if failed:
        raise VerificationFailed(failed)
    return checks
