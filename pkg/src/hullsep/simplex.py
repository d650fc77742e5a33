"""Dense-tableau two-phase simplex with Bland's anti-cycling rule.

Only what the polytope oracles need: ``max c.x s.t. Ax <= b`` with free x,
plus a Phase-I feasibility test. Free variables are split as x = x+ - x-.
"""
import enum
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NumericalBreakdown

PIVOT_TOL = 1e-11
REDUCED_COST_TOL = 1e-10
FEAS_RTOL = 1e-9


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LpProblem:
    """max objective.x subject to A x <= b, x free."""

    objective: np.ndarray
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float).reshape(-1)
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if A.shape != (b.shape[0], c.shape[0]):
            raise DimensionMismatch(f"A is {A.shape}, b has {b.shape[0]} rows, c has {c.shape[0]} entries")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
            raise ValueError("LP data must be finite")
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)


@dataclass(frozen=True)
class LpOutcome:
    status: LpStatus
    x: np.ndarray | None = None
    value: float | None = None
    basis: tuple | None = None


class _Tableau:
    """Rows 0..r-1 are constraints, row r is the reduced-cost row, last column is the rhs."""

    def __init__(self, T, basis):
        self.T = T
        self.basis = basis
        self.pivots = 0

    def pivot(self, row, col):
        T = self.T
        T[row] /= T[row, col]
        col_vals = T[:, col].copy()
        col_vals[row] = 0.0
        T -= np.outer(col_vals, T[row])
        T[:, col] = 0.0
        T[row, col] = 1.0
        self.basis[row] = int(col)
        self.pivots += 1

    def set_objective(self, c):
        """Install reduced costs for maximizing c over the current basis."""
        T = self.T
        T[-1, :] = 0.0
        T[-1, : c.shape[0]] = c
        for i, j in enumerate(self.basis):
            if T[-1, j] != 0.0:
                T[-1] -= T[-1, j] * T[i]

    def iterate(self, ncols, max_pivots):
        """Run Bland pivots on columns < ncols. Returns 'optimal' or 'unbounded'."""
        T = self.T
        r = T.shape[0] - 1
        scale = 1.0 + np.max(np.abs(T[-1, :ncols]), initial=0.0)
        while True:
            if self.pivots > max_pivots:
                raise NumericalBreakdown("simplex pivot limit exceeded")
            candidates = np.flatnonzero(T[-1, :ncols] > REDUCED_COST_TOL * scale)
            if candidates.size == 0:
                return "optimal"
            tiny_only = False
            for j in candidates:
                col = T[:r, j]
                usable = col > PIVOT_TOL
                if not usable.any():
                    if (col > 0.0).any():
                        tiny_only = True
                        continue
                    return "unbounded"
                rhs = T[:r, -1]
                ratios = np.full(r, np.inf)
                ratios[usable] = np.maximum(rhs[usable], 0.0) / col[usable]
                best = ratios.min()
                ties = np.flatnonzero(ratios <= best + 1e-12 * (1.0 + abs(best)))
                row = min(ties, key=lambda i: self.basis[i])
                self.pivot(row, j)
                break
            else:
                if tiny_only:
                    raise NumericalBreakdown("pivot element below 1e-11 with no alternative column")
                return "optimal"


def _standard_form(A_eq, b_eq, c, phase_one_only=False):
    """max c.x s.t. A_eq x = b_eq, x >= 0. Returns (status, x, basis)."""
    A_eq = np.array(A_eq, dtype=float)
    b_eq = np.array(b_eq, dtype=float)
    r, n = A_eq.shape
    neg = b_eq < 0
    A_eq[neg] *= -1.0
    b_eq[neg] *= -1.0

    # reuse unit columns as the starting basis, add artificials for the remaining rows
    basis = [-1] * r
    for j in range(n):
        col = A_eq[:, j]
        nz = np.flatnonzero(col)
        if nz.size == 1 and col[nz[0]] == 1.0 and basis[nz[0]] == -1:
            basis[nz[0]] = j
    art_rows = [i for i in range(r) if basis[i] == -1]
    n_art = len(art_rows)
    T = np.zeros((r + 1, n + n_art + 1))
    T[:r, :n] = A_eq
    T[:r, -1] = b_eq
    for k, i in enumerate(art_rows):
        T[i, n + k] = 1.0
        basis[i] = n + k
    tab = _Tableau(T, basis)
    max_pivots = 50 * (r + n + n_art) + 1000
    b_scale = 1.0 + float(np.max(np.abs(b_eq), initial=0.0))

    if n_art:
        phase1 = np.zeros(n + n_art)
        phase1[n:] = -1.0
        tab.set_objective(phase1)
        tab.iterate(n + n_art, max_pivots)
        infeasibility = float(np.sum(np.maximum(T[:r, -1][np.array(basis) >= n], 0.0)))
        if infeasibility > FEAS_RTOL * b_scale:
            return LpStatus.INFEASIBLE, None, None
        # drive zero-level artificials out of the basis, dropping redundant rows
        keep = []
        for i in range(r):
            if tab.basis[i] < n:
                keep.append(i)
                continue
            row = tab.T[i, :n]
            cand = np.flatnonzero(np.abs(row) > PIVOT_TOL)
            if cand.size:
                tab.pivot(i, int(cand[0]))
                keep.append(i)
        rows = keep + [r]
        T = np.hstack([tab.T[rows, :n], tab.T[rows, -1:]])
        tab = _Tableau(T, [tab.basis[i] for i in keep])
        r = len(keep)

    if phase_one_only:
        x = np.zeros(n)
        for i, j in enumerate(tab.basis):
            x[j] = tab.T[i, -1]
        return LpStatus.OPTIMAL, x, tuple(tab.basis)

    tab.set_objective(np.asarray(c, dtype=float))
    status = tab.iterate(n, max_pivots)
    if status == "unbounded":
        return LpStatus.UNBOUNDED, None, None
    x = np.zeros(n)
    for i, j in enumerate(tab.basis):
        x[j] = max(tab.T[i, -1], 0.0)
    return LpStatus.OPTIMAL, x, tuple(tab.basis)


def _inequality_form(A, b, c, phase_one_only=False):
    n_rows, m = A.shape
    A_eq = np.hstack([A, -A, np.eye(n_rows)])
    c_eq = np.concatenate([c, -c, np.zeros(n_rows)])
    status, z, basis = _standard_form(A_eq, b, c_eq, phase_one_only)
    if status is not LpStatus.OPTIMAL:
        return status, None, None
    return status, z[:m] - z[m : 2 * m], basis


def solve(problem):
    """Solve ``max c.x s.t. Ax <= b`` with x free."""
    c = problem.objective
    cmax = float(np.max(np.abs(c), initial=0.0))
    c_scaled = c / cmax if cmax > 0 else c
    status, x, basis = _inequality_form(problem.A, problem.b, c_scaled)
    if status is not LpStatus.OPTIMAL:
        return LpOutcome(status)
    return LpOutcome(status, x, float(c @ x), basis)


def feasible_point(A, b):
    """Some x with Ax <= b (Phase I only), or None when the system is infeasible."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).reshape(-1)
    status, x, _ = _inequality_form(A, b, np.zeros(A.shape[1]), phase_one_only=True)
    return x if status is LpStatus.OPTIMAL else None


def joint_feasible(A, b, A2, b2):
    """True iff {x : Ax <= b, A2 x <= b2} is nonempty."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    A2 = np.atleast_2d(np.asarray(A2, dtype=float))
    if A.shape[1] != A2.shape[1]:
        raise DimensionMismatch(f"column counts differ: {A.shape[1]} vs {A2.shape[1]}")
    return feasible_point(np.vstack([A, A2]), np.concatenate([np.ravel(b), np.ravel(b2)])) is not None


def simplex_weights(points, q):
    """Convex weights w >= 0, sum w = 1, points.T @ w = q; None when q is outside the hull.

    Phase I on the equality/nonnegativity system.
    """
    V = np.atleast_2d(np.asarray(points, dtype=float))
    q = np.asarray(q, dtype=float).reshape(-1)
    if V.shape[1] != q.shape[0]:
        raise DimensionMismatch(f"points have dimension {V.shape[1]}, q has {q.shape[0]}")
    n = V.shape[0]
    A_eq = np.vstack([V.T, np.ones((1, n))])
    b_eq = np.concatenate([q, [1.0]])
    status, w, _ = _standard_form(A_eq, b_eq, np.zeros(n), phase_one_only=True)
    if status is not LpStatus.OPTIMAL:
        return None
    return w


def equality_feasible(A_eq, b_eq):
    """Some z >= 0 with A_eq z = b_eq, or None."""
    A_eq = np.atleast_2d(np.asarray(A_eq, dtype=float))
    b_eq = np.asarray(b_eq, dtype=float).reshape(-1)
    status, z, _ = _standard_form(A_eq, b_eq, np.zeros(A_eq.shape[1]), phase_one_only=True)
    return z if status is LpStatus.OPTIMAL else None
