"""Small dense linear programming.

A two-phase tableau simplex method with Bland's anti-cycling rule.  It is
used for ground truth on piecewise-linear instances and for the multiplier
LPs of :mod:`finmax.saddle`.  Sizes are desk scale (a few thousand columns).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .core import MeasureKind, SupportSet

ACTIVE_TOL = 1e-8


class LPStatus(str, enum.Enum):
    optimal = "optimal"
    infeasible = "infeasible"
    unbounded = "unbounded"


class LPUnboundedError(ValueError):
    pass


@dataclass
class DenseLP:
    """min c^T x  s.t.  A_eq x = b_eq,  A_ub x <= b_ub,  x >= lb.

    ``lb`` defaults to -inf for every variable (free variables).
    """

    c: np.ndarray
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    A_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    lb: np.ndarray | None = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).reshape(-1)
        nv = self.c.size
        self.A_eq, self.b_eq = _rows(self.A_eq, self.b_eq, nv, "eq")
        self.A_ub, self.b_ub = _rows(self.A_ub, self.b_ub, nv, "ub")
        self.lb = np.full(nv, -np.inf) if self.lb is None else np.asarray(self.lb, dtype=float).reshape(-1)
        if self.lb.shape != (nv,):
            raise ValueError("lb must have one entry per variable")
        for arr in (self.c, self.A_eq, self.b_eq, self.A_ub, self.b_ub):
            if not np.isfinite(arr).all():
                raise ValueError("LP data must be finite")
        if np.isnan(self.lb).any() or (self.lb == np.inf).any():
            raise ValueError("lower bounds must be finite or -inf")


def _rows(A, b, nv, which):
    if A is None:
        return np.zeros((0, nv)), np.zeros(0)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).reshape(-1)
    if A.shape != (b.size, nv):
        raise ValueError(f"A_{which} has shape {A.shape}, expected ({b.size}, {nv})")
    return A, b


@dataclass
class LPSolution:
    status: LPStatus
    x: np.ndarray | None = None
    objective_value: float = np.nan
    active_rows: tuple[int, ...] = ()
    duals_eq: np.ndarray | None = None
    duals_ub: np.ndarray | None = None
    pivots: int = 0
    info: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# standard-form core:  min c^T x, A x = b, x >= 0


class _Unbounded(Exception):
    pass


def _pivot(T, r, s):
    T[r] /= T[r, s]
    col = T[:, s].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])


def _simplex(T, basis, allowed, max_pivots, tol=1e-10):
    """Run Bland's rule on tableau ``T`` (last row = reduced costs, last col = rhs)."""
    m = T.shape[0] - 1
    pivots = 0
    while True:
        rc = T[m, :-1]
        cand = np.flatnonzero((rc < -tol) & allowed)
        if cand.size == 0:
            return pivots
        s = cand[0]
        col = T[:m, s]
        pos = col > tol
        if not pos.any():
            raise _Unbounded(s)
        ratios = np.full(m, np.inf)
        ratios[pos] = T[:m, -1][pos] / col[pos]
        rmin = ratios.min()
        ties = np.flatnonzero(ratios <= rmin + tol * max(1.0, abs(rmin)))
        r = ties[np.argmin(basis[ties])]
        _pivot(T, r, s)
        basis[r] = s
        pivots += 1
        if pivots > max_pivots:
            raise RuntimeError("simplex pivot limit exceeded")


def _solve_standard(c, A, b, tol=1e-9):
    """Two-phase simplex on a standard-form LP.

    Returns ``(status, x, basis, duals, pivots)``; duals refer to the
    original (unflipped) rows.
    """
    m, nv = A.shape
    neg = b < 0
    A = np.where(neg[:, None], -A, A)
    b = np.abs(b)
    scale = max(1.0, np.abs(A).max(initial=0.0), np.abs(b).max(initial=0.0))
    max_pivots = 50 * (m + nv) + 1000

    # phase 1 with one artificial per row
    T = np.zeros((m + 1, nv + m + 1))
    T[:m, :nv] = A
    T[:m, nv:nv + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :nv] = -A.sum(axis=0)
    T[m, -1] = -b.sum()
    basis = np.arange(nv, nv + m)
    allowed = np.ones(nv + m, dtype=bool)
    pivots = _simplex(T, basis, allowed, max_pivots, tol)
    if -T[m, -1] > tol * scale * max(1, m):
        return LPStatus.infeasible, None, None, None, pivots

    # drive zero-level artificials out of the basis; drop redundant rows
    keep = np.ones(m, dtype=bool)
    for r in range(m):
        if basis[r] >= nv:
            row = T[r, :nv]
            nz = np.flatnonzero(np.abs(row) > tol)
            if nz.size:
                _pivot(T, r, nz[0])
                basis[r] = nz[0]
                pivots += 1
            else:
                keep[r] = False
    rows = np.flatnonzero(keep)
    T2 = np.zeros((rows.size + 1, nv + 1))
    T2[:-1, :nv] = T[rows, :nv]
    T2[:-1, -1] = T[rows, -1]
    basis = basis[rows]
    cB = c[basis]
    T2[-1, :nv] = c - cB @ T2[:-1, :nv]
    T2[-1, -1] = -cB @ T2[:-1, -1]
    try:
        pivots += _simplex(T2, basis, np.ones(nv, dtype=bool), max_pivots, tol)
    except _Unbounded:
        return LPStatus.unbounded, None, basis, None, pivots

    # recompute the basic solution from the original data for accuracy
    B = A[np.ix_(rows, basis)]
    xB = np.linalg.lstsq(B, b[rows], rcond=None)[0]
    x = np.zeros(nv)
    x[basis] = np.maximum(xB, 0.0)
    # duals of the sign-normalised rows, then undo the sign flips
    pi = np.zeros(m)
    pi[rows] = np.linalg.lstsq(B.T, c[basis], rcond=None)[0]
    pi = np.where(neg, -pi, pi)
    return LPStatus.optimal, x, basis, pi, pivots


def solve_lp(lp: DenseLP, active_tol: float = ACTIVE_TOL) -> LPSolution:
    """Solve ``lp`` with the two-phase simplex method (Bland's rule)."""
    nv = lp.c.size
    free = np.isneginf(lp.lb)
    nfree = int(free.sum())
    m_eq, m_ub = lp.b_eq.size, lp.b_ub.size
    # x = lb + x'  (bounded vars)  or  x = x+ - x-  (free vars); slacks for ub rows
    ncols = nv + nfree + m_ub
    shift = np.where(free, 0.0, lp.lb)

    def expand(A):
        out = np.zeros((A.shape[0], ncols))
        out[:, :nv] = A
        out[:, nv:nv + nfree] = -A[:, free]
        return out

    A_eq = expand(lp.A_eq)
    A_ub = expand(lp.A_ub)
    A_ub[:, nv + nfree:] = np.eye(m_ub)
    A = np.vstack([A_eq, A_ub])
    b = np.concatenate([lp.b_eq - lp.A_eq @ shift, lp.b_ub - lp.A_ub @ shift])
    c = np.zeros(ncols)
    c[:nv] = lp.c
    c[nv:nv + nfree] = -lp.c[free]

    if A.shape[0] == 0:
        # no constraints: optimal at the bounds iff no cost pushes downward unboundedly
        if np.any(c < 0):
            return LPSolution(LPStatus.unbounded)
        x = shift.copy()
        return LPSolution(LPStatus.optimal, x, float(lp.c @ x), duals_eq=np.zeros(0), duals_ub=np.zeros(0))

    status, xs, _, pi, pivots = _solve_standard(c, A, b)
    if status is not LPStatus.optimal:
        return LPSolution(status, pivots=pivots)
    x = xs[:nv] + shift
    x[free] -= xs[nv:nv + nfree]
    slack = lp.b_ub - lp.A_ub @ x
    active = tuple(np.flatnonzero(slack <= active_tol).tolist())
    # sign convention: L = c^T x - pi_eq^T (A_eq x - b) - pi_ub^T (A_ub x - b), pi_ub <= 0
    return LPSolution(
        LPStatus.optimal,
        x,
        float(lp.c @ x),
        active,
        duals_eq=pi[:m_eq],
        duals_ub=pi[m_eq:],
        pivots=pivots,
    )


# ---------------------------------------------------------------------------
# piecewise-linear ground truth


def pl_ground_truth(alphas, betas, active_tol: float = ACTIVE_TOL) -> tuple[np.ndarray, SupportSet]:
    """Minimiser and active support of ``max_i <alpha_i, x> + beta_i``.

    Solved through the dual of the epigraph LP ``min t s.t. <alpha_i,x> +
    beta_i <= t``, which has N columns but only n+1 rows:
    ``max <beta, y>  s.t.  alphas^T y = 0, sum y = 1, y >= 0``.
    The primal pair (x*, t*) is read off the equality duals and then refined
    on the tight rows.  Raises :class:`LPUnboundedError` if f is unbounded
    below (dual infeasible).
    """
    alphas = np.atleast_2d(np.asarray(alphas, dtype=float))
    betas = np.asarray(betas, dtype=float).reshape(-1)
    N, n = alphas.shape
    A_eq = np.vstack([alphas.T, np.ones((1, N))])
    b_eq = np.zeros(n + 1)
    b_eq[-1] = 1.0
    sol = solve_lp(DenseLP(-betas, A_eq, b_eq, lb=np.zeros(N)))
    if sol.status is LPStatus.infeasible:
        raise LPUnboundedError("piecewise-linear objective is unbounded below")
    pi = sol.duals_eq
    x = pi[:n].copy()
    t = -pi[n]
    scale = max(1.0, np.abs(alphas).max(), np.abs(betas).max())

    for _ in range(2):
        gaps = t - (alphas @ x + betas)
        active = np.flatnonzero(gaps <= active_tol * scale)
        # refine (x, t) on the tight rows: <alpha_i, x> - t = -beta_i
        M = np.hstack([alphas[active], -np.ones((active.size, 1))])
        xt, *_ = np.linalg.lstsq(M, -betas[active], rcond=None)
        x_ref, t_ref = xt[:n], float(np.max(alphas @ xt[:n] + betas))
        if t_ref <= t + active_tol * scale:
            x, t = x_ref, t_ref
    gaps = t - (alphas @ x + betas)
    active = np.flatnonzero(gaps <= active_tol * scale)
    return x, SupportSet(tuple(active.tolist()), MeasureKind.ground_truth, tolerance=active_tol)


def in_convex_hull(points, target=None, tol: float = 1e-9) -> bool:
    """Whether ``target`` (default 0) lies in conv(points), by LP feasibility."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    k, n = P.shape
    target = np.zeros(n) if target is None else np.asarray(target, dtype=float)
    A_ub = np.vstack([P.T, -P.T])
    b_ub = np.concatenate([target + tol, -target + tol])
    lp = DenseLP(np.zeros(k), np.ones((1, k)), np.ones(1), A_ub, b_ub, lb=np.zeros(k))
    return solve_lp(lp).status is LPStatus.optimal
