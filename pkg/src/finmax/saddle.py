"""The saddle function phi(x, y) = sum_i y_i f_i(x) and its first-order theory.

Includes the saddle operator F = (grad_x phi, -grad_y phi), optimality
certificates, the multiplier set at a minimiser, and sampled checks of
monotonicity and Lipschitz continuity of F.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .core import MaxProblem, MeasureKind, PrimalDualPoint, SupportSet
from .lp import DenseLP, LPStatus, solve_lp
from .simplex import in_simplex, normal_cone_residual


class NotAMinimiserError(ValueError):
    """No multiplier vector exists at the given point (to tolerance)."""


class SaddleCertificate(NamedTuple):
    grad_norm: float
    gap: float
    dual_residual: float

    @property
    def total(self) -> float:
        return self.grad_norm + self.gap + self.dual_residual


class MultiplierSet(NamedTuple):
    a_point: np.ndarray
    is_singleton: bool
    nondegenerate: bool
    strong_support: SupportSet
    active_support: SupportSet


def _require_simplex(y, N):
    if y is None or y.shape != (N,) or not in_simplex(y):
        raise ValueError("dual point must lie in the probability simplex of matching size")


def phi(p: MaxProblem, z: PrimalDualPoint) -> float:
    _require_simplex(z.y, p.N)
    return float(z.y @ p.values(z.x))


def saddle_operator(p: MaxProblem, z: PrimalDualPoint) -> tuple[np.ndarray, np.ndarray]:
    """F(z) = (sum_i y_i grad f_i(x), -(f_1(x), ..., f_N(x)))."""
    v, J = p.evaluate(z.x)
    return z.y @ J, -v


def certificate_from_values(v, J, y) -> SaddleCertificate:
    """Certificate from already-evaluated values ``v`` and Jacobian ``J``."""
    fmax = v.max()
    yv = y @ v
    gap = float(fmax - yv)
    return SaddleCertificate(float(np.linalg.norm(y @ J)), gap, max(0.0, gap))


def certificate(p: MaxProblem, z: PrimalDualPoint) -> SaddleCertificate:
    """(||grad_x phi||, f - phi, normal-cone residual of -grad_y phi).

    All three vanish exactly at saddle points of phi on R^n x simplex.
    """
    _require_simplex(z.y, p.N)
    v, J = p.evaluate(z.x)
    gap = float(v.max() - z.y @ v)
    return SaddleCertificate(
        float(np.linalg.norm(z.y @ J)),
        gap,
        normal_cone_residual(z.y, v),
    )


def compute_multipliers(
    p: MaxProblem, x_star, tol: float = 1e-9, pos_tol: float | None = None
) -> MultiplierSet:
    """Multipliers y with (x_star, y) a saddle point, via small LPs on the active set.

    The active set is padded by ``tol``; the stationarity constraint
    ``sum_i y_i grad f_i(x_star) = 0`` is relaxed to ``|.| <= tol``
    componentwise.  An index is strongly active when some feasible y gives it
    weight above ``pos_tol`` (default ``max(10 tol, 1e-9)``).
    """
    if pos_tol is None:
        pos_tol = max(10.0 * tol, 1e-9)
    v, J = p.evaluate(x_star)
    active = np.flatnonzero(v.max() - v <= max(tol, p.tie_tol))
    k = active.size
    G = J[active].T
    n = p.n
    A_ub = np.vstack([G, -G])
    b_ub = np.full(2 * n, tol)
    A_eq = np.ones((1, k))
    b_eq = np.ones(1)

    maxima = np.empty(k)
    points = np.empty((k, k))
    for j in range(k):
        c = np.zeros(k)
        c[j] = -1.0
        sol = solve_lp(DenseLP(c, A_eq, b_eq, A_ub, b_ub, lb=np.zeros(k)))
        if sol.status is not LPStatus.optimal:
            raise NotAMinimiserError(f"no multipliers at x (LP {sol.status.value})")
        maxima[j] = sol.x[j]
        points[j] = sol.x
    strong_local = np.flatnonzero(maxima > pos_tol)

    # max over feasible y of min_i y_i, variables (y, s) with s free
    c = np.zeros(k + 1)
    c[-1] = -1.0
    A_ub2 = np.hstack([A_ub, np.zeros((2 * n, 1))])
    A_ub2 = np.vstack([A_ub2, np.hstack([-np.eye(k), np.ones((k, 1))])])
    b_ub2 = np.concatenate([b_ub, np.zeros(k)])
    lb = np.concatenate([np.zeros(k), [-np.inf]])
    sol = solve_lp(DenseLP(c, np.hstack([A_eq, [[0.0]]]), b_eq, A_ub2, b_ub2, lb=lb))
    nondegenerate = bool(sol.status is LPStatus.optimal and sol.x[-1] > pos_tol)

    # affine independence of the strongly active gradients
    Gs = np.vstack([J[active[strong_local]].T, np.ones((1, strong_local.size))])
    rank = np.linalg.matrix_rank(Gs, tol=1e-9 * max(1.0, np.abs(Gs).max()))
    is_singleton = bool(rank == strong_local.size)

    a_point = np.zeros(p.N)
    a_point[active] = points.mean(axis=0)
    return MultiplierSet(
        a_point,
        is_singleton,
        nondegenerate,
        SupportSet(tuple(active[strong_local].tolist()), MeasureKind.manual, tolerance=pos_tol),
        SupportSet(tuple(active.tolist()), MeasureKind.argmax, tolerance=tol),
    )


# ---------------------------------------------------------------------------
# sampled structural checks


def _sample_pairs(p: MaxProblem, trials, radius, rng, center=None):
    n, N = p.n, p.N
    center = np.zeros(n) if center is None else np.asarray(center, dtype=float)

    def ball():
        d = rng.standard_normal(n)
        d /= max(np.linalg.norm(d), 1e-300)
        return center + radius * rng.random() ** (1.0 / n) * d

    for _ in range(trials):
        yield (
            PrimalDualPoint(ball(), rng.dirichlet(np.ones(N))),
            PrimalDualPoint(ball(), rng.dirichlet(np.ones(N))),
        )


def check_monotone_sample(p: MaxProblem, trials: int, radius: float = 1.0, seed: int = 0, center=None) -> float:
    """Smallest sampled <F(z) - F(z'), z - z'>; nonnegative for convex subfunctions."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    worst = np.inf
    for z, w in _sample_pairs(p, trials, radius, rng, center):
        Fx, Fy = saddle_operator(p, z)
        Gx, Gy = saddle_operator(p, w)
        ip = (Fx - Gx) @ (z.x - w.x) + (Fy - Gy) @ (z.y - w.y)
        worst = min(worst, float(ip))
    return worst


def lipschitz_bound(L: float, M: float, N: int) -> float:
    """Lipschitz constant sqrt(L^2 + 2 M^2 N) of F on K x simplex."""
    if L < 0 or M < 0 or N < 1:
        raise ValueError("need L, M >= 0 and N >= 1")
    return float(np.sqrt(L * L + 2.0 * M * M * N))


class LipschitzSample(NamedTuple):
    ratios: np.ndarray
    L: float
    M: float
    bound: float


def lipschitz_sample(p: MaxProblem, trials: int, radius: float = 1.0, seed: int = 0, center=None) -> LipschitzSample:
    """Sampled displacement ratios of F, with L and M measured on the same pairs.

    L is the largest observed gradient-difference ratio over all subfunctions
    and M the largest gradient norm at any sampled endpoint.
    """
    rng = np.random.default_rng(seed)
    ratios, L, M = [], 0.0, 0.0
    for z, w in _sample_pairs(p, trials, radius, rng, center):
        v1, J1 = p.evaluate(z.x)
        v2, J2 = p.evaluate(w.x)
        dx = np.linalg.norm(z.x - w.x)
        dF = np.concatenate([z.y @ J1 - w.y @ J2, v2 - v1])
        dz = np.hypot(dx, np.linalg.norm(z.y - w.y))
        ratios.append(np.linalg.norm(dF) / dz)
        if dx > 0:
            L = max(L, float(np.linalg.norm(J1 - J2, axis=1).max() / dx))
        M = max(M, float(np.linalg.norm(J1, axis=1).max()), float(np.linalg.norm(J2, axis=1).max()))
    return LipschitzSample(np.array(ratios), L, M, lipschitz_bound(L, M, p.N))
