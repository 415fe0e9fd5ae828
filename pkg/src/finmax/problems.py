"""Random instance families and small built-in examples.

Families:

* piecewise linear   ``max_i <alpha_i, x> + beta_i``  (standard normal data)
* piecewise quadratic ``max_i x^T H_i x + <q_i, x>``  (H_i = A_i^T A_i, q_i ~ U[-1,1]^n)
* spanning circle    ``max_i w_i ||x - p_i||^2 + k_i`` (clustered uniform points)
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .core import AffineFamily, MaxProblem, QuadraticFamily, SupportSet, WeightedDistanceFamily
from .lp import LPUnboundedError, pl_ground_truth

log = logging.getLogger(__name__)

MAX_REGENERATIONS = 10


@dataclass
class PiecewiseLinearInstance:
    alphas: np.ndarray
    betas: np.ndarray
    seed: int | None = None
    x_star: np.ndarray | None = None
    support: SupportSet | None = None

    def problem(self) -> MaxProblem:
        return MaxProblem(AffineFamily(self.alphas, self.betas), name="pl")

    @property
    def f_star(self) -> float:
        return float(np.max(self.alphas @ self.x_star + self.betas))


@dataclass
class PiecewiseQuadraticInstance:
    H: np.ndarray
    q: np.ndarray
    seed: int | None = None

    def problem(self) -> MaxProblem:
        return MaxProblem(QuadraticFamily(self.H, self.q), name="pq")


@dataclass
class SpanningCircleInstance:
    centers: np.ndarray
    weights: np.ndarray
    penalties: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        if np.any(self.weights <= 0) or np.any(self.penalties <= 0):
            raise ValueError("weights and penalties must be positive")

    def problem(self) -> MaxProblem:
        return MaxProblem(WeightedDistanceFamily(self.centers, self.weights, self.penalties), name="circle")


def gen_pl(N: int, n: int, seed: int, ground_truth: bool = True) -> PiecewiseLinearInstance:
    """Standard normal alphas (N x n) and betas (N,), solved by LP.

    An instance whose max is unbounded below is replaced by the one drawn
    from ``seed + 1`` (and so on, at most ``MAX_REGENERATIONS`` times).
    """
    if N < 1 or n < 1:
        raise ValueError("N and n must be positive")
    for s in range(seed, seed + MAX_REGENERATIONS + 1):
        rng = np.random.default_rng(s)
        alphas = rng.standard_normal((N, n))
        betas = rng.standard_normal(N)
        if not ground_truth:
            return PiecewiseLinearInstance(alphas, betas, s)
        try:
            x_star, support = pl_ground_truth(alphas, betas)
        except LPUnboundedError:
            log.info("pl instance (N=%d, n=%d, seed=%d) unbounded; regenerating", N, n, s)
            continue
        return PiecewiseLinearInstance(alphas, betas, s, x_star, support)
    raise LPUnboundedError(f"{MAX_REGENERATIONS + 1} consecutive unbounded pl instances from seed {seed}")


def gen_pq(N: int, n: int, seed: int) -> PiecewiseQuadraticInstance:
    if N < 1 or n < 1:
        raise ValueError("N and n must be positive")
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((N, n, n))
    H = A.transpose(0, 2, 1) @ A
    q = rng.uniform(-1.0, 1.0, size=(N, n))
    return PiecewiseQuadraticInstance(H, q, seed)


def cluster_grid(points, cell: float = 10.0, box: float = 100.0):
    """Group points by the square grid cell (side ``cell``) they fall in.

    Returns ``(centers, weights, penalties)`` with one entry per nonempty
    cell, ordered by cell id: the cluster mean, its population, and the mean
    squared distance to the mean plus 1e-6.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    ncell = max(1, int(np.ceil(2 * box / cell)))
    ij = np.clip(np.floor((pts + box) / cell).astype(int), 0, ncell - 1)
    cid = ij[:, 0] * ncell + ij[:, 1]
    ids, inv, counts = np.unique(cid, return_inverse=True, return_counts=True)
    centers = np.zeros((ids.size, pts.shape[1]))
    np.add.at(centers, inv, pts)
    centers /= counts[:, None]
    sq = np.sum((pts - centers[inv]) ** 2, axis=1)
    spread = np.zeros(ids.size)
    np.add.at(spread, inv, sq)
    penalties = np.maximum(spread / counts, 0.0) + 1e-6
    return centers, counts.astype(float), penalties


def gen_circle(N_points: int = 3500, seed: int = 0, cell: float = 10.0, box: float = 100.0) -> SpanningCircleInstance:
    """Uniform points in [-box, box]^2 clustered on a grid of side ``cell``."""
    if N_points < 1:
        raise ValueError("N_points must be positive")
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-box, box, size=(N_points, 2))
    centers, weights, penalties = cluster_grid(pts, cell, box)
    return SpanningCircleInstance(centers, weights, penalties, seed)


def pq_start_point(inst: PiecewiseQuadraticInstance) -> np.ndarray:
    """Mean of the individual minimisers, each solving 2 H_i x = -q_i."""
    H2 = 2.0 * inst.H
    rhs = -inst.q[..., None]
    try:
        sols = np.linalg.solve(H2, rhs)
    except np.linalg.LinAlgError:
        eye = np.eye(inst.H.shape[1])
        try:
            sols = np.linalg.solve(H2 + 1e-10 * eye, rhs)
        except np.linalg.LinAlgError as e:
            raise np.linalg.LinAlgError("singular H_i even after regularisation") from e
    return sols[..., 0].mean(axis=0)


# ---------------------------------------------------------------------------
# built-in one-dimensional examples


def two_parabolas() -> MaxProblem:
    """max{(x+1)^2, (x-1)^2}: minimiser 0, unique multiplier (1/2, 1/2)."""
    H = np.ones((2, 1, 1))
    return MaxProblem(QuadraticFamily(H, [[2.0], [-2.0]], [1.0, 1.0]), name="ex32")


def abs_value() -> MaxProblem:
    """max{-x, x}."""
    return MaxProblem(AffineFamily([[-1.0], [1.0]], [0.0, 0.0]), name="fig1a")


def abs_value_floor() -> MaxProblem:
    """max{-x, x, 0}: multipliers {y : y_1 = y_2}, not unique."""
    return MaxProblem(AffineFamily([[-1.0], [1.0], [0.0]], [0.0, 0.0, 0.0]), name="fig1b")


def linear_parabola() -> MaxProblem:
    """max{-x, x^2}: unique multiplier (0, 1), degenerate."""
    H = np.array([[[0.0]], [[1.0]]])
    return MaxProblem(QuadraticFamily(H, [[-1.0], [0.0]]), name="fig1c")


def three_planes() -> MaxProblem:
    """max{-x, x, x - 10}: the third piece is never active near 0."""
    return MaxProblem(AffineFamily([[-1.0], [1.0], [1.0]], [0.0, 0.0, -10.0]), name="planes")


BUILTINS = {
    "ex32": two_parabolas,
    "fig1a": abs_value,
    "fig1b": abs_value_floor,
    "fig1c": linear_parabola,
    "planes": three_planes,
}

# exact saddle points (x*, y*); fig1b lists a few members of its segment of multipliers
SADDLE_POINTS = {
    "ex32": [(np.zeros(1), np.array([0.5, 0.5]))],
    "fig1a": [(np.zeros(1), np.array([0.5, 0.5]))],
    "fig1b": [(np.zeros(1), np.array([t, t, 1 - 2 * t])) for t in (0.0, 0.25, 0.5)],
    "fig1c": [(np.zeros(1), np.array([0.0, 1.0]))],
    "planes": [(np.zeros(1), np.array([0.5, 0.5, 0.0]))],
}


def builtin(name: str) -> MaxProblem:
    try:
        return BUILTINS[name]()
    except KeyError:
        raise KeyError(f"unknown built-in problem {name!r}; choose from {sorted(BUILTINS)}") from None
