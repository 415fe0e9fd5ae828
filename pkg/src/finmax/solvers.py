"""First-order solvers for the saddle problem and the nonsmooth original.

``agraal`` is the adaptive golden ratio algorithm for monotone variational
inequalities on K = R^n x simplex; ``subgradient`` is the normalised
subgradient method on f directly.  Both share the ``init_state`` /
``step`` interface used by the support correction heuristics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import EvaluationError, MaxProblem, PrimalDualPoint, SolverTrace, TraceRow
from .simplex import _project, in_simplex

GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0


@dataclass
class SolverConfig:
    kind: str = "agraal"
    max_iters: int = 1000
    seed: int = 0
    # aGRAAL
    phi_ratio: float = 1.5
    lambda0: float | None = 1.0
    lambda_max: float = 1e6
    # subgradient: gamma_k = gamma0 / (k + 1)**decay
    gamma0: float = 1.0
    decay: float = 0.5

    def __post_init__(self):
        if self.kind not in ("agraal", "subgradient"):
            raise ValueError(f"unknown solver kind {self.kind!r}")
        if self.max_iters < 0:
            raise ValueError("max_iters must be >= 0")
        if not 1.0 < self.phi_ratio <= GOLDEN + 1e-15:
            raise ValueError("phi_ratio must lie in (1, golden ratio]")
        if self.lambda0 is not None and self.lambda0 <= 0:
            raise ValueError("lambda0 must be positive")
        if self.lambda_max <= 0 or self.gamma0 <= 0:
            raise ValueError("lambda_max and gamma0 must be positive")
        if self.decay < 0:
            raise ValueError("decay must be nonnegative")


@dataclass(slots=True)
class AgraalState:
    x: np.ndarray
    y: np.ndarray
    x_bar: np.ndarray
    y_bar: np.ndarray
    x_prev: np.ndarray
    y_prev: np.ndarray
    lambda_prev: float
    theta_prev: float
    # cached evaluation at (x, y) and operator at the previous point
    v: np.ndarray
    Fx: np.ndarray
    Fx_prev: np.ndarray
    Fy_prev: np.ndarray
    k: int = 0
    last_step: float = math.nan

    @property
    def point(self) -> PrimalDualPoint:
        return PrimalDualPoint(self.x, self.y)

    def row(self, n_current: int) -> TraceRow:
        f = float(self.v.max())
        gap = f - float(self.y @ self.v)
        return TraceRow(self.k, f, gap, float(np.linalg.norm(self.Fx)), max(0.0, gap), self.last_step, n_current)


@dataclass(slots=True)
class SubgradientState:
    x: np.ndarray
    v: np.ndarray
    J: np.ndarray
    k: int = 0
    last_step: float = math.nan

    @property
    def point(self) -> PrimalDualPoint:
        return PrimalDualPoint(self.x, None)

    def row(self, n_current: int) -> TraceRow:
        nan = math.nan
        return TraceRow(self.k, float(self.v.max()), nan, nan, nan, self.last_step, n_current)


def init_agraal(p: MaxProblem, z0: PrimalDualPoint, cfg: SolverConfig) -> AgraalState:
    x = z0.x.copy()
    y = np.full(p.N, 1.0 / p.N) if z0.y is None else z0.y.copy()
    if y.shape != (p.N,) or not in_simplex(y):
        raise ValueError("initial dual point must lie in the simplex")
    v, J = p.evaluate(x)
    Fx = y @ J
    if cfg.lambda0 is not None:
        lam0 = cfg.lambda0
        x_prev, y_prev, Fx_prev, Fy_prev = x, y, Fx, -v
    else:
        # step-size guess from a tiny seeded perturbation of the start point
        rng = np.random.default_rng(cfg.seed)
        x_prev = x + 1e-6 * rng.standard_normal(x.size)
        y_prev = y
        v_prev, J_prev = p.evaluate(x_prev)
        Fx_prev, Fy_prev = y @ J_prev, -v_prev
        dF = math.sqrt(np.sum((Fx - Fx_prev) ** 2) + np.sum((v - v_prev) ** 2))
        dz = np.linalg.norm(x - x_prev)
        lam0 = min(cfg.phi_ratio / 2 * dz / dF, cfg.lambda_max) if dF > 0 else 1.0
    return AgraalState(x, y, x.copy(), y.copy(), x_prev, y_prev, lam0, 1.0, v, Fx, Fx_prev, Fy_prev)


def agraal_step(p: MaxProblem, s: AgraalState, cfg: SolverConfig) -> AgraalState:
    """One adaptive golden ratio step on K = R^n x simplex."""
    ph = cfg.phi_ratio
    rho = 1.0 / ph + 1.0 / ph**2
    lam_prev = s.lambda_prev
    dx, dy = s.x - s.x_prev, s.y - s.y_prev
    dFx, dFy = s.Fx - s.Fx_prev, -s.v - s.Fy_prev
    dF2 = dFx @ dFx + dFy @ dFy
    if dF2 > 0.0:
        dz2 = dx @ dx + dy @ dy
        lam = min(rho * lam_prev, ph * s.theta_prev / (4.0 * lam_prev) * dz2 / dF2, cfg.lambda_max)
    else:
        lam = min(rho * lam_prev, cfg.lambda_max)
    x_bar = ((ph - 1.0) * s.x + s.x_bar) / ph
    y_bar = ((ph - 1.0) * s.y + s.y_bar) / ph
    # F = (grad_x phi, -values): the y-step ascends along the values
    x_new = x_bar - lam * s.Fx
    y_new, _ = _project(y_bar + lam * s.v)
    v, J = p.evaluate(x_new)
    return AgraalState(
        x_new,
        y_new,
        x_bar,
        y_bar,
        s.x,
        s.y,
        lam,
        ph * lam / lam_prev,
        v,
        y_new @ J,
        s.Fx,
        -s.v,
        s.k + 1,
        lam,
    )


def init_subgradient(p: MaxProblem, z0: PrimalDualPoint, cfg: SolverConfig) -> SubgradientState:
    v, J = p.evaluate(z0.x)
    return SubgradientState(z0.x.copy(), v, J)


def subgradient_direction(p: MaxProblem, v, J) -> np.ndarray:
    """Gradient of the smallest-index active subfunction (a subgradient of f)."""
    j = int(np.flatnonzero(v.max() - v <= p.tie_tol)[0])
    return J[j]


def subgradient_step(p: MaxProblem, x, k: int, cfg: SolverConfig) -> np.ndarray:
    """x - gamma_k g / ||g|| with gamma_k = gamma0 / (k+1)**decay."""
    if k < 0:
        raise ValueError("k must be >= 0")
    v, J = p.evaluate(x)
    return _subgradient_update(p, np.asarray(x, dtype=float), v, J, k, cfg)[0]


def _subgradient_update(p, x, v, J, k, cfg):
    g = subgradient_direction(p, v, J)
    gn = float(np.linalg.norm(g))
    if gn <= 1e-14:
        return x.copy(), 0.0
    step = cfg.gamma0 / (k + 1) ** cfg.decay / gn
    return x - step * g, step


def _subgradient_state_step(p: MaxProblem, s: SubgradientState, cfg: SolverConfig) -> SubgradientState:
    x_new, step = _subgradient_update(p, s.x, s.v, s.J, s.k, cfg)
    v, J = p.evaluate(x_new)
    return SubgradientState(x_new, v, J, s.k + 1, step)


def init_state(p: MaxProblem, z0: PrimalDualPoint, cfg: SolverConfig):
    return init_agraal(p, z0, cfg) if cfg.kind == "agraal" else init_subgradient(p, z0, cfg)


def step(p: MaxProblem, s, cfg: SolverConfig):
    """Advance any solver state by one iteration."""
    try:
        if cfg.kind == "agraal":
            return agraal_step(p, s, cfg)
        return _subgradient_state_step(p, s, cfg)
    except EvaluationError as e:
        raise EvaluationError(e.index, e.what, s.k + 1) from None


def converged(row: TraceRow, tol: float) -> bool:
    if tol <= 0 or math.isnan(row.gap):
        return False
    return row.grad_norm + row.gap + row.dual_residual <= tol


def solve(
    p: MaxProblem,
    z0: PrimalDualPoint,
    cfg: SolverConfig,
    max_iters: int | None = None,
    certificate_tol: float = 0.0,
    log_every: int = 1,
    keep_x: bool = False,
) -> tuple[PrimalDualPoint, SolverTrace]:
    """Run the configured solver from ``z0``.

    Stops after ``max_iters`` (default ``cfg.max_iters``) steps or once the
    saddle certificate sum drops to ``certificate_tol`` (aGRAAL only).  Rows
    are logged every ``log_every`` iterations and at the final iteration;
    ``keep_x`` also stores the primal iterate of each logged row.
    """
    max_iters = cfg.max_iters if max_iters is None else max_iters
    trace = SolverTrace(labels=p.labels, xs=[] if keep_x else None)
    if max_iters == 0:
        return PrimalDualPoint(z0.x, z0.y), trace
    s = init_state(p, z0, cfg)
    for it in range(1, max_iters + 1):
        s = step(p, s, cfg)
        row = s.row(p.N)
        done = converged(row, certificate_tol) or it == max_iters
        if done or it % log_every == 0:
            trace.append(row, s.x)
        if done:
            break
    return s.point, trace
