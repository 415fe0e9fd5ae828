"""Support measures, identification functions, and accuracy against ground truth.

Every measure returns indices in the problem's own (possibly reduced)
indexing; use :meth:`SupportSet.relabel` with ``p.labels`` to compare
against a support stated in original indexing.  Gaps are compared with the
problem's ``tie_tol`` added to each threshold, the same tie rule as
:func:`finmax.core.eval_f`, so rounding-level differences never split ties.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .core import MaxProblem, MeasureKind, PrimalDualPoint, SupportSet
from .simplex import _project, in_simplex


@dataclass(frozen=True)
class MeasureConfig:
    sigma: float = 0.0
    p: float = 2.0
    gamma: float = 0.8
    lam: float = 1.0
    norm: str = "l1"

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if self.p <= 1:
            raise ValueError("p must exceed 1")
        if not 0 < self.gamma < 1:
            raise ValueError("gamma must lie in (0, 1)")
        if self.lam <= 0:
            raise ValueError("lam must be positive")
        if self.norm not in ("l1", "l2"):
            raise ValueError("norm must be 'l1' or 'l2'")


DEFAULT = MeasureConfig()


class AccuracyReport(NamedTuple):
    false_positives: int
    false_negatives: int

    def __str__(self):
        return f"{self.false_positives}/{self.false_negatives}"


def _norm(v, kind):
    return float(np.abs(v).sum()) if kind == "l1" else float(np.sqrt(v @ v))


def _gaps(v):
    return v.max() - v


def _close(p, v, thr):
    return _gaps(v) <= thr + p.tie_tol


def _check_y(p, y):
    if y is None or y.shape != (p.N,) or not in_simplex(y):
        raise ValueError("measure needs a dual point in the probability simplex")


def support_naive(p: MaxProblem, x, cfg: MeasureConfig = DEFAULT, iteration: int = 0) -> SupportSet:
    """{i : f(x) - f_i(x) <= sigma}."""
    return SupportSet.from_mask(_close(p, p.values(x), cfg.sigma), kind=MeasureKind.naive, iteration=iteration, tolerance=cfg.sigma)


def support_oplus(p: MaxProblem, z: PrimalDualPoint, cfg: MeasureConfig = DEFAULT, iteration: int = 0) -> SupportSet:
    """{i : f(x) - f_i(x) <= y_i + sigma}."""
    _check_y(p, z.y)
    return SupportSet.from_mask(_close(p, p.values(z.x), z.y + cfg.sigma), kind=MeasureKind.oplus, iteration=iteration, tolerance=cfg.sigma)


def eps_threshold(p: MaxProblem, z: PrimalDualPoint, cfg: MeasureConfig = DEFAULT) -> float:
    """eps^((p-1)/p) with eps = f(x) - phi(x, y) clamped at zero."""
    v = p.values(z.x)
    eps = max(0.0, float(v.max() - z.y @ v))
    return eps ** ((cfg.p - 1.0) / cfg.p)


def support_eps(p: MaxProblem, z: PrimalDualPoint, cfg: MeasureConfig = DEFAULT, iteration: int = 0) -> SupportSet:
    """{i : f(x) - f_i(x) <= eps^((p-1)/p) + sigma}, eps the duality gap."""
    _check_y(p, z.y)
    v = p.values(z.x)
    eps = max(0.0, float(v.max() - z.y @ v))
    thr = eps ** ((cfg.p - 1.0) / cfg.p) + cfg.sigma
    return SupportSet.from_mask(_close(p, v, thr), kind=MeasureKind.eps, iteration=iteration, tolerance=cfg.sigma)


# ---------------------------------------------------------------------------
# identification functions


def rho1(p: MaxProblem, z: PrimalDualPoint, cfg: MeasureConfig = DEFAULT) -> float:
    """(||sum_i y_i grad f_i(x)|| + f(x) - phi(x, y))^gamma."""
    _check_y(p, z.y)
    v, J = p.evaluate(z.x)
    gap = max(0.0, float(v.max() - z.y @ v))
    return (_norm(z.y @ J, cfg.norm) + gap) ** cfg.gamma


def rho2(p: MaxProblem, z: PrimalDualPoint, cfg: MeasureConfig = DEFAULT) -> float:
    """Natural residual ||z - P_K(z - lam F(z))||_2^gamma on K = R^n x simplex.

    The x-block projection is the identity, so its residual is lam grad_x phi.
    """
    _check_y(p, z.y)
    v, J = p.evaluate(z.x)
    rx = cfg.lam * (z.y @ J)
    ry = z.y - _project(z.y + cfg.lam * v)[0]
    return float(np.sqrt(rx @ rx + ry @ ry)) ** cfg.gamma


def rho3(p: MaxProblem, z: PrimalDualPoint, cfg: MeasureConfig = DEFAULT) -> float:
    """||(sum_i y_i grad f_i(x); y_1 (f - f_1); ...; y_N (f - f_N))||^gamma."""
    _check_y(p, z.y)
    v, J = p.evaluate(z.x)
    stacked = np.concatenate([z.y @ J, z.y * _gaps(v)])
    return _norm(stacked, cfg.norm) ** cfg.gamma


RHOS: dict[str, Callable] = {"rho1": rho1, "rho2": rho2, "rho3": rho3}


def support_A(p: MaxProblem, z: PrimalDualPoint, rho_value: float, iteration: int = 0) -> SupportSet:
    """{i : f(x) - f_i(x) <= rho}."""
    return SupportSet.from_mask(_close(p, p.values(z.x), rho_value), kind=MeasureKind.A_rho, iteration=iteration)


def support_Aplus(p: MaxProblem, z: PrimalDualPoint, rho_value: float, iteration: int = 0) -> SupportSet:
    """{i : f(x) - f_i(x) <= rho <= y_i}."""
    _check_y(p, z.y)
    mask = _close(p, p.values(z.x), rho_value) & (rho_value <= z.y)
    return SupportSet.from_mask(mask, kind=MeasureKind.Aplus_rho, iteration=iteration)


def accuracy(measured: SupportSet, truth: SupportSet) -> AccuracyReport:
    m, t = set(measured.indices), set(truth.indices)
    return AccuracyReport(len(m - t), len(t - m))


# ---------------------------------------------------------------------------
# named measures, as used by the heuristics and the CLI

MEASURES = (
    "naive",
    "oplus",
    "eps",
    "A_rho1",
    "Aplus_rho1",
    "A_rho2",
    "Aplus_rho2",
    "A_rho3",
    "Aplus_rho3",
)
DUAL_FREE = ("naive",)


def measure(name: str, p: MaxProblem, z: PrimalDualPoint, cfg: MeasureConfig = DEFAULT, iteration: int = 0) -> SupportSet:
    """Evaluate the support measure called ``name`` at ``z``."""
    if name == "naive":
        return support_naive(p, z.x, cfg, iteration)
    if z.y is None:
        raise ValueError(f"measure {name!r} needs a dual iterate; only 'naive' works without one")
    if name == "oplus":
        return support_oplus(p, z, cfg, iteration)
    if name == "eps":
        return support_eps(p, z, cfg, iteration)
    kind, _, rho_name = name.partition("_")
    if kind in ("A", "Aplus") and rho_name in RHOS:
        r = RHOS[rho_name](p, z, cfg)
        fn = support_A if kind == "A" else support_Aplus
        return fn(p, z, r, iteration)
    raise ValueError(f"unknown measure {name!r}; choose from {MEASURES}")
