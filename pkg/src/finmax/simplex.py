"""Euclidean projection onto the probability simplex and its normal cone."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

FEAS_TOL = 1e-9


class SimplexProjectionResult(NamedTuple):
    point: np.ndarray
    threshold: float


def _project(v: np.ndarray) -> tuple[np.ndarray, float]:
    # shift by the max so the first threshold test holds even for huge entries
    m = v.max()
    w = v - m
    # descending sort; stable argsort on -w breaks ties by index
    u = w[np.argsort(-w, kind="stable")]
    css = np.cumsum(u) - 1.0
    j = np.arange(1, v.size + 1)
    rho = np.flatnonzero(u * j > css)[-1]
    tau = css[rho] / (rho + 1)
    return np.maximum(w - tau, 0.0), float(tau + m)


def project_simplex(v) -> SimplexProjectionResult:
    """Nearest point of the probability simplex to ``v``.

    Sort-and-threshold in O(N log N): the result is ``max(v - tau, 0)`` for
    the unique ``tau`` making it sum to one.
    """
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.size == 0:
        raise ValueError("cannot project onto the empty simplex")
    if not np.isfinite(v).all():
        raise ValueError("projection input must be finite")
    return SimplexProjectionResult(*_project(v))


def in_simplex(y, tol: float = FEAS_TOL) -> bool:
    y = np.asarray(y, dtype=float)
    return bool(y.ndim == 1 and y.size > 0 and y.min() >= -tol and abs(y.sum() - 1.0) <= tol)


def normal_cone_residual(y, g, tol: float = FEAS_TOL) -> float:
    """max over y' in the simplex of <g, y' - y>, i.e. ``max(g) - <g, y>``.

    Zero exactly when ``y`` maximises the linear function <g, .> over the
    simplex, i.e. when y is supported on argmax(g).
    """
    y = np.asarray(y, dtype=float)
    g = np.asarray(g, dtype=float)
    if not in_simplex(y, tol):
        raise ValueError("y is not in the probability simplex")
    if g.shape != y.shape:
        raise ValueError("g and y must have the same shape")
    return max(0.0, float(g.max() - g @ y))
