"""Problem model for finite-max minimisation.

A :class:`MaxProblem` wraps a *family* of smooth convex subfunctions that can
be evaluated in one vectorised call: ``family.evaluate(x)`` returns the value
vector ``(f_1(x), ..., f_N(x))`` and the ``N x n`` Jacobian whose rows are the
gradients.  Indices are 0-based throughout.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

TIE_TOL = 1e-12


class EvaluationError(ArithmeticError):
    """A subfunction returned a non-finite value or gradient."""

    def __init__(self, index: int, what: str = "value", iteration: int | None = None):
        self.index = int(index)
        self.what = what
        self.iteration = iteration
        msg = f"non-finite {what} of subfunction {self.index}"
        if iteration is not None:
            msg += f" at iteration {iteration}"
        super().__init__(msg)


# ---------------------------------------------------------------------------
# subfunction families


class AffineFamily:
    """f_i(x) = <a_i, x> + b_i."""

    def __init__(self, A, b):
        self.A = np.atleast_2d(np.asarray(A, dtype=float))
        self.b = np.asarray(b, dtype=float).reshape(-1)
        if self.A.shape[0] != self.b.shape[0]:
            raise ValueError("A and b disagree on the number of subfunctions")

    @property
    def shape(self):
        return self.A.shape

    def values(self, x):
        return self.A @ x + self.b

    def evaluate(self, x):
        return self.A @ x + self.b, self.A

    def restrict(self, idx):
        return AffineFamily(self.A[idx], self.b[idx])


class QuadraticFamily:
    """f_i(x) = x^T H_i x + <q_i, x> + c_i with symmetric H_i."""

    def __init__(self, H, q, c=None):
        self.H = np.asarray(H, dtype=float)
        if self.H.ndim != 3 or self.H.shape[1] != self.H.shape[2]:
            raise ValueError("H must have shape (N, n, n)")
        self.q = np.atleast_2d(np.asarray(q, dtype=float))
        N, n, _ = self.H.shape
        self.c = np.zeros(N) if c is None else np.asarray(c, dtype=float).reshape(-1)
        if self.q.shape != (N, n) or self.c.shape != (N,):
            raise ValueError("H, q, c have inconsistent shapes")
        # symmetrise once so that grad = 2 H x + q holds
        self.H = 0.5 * (self.H + self.H.transpose(0, 2, 1))

    @property
    def shape(self):
        return self.q.shape

    def values(self, x):
        Hx = self.H @ x
        return Hx @ x + self.q @ x + self.c

    def evaluate(self, x):
        Hx = self.H @ x
        return Hx @ x + self.q @ x + self.c, 2.0 * Hx + self.q

    def restrict(self, idx):
        return QuadraticFamily(self.H[idx], self.q[idx], self.c[idx])


class WeightedDistanceFamily:
    """f_i(x) = w_i ||x - p_i||^2 + k_i."""

    def __init__(self, centers, weights, penalties):
        self.centers = np.atleast_2d(np.asarray(centers, dtype=float))
        self.weights = np.asarray(weights, dtype=float).reshape(-1)
        self.penalties = np.asarray(penalties, dtype=float).reshape(-1)
        N = self.centers.shape[0]
        if self.weights.shape != (N,) or self.penalties.shape != (N,):
            raise ValueError("centers, weights, penalties have inconsistent shapes")

    @property
    def shape(self):
        return self.centers.shape

    def values(self, x):
        d = x - self.centers
        return self.weights * np.einsum("ij,ij->i", d, d) + self.penalties

    def evaluate(self, x):
        d = x - self.centers
        v = self.weights * np.einsum("ij,ij->i", d, d) + self.penalties
        return v, 2.0 * self.weights[:, None] * d

    def restrict(self, idx):
        return WeightedDistanceFamily(self.centers[idx], self.weights[idx], self.penalties[idx])


class CallableFamily:
    """A family built from per-index ``(value, gradient)`` closures."""

    def __init__(self, funcs: Sequence[tuple[Callable, Callable]], n: int):
        self.funcs = list(funcs)
        self.n = int(n)

    @property
    def shape(self):
        return (len(self.funcs), self.n)

    def values(self, x):
        return np.array([float(f(x)) for f, _ in self.funcs])

    def evaluate(self, x):
        v = self.values(x)
        J = np.array([np.asarray(g(x), dtype=float).reshape(self.n) for _, g in self.funcs])
        return v, J.reshape(len(self.funcs), self.n)

    def restrict(self, idx):
        return CallableFamily([self.funcs[i] for i in idx], self.n)


# ---------------------------------------------------------------------------
# domain types


class MeasureKind(str, enum.Enum):
    naive = "naive"
    oplus = "oplus"
    eps = "eps"
    A_rho = "A_rho"
    Aplus_rho = "Aplus_rho"
    argmax = "argmax"
    ground_truth = "ground_truth"
    manual = "manual"


@dataclass(frozen=True)
class SupportSet:
    """Sorted, duplicate-free subfunction indices plus provenance."""

    indices: tuple[int, ...]
    kind: MeasureKind = MeasureKind.manual
    iteration: int = 0
    tolerance: float = 0.0

    def __post_init__(self):
        idx = tuple(sorted({int(i) for i in self.indices}))
        object.__setattr__(self, "indices", idx)
        if self.tolerance < 0:
            raise ValueError("tolerance must be nonnegative")

    @classmethod
    def from_mask(cls, mask, **kw) -> "SupportSet":
        return cls(tuple(np.flatnonzero(mask).tolist()), **kw)

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, i):
        return i in self.indices

    def as_array(self) -> np.ndarray:
        return np.array(self.indices, dtype=int)

    def relabel(self, labels) -> "SupportSet":
        """Map indices through ``labels`` (e.g. back to original indexing)."""
        labels = np.asarray(labels)
        return SupportSet(tuple(labels[list(self.indices)].tolist()), self.kind, self.iteration, self.tolerance)


@dataclass
class PrimalDualPoint:
    x: np.ndarray
    y: np.ndarray | None = None

    def __post_init__(self):
        self.x = np.atleast_1d(np.asarray(self.x, dtype=float)).copy()
        if self.y is not None:
            self.y = np.atleast_1d(np.asarray(self.y, dtype=float)).copy()

    @classmethod
    def uniform(cls, x, N: int) -> "PrimalDualPoint":
        return cls(x, np.full(N, 1.0 / N))


@dataclass(frozen=True)
class MaxProblem:
    """f(x) = max_i f_i(x) over an evaluable family.

    ``labels[j]`` is the original index of subfunction ``j``; it survives any
    number of :func:`reduce_problem` calls.
    """

    family: object
    labels: np.ndarray = None
    tie_tol: float = TIE_TOL
    name: str = ""

    def __post_init__(self):
        N, n = self.family.shape
        if N < 1 or n < 1:
            raise ValueError(f"need N >= 1 and n >= 1, got N={N}, n={n}")
        labels = np.arange(N) if self.labels is None else np.asarray(self.labels, dtype=int)
        if labels.shape != (N,):
            raise ValueError("labels must have one entry per subfunction")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    @property
    def N(self) -> int:
        return self.family.shape[0]

    @property
    def n(self) -> int:
        return self.family.shape[1]

    # overflow surfaces as EvaluationError below, so numpy's warning is noise
    def values(self, x) -> np.ndarray:
        with np.errstate(over="ignore", invalid="ignore"):
            v = self.family.values(np.asarray(x, dtype=float))
        _check_finite(v, "value")
        return v

    def evaluate(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Values and Jacobian (rows are subfunction gradients) at ``x``."""
        with np.errstate(over="ignore", invalid="ignore"):
            v, J = self.family.evaluate(np.asarray(x, dtype=float))
        _check_finite(v, "value")
        if not np.isfinite(J).all():
            bad = np.flatnonzero(~np.isfinite(J).all(axis=1))[0]
            raise EvaluationError(bad, "gradient")
        return v, J

    def f(self, x) -> float:
        return float(np.max(self.values(x)))


def _check_finite(v, what):
    if not np.isfinite(v).all():
        raise EvaluationError(np.flatnonzero(~np.isfinite(v))[0], what)


class FValue(NamedTuple):
    value: float
    argmax_set: SupportSet


def eval_f(p: MaxProblem, x) -> FValue:
    """Return max_i f_i(x) and the indices attaining it (within ``p.tie_tol``)."""
    v = p.values(x)
    fmax = float(v.max())
    return FValue(fmax, SupportSet.from_mask(fmax - v <= p.tie_tol, kind=MeasureKind.argmax))


def reduce_problem(p: MaxProblem, s: SupportSet | Sequence[int]) -> MaxProblem:
    """Restrict ``p`` to the subfunctions in ``s`` (indices in ``p``'s own indexing)."""
    idx = np.asarray(s.indices if isinstance(s, SupportSet) else sorted(set(s)), dtype=int)
    if idx.size == 0:
        raise ValueError("cannot reduce to an empty support")
    if idx.min() < 0 or idx.max() >= p.N:
        raise IndexError(f"support indices out of range for N={p.N}")
    return MaxProblem(p.family.restrict(idx), labels=p.labels[idx], tie_tol=p.tie_tol, name=p.name)


# ---------------------------------------------------------------------------
# traces


class TraceRow(NamedTuple):
    k: int
    f: float
    gap: float
    grad_norm: float
    dual_residual: float
    step: float
    n_current: int


@dataclass
class ReductionEvent:
    iteration: int
    old_support_size: int
    new_support: SupportSet
    y_reset: np.ndarray | None
    labels: np.ndarray = None  # new_support in original indexing
    skipped: bool = False

    @property
    def new_size(self) -> int:
        return self.old_support_size if self.skipped else len(self.new_support)


@dataclass
class SolverTrace:
    rows: list = field(default_factory=list)
    events: list = field(default_factory=list)
    labels: np.ndarray | None = None
    xs: list | None = None  # primal iterate per logged row, when requested

    def append(self, row: TraceRow, x=None):
        if self.rows and row.k <= self.rows[-1].k:
            raise ValueError("trace iterations must be strictly increasing")
        self.rows.append(row)
        if self.xs is not None:
            self.xs.append(None if x is None else np.array(x, copy=True))

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    def __len__(self):
        return len(self.rows)
