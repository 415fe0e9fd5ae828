"""Deterministic and stochastic support correction heuristics (D-SCH / S-SCH).

Both wrap any solver from :mod:`finmax.solvers` and any support measure.  At
a correction the working problem is restricted to the measured support, the
primal iterate is carried over unchanged, the dual iterate is reset to the
uniform point of the smaller simplex, and the solver is restarted.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .core import MaxProblem, PrimalDualPoint, ReductionEvent, SolverTrace, SupportSet, reduce_problem
from .identify import DEFAULT, MeasureConfig, measure as named_measure
from .solvers import SolverConfig, init_state, step

Measure = Union[str, Callable[[MaxProblem, PrimalDualPoint, int], SupportSet]]


@dataclass(frozen=True)
class DschSchedule:
    iteration_counts: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "iteration_counts", tuple(int(k) for k in self.iteration_counts))
        if any(k < 1 for k in self.iteration_counts):
            raise ValueError("every scheduled iteration count must be >= 1")


@dataclass(frozen=True)
class SschConfig:
    delta: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")


def _resolve(meas: Measure, solver_cfg: SolverConfig, mcfg: MeasureConfig):
    if callable(meas):
        return meas
    if solver_cfg.kind == "subgradient" and meas != "naive":
        raise ValueError("subgradient runs have no dual iterate; use the 'naive' measure")
    return lambda p, z, k: named_measure(meas, p, z, mcfg, k)


class _Run:
    """Mutable state shared by both heuristics."""

    def __init__(self, p, z0, cfg, measure_fn, log_every, keep_x):
        self.p = p
        self.cfg = cfg
        self.measure_fn = measure_fn
        self.log_every = log_every
        self.trace = SolverTrace(labels=p.labels, xs=[] if keep_x else None)
        self.state = init_state(p, z0, cfg)
        self.k = 0

    def advance(self, last=False):
        self.state = step(self.p, self.state, self.cfg)
        self.k += 1
        if last or self.k % self.log_every == 0:
            self.trace.append(self.state.row(self.p.N)._replace(k=self.k), self.state.x)

    def correct(self):
        z = self.state.point
        s = self.measure_fn(self.p, z, self.k)
        if len(s) == 0:
            self.trace.events.append(ReductionEvent(self.k, self.p.N, s, None, np.array([], dtype=int), skipped=True))
            return
        old_N = self.p.N
        self.p = reduce_problem(self.p, s)
        y0 = np.full(self.p.N, 1.0 / self.p.N) if z.y is not None else None
        self.trace.events.append(ReductionEvent(self.k, old_N, s, y0, self.p.labels.copy()))
        self.trace.labels = self.p.labels
        self.state = init_state(self.p, PrimalDualPoint(z.x, y0), self.cfg)

    def finish(self):
        if self.trace.rows and self.trace.rows[-1].k != self.k:
            self.trace.append(self.state.row(self.p.N)._replace(k=self.k), self.state.x)
        return self.state.point, self.trace


def run_dsch(
    p: MaxProblem,
    z0: PrimalDualPoint,
    solver_cfg: SolverConfig,
    measure: Measure,
    schedule: DschSchedule | Sequence[int],
    final_iters: int = 0,
    measure_cfg: MeasureConfig = DEFAULT,
    log_every: int = 1,
    keep_x: bool = False,
) -> tuple[PrimalDualPoint, SolverTrace]:
    """Run ``k_j`` solver steps, correct the support, repeat for each ``k_j``.

    ``final_iters`` more steps follow the last correction.  The returned
    point lives in the final working problem, whose original indices are
    ``trace.labels``.
    """
    if not isinstance(schedule, DschSchedule):
        schedule = DschSchedule(tuple(schedule))
    run = _Run(p, z0, solver_cfg, _resolve(measure, solver_cfg, measure_cfg), log_every, keep_x)
    for kj in schedule.iteration_counts:
        for i in range(kj):
            run.advance(last=i == kj - 1)
        run.correct()
    for i in range(final_iters):
        run.advance(last=i == final_iters - 1)
    if run.k == 0:
        return PrimalDualPoint(z0.x, z0.y), run.trace
    return run.finish()


def run_ssch(
    p: MaxProblem,
    z0: PrimalDualPoint,
    solver_cfg: SolverConfig,
    measure: Measure,
    ssch_cfg: SschConfig,
    max_iters: int,
    measure_cfg: MeasureConfig = DEFAULT,
    log_every: int = 1,
    keep_x: bool = False,
) -> tuple[PrimalDualPoint, SolverTrace]:
    """After every step, correct with probability 1 - q; q resets to 1 on a
    correction and shrinks by ``delta`` otherwise."""
    rng = np.random.default_rng(ssch_cfg.seed)
    run = _Run(p, z0, solver_cfg, _resolve(measure, solver_cfg, measure_cfg), log_every, keep_x)
    q = 1.0
    for i in range(max_iters):
        run.advance(last=i == max_iters - 1)
        if rng.random() < 1.0 - q:
            run.correct()
            q = 1.0
        else:
            q *= ssch_cfg.delta
    if run.k == 0:
        return PrimalDualPoint(z0.x, z0.y), run.trace
    return run.finish()


def final_support(trace: SolverTrace, N: int) -> SupportSet:
    """Working support at the end of a run, in original indexing."""
    labels = trace.labels if trace.labels is not None else np.arange(N)
    return SupportSet(tuple(np.asarray(labels).tolist()))
