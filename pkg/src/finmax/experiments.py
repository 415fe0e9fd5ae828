"""Experiment drivers shared by the CLI and the scripts in ``scripts/``.

Each driver is a deterministic function of its arguments and returns plain
records (dicts) that :func:`finmax.io.write_csv` can serialise.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Iterable, Sequence

import numpy as np

from .core import MaxProblem, PrimalDualPoint, SolverTrace
from .identify import DEFAULT, MeasureConfig, accuracy, measure
from .problems import (
    PiecewiseLinearInstance,
    PiecewiseQuadraticInstance,
    SpanningCircleInstance,
    gen_pl,
    pq_start_point,
)
from .solvers import SolverConfig, init_state, step

TABLE1_MEASURES = ("naive", "oplus", "eps", "A_rho1", "Aplus_rho1", "A_rho2", "Aplus_rho2")
CHECKPOINTS = (5000, 30000)


def start_point(inst) -> np.ndarray:
    """Default primal start for a generated instance."""
    if isinstance(inst, PiecewiseLinearInstance):
        return np.zeros(inst.alphas.shape[1])
    if isinstance(inst, PiecewiseQuadraticInstance):
        return pq_start_point(inst)
    if isinstance(inst, SpanningCircleInstance):
        return inst.centers.mean(axis=0)
    raise TypeError(f"no default start point for {type(inst).__name__}")


def f_gaps(p: MaxProblem, trace: SolverTrace, f_star: float) -> list[float]:
    """f(x_k) - f* on the original problem for every logged row."""
    if trace.xs is None:
        raise ValueError("trace was recorded without keep_x")
    return [p.f(x) - f_star for x in trace.xs]


def checkpoint_states(p: MaxProblem, z0: PrimalDualPoint, cfg: SolverConfig, checkpoints: Sequence[int]):
    """Yield ``(k, state)`` at each checkpoint of a single run."""
    marks = sorted(set(int(k) for k in checkpoints))
    s = init_state(p, z0, cfg)
    k = 0
    for mark in marks:
        while k < mark:
            s = step(p, s, cfg)
            k += 1
        yield k, s


def table1_records(
    grid: Iterable[tuple[int, int]],
    seeds: Sequence[int],
    checkpoints: Sequence[int] = CHECKPOINTS,
    measures: Sequence[str] = TABLE1_MEASURES,
    measure_cfg: MeasureConfig = DEFAULT,
    solver_cfg: SolverConfig | None = None,
):
    """FP/FN of each measure against the LP support, per (N, n, seed, k).

    aGRAAL starts from x = 0 and the uniform dual point.
    """
    solver_cfg = solver_cfg or SolverConfig()
    for N, n in grid:
        for seed in seeds:
            inst = gen_pl(int(N), int(n), int(seed))
            p = inst.problem()
            z0 = PrimalDualPoint.uniform(np.zeros(p.n), p.N)
            for k, s in checkpoint_states(p, z0, solver_cfg, checkpoints):
                for name in measures:
                    got = measure(name, p, s.point, measure_cfg, k)
                    acc = accuracy(got, inst.support)
                    yield {
                        "N": N,
                        "n": n,
                        "seed": seed,
                        "seed_used": inst.seed,
                        "k": k,
                        "measure": name,
                        "fp": acc.false_positives,
                        "fn": acc.false_negatives,
                        "measured_size": len(got),
                        "truth_size": len(inst.support),
                    }


def table1_summary(records: Iterable[dict], measures: Sequence[str] = TABLE1_MEASURES):
    """Wide table: one row per (N, n, k), one ``fp/fn`` cell per measure,
    counts summed over seeds."""
    cells = defaultdict(lambda: [0, 0])
    seeds = defaultdict(set)
    order = []
    for r in records:
        key = (r["N"], r["n"], r["k"])
        if key not in seeds:
            order.append(key)
        seeds[key].add(r["seed"])
        c = cells[key + (r["measure"],)]
        c[0] += r["fp"]
        c[1] += r["fn"]
    for key in order:
        row = {"N": key[0], "n": key[1], "k": key[2], "seeds": len(seeds[key])}
        for m in measures:
            fp, fn = cells[key + (m,)]
            row[m] = f"{fp}/{fn}"
        yield row
