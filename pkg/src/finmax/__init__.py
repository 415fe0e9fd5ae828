"""Finite-max minimisation through its saddle reformulation.

The main entry points are re-exported here; see the submodules for the
full API.
"""

from .core import MaxProblem, PrimalDualPoint, SupportSet, eval_f, reduce_problem
from .identify import MeasureConfig, accuracy, measure
from .lp import pl_ground_truth
from .problems import builtin, gen_circle, gen_pl, gen_pq
from .saddle import certificate, compute_multipliers
from .sch import DschSchedule, SschConfig, run_dsch, run_ssch
from .simplex import project_simplex
from .solvers import SolverConfig, solve

__all__ = [
    "DschSchedule",
    "MaxProblem",
    "MeasureConfig",
    "PrimalDualPoint",
    "SolverConfig",
    "SschConfig",
    "SupportSet",
    "accuracy",
    "builtin",
    "certificate",
    "compute_multipliers",
    "eval_f",
    "gen_circle",
    "gen_pl",
    "gen_pq",
    "measure",
    "pl_ground_truth",
    "project_simplex",
    "reduce_problem",
    "run_dsch",
    "run_ssch",
    "solve",
]
