"""Command-line harness: ``finmax generate | solve | table1 | sch``.

Settings come from built-in defaults, then an optional JSON ``--config``
file, then explicit flags (later wins).  Relative output paths resolve
against ``$FINMAX_OUTPUT_ROOT`` (default: the working directory).  Failures
print one JSON object to stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

import numpy as np

from . import io
from .core import EvaluationError, PrimalDualPoint
from .experiments import CHECKPOINTS, TABLE1_MEASURES, f_gaps, start_point, table1_records, table1_summary
from .identify import MEASURES, MeasureConfig
from .lp import pl_ground_truth
from .problems import BUILTINS, PiecewiseLinearInstance, builtin, gen_circle, gen_pl, gen_pq
from .sch import DschSchedule, SschConfig, run_dsch, run_ssch
from .saddle import certificate
from .solvers import SolverConfig, solve

EXIT_CONFIG = 2
EXIT_RUNTIME = 1


class ConfigError(ValueError):
    def __init__(self, key: str | None, message: str):
        self.key = key
        super().__init__(message)


# ---------------------------------------------------------------------------
# value parsers (accept CLI strings or JSON values)


def _ints(v):
    if isinstance(v, str):
        return [int(t) for t in v.replace(" ", "").split(",") if t]
    if isinstance(v, (int, np.integer)):
        return [int(v)]
    return [int(t) for t in v]


def _floats(v):
    if isinstance(v, str):
        return [float(t) for t in v.replace(" ", "").split(",") if t]
    if isinstance(v, (int, float)):
        return [float(v)]
    return [float(t) for t in v]


def _strs(v):
    if isinstance(v, str):
        return [t for t in v.replace(" ", "").split(",") if t]
    return [str(t) for t in v]


def _grid(v):
    """``"500x5,1000x10"`` or ``[[500, 5], [1000, 10]]``."""
    if isinstance(v, str):
        cells = []
        for t in v.replace(" ", "").split(","):
            if t:
                a, _, b = t.partition("x")
                cells.append((int(a), int(b)))
        return cells
    return [(int(a), int(b)) for a, b in v]


def _opt_float(v):
    return None if v is None or v == "auto" else float(v)


def _bool(v):
    if isinstance(v, str):
        return v.lower() in ("1", "true", "yes")
    return bool(v)


# key -> (default, parser); shared keys first
SOLVER_KEYS = {
    "solver": ("agraal", str),
    "max_iters": (1000, int),
    "lambda0": (1.0, _opt_float),
    "lambda_max": (1e6, float),
    "phi_ratio": (1.5, float),
    "gamma0": (1.0, float),
    "decay": (0.5, float),
    "solver_seed": (0, int),
    "log_every": (1, int),
}
MEASURE_KEYS = {
    "sigma": (0.0, float),
    "p": (2.0, float),
    "gamma": (0.8, float),
    "lam": (1.0, float),
    "norm": ("l1", str),
}
INSTANCE_KEYS = {
    "family": ("pl", str),
    "N": (500, int),
    "n": (5, int),
    "N_points": (3500, int),
    "seed": (0, int),
    "instance": (None, str),
}

SCHEMAS = {
    "generate": {**INSTANCE_KEYS, "out": (None, str)},
    "solve": {
        **INSTANCE_KEYS,
        **SOLVER_KEYS,
        "builtin": (None, str),
        "x0": (None, _floats),
        "tol": (0.0, float),
        "out": ("trace.csv", str),
    },
    "table1": {
        **SOLVER_KEYS,
        **MEASURE_KEYS,
        "grid": ([(500, 5)], _grid),
        "seeds": ([0], _ints),
        "checkpoints": (list(CHECKPOINTS), _ints),
        "measures": (list(TABLE1_MEASURES), _strs),
        "out": ("table1", str),
    },
    "sch": {
        **INSTANCE_KEYS,
        **SOLVER_KEYS,
        **MEASURE_KEYS,
        "heuristic": ("dsch", str),
        "measure": ("eps", str),
        "schedule": ([10000], _ints),
        "final_iters": (10000, int),
        "delta": (0.5, float),
        "ssch_seed": (0, int),
        "x0": (None, _floats),
        "baseline": (False, _bool),
        "out": ("sch.csv", str),
    },
}

HELP = {
    "family": "instance family: pl, pq or circle",
    "N": "number of subfunctions (pl, pq)",
    "n": "dimension (pl, pq)",
    "N_points": "raw points before clustering (circle)",
    "seed": "instance seed",
    "instance": "directory written by `generate` (overrides family/N/n/seed)",
    "out": "output file or directory, relative to $FINMAX_OUTPUT_ROOT",
    "solver": "agraal or subgradient",
    "max_iters": "iteration budget",
    "lambda0": "initial aGRAAL step, or 'auto' for a seeded estimate",
    "lambda_max": "aGRAAL step cap",
    "phi_ratio": "aGRAAL averaging ratio in (1, golden ratio]",
    "gamma0": "subgradient base step",
    "decay": "subgradient step exponent",
    "solver_seed": "seed for the 'auto' step estimate",
    "log_every": "log stride in iterations",
    "builtin": f"built-in problem: {', '.join(sorted(BUILTINS))}",
    "x0": "comma-separated start point (a single value is broadcast)",
    "tol": "stop once grad_norm + gap + dual_residual <= tol (0 disables)",
    "sigma": "absolute slack added to every measure threshold",
    "p": "exponent of the eps measure",
    "gamma": "identification function exponent",
    "lam": "natural residual step",
    "norm": "l1 or l2 for rho1/rho3",
    "grid": "comma-separated Nxn cells, e.g. 500x5,1000x10",
    "seeds": "comma-separated instance seeds",
    "checkpoints": "comma-separated iteration counts",
    "measures": f"comma-separated subset of {', '.join(MEASURES)}",
    "heuristic": "dsch or ssch",
    "measure": "support measure used at corrections",
    "schedule": "D-SCH iteration counts before each correction",
    "final_iters": "D-SCH iterations after the last correction",
    "delta": "S-SCH decay factor in (0, 1)",
    "ssch_seed": "S-SCH coin seed",
    "baseline": "also run the uncorrected solver with the same budget",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        m = re.search(r"--([\w-]+)", message)
        raise ConfigError(m.group(1).replace("-", "_") if m else None, message)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="finmax", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, schema in SCHEMAS.items():
        sp = sub.add_parser(name, allow_abbrev=False)
        sp.add_argument("--config", help="JSON file of settings (flags override it)")
        for key, (default, _) in schema.items():
            sp.add_argument(f"--{key.replace('_', '-')}", dest=key, default=argparse.SUPPRESS,
                            help=f"{HELP.get(key, '')} (default: {default})")
    return ap


def resolve(command: str, ns: argparse.Namespace) -> dict:
    """Merge defaults, config file and flags, then parse every value."""
    schema = SCHEMAS[command]
    raw = {k: d for k, (d, _) in schema.items()}
    if getattr(ns, "config", None):
        try:
            cfg = json.loads(Path(ns.config).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError("config", f"cannot read config file: {e}") from None
        if not isinstance(cfg, dict):
            raise ConfigError("config", "config file must hold a JSON object")
        for k, v in cfg.items():
            if k not in schema:
                raise ConfigError(k, f"unknown config key {k!r} for {command}")
            raw[k] = v
    for k in schema:
        if hasattr(ns, k):
            raw[k] = getattr(ns, k)
    out = {}
    for k, (default, parse) in schema.items():
        v = raw[k]
        try:
            out[k] = v if v is None or v is default else parse(v)
        except (TypeError, ValueError):
            raise ConfigError(k, f"invalid value for {k}: {v!r}") from None
    validate(out)
    return out


def _need(cond, key, msg):
    if not cond:
        raise ConfigError(key, msg)


def validate(c: dict):
    if "family" in c:
        _need(c["family"] in ("pl", "pq", "circle"), "family", "family must be pl, pq or circle")
    for key in ("N", "n", "N_points", "log_every"):
        if key in c:
            _need(c[key] >= 1, key, f"{key} must be >= 1, got {c[key]}")
    if "max_iters" in c:
        _need(c["max_iters"] >= 0, "max_iters", "max_iters must be >= 0")
    if "solver" in c:
        _need(c["solver"] in ("agraal", "subgradient"), "solver", "solver must be agraal or subgradient")
    if c.get("builtin") is not None:
        _need(c["builtin"] in BUILTINS, "builtin", f"unknown built-in {c['builtin']!r}")
    for key in ("measures",):
        for m in c.get(key, []):
            _need(m in MEASURES, key, f"unknown measure {m!r}")
    if "measure" in c:
        _need(c["measure"] in MEASURES, "measure", f"unknown measure {c['measure']!r}")
    if "heuristic" in c:
        _need(c["heuristic"] in ("dsch", "ssch"), "heuristic", "heuristic must be dsch or ssch")
    if "delta" in c:
        _need(0.0 < c["delta"] < 1.0, "delta", "delta must lie in (0, 1)")
    for key in ("checkpoints", "schedule"):
        for k in c.get(key, []):
            _need(k >= 1, key, f"every {key} entry must be >= 1")
    for cell in c.get("grid", []):
        _need(min(cell) >= 1, "grid", "grid sizes must be >= 1")
    if "final_iters" in c:
        _need(c["final_iters"] >= 0, "final_iters", "final_iters must be >= 0")
    if "sigma" in c:
        # surface MeasureConfig's own checks under the offending key
        try:
            MeasureConfig(c["sigma"], c["p"], c["gamma"], c["lam"], c["norm"])
        except ValueError as e:
            key = str(e).split()[0]
            raise ConfigError(key if key in c else None, str(e)) from None
    if "solver" in c:
        try:
            solver_config(c)
        except ValueError as e:
            key = str(e).split()[0]
            raise ConfigError(key if key in c else None, str(e)) from None


def solver_config(c: dict, max_iters: int | None = None) -> SolverConfig:
    return SolverConfig(
        kind=c["solver"],
        max_iters=c["max_iters"] if max_iters is None else max_iters,
        seed=c["solver_seed"],
        phi_ratio=c["phi_ratio"],
        lambda0=c["lambda0"],
        lambda_max=c["lambda_max"],
        gamma0=c["gamma0"],
        decay=c["decay"],
    )


def measure_config(c: dict) -> MeasureConfig:
    return MeasureConfig(c["sigma"], c["p"], c["gamma"], c["lam"], c["norm"])


def _resolve_path(s: str) -> Path:
    p = Path(s)
    return p if p.is_absolute() else io.output_root() / p


def make_instance(c: dict):
    if c.get("instance"):
        return io.load_instance(_resolve_path(c["instance"]))
    if c["family"] == "pl":
        return gen_pl(c["N"], c["n"], c["seed"])
    if c["family"] == "pq":
        return gen_pq(c["N"], c["n"], c["seed"])
    return gen_circle(c["N_points"], c["seed"])


def _x0(c: dict, n: int, default) -> np.ndarray:
    if c.get("x0") is None:
        return np.asarray(default, dtype=float)
    x0 = np.asarray(c["x0"], dtype=float)
    if x0.size == 1:
        return np.full(n, x0[0])
    _need(x0.size == n, "x0", f"x0 has {x0.size} entries, problem dimension is {n}")
    return x0


# ---------------------------------------------------------------------------
# commands


def cmd_generate(c: dict) -> dict:
    inst = make_instance(c)
    fam = {"PiecewiseLinearInstance": "pl", "PiecewiseQuadraticInstance": "pq"}.get(type(inst).__name__, "circle")
    extra = {"seed_requested": c["seed"]}
    if fam == "circle":
        extra["N_points"] = c["N_points"]
    if fam == "pl" and inst.support is not None:
        extra["support"] = list(inst.support.indices)
        extra["f_star"] = inst.f_star
    default = f"{fam}_N{c['N']}_n{c['n']}_seed{c['seed']}" if fam != "circle" else f"circle_P{c['N_points']}_seed{c['seed']}"
    out = io.save_instance(inst, _resolve_path(c["out"] or default), extra)
    return {"command": "generate", "family": fam, "out": str(out)}


def cmd_solve(c: dict) -> dict:
    if c.get("builtin"):
        p = builtin(c["builtin"])
        x0 = _x0(c, p.n, np.ones(p.n))
    else:
        inst = make_instance(c)
        p = inst.problem()
        x0 = _x0(c, p.n, start_point(inst))
    cfg = solver_config(c)
    y0 = np.full(p.N, 1.0 / p.N) if cfg.kind == "agraal" else None
    z, trace = solve(p, PrimalDualPoint(x0, y0), cfg, certificate_tol=c["tol"], log_every=c["log_every"])
    path = io.write_csv(_resolve_path(c["out"]), io.TRACE_COLUMNS, io.trace_records(trace))
    summary = {"command": "solve", "problem": p.name, "iterations": trace.rows[-1].k if trace.rows else 0,
               "f": p.f(z.x), "x": z.x.tolist(), "out": str(path)}
    if z.y is not None:
        cert = certificate(p, z)
        summary.update(gap=cert.gap, certificate=cert.total)
    return summary


def cmd_table1(c: dict) -> dict:
    out = _resolve_path(c["out"])
    cfg = solver_config(c)
    records = list(table1_records(c["grid"], c["seeds"], c["checkpoints"], c["measures"], measure_config(c), cfg))
    p1 = io.write_csv(out / "table1.csv", io.TABLE1_COLUMNS, records)
    cols = ["N", "n", "k", "seeds"] + list(c["measures"])
    p2 = io.write_csv(out / "table1_summary.csv", cols, table1_summary(records, c["measures"]))
    return {"command": "table1", "rows": len(records), "out": [str(p1), str(p2)]}


def cmd_sch(c: dict) -> dict:
    inst = make_instance(c)
    p = inst.problem()
    x0 = _x0(c, p.n, start_point(inst))
    truth = f_star = None
    if isinstance(inst, PiecewiseLinearInstance):
        if inst.support is None:
            inst.x_star, inst.support = pl_ground_truth(inst.alphas, inst.betas)
        truth, f_star = inst.support, inst.f_star
    cfg = solver_config(c)
    mcfg = measure_config(c)
    y0 = np.full(p.N, 1.0 / p.N) if cfg.kind == "agraal" else None
    z0 = PrimalDualPoint(x0, y0)
    if c["heuristic"] == "dsch":
        sched = DschSchedule(tuple(c["schedule"]))
        budget = sum(sched.iteration_counts) + c["final_iters"]
        z, trace = run_dsch(p, z0, cfg, c["measure"], sched, c["final_iters"], mcfg, c["log_every"], keep_x=True)
    else:
        budget = c["max_iters"]
        z, trace = run_ssch(p, z0, cfg, c["measure"], SschConfig(c["delta"], c["ssch_seed"]), budget, mcfg,
                            c["log_every"], keep_x=True)
    gaps = f_gaps(p, trace, f_star) if f_star is not None else None
    path = _resolve_path(c["out"])
    io.write_csv(path, io.SCH_COLUMNS, io.trace_records(trace, gaps, truth))
    summary = {
        "command": "sch",
        "heuristic": c["heuristic"],
        "iterations": budget,
        "final_N": int(trace.labels.size) if trace.labels is not None else p.N,
        "events": [
            {"k": e.iteration, "old_N": e.old_support_size, "new_N": e.new_size, "skipped": e.skipped}
            for e in trace.events
        ],
        "out": [str(path)],
    }
    if gaps:
        summary["f_gap"] = gaps[-1]
    if c["baseline"]:
        _, base = solve(p, z0, solver_config(c, budget), log_every=c["log_every"], keep_x=True)
        bgaps = f_gaps(p, base, f_star) if f_star is not None else None
        bpath = path.with_name(path.stem + "_baseline" + path.suffix)
        io.write_csv(bpath, io.SCH_COLUMNS, io.trace_records(base, bgaps, truth))
        summary["out"].append(str(bpath))
        if bgaps:
            summary["baseline_f_gap"] = bgaps[-1]
    return summary


COMMANDS = {"generate": cmd_generate, "solve": cmd_solve, "table1": cmd_table1, "sch": cmd_sch}


def _fail(kind: str, message: str, code: int, **extra) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message, **extra}, sort_keys=True) + "\n")
    return code


def main(argv=None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        c = resolve(ns.command, ns)
        summary = COMMANDS[ns.command](c)
    except ConfigError as e:
        return _fail("config", str(e), EXIT_CONFIG, key=e.key)
    except EvaluationError as e:
        return _fail("evaluation", str(e), EXIT_RUNTIME, index=e.index, iteration=e.iteration)
    except OSError as e:
        return _fail("io", str(e), EXIT_RUNTIME)
    except (ValueError, ArithmeticError, KeyError, np.linalg.LinAlgError) as e:
        return _fail(type(e).__name__, str(e), EXIT_RUNTIME)
    sys.stdout.write(json.dumps(summary, sort_keys=True) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
