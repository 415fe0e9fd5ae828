"""Acceptance criteria, one test per criterion.

Each test prints a single PASS/FAIL line; the lines are repeated in the
pytest terminal summary.  Run with ``pytest tests/test_acceptance.py -s``
to see them inline.
"""

import json
import time

import numpy as np
import pytest

from finmax import cli
from finmax.core import PrimalDualPoint
from finmax.identify import MeasureConfig, accuracy, measure, rho1, rho2, rho3
from finmax.lp import in_convex_hull
from finmax.problems import BUILTINS, SADDLE_POINTS, builtin, gen_circle, gen_pl, gen_pq
from finmax.saddle import certificate, check_monotone_sample, compute_multipliers, lipschitz_sample, phi
from finmax.sch import run_dsch
from finmax.simplex import project_simplex
from finmax.solvers import SolverConfig, solve
from finmax.experiments import checkpoint_states
from oracles import grid_min_pl, project_simplex_enum
from reporting import report

AG = SolverConfig()
PL_SEEDS = range(10)


def test_01_ex32_exactness():
    p = builtin("ex32")
    t0 = time.perf_counter()
    z, tr = solve(p, PrimalDualPoint([1.0], [0.5, 0.5]), AG, max_iters=5000, certificate_tol=1e-6)
    dt = time.perf_counter() - t0
    cert = certificate(p, z).total
    dx, dy = np.linalg.norm(z.x), np.linalg.norm(z.y - 0.5)
    ok = cert <= 1e-6 and dx <= 1e-4 and dy <= 1e-4 and tr.rows[-1].k <= 5000 and dt < 1.0
    report("1 ex32 exactness", ok, f"k={tr.rows[-1].k} cert={cert:.1e} |x|={dx:.1e} |y-y*|={dy:.1e} {dt:.3f}s")


def test_02_multiplier_triptych():
    a = compute_multipliers(builtin("fig1a"), [0.0])
    b = compute_multipliers(builtin("fig1b"), [0.0])
    c = compute_multipliers(builtin("fig1c"), [0.0])
    checks = [
        a.is_singleton and a.nondegenerate and np.allclose(a.a_point, [0.5, 0.5], atol=1e-9),
        not b.is_singleton and b.nondegenerate and b.strong_support.indices == (0, 1, 2),
        c.is_singleton and not c.nondegenerate and np.allclose(c.a_point, [0.0, 1.0], atol=1e-9),
        c.strong_support.indices == (1,) and c.active_support.indices == (0, 1),
    ]
    report("2 fig1a-c multiplier triptych", all(checks), f"checks={checks}")


def test_03_projection_oracle():
    rng = np.random.default_rng(3)
    worst = 0.0
    for N in range(2, 7):
        for _ in range(1000):
            v = rng.normal(scale=rng.choice([0.1, 1.0, 10.0]), size=N)
            y = project_simplex(v).point
            worst = max(worst, np.abs(y - project_simplex_enum(v)).max())
            worst = max(worst, np.abs(project_simplex(y).point - y).max())
            w = rng.dirichlet(np.ones(N), size=10)
            worst = max(worst, float(((w - y) @ (v - y)).max()))
    report("3 simplex projection oracle", worst <= 1e-10, f"worst={worst:.1e}")


def _structural_problems():
    """(problem, sampler of x) pairs shared by criteria 4 and 8."""
    out = []
    for name in sorted(BUILTINS):
        out.append((builtin(name), np.zeros(1), 3.0))
    out.append((gen_pl(50, 3, seed=0).problem(), np.zeros(3), 3.0))
    out.append((gen_pq(20, 4, seed=0).problem(), np.zeros(4), 3.0))
    circ = gen_circle(500, seed=0)
    out.append((circ.problem(), circ.centers.mean(axis=0), 60.0))
    return out


def test_04_eps_subgradient_inclusion():
    rng = np.random.default_rng(4)
    violations, worst = 0, -np.inf
    for p, center, scale in _structural_problems():
        for _ in range(100):
            x = center + scale * rng.uniform(-1, 1, p.n)
            z = PrimalDualPoint(x, rng.dirichlet(np.ones(p.N)))
            v, J = p.evaluate(x)
            g, fx = z.y @ J, v.max()
            eps = fx - phi(p, z)
            W = center + scale * rng.uniform(-1, 1, (100, p.n))
            fw = np.array([p.f(w) for w in W])
            slack = fx + (W - x) @ g - eps - fw  # <= 0 when the inclusion holds
            violations += int(np.sum(slack > 1e-10))
            worst = max(worst, float(slack.max()))
    report("4 eps-subgradient inclusion", violations == 0, f"violations={violations} worst={worst:.1e}")


@pytest.fixture(scope="module")
def pl_runs():
    """aGRAAL from x = 0, uniform y on the ten piecewise-linear instances."""
    runs = []
    t0 = time.perf_counter()
    for seed in PL_SEEDS:
        inst = gen_pl(500, 5, seed)
        p = inst.problem()
        z0 = PrimalDualPoint.uniform(np.zeros(5), p.N)
        states = {k: s.point for k, s in checkpoint_states(p, z0, AG, (20000, 30000))}
        runs.append((inst, p, z0, states))
    return runs, time.perf_counter() - t0


def test_05_finite_identification(pl_runs):
    runs, dt = pl_runs
    t0 = time.perf_counter()
    cfg = MeasureConfig(p=2.0, sigma=0.0)
    fn = {m: 0 for m in ("naive", "oplus", "eps")}
    eps_exact = 0
    for inst, p, _, states in runs:
        for m in fn:
            acc = accuracy(measure(m, p, states[30000], cfg, 30000), inst.support)
            fn[m] += acc.false_negatives
            if m == "eps" and acc.false_negatives == 0:
                eps_exact += 1
    dt += time.perf_counter() - t0
    fewest = fn["eps"] <= min(fn.values())
    ok = eps_exact >= 8 and fewest and dt < 60.0
    report("5 finite identification", ok, f"eps FN=0 in {eps_exact}/10, aggregate FN {fn}, {dt:.1f}s")


def test_06_dsch_speedup(pl_runs):
    runs, _ = pl_runs
    good, lines = 0, []
    for inst, p, z0, states in runs:
        z, tr = run_dsch(p, z0, AG, "eps", (10000,), final_iters=10000)
        corrected = p.f(z.x) - inst.f_star
        plain = p.f(states[20000].x) - inst.f_star
        size = tr.rows[-1].n_current
        good += corrected <= plain and size < p.N
        lines.append(f"{corrected:.1e}<={plain:.1e},N={size}")
    report("6 D-SCH speedup", good >= 8, f"{good}/10 [{'; '.join(lines)}]")


def test_07_identification_functions_vanish_on_S():
    at_s, off_s = 0.0, np.inf
    for name, points in SADDLE_POINTS.items():
        p = builtin(name)
        for x, y in points:
            for rho in (rho1, rho2, rho3):
                at_s = max(at_s, rho(p, PrimalDualPoint(x, y)))
                for d in (-1.0, 1.0):
                    off_s = min(off_s, rho(p, PrimalDualPoint(x + d, y)))
    report("7 rho vanish on S", at_s <= 1e-8 and off_s >= 1e-3, f"max on S={at_s:.1e} min off S={off_s:.2e}")


def test_08_monotone_and_lipschitz():
    worst_ip, violations, details = np.inf, 0, []
    for i, (p, center, scale) in enumerate(_structural_problems()):
        worst_ip = min(worst_ip, check_monotone_sample(p, 10_000, radius=scale, seed=i, center=center))
        ls = lipschitz_sample(p, 10_000, radius=scale, seed=100 + i, center=center)
        violations += int(np.sum(ls.ratios > ls.bound))
        details.append(f"{p.name}:{ls.ratios.max() / ls.bound:.2f}")
    ok = worst_ip >= -1e-10 and violations == 0
    report("8 monotone and Lipschitz", ok,
           f"min <dF,dz>={worst_ip:.1e} ratio violations={violations} max ratio/bound {' '.join(details)}")


def test_09_lp_oracle():
    bad, checked = [], 0
    for seed in range(100):
        n = 1 + seed % 2
        inst = gen_pl(8 * n + 4, n, seed)
        # grid box always contains the LP solution; the grid itself ignores it otherwise
        half = max(3.0, float(np.ceil(np.abs(inst.x_star).max())) + 1.0)
        m = 4001 if n == 1 else 401
        _, fgrid, h = grid_min_pl(inst.alphas, inst.betas, -half, half, m)
        tol = np.abs(inst.alphas).sum(axis=1).max() * h / 2 + 1e-9
        ok = inst.f_star <= fgrid + 1e-9 and fgrid - inst.f_star <= tol
        ok = ok and in_convex_hull(inst.alphas[inst.support.as_array()])
        checked += 1
        if not ok:
            bad.append(seed)
    report("9 LP oracle", not bad and checked == 100, f"{checked} instances, failures {bad}")


CLI_RUNS = [
    ["generate", "--family", "pl", "--N", "200", "--n", "4", "--seed", "7"],
    ["generate", "--family", "circle", "--N-points", "400", "--seed", "2"],
    ["solve", "--builtin", "fig1c", "--max-iters", "500"],
    ["solve", "--family", "pq", "--N", "30", "--n", "4", "--seed", "1", "--max-iters", "300"],
    ["solve", "--family", "pl", "--N", "80", "--n", "3", "--solver", "subgradient", "--max-iters", "300"],
    ["table1", "--grid", "60x3", "--seeds", "0,1", "--checkpoints", "200,500"],
    ["sch", "--N", "60", "--n", "3", "--schedule", "300", "--final-iters", "300", "--baseline", "true"],
    ["sch", "--heuristic", "ssch", "--N", "60", "--n", "3", "--max-iters", "600", "--delta", "0.9"],
]


def _files(path):
    return sorted(path.rglob("*")) if path.is_dir() else [path]


def test_10_cli_determinism(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("FINMAX_OUTPUT_ROOT", str(tmp_path))
    mismatched = []
    for i, argv in enumerate(CLI_RUNS):
        outs, summaries = [], []
        for rep in range(2):
            out = f"c{i}_{rep}" + ("" if argv[0] in ("generate", "table1") else ".csv")
            assert cli.main(argv + ["--out", out]) == 0
            summaries.append(json.loads(capsys.readouterr().out))
            outs.append(tmp_path / out)
        a, b = (_files(o) for o in outs)
        sibling = [o.with_name(o.stem + "_baseline.csv") for o in outs]
        if sibling[0].exists():
            a, b = a + [sibling[0]], b + [sibling[1]]
        same = len(a) == len(b) > 0 and all(x.name.replace("_0", "") == y.name.replace("_1", "") for x, y in zip(a, b))
        same = same and all(x.read_bytes() == y.read_bytes() for x, y in zip(a, b) if x.is_file())
        if not same:
            mismatched.append(" ".join(argv[:3]))
    report("10 CLI determinism", not mismatched, f"{len(CLI_RUNS)} commands, mismatched {mismatched}")
