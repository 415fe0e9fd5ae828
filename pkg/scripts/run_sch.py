"""Support correction against the plain solver on random piecewise-linear instances.

For each seed runs D-SCH (one correction after ``--k0`` iterations, then
``--extra`` more) and the uncorrected solver with the same budget, and
records f(x_k) - f* along both runs.

    python3 scripts/run_sch.py --seeds 0-9 --measure eps --out runs/sch
"""

import argparse
from pathlib import Path

import numpy as np

from finmax import io
from finmax.core import PrimalDualPoint
from finmax.experiments import f_gaps
from finmax.problems import gen_pl
from finmax.sch import run_dsch
from finmax.solvers import SolverConfig, solve

COLUMNS = ["seed", "k", "run", "N_current", "f_gap"]


def seed_range(text):
    lo, _, hi = text.partition("-")
    return list(range(int(lo), int(hi or lo) + 1))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, default=500)
    ap.add_argument("--n", type=int, default=5)
    ap.add_argument("--seeds", type=seed_range, default=list(range(10)))
    ap.add_argument("--measure", default="eps")
    ap.add_argument("--k0", type=int, default=10000)
    ap.add_argument("--extra", type=int, default=10000)
    ap.add_argument("--log-every", type=int, default=500)
    ap.add_argument("--out", type=Path, default=Path("runs/sch"))
    args = ap.parse_args(argv)

    cfg = SolverConfig()
    rows, summary = [], []
    for seed in args.seeds:
        inst = gen_pl(args.N, args.n, seed)
        p = inst.problem()
        z0 = PrimalDualPoint.uniform(np.zeros(p.n), p.N)
        _, tr = run_dsch(p, z0, cfg, args.measure, (args.k0,), args.extra, log_every=args.log_every, keep_x=True)
        _, base = solve(p, z0, cfg, max_iters=args.k0 + args.extra, log_every=args.log_every, keep_x=True)
        for name, trace in (("sch", tr), ("plain", base)):
            for r, g in zip(trace.rows, f_gaps(p, trace, inst.f_star)):
                rows.append({"seed": seed, "k": r.k, "run": name, "N_current": r.n_current, "f_gap": g})
        summary.append({
            "seed": seed,
            "N_final": tr.rows[-1].n_current,
            "truth": len(inst.support),
            "sch": p.f(tr.xs[-1]) - inst.f_star,
            "plain": p.f(base.xs[-1]) - inst.f_star,
        })

    io.write_csv(args.out / "sch_traces.csv", COLUMNS, rows)
    io.write_csv(args.out / "sch_summary.csv", list(summary[0]), summary)
    print(f"{'seed':>4} {'N_final':>7} {'|S|':>4} {'sch f-f*':>11} {'plain f-f*':>11}")
    for s in summary:
        print(f"{s['seed']:>4} {s['N_final']:>7} {s['truth']:>4} {s['sch']:>11.2e} {s['plain']:>11.2e}")
    wins = sum(s["sch"] <= s["plain"] for s in summary)
    print(f"correction no worse in {wins}/{len(summary)} seeds -> {args.out}")


if __name__ == "__main__":
    main()
