"""Instance files (columnar text + JSON manifest) and trace CSV output.

Every array is written with ``%.17g`` so a round trip is exact and repeated
writes are byte-identical.
"""

from __future__ import annotations

import csv
import json
import math
import os
from pathlib import Path

import numpy as np

from .core import SolverTrace, SupportSet
from .identify import accuracy
from .problems import PiecewiseLinearInstance, PiecewiseQuadraticInstance, SpanningCircleInstance

FMT = "%.17g"
MANIFEST = "manifest.json"

TRACE_COLUMNS = ["k", "f", "gap", "grad_norm", "dual_residual", "lambda", "N_current", "event"]
SCH_COLUMNS = TRACE_COLUMNS + ["old_N", "new_N", "fp", "fn", "f_gap"]
TABLE1_COLUMNS = ["N", "n", "seed", "seed_used", "k", "measure", "fp", "fn", "measured_size", "truth_size"]

FILES = {
    "pl": ("alphas.txt", "betas.txt"),
    "pq": ("H.txt", "q.txt"),
    "circle": ("centers.txt", "weights.txt", "penalties.txt"),
}


def _save(path: Path, arr):
    np.savetxt(path, np.atleast_1d(arr), fmt=FMT)


def _load(path: Path, ndmin=1):
    return np.loadtxt(path, ndmin=ndmin, dtype=float)


def write_manifest(path: Path, manifest: dict):
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def save_instance(inst, out_dir, manifest: dict | None = None) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if isinstance(inst, PiecewiseLinearInstance):
        family, arrays = "pl", (inst.alphas, inst.betas)
        sizes = {"N": int(inst.alphas.shape[0]), "n": int(inst.alphas.shape[1])}
    elif isinstance(inst, PiecewiseQuadraticInstance):
        N, n, _ = inst.H.shape
        family, arrays = "pq", (inst.H.reshape(N, n * n), inst.q)
        sizes = {"N": int(N), "n": int(n)}
    elif isinstance(inst, SpanningCircleInstance):
        family, arrays = "circle", (inst.centers, inst.weights, inst.penalties)
        sizes = {"N": int(inst.centers.shape[0]), "n": int(inst.centers.shape[1])}
    else:
        raise TypeError(f"cannot save {type(inst).__name__}")
    for name, arr in zip(FILES[family], arrays):
        _save(out / name, arr)
    meta = {"family": family, "files": list(FILES[family]), "format": "columnar-text/%.17g", **sizes}
    if inst.seed is not None:
        meta["seed_used"] = int(inst.seed)
    meta.update(manifest or {})
    write_manifest(out / MANIFEST, meta)
    return out


def load_instance(in_dir):
    d = Path(in_dir)
    meta = json.loads((d / MANIFEST).read_text())
    family = meta["family"]
    seed = meta.get("seed_used")
    if family == "pl":
        return PiecewiseLinearInstance(_load(d / "alphas.txt", 2), _load(d / "betas.txt"), seed)
    if family == "pq":
        N, n = meta["N"], meta["n"]
        H = _load(d / "H.txt", 2).reshape(N, n, n)
        return PiecewiseQuadraticInstance(H, _load(d / "q.txt", 2), seed)
    if family == "circle":
        return SpanningCircleInstance(
            _load(d / "centers.txt", 2), _load(d / "weights.txt"), _load(d / "penalties.txt"), seed
        )
    raise ValueError(f"unknown family {family!r} in {d / MANIFEST}")


# ---------------------------------------------------------------------------
# CSV


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "" if math.isnan(v) else repr(float(v))
    return str(v)


def write_csv(path, columns, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([fmt(r.get(c)) for c in columns])
    return path


def trace_records(trace: SolverTrace, f_gap=None, truth=None):
    """Trace rows plus interleaved reduction-event rows, as dicts.

    ``f_gap`` maps a logged row index to f_original(x_k) - f*; ``truth`` is a
    ground-truth support (original indexing) for FP/FN at events.
    """
    events = sorted(trace.events, key=lambda e: e.iteration)
    ei = 0
    for i, r in enumerate(trace.rows):
        yield {
            "k": r.k,
            "f": r.f,
            "gap": r.gap,
            "grad_norm": r.grad_norm,
            "dual_residual": r.dual_residual,
            "lambda": r.step,
            "N_current": r.n_current,
            "event": "",
            "f_gap": None if f_gap is None else f_gap[i],
        }
        while ei < len(events) and events[ei].iteration <= r.k:
            e = events[ei]
            rec = {
                "k": e.iteration,
                "event": "skip" if e.skipped else "reduce",
                "old_N": e.old_support_size,
                "new_N": e.new_size,
                "N_current": e.new_size,
            }
            if truth is not None and not e.skipped:
                acc = accuracy(SupportSet(tuple(e.labels.tolist())), truth)
                rec["fp"], rec["fn"] = acc.false_positives, acc.false_negatives
            yield rec
            ei += 1


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def output_root() -> Path:
    return Path(os.environ.get("FINMAX_OUTPUT_ROOT", "."))
