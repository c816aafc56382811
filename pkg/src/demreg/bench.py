"""Direct vs quad-edge matching on synthetic DEM pairs with known shifts."""

from __future__ import annotations

import math
import warnings

import numpy as np

from .control_points import DIRECT, QUAD_EDGE
from .estimator import DEMRegistration
from .exceptions import InsufficientMatches, MetricDegeneracyWarning
from .synth import SynthSpec, derive_candidate, generate_terrain, quantize, sample_control_points

__all__ = ["make_trial_data", "run_trial", "run_bench", "format_table", "METRIC_COLUMNS"]

METHODS = (DIRECT, QUAD_EDGE)
METRIC_COLUMNS = ("mean_diff", "rmse", "tsc", "t_stat")


def _plant_decoys(candidate, points, transform, decoys, rng):
    """Copy each point's candidate elevation into ``decoys`` unrelated cells."""
    values = candidate.values.copy()
    nr, nc = candidate.shape
    free = candidate.valid_mask.copy()
    true_cells = [(r - transform.drow, c - transform.dcol) for _, (r, c) in points]
    for r, c in true_cells:
        # keep every true cell's ring untouched
        free[max(0, r - 2):r + 3, max(0, c - 2):c + 3] = False
    pool = rng.permutation(np.flatnonzero(free))
    need = decoys * len(points)
    if pool.size < need:
        raise ValueError("grid too small for the requested number of decoys")
    for k, (r, c) in enumerate(true_cells):
        for flat in pool[k * decoys:(k + 1) * decoys]:
            values.flat[flat] = values[r, c]
    return candidate.with_values(values)


def make_trial_data(seed, size=128, offset=None, max_offset=8, n_points=40, sigma=0.0,
                    bias=0.0, quantize_step=None, decoys=0):
    """Reference, candidate, control points and ground truth for one trial."""
    rng = np.random.default_rng([int(seed) & 0xFFFFFFFF, 7])
    reference = generate_terrain(SynthSpec(seed, size, size))
    if offset is None:
        offset = tuple(int(v) for v in rng.integers(-max_offset, max_offset + 1, 2))
    candidate, truth = derive_candidate(reference, offset[0], offset[1], sigma, bias, seed)
    if quantize_step:
        candidate = quantize(candidate, quantize_step)
    points = sample_control_points(reference, n_points, seed, candidate, truth)
    if decoys:
        candidate = _plant_decoys(candidate, points, truth, decoys, rng)
    return reference, candidate, [p for p, _ in points], truth


def run_trial(seed, methods=METHODS, n_jobs=1, **data_kwargs):
    """Register one synthetic pair with every method; one result dict per method."""
    reference, candidate, points, truth = make_trial_data(seed, **data_kwargs)
    results = []
    for method in methods:
        est = DEMRegistration(method=method, n_jobs=n_jobs)
        row = {"seed": seed, "method": method, "truth": [truth.drow, truth.dcol]}
        try:
            est.fit(reference, candidate, points)
        except InsufficientMatches:
            n_cand = sum(len(c) for c in est.candidates_)
            row.update(recovered=None, correct=False, candidates=n_cand,
                       false_positives=n_cand, report=None)
            results.append(row)
            continue
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", MetricDegeneracyWarning)
            report = est.error_report(candidate)
        corr = est.correspondence_
        row.update(
            recovered=[est.transform_.drow, est.transform_.dcol],
            correct=est.transform_.offset == truth.offset,
            candidates=corr.n_candidates,
            false_positives=corr.false_positives,
            report=report.to_dict(),
        )
        results.append(row)
    return results


def _mean_or_none(values):
    values = [v for v in values if v is not None]
    return math.fsum(values) / len(values) if values else None


def run_bench(seeds, methods=METHODS, n_jobs=1, offsets=None, **data_kwargs):
    """Per-method averages over trials, mirroring a matching-technique table.

    ``offsets``, when given, is cycled over the seeds; otherwise each trial
    draws its own offset.
    """
    seeds = list(seeds)
    trials = []
    for k, seed in enumerate(seeds):
        offset = tuple(offsets[k % len(offsets)]) if offsets else None
        trials += run_trial(seed, methods, n_jobs, offset=offset, **data_kwargs)
    rows = []
    for method in methods:
        mine = [t for t in trials if t["method"] == method]
        done = [t["report"] for t in mine if t["report"] is not None]
        row = {
            "method": method,
            "trials": len(mine),
            "recovered": sum(t["correct"] for t in mine),
            "false_positives": sum(t["false_positives"] for t in mine),
        }
        for col in METRIC_COLUMNS:
            row[col] = _mean_or_none([r[col] for r in done])
        rows.append(row)
    settings = {"seeds": seeds, "offsets": [list(o) for o in offsets] if offsets else None,
                **data_kwargs}
    return {"settings": settings, "rows": rows, "trials": trials}


def _cell(value):
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def format_table(result) -> str:
    columns = ("method", "trials", "recovered", "false_positives") + METRIC_COLUMNS
    body = [[_cell(row[c]) for c in columns] for row in result["rows"]]
    widths = [max(len(c), *(len(r[i]) for r in body)) for i, c in enumerate(columns)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(v.ljust(w) for v, w in zip(r, widths)) for r in body]
    return "\n".join(lines) + "\n"
