"""Error measures between a reference grid and a registered candidate.

All statistics work on the difference surface ``d = z_ref - z_reg`` over
the geometric overlap of the two grids.  Sums use :func:`math.fsum` in
row-major order so that results do not depend on array layout.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .exceptions import (
    EmptySurface,
    MetricDegeneracyWarning,
    NoInteriorCells,
    NoOverlap,
    TooFewSamples,
)
from .grid_io import Grid, GridHeader
from .registration import check_same_resolution

__all__ = [
    "DifferenceSurface",
    "ErrorReport",
    "difference_surface",
    "mean_and_rmse",
    "total_squared_curvature",
    "t_statistic",
    "error_report",
]


@dataclass(frozen=True)
class DifferenceSurface:
    grid: Grid
    n: int

    def valid_values(self):
        return self.grid.values[self.grid.valid_mask]


@dataclass(frozen=True)
class ErrorReport:
    n: int
    mean_diff: float
    mean_diff_pct: float | None
    rmse: float
    tsc: float | None
    t_stat: float | None
    dof: int
    t_defined: bool

    def to_dict(self):
        return asdict(self)


def _whole_cells(delta, cellsize, what):
    steps = delta / cellsize
    k = round(steps)
    if not math.isclose(steps, k, abs_tol=1e-6):
        raise NoOverlap(f"grids are misaligned by {steps - k!r} cells along {what}")
    return k


def _free_sentinel(values, preferred):
    sentinel = preferred
    if values.size:
        while (values == sentinel).any():
            sentinel = float(min(sentinel, values.min()) - 1.0)
    return sentinel


def difference_surface(reference: Grid, registered: Grid) -> DifferenceSurface:
    """Cellwise ``reference - registered`` on the overlap of the two extents."""
    check_same_resolution(reference.header, registered.header)
    a, b = reference.header, registered.header
    cs = a.cellsize
    # offsets of b's top-left cell in a's row/col frame
    dcol = _whole_cells(b.xllcorner - a.xllcorner, cs, "x")
    drow = _whole_cells(a.top - b.top, cs, "y")
    r0, r1 = max(0, drow), min(a.nrows, drow + b.nrows)
    c0, c1 = max(0, dcol), min(a.ncols, dcol + b.ncols)
    if r0 >= r1 or c0 >= c1:
        raise NoOverlap("reference and registered grids do not overlap")

    za = reference.values[r0:r1, c0:c1]
    zb = registered.values[r0 - drow:r1 - drow, c0 - dcol:c1 - dcol]
    ok = (za != a.nodata_value) & (zb != b.nodata_value)
    diff = np.where(ok, za - zb, 0.0)
    nodata = _free_sentinel(diff[ok], a.nodata_value)
    diff[~ok] = nodata
    header = GridHeader(
        ncols=c1 - c0,
        nrows=r1 - r0,
        xllcorner=a.xllcorner + c0 * cs,
        yllcorner=a.yllcorner + (a.nrows - r1) * cs,
        cellsize=cs,
        nodata_value=nodata,
    )
    return DifferenceSurface(Grid(header, diff), int(ok.sum()))


def _mean(values):
    return math.fsum(values.tolist()) / values.size


def mean_and_rmse(diff: DifferenceSurface):
    d = diff.valid_values()
    if d.size == 0:
        raise EmptySurface("difference surface has no valid cells")
    mean = _mean(d)
    rmse = math.sqrt(math.fsum((d * d).tolist()) / d.size)
    return mean, rmse


def total_squared_curvature(diff: DifferenceSurface, h: float | None = None) -> float:
    """Mean squared 5-point Laplacian over interior stencils free of nodata."""
    grid = diff.grid
    if h is None:
        h = grid.header.cellsize
    z = grid.values
    ok = grid.valid_mask
    if grid.nrows < 3 or grid.ncols < 3:
        raise NoInteriorCells("difference surface has no interior cells")
    c = (slice(1, -1), slice(1, -1))
    up, down = (slice(None, -2), slice(1, -1)), (slice(2, None), slice(1, -1))
    left, right = (slice(1, -1), slice(None, -2)), (slice(1, -1), slice(2, None))
    full = ok[c] & ok[up] & ok[down] & ok[left] & ok[right]
    if not full.any():
        raise NoInteriorCells("no interior cell has a complete valid stencil")
    lap = (z[down] + z[up] + z[right] + z[left] - 4.0 * z[c]) / (h * h)
    sq = lap[full] ** 2
    return math.fsum(sq.tolist()) / sq.size


def t_statistic(diff: DifferenceSurface):
    """One-sample t of the differences against zero.

    Returns ``(t, dof, defined)``.  A zero-variance surface with zero mean
    gives ``t = 0``; with nonzero mean ``t`` is ``None`` and ``defined`` false.
    """
    d = diff.valid_values()
    n = d.size
    if n < 2:
        raise TooFewSamples(f"t-statistic needs at least 2 samples, got {n}")
    mean = _mean(d)
    s = math.sqrt(math.fsum(((d - mean) ** 2).tolist()) / (n - 1))
    if s > 0:
        return mean / (s / math.sqrt(n)), n - 1, True
    if mean == 0:
        return 0.0, n - 1, True
    return None, n - 1, False


def error_report(reference: Grid, registered: Grid) -> ErrorReport:
    """Full error matrix; degenerate metrics become ``None`` with a warning."""
    diff = difference_surface(reference, registered)
    mean, rmse = mean_and_rmse(diff)

    ref_valid = reference.values[reference.valid_mask]
    span = float(ref_valid.max() - ref_valid.min())
    if span > 0:
        pct = 100.0 * abs(mean) / span
    else:
        pct = 0.0 if mean == 0 else None

    try:
        tsc = total_squared_curvature(diff)
    except NoInteriorCells as exc:
        warnings.warn(str(exc), MetricDegeneracyWarning, stacklevel=2)
        tsc = None
    try:
        t, dof, defined = t_statistic(diff)
    except TooFewSamples as exc:
        warnings.warn(str(exc), MetricDegeneracyWarning, stacklevel=2)
        t, dof, defined = None, max(diff.n - 1, 0), False
    if not defined:
        warnings.warn("t-statistic undefined: differences have zero variance and nonzero mean",
                      MetricDegeneracyWarning, stacklevel=2)
    return ErrorReport(diff.n, mean, pct, rmse, tsc, t, dof, defined)
