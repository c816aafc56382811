"""Control-point ingestion and candidate search in a grid.

Two search methods are provided.  ``direct_match`` looks for cells whose
elevation equals the point's within a tolerance.  ``quad_edge_match`` also
requires the ring of eight centre-to-neighbour elevation differences around
the cell to agree with the ring around the point in the reference grid.
Both return every acceptable cell, false positives included; picking the
geometrically consistent subset is the job of :mod:`demreg.constellation`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .exceptions import (
    BorderCell,
    DuplicateControlPointWarning,
    MalformedLine,
    NodataInRing,
)
from .grid_io import Grid

__all__ = [
    "ControlPoint",
    "QuadSignature",
    "CandidateMatch",
    "RING_DIRECTIONS",
    "load_control_points",
    "format_control_points",
    "direct_match",
    "quad_signature",
    "signature_field",
    "quad_edge_match",
    "quantization_step",
    "default_tolerances",
]

# (drow, dcol) per ring entry, order N, NE, E, SE, S, SW, W, NW
RING_DIRECTIONS = ((-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1))

DIRECT = "direct"
QUAD_EDGE = "quad-edge"


class ControlPoint(NamedTuple):
    lat: float
    lon: float
    elevation: float


class QuadSignature(NamedTuple):
    edges: tuple

    def as_array(self):
        return np.asarray(self.edges, dtype=np.float64)


@dataclass(frozen=True, order=True)
class CandidateMatch:
    # field order doubles as the sort key (residual, row, col)
    residual: float
    row: int
    col: int
    method: str = DIRECT

    @property
    def cell(self):
        return (self.row, self.col)


def load_control_points(text: str) -> list:
    """Parse ``lat,lon,elevation`` lines; ``#`` starts a comment line.

    Repeated points are kept and reported with
    :class:`DuplicateControlPointWarning`.
    """
    points = []
    seen = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split(",")
        if len(parts) != 3:
            raise MalformedLine(f"expected 3 comma-separated fields, found {len(parts)}", lineno)
        try:
            lat, lon, elev = (float(p) for p in parts)
        except ValueError:
            raise MalformedLine(f"non-numeric field in {stripped!r}", lineno) from None
        if not all(math.isfinite(v) for v in (lat, lon, elev)):
            raise MalformedLine(f"non-finite field in {stripped!r}", lineno)
        point = ControlPoint(lat, lon, elev)
        if point in seen:
            warnings.warn(
                f"line {lineno}: duplicate control point (first seen on line {seen[point]})",
                DuplicateControlPointWarning, stacklevel=2)
        else:
            seen[point] = lineno
        points.append(point)
    return points


def format_control_points(points) -> str:
    return "".join(f"{p.lat!r},{p.lon!r},{p.elevation!r}\n" for p in points)


def _sorted_matches(rows, cols, residuals, method):
    order = np.lexsort((cols, rows, residuals))
    return [CandidateMatch(float(residuals[k]), int(rows[k]), int(cols[k]), method)
            for k in order]


def direct_match(grid: Grid, point: ControlPoint, tol_elev: float) -> list:
    if tol_elev < 0:
        raise ValueError("tol_elev must be >= 0")
    residual = np.abs(grid.values - point.elevation)
    hit = grid.valid_mask & (residual <= tol_elev)
    rows, cols = np.nonzero(hit)
    return _sorted_matches(rows, cols, residual[rows, cols], DIRECT)


def quad_signature(grid: Grid, row: int, col: int, radius: int = 1) -> QuadSignature:
    """Eight neighbour-minus-centre differences at distance ``radius``."""
    if not (radius <= row <= grid.nrows - 1 - radius and radius <= col <= grid.ncols - 1 - radius):
        raise BorderCell(f"cell ({row}, {col}) has no complete ring of radius {radius}")
    z = grid.values
    nodata = grid.nodata
    if z[row, col] == nodata:
        raise NodataInRing(f"cell ({row}, {col}) is nodata")
    edges = []
    for dr, dc in RING_DIRECTIONS:
        v = z[row + dr * radius, col + dc * radius]
        if v == nodata:
            raise NodataInRing(f"ring of cell ({row}, {col}) contains nodata")
        edges.append(float(v - z[row, col]))
    return QuadSignature(tuple(edges))


def signature_field(grid: Grid, radius: int = 1):
    """Signatures of every cell at once.

    Returns ``(sig, ok)``: ``sig`` has shape ``(8, nrows, ncols)`` and ``ok``
    marks cells whose full ring exists and holds no nodata.
    """
    z = grid.values
    valid = grid.valid_mask
    nr, nc = grid.shape
    sig = np.zeros((8, nr, nc))
    ok = np.zeros((nr, nc), dtype=bool)
    if nr <= 2 * radius or nc <= 2 * radius:
        return sig, ok
    inner = (slice(radius, nr - radius), slice(radius, nc - radius))
    ok[inner] = valid[inner]
    centre = z[inner]
    for k, (dr, dc) in enumerate(RING_DIRECTIONS):
        shifted = (slice(radius + dr * radius, nr - radius + dr * radius),
                   slice(radius + dc * radius, nc - radius + dc * radius))
        sig[k][inner] = z[shifted] - centre
        ok[inner] &= valid[shifted]
    return sig, ok


def quad_edge_match(grid: Grid, point: ControlPoint, ref_sig: QuadSignature,
                    tol_elev: float, tol_edge: float, radius: int = 1, field=None) -> list:
    """Cells passing the elevation test whose ring also matches ``ref_sig``.

    The residual is the max-norm distance between the two signatures.  Pass
    a precomputed ``field`` from :func:`signature_field` to avoid recomputing
    it for every point.
    """
    if tol_elev < 0 or tol_edge < 0:
        raise ValueError("tolerances must be >= 0")
    sig, ok = field if field is not None else signature_field(grid, radius)
    ref = np.asarray(ref_sig.edges, dtype=np.float64).reshape(8, 1, 1)
    hit = ok & (np.abs(grid.values - point.elevation) <= tol_elev)
    rows, cols = np.nonzero(hit)
    if rows.size == 0:
        return []
    dist = np.abs(sig[:, rows, cols] - ref[:, :, 0]).max(axis=0)
    keep = dist <= tol_edge
    return _sorted_matches(rows[keep], cols[keep], dist[keep], QUAD_EDGE)


def quantization_step(grid: Grid, cap: float = 1.0) -> float:
    """Smallest nonzero gap between distinct valid elevations, capped at ``cap``."""
    distinct = np.unique(grid.values[grid.valid_mask])
    if distinct.size < 2:
        return cap
    return min(float(np.diff(distinct).min()), cap)


def default_tolerances(grid: Grid):
    """``(tol_elev, tol_edge)``: half the quantization step, and twice that."""
    tol_elev = quantization_step(grid) / 2.0
    return tol_elev, 2.0 * tol_elev
