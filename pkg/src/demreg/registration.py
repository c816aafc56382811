"""Place a candidate grid in the reference frame and merge the two."""

from __future__ import annotations

import enum
import math
import warnings

import numpy as np

from .constellation import Transform
from .exceptions import CellsizeMismatch, EmptyOverlapWarning
from .grid_io import Grid, GridHeader

__all__ = ["MergePolicy", "check_same_resolution", "place_candidate", "merge_grids"]


class MergePolicy(str, enum.Enum):
    REFERENCE = "reference"
    CANDIDATE = "candidate"
    AVERAGE = "average"

    @classmethod
    def coerce(cls, value):
        if isinstance(value, cls):
            return value
        aliases = {"reference-priority": "reference", "candidate-priority": "candidate"}
        return cls(aliases.get(value, value))


def check_same_resolution(a: GridHeader, b: GridHeader):
    if not math.isclose(a.cellsize, b.cellsize, rel_tol=1e-12):
        raise CellsizeMismatch(f"cellsize {b.cellsize!r} differs from {a.cellsize!r}")


def place_candidate(reference: Grid, candidate: Grid, transform: Transform) -> Grid:
    """Candidate re-georeferenced so that its cell (r, c) sits on reference
    cell (r + drow, c + dcol).

    Values are untouched apart from nodata, which is rewritten to the
    reference sentinel.
    """
    check_same_resolution(reference.header, candidate.header)
    ref = reference.header
    cs = ref.cellsize
    bottom = transform.drow + candidate.nrows  # exclusive, in reference rows
    header = GridHeader(
        ncols=candidate.ncols,
        nrows=candidate.nrows,
        xllcorner=ref.xllcorner + transform.dcol * cs,
        yllcorner=ref.yllcorner + (ref.nrows - bottom) * cs,
        cellsize=cs,
        nodata_value=ref.nodata_value,
    )
    values = np.where(candidate.valid_mask, candidate.values, ref.nodata_value)
    return Grid(header, values)


def merge_grids(reference: Grid, candidate: Grid, transform: Transform,
                policy="reference") -> Grid:
    """Mosaic of the reference and the shifted candidate over their union extent.

    Overlapping valid cells are resolved by ``policy``; a cell valid in only
    one source takes that source's value.  The output uses the reference's
    cellsize, nodata sentinel and georeference.
    """
    policy = MergePolicy.coerce(policy)
    check_same_resolution(reference.header, candidate.header)
    ref = reference.header
    dr, dc = transform.drow, transform.dcol
    r_min, r_max = min(0, dr), max(ref.nrows, dr + candidate.nrows)
    c_min, c_max = min(0, dc), max(ref.ncols, dc + candidate.ncols)
    nrows, ncols = r_max - r_min, c_max - c_min

    ref_win = (slice(-r_min, -r_min + ref.nrows), slice(-c_min, -c_min + ref.ncols))
    cand_win = (slice(dr - r_min, dr - r_min + candidate.nrows),
                slice(dc - c_min, dc - c_min + candidate.ncols))

    ref_vals = np.zeros((nrows, ncols))
    ref_ok = np.zeros((nrows, ncols), dtype=bool)
    ref_vals[ref_win] = reference.values
    ref_ok[ref_win] = reference.valid_mask
    cand_vals = np.zeros((nrows, ncols))
    cand_ok = np.zeros((nrows, ncols), dtype=bool)
    cand_vals[cand_win] = candidate.values
    cand_ok[cand_win] = candidate.valid_mask

    covered_ref = np.zeros((nrows, ncols), dtype=bool)
    covered_ref[ref_win] = True
    covered_cand = np.zeros((nrows, ncols), dtype=bool)
    covered_cand[cand_win] = True
    if not (covered_ref & covered_cand).any():
        warnings.warn("reference and candidate extents do not overlap", EmptyOverlapWarning,
                      stacklevel=2)

    out = np.full((nrows, ncols), ref.nodata_value)
    out[ref_ok] = ref_vals[ref_ok]
    only_cand = cand_ok & ~ref_ok
    out[only_cand] = cand_vals[only_cand]
    both = ref_ok & cand_ok
    if policy is MergePolicy.CANDIDATE:
        out[both] = cand_vals[both]
    elif policy is MergePolicy.AVERAGE:
        out[both] = (ref_vals[both] + cand_vals[both]) / 2.0

    header = GridHeader(
        ncols=ncols,
        nrows=nrows,
        xllcorner=ref.xllcorner + c_min * ref.cellsize,
        yllcorner=ref.yllcorner + (ref.nrows - r_max) * ref.cellsize,
        cellsize=ref.cellsize,
        nodata_value=ref.nodata_value,
    )
    return Grid(header, out)
