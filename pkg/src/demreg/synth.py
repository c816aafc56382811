"""Deterministic synthetic terrains and candidate DEMs with known shifts."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constellation import Transform
from .control_points import ControlPoint, signature_field
from .exceptions import EmptyWindow
from .grid_io import DEFAULT_NODATA, Grid, GridHeader, cell_to_geo

__all__ = [
    "SynthSpec",
    "generate_terrain",
    "derive_candidate",
    "cell_noise",
    "quantize",
    "sample_control_points",
]

SRTM_CELLSIZE = 90.0
# elevations are base + amplitude * k / 2**20, so adding whole or dyadic
# offsets (e.g. a 2 m bias) is exact in float64
_U_BITS = 20

_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)


@dataclass(frozen=True)
class SynthSpec:
    seed: int
    rows: int
    cols: int
    base_elevation: float = 0.0
    amplitude: float = 1000.0
    roughness: float = 0.5

    def __post_init__(self):
        if self.rows < 3 or self.cols < 3:
            raise ValueError("rows and cols must be >= 3")
        if not self.amplitude > 0:
            raise ValueError("amplitude must be > 0")
        if not 0 < self.roughness < 1:
            raise ValueError("roughness must lie in (0, 1)")


def _diamond_square(size, roughness, rng):
    lattice = np.zeros((size, size))
    lattice[:: size - 1, :: size - 1] = rng.uniform(-1.0, 1.0, (2, 2))
    step, scale = size - 1, 1.0
    while step > 1:
        half = step // 2
        avg = (lattice[:-1:step, :-1:step] + lattice[step::step, :-1:step]
               + lattice[:-1:step, step::step] + lattice[step::step, step::step]) / 4.0
        lattice[half::step, half::step] = avg + scale * rng.uniform(-1.0, 1.0, avg.shape)

        padded = np.pad(lattice, half, constant_values=np.nan)
        for rows, cols in ((np.arange(0, size, step), np.arange(half, size, step)),
                           (np.arange(half, size, step), np.arange(0, size, step))):
            neighbours = np.stack([
                padded[np.ix_(rows, cols + half)],
                padded[np.ix_(rows + 2 * half, cols + half)],
                padded[np.ix_(rows + half, cols)],
                padded[np.ix_(rows + half, cols + 2 * half)],
            ])
            avg = np.nanmean(neighbours, axis=0)
            lattice[np.ix_(rows, cols)] = avg + scale * rng.uniform(-1.0, 1.0, avg.shape)
        step, scale = half, scale * roughness
    return lattice


def generate_terrain(spec: SynthSpec) -> Grid:
    """Diamond-square terrain cropped to ``rows x cols``, SRTM-like 90 m cells.

    ``roughness`` is the per-level decay of the random displacement.  The
    field is rescaled so elevations span exactly
    ``[base_elevation, base_elevation + amplitude]``.
    """
    size = 2 ** max(1, math.ceil(math.log2(max(spec.rows, spec.cols) - 1))) + 1
    rng = np.random.default_rng(int(spec.seed) & 0xFFFFFFFFFFFFFFFF)
    field = _diamond_square(size, spec.roughness, rng)[: spec.rows, : spec.cols]
    lo, hi = field.min(), field.max()
    u = (field - lo) / (hi - lo) if hi > lo else np.zeros_like(field)
    u = np.round(u * 2.0 ** _U_BITS) / 2.0 ** _U_BITS
    values = spec.base_elevation + spec.amplitude * u

    nodata = DEFAULT_NODATA
    if spec.base_elevation <= nodata <= spec.base_elevation + spec.amplitude:
        nodata = spec.base_elevation - 1.0
    header = GridHeader(spec.cols, spec.rows, 0.0, 0.0, SRTM_CELLSIZE, nodata)
    return Grid(header, values)


def _splitmix64(x):
    x = (x + np.uint64(0x9E3779B97F4A7C15)) & _MASK64
    x = ((x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)) & _MASK64
    x = ((x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)) & _MASK64
    return x ^ (x >> np.uint64(31))


def cell_noise(seed: int, rows, cols) -> np.ndarray:
    """Standard-normal noise keyed by ``(seed, row, col)``.

    Each cell's draw depends only on its own key, so any traversal order
    or slicing of the grid sees the same values.
    """
    rows = np.asarray(rows, dtype=np.int64).astype(np.uint64)
    cols = np.asarray(cols, dtype=np.int64).astype(np.uint64)
    key = _splitmix64(np.full(rows.shape, int(seed) & 0xFFFFFFFFFFFFFFFF, dtype=np.uint64))
    counter = ((rows << np.uint64(32)) | (cols & np.uint64(0xFFFFFFFF))) << np.uint64(1)
    a = _splitmix64(key ^ counter)
    b = _splitmix64(key ^ (counter | np.uint64(1)))
    u1 = ((a >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0 ** -53
    u2 = (b >> np.uint64(11)).astype(np.float64) * 2.0 ** -53
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def derive_candidate(grid: Grid, drow: int, dcol: int, noise_sigma: float = 0.0,
                     vertical_bias: float = 0.0, seed: int = 0):
    """Candidate DEM whose cell ``(r, c)`` shows source cell ``(r + drow, c + dcol)``.

    The candidate keeps the source's shape; cells whose source falls outside
    the grid are nodata.  Noise and bias touch valid cells only.  The header
    is georeferenced truthfully for the shifted window.  Returns the
    candidate and the ground-truth :class:`Transform` a registration should
    recover.
    """
    nr, nc = grid.shape
    if abs(drow) >= nr or abs(dcol) >= nc:
        raise EmptyWindow(f"offset ({drow}, {dcol}) leaves no overlap with a {nr}x{nc} grid")
    src = grid.values
    nodata = grid.nodata
    out = np.full((nr, nc), nodata)
    r0, r1 = max(0, -drow), min(nr, nr - drow)
    c0, c1 = max(0, -dcol), min(nc, nc - dcol)
    window = src[r0 + drow:r1 + drow, c0 + dcol:c1 + dcol]
    ok = window != nodata

    block = window.copy()
    if noise_sigma:
        rr, cc = np.meshgrid(np.arange(r0, r1), np.arange(c0, c1), indexing="ij")
        block = block + noise_sigma * cell_noise(seed, rr, cc)
    if vertical_bias:
        block = block + vertical_bias
    out[r0:r1, c0:c1] = np.where(ok, block, nodata)
    ok_out = np.zeros((nr, nc), dtype=bool)
    ok_out[r0:r1, c0:c1] = ok
    if (out[ok_out] == nodata).any():
        raise ValueError("noise or bias produced the nodata sentinel; choose another seed")

    h = grid.header
    header = GridHeader(nc, nr, h.xllcorner + dcol * h.cellsize,
                        h.yllcorner - drow * h.cellsize, h.cellsize, nodata)
    return Grid(header, out), Transform(drow, dcol, 0)


def quantize(grid: Grid, step: float = 1.0) -> Grid:
    """Round valid elevations to multiples of ``step``, halves rounding up."""
    q = np.floor(grid.values / step + 0.5) * step
    return grid.with_values(np.where(grid.valid_mask, q, grid.nodata))


def _strict_extrema(z, ok):
    nr, nc = z.shape
    is_max = np.zeros((nr, nc), dtype=bool)
    is_min = np.zeros((nr, nc), dtype=bool)
    if nr < 3 or nc < 3:
        return is_max
    c = z[1:-1, 1:-1]
    mx = np.ones_like(c, dtype=bool)
    mn = np.ones_like(c, dtype=bool)
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            if dr == dc == 0:
                continue
            nb = z[1 + dr:nr - 1 + dr, 1 + dc:nc - 1 + dc]
            mx &= c > nb
            mn &= c < nb
    is_max[1:-1, 1:-1] = mx
    is_min[1:-1, 1:-1] = mn
    return (is_max | is_min) & ok


def sample_control_points(reference: Grid, n: int, seed: int = 0, candidate: Grid | None = None,
                          transform: Transform | None = None, radius: int = 1):
    """Pick ``n`` control points the way a careful operator would.

    Strict local extrema of the reference with distinct elevations are
    preferred; other cells fill in when there are too few.  Every chosen
    cell has a complete nodata-free ring of ``radius`` in the reference and,
    when ``candidate`` and ``transform`` are given, at the matching
    candidate cell too.  Returns ``[(ControlPoint, (row, col)), ...]``.
    """
    _, eligible = signature_field(reference, radius)
    if candidate is not None:
        _, cand_ok = signature_field(candidate, radius)
        dr, dc = transform.drow, transform.dcol
        shifted = np.zeros_like(eligible)
        nr, nc = reference.shape
        r0, r1 = max(0, dr), min(nr, dr + candidate.nrows)
        c0, c1 = max(0, dc), min(nc, dc + candidate.ncols)
        if r0 < r1 and c0 < c1:
            shifted[r0:r1, c0:c1] = cand_ok[r0 - dr:r1 - dr, c0 - dc:c1 - dc]
        eligible &= shifted

    z = reference.values
    extrema = _strict_extrema(z, reference.valid_mask) & eligible
    rng = np.random.default_rng(int(seed) & 0xFFFFFFFFFFFFFFFF)
    chosen = []
    used_values = set()
    for pool in (np.flatnonzero(extrema), np.flatnonzero(eligible & ~extrema)):
        for flat in rng.permutation(pool):
            if len(chosen) == n:
                break
            value = float(z.flat[flat])
            if value in used_values:
                continue
            used_values.add(value)
            chosen.append(divmod(int(flat), reference.ncols))
    if len(chosen) < n:
        raise ValueError(f"only {len(chosen)} eligible control points available, asked for {n}")
    out = []
    for row, col in chosen:
        x, y = cell_to_geo(reference.header, row, col)
        out.append((ControlPoint(y, x, float(z[row, col])), (row, col)))
    return out
