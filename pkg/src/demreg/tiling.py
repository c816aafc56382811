"""Split a grid into standalone child tiles and join them back."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import GapOrOverlap, InconsistentCellsize, InvalidTileSize
from .grid_io import Grid, GridHeader, write_grid

__all__ = ["TileSet", "partition", "assemble", "write_tiles", "tile_filename"]


@dataclass(frozen=True)
class TileSet:
    """Tiles in row-major tile order.

    ``grid_shape`` is ``(tiles down, tiles across)``; edge tiles may be
    smaller than the nominal ``tile_rows`` x ``tile_cols``.
    """

    tiles: tuple
    tile_rows: int
    tile_cols: int
    grid_shape: tuple

    def __iter__(self):
        return iter(self.tiles)

    def __len__(self):
        return len(self.tiles)

    def tile(self, i, j):
        return self.tiles[i * self.grid_shape[1] + j]


def partition(grid: Grid, tile_rows: int, tile_cols: int) -> TileSet:
    h = grid.header
    if not (1 <= tile_rows <= h.nrows and 1 <= tile_cols <= h.ncols):
        raise InvalidTileSize(
            f"tile size {tile_rows}x{tile_cols} must lie within 1..{h.nrows} x 1..{h.ncols}")
    down = math.ceil(h.nrows / tile_rows)
    across = math.ceil(h.ncols / tile_cols)
    tiles = []
    for i in range(down):
        r0, r1 = i * tile_rows, min((i + 1) * tile_rows, h.nrows)
        for j in range(across):
            c0, c1 = j * tile_cols, min((j + 1) * tile_cols, h.ncols)
            header = GridHeader(
                ncols=c1 - c0,
                nrows=r1 - r0,
                xllcorner=h.xllcorner + c0 * h.cellsize,
                yllcorner=h.yllcorner + (h.nrows - r1) * h.cellsize,
                cellsize=h.cellsize,
                nodata_value=h.nodata_value,
            )
            tiles.append(Grid(header, grid.values[r0:r1, c0:c1]))
    return TileSet(tuple(tiles), tile_rows, tile_cols, (down, across))


def _cell_offset(value, origin, cellsize, what):
    steps = (value - origin) / cellsize
    k = round(steps)
    if not math.isclose(steps, k, abs_tol=1e-6):
        raise GapOrOverlap(f"{what} offset {steps!r} is not a whole number of cells")
    return k


def assemble(tiles) -> Grid:
    """Rebuild the parent grid from tiles located by their georeference.

    The output nodata sentinel is that of the first tile; other tiles'
    nodata cells are translated to it.
    """
    tiles = list(tiles)
    if not tiles:
        raise GapOrOverlap("no tiles to assemble")
    first = tiles[0].header
    for t in tiles[1:]:
        if not math.isclose(t.header.cellsize, first.cellsize, rel_tol=1e-12):
            raise InconsistentCellsize(
                f"cellsize {t.header.cellsize!r} differs from {first.cellsize!r}")
    cs = first.cellsize

    # origin tiles carry the exact parent corners; use them verbatim
    west = min(tiles, key=lambda t: t.header.xllcorner).header.xllcorner
    south = min(tiles, key=lambda t: t.header.yllcorner).header.yllcorner
    top = max(t.header.top for t in tiles)

    placed = []
    for t in tiles:
        c0 = _cell_offset(t.header.xllcorner, west, cs, "column")
        r0 = _cell_offset(top, t.header.top, cs, "row")
        placed.append((r0, c0, t))
    nrows = max(r0 + t.nrows for r0, _, t in placed)
    ncols = max(c0 + t.ncols for _, c0, t in placed)

    cover = np.zeros((nrows, ncols), dtype=np.int64)
    values = np.full((nrows, ncols), first.nodata_value)
    for r0, c0, t in placed:
        cover[r0:r0 + t.nrows, c0:c0 + t.ncols] += 1
        block = np.where(t.valid_mask, t.values, first.nodata_value)
        values[r0:r0 + t.nrows, c0:c0 + t.ncols] = block
    if (cover != 1).any():
        kind = "overlap" if (cover > 1).any() else "gap"
        raise GapOrOverlap(f"tiles do not exactly cover a rectangle ({kind} detected)")

    header = GridHeader(ncols, nrows, west, south, cs, first.nodata_value)
    return Grid(header, values)


def tile_filename(stem: str, i: int, j: int) -> str:
    return f"{stem}_r{i}_c{j}.asc"


def write_tiles(tileset: TileSet, out_dir, stem: str):
    """Write every tile as its own ASCII grid; returns the written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    across = tileset.grid_shape[1]
    paths = []
    for k, tile in enumerate(tileset.tiles):
        path = out_dir / tile_filename(stem, k // across, k % across)
        write_grid(tile, path)
        paths.append(path)
    return paths
