import numpy as np
import pytest

from conftest import random_grid
from demreg.exceptions import GapOrOverlap, InconsistentCellsize, InvalidTileSize
from demreg.grid_io import Grid, cell_to_geo, read_grid
from demreg.tiling import assemble, partition, write_tiles


def test_four_by_four_into_two_by_two_corners():
    g = Grid.from_array(np.arange(16.0).reshape(4, 4), xllcorner=100.0, yllcorner=200.0,
                        cellsize=10.0)
    ts = partition(g, 2, 2)
    assert len(ts) == 4 and ts.grid_shape == (2, 2)
    assert all(t.shape == (2, 2) for t in ts)
    assert ts.tile(1, 0).header.yllcorner == 200.0
    assert ts.tile(0, 0).header.yllcorner == 220.0
    assert ts.tile(0, 1).header.xllcorner == 120.0
    # each tile's cell centres coincide with the parent's
    for i in range(2):
        for j in range(2):
            t = ts.tile(i, j)
            for r in range(2):
                for c in range(2):
                    assert cell_to_geo(t.header, r, c) == cell_to_geo(g.header, 2 * i + r, 2 * j + c)
                    assert t.values[r, c] == g.values[2 * i + r, 2 * j + c]


def test_identity_partition():
    g = random_grid(2, 5, 7)
    ts = partition(g, 5, 7)
    assert len(ts) == 1
    assert ts.tiles[0] == g


def test_ragged_edges():
    g = random_grid(3, 5, 5)
    ts = partition(g, 2, 2)
    assert len(ts) == 9 and ts.grid_shape == (3, 3)
    assert ts.tile(2, 2).shape == (1, 1)
    assert ts.tile(0, 2).shape == (2, 1)
    assert ts.tile(2, 0).shape == (1, 2)
    assert sum(t.values.size for t in ts) == 25


@pytest.mark.parametrize("size", [(0, 1), (1, 0), (6, 1), (1, 6)])
def test_invalid_tile_size(size):
    with pytest.raises(InvalidTileSize):
        partition(random_grid(0, 5, 5), *size)


def test_assemble_inverts_partition_6x6():
    g = random_grid(6, 6, 6, nodata_frac=0.2)
    assert assemble(partition(g, 2, 2)) == g


def test_assemble_single_tile():
    g = random_grid(9, 3, 4)
    assert assemble([g]) == g


def test_overlapping_tiles_rejected():
    a = Grid.from_array(np.ones((2, 2)), xllcorner=0, yllcorner=0)
    b = Grid.from_array(np.ones((2, 2)), xllcorner=1, yllcorner=0)  # shares a column with a
    with pytest.raises(GapOrOverlap):
        assemble([a, b])


def test_gap_rejected():
    a = Grid.from_array(np.ones((2, 2)), xllcorner=0, yllcorner=0)
    b = Grid.from_array(np.ones((2, 2)), xllcorner=3, yllcorner=0)
    with pytest.raises(GapOrOverlap):
        assemble([a, b])


def test_inconsistent_cellsize():
    a = Grid.from_array(np.ones((2, 2)), cellsize=1.0)
    b = Grid.from_array(np.ones((2, 2)), xllcorner=2, cellsize=2.0)
    with pytest.raises(InconsistentCellsize):
        assemble([a, b])


def test_assemble_ignores_tile_order():
    g = random_grid(4, 7, 5)
    tiles = list(partition(g, 3, 2))
    assert assemble(tiles[::-1]) == g


def test_write_tiles_names(tmp_path):
    g = random_grid(5, 4, 4)
    paths = write_tiles(partition(g, 2, 2), tmp_path, "dem")
    assert sorted(p.name for p in paths) == [
        "dem_r0_c0.asc", "dem_r0_c1.asc", "dem_r1_c0.asc", "dem_r1_c1.asc"]
    assert assemble([read_grid(p) for p in paths]) == g
