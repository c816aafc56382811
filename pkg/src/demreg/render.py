"""Dynamic colour coding of a grid into an 8-bit RGB image (binary PPM)."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import AllNodata
from .grid_io import Grid

__all__ = ["ColorRamp", "HYPSOMETRIC", "render_grid", "to_ppm", "render_ppm", "write_ppm"]

# absorbs representation error so exact .5 channel values always round up
_ROUND_EPS = 1e-9


@dataclass(frozen=True)
class ColorRamp:
    stops: tuple  # ((position, (r, g, b)), ...)
    nodata_color: tuple = (120, 120, 120)

    def __post_init__(self):
        positions = [p for p, _ in self.stops]
        if len(positions) < 2 or positions[0] != 0.0 or positions[-1] != 1.0:
            raise ValueError("ramp must start at 0 and end at 1 with at least two stops")
        if any(b <= a for a, b in zip(positions, positions[1:])):
            raise ValueError("ramp positions must be strictly increasing")
        for _, rgb in self.stops:
            if len(rgb) != 3 or not all(0 <= ch <= 255 for ch in rgb):
                raise ValueError(f"invalid 8-bit colour {rgb!r}")

    def colors(self, u):
        """RGB rows for positions ``u`` in [0, 1], rounded half-up."""
        u = np.clip(np.asarray(u, dtype=np.float64), 0.0, 1.0)
        positions = np.array([p for p, _ in self.stops])
        rgb = np.array([c for _, c in self.stops], dtype=np.float64)
        k = np.clip(np.searchsorted(positions, u, side="right") - 1, 0, len(positions) - 2)
        t = (u - positions[k]) / (positions[k + 1] - positions[k])
        mixed = rgb[k] + (rgb[k + 1] - rgb[k]) * t[..., None]
        return np.floor(mixed + 0.5 + _ROUND_EPS).astype(np.uint8)


HYPSOMETRIC = ColorRamp((
    (0.0, (46, 110, 60)),
    (0.35, (222, 214, 130)),
    (0.70, (140, 90, 50)),
    (1.0, (250, 250, 250)),
))


def render_grid(grid: Grid, ramp: ColorRamp = HYPSOMETRIC) -> np.ndarray:
    """``(nrows, ncols, 3)`` uint8 image scaled to the grid's own valid range."""
    ok = grid.valid_mask
    if not ok.any():
        raise AllNodata("grid has no valid cells to render")
    z = grid.values
    zmin, zmax = z[ok].min(), z[ok].max()
    image = np.empty(grid.shape + (3,), dtype=np.uint8)
    image[...] = ramp.nodata_color
    if zmax == zmin:
        image[ok] = ramp.stops[0][1]
    else:
        image[ok] = ramp.colors((z[ok] - zmin) / (zmax - zmin))
    return image


def to_ppm(image: np.ndarray) -> bytes:
    height, width = image.shape[:2]
    return f"P6\n{width} {height}\n255\n".encode("ascii") + np.ascontiguousarray(image).tobytes()


def render_ppm(grid: Grid, ramp: ColorRamp = HYPSOMETRIC) -> bytes:
    return to_ppm(render_grid(grid, ramp))


def write_ppm(grid: Grid, path, ramp: ColorRamp = HYPSOMETRIC):
    Path(path).write_bytes(render_ppm(grid, ramp))
