"""ESRI ASCII grid ("Arc ASCII") reading and writing.

Rows are kept in file order: row 0 is the northernmost row, while
``yllcorner`` references the southern edge.  The flip between the two
conventions lives only in :func:`cell_to_geo` and :func:`geo_to_cell`.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .exceptions import (
    CellCountMismatch,
    IndexOutOfRange,
    MalformedHeader,
    MalformedValue,
    NonFiniteValue,
    OutOfBounds,
)

__all__ = [
    "GridHeader",
    "Grid",
    "parse_grid",
    "serialize_grid",
    "read_grid",
    "write_grid",
    "cell_to_geo",
    "geo_to_cell",
    "format_number",
]

DEFAULT_NODATA = -9999.0

_HEADER_KEYS = ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "nodata_value")
_NUMBER = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?\Z")
_NONFINITE = re.compile(r"[+-]?(?:nan|inf|infinity)\Z", re.IGNORECASE)
_INTEGER = re.compile(r"\+?\d+\Z")


@dataclass(frozen=True)
class GridHeader:
    ncols: int
    nrows: int
    xllcorner: float = 0.0
    yllcorner: float = 0.0
    cellsize: float = 1.0
    nodata_value: float = DEFAULT_NODATA

    def __post_init__(self):
        if int(self.ncols) != self.ncols or self.ncols < 1:
            raise ValueError(f"ncols must be a positive integer, got {self.ncols!r}")
        if int(self.nrows) != self.nrows or self.nrows < 1:
            raise ValueError(f"nrows must be a positive integer, got {self.nrows!r}")
        if not (math.isfinite(self.cellsize) and self.cellsize > 0):
            raise ValueError(f"cellsize must be finite and > 0, got {self.cellsize!r}")
        for name in ("xllcorner", "yllcorner", "nodata_value"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        object.__setattr__(self, "ncols", int(self.ncols))
        object.__setattr__(self, "nrows", int(self.nrows))
        for name in ("xllcorner", "yllcorner", "cellsize", "nodata_value"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    @property
    def top(self):
        """Map y of the northern edge."""
        return self.yllcorner + self.nrows * self.cellsize

    def to_dict(self):
        return {key: getattr(self, key) for key in _HEADER_KEYS}


class Grid:
    """Immutable georeferenced elevation raster.

    ``values`` is a read-only ``(nrows, ncols)`` float64 array.  Every entry
    is either finite or exactly the header's nodata sentinel.
    """

    __slots__ = ("header", "values")

    def __init__(self, header: GridHeader, values):
        arr = np.array(values, dtype=np.float64, copy=True)
        if arr.ndim == 1 and arr.size == header.ncols * header.nrows:
            arr = arr.reshape(header.nrows, header.ncols)
        if arr.shape != header.shape:
            raise ValueError(f"values shape {arr.shape} does not match header {header.shape}")
        bad = ~np.isfinite(arr)
        if bad.any():
            r, c = np.argwhere(bad)[0]
            raise NonFiniteValue(f"cell ({r}, {c}) holds non-finite value {arr[r, c]!r}")
        arr.flags.writeable = False
        object.__setattr__(self, "header", header)
        object.__setattr__(self, "values", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Grid is immutable")

    @classmethod
    def from_array(cls, values, xllcorner=0.0, yllcorner=0.0, cellsize=1.0,
                   nodata_value=DEFAULT_NODATA):
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError("expected a 2-D array")
        header = GridHeader(arr.shape[1], arr.shape[0], xllcorner, yllcorner,
                            cellsize, nodata_value)
        return cls(header, arr)

    @property
    def shape(self):
        return self.header.shape

    @property
    def nrows(self):
        return self.header.nrows

    @property
    def ncols(self):
        return self.header.ncols

    @property
    def nodata(self):
        return self.header.nodata_value

    @property
    def valid_mask(self):
        return self.values != self.header.nodata_value

    def with_values(self, values):
        return Grid(self.header, values)

    def with_header(self, **changes):
        return Grid(replace(self.header, **changes), self.values)

    def masked(self):
        """Values as a float array with NaN in nodata cells."""
        out = self.values.astype(np.float64, copy=True)
        out[~self.valid_mask] = np.nan
        return out

    def __eq__(self, other):
        if not isinstance(other, Grid):
            return NotImplemented
        return self.header == other.header and np.array_equal(self.values, other.values)

    __hash__ = None

    def __repr__(self):
        h = self.header
        return (f"Grid({h.nrows}x{h.ncols}, xll={h.xllcorner!r}, yll={h.yllcorner!r}, "
                f"cellsize={h.cellsize!r})")


def format_number(value: float) -> str:
    """Shortest round-tripping text for ``value``; integral values drop ``.0``."""
    value = float(value)
    if value.is_integer() and abs(value) < 1e16 and not (value == 0 and math.copysign(1, value) < 0):
        return str(int(value))
    return repr(value)


def _tokens(text):
    for lineno, line in enumerate(text.splitlines(), 1):
        for tok in line.split():
            yield lineno, tok


def _to_float(tok, lineno, error_cls):
    if _NUMBER.match(tok):
        value = float(tok)
        if not math.isfinite(value):
            raise NonFiniteValue(f"value {tok!r} overflows", lineno)
        return value
    if _NONFINITE.match(tok):
        raise NonFiniteValue(f"non-finite value {tok!r}", lineno)
    raise error_cls(f"not a number: {tok!r}", lineno)


def parse_grid(text: str) -> Grid:
    """Parse the text of an ASCII grid.

    Header keywords are matched case-insensitively and may be separated by
    any whitespace.  ``NODATA_value`` is optional and defaults to -9999.
    """
    tokens = list(_tokens(text))
    fields = {}
    pos = 0
    while pos < len(tokens) and tokens[pos][1][:1].isalpha() and not _NONFINITE.match(tokens[pos][1]):
        lineno, key = tokens[pos]
        key_l = key.lower()
        if key_l not in _HEADER_KEYS:
            raise MalformedHeader(f"unknown header keyword {key!r}", lineno)
        if key_l in fields:
            raise MalformedHeader(f"duplicate header keyword {key!r}", lineno)
        if pos + 1 >= len(tokens):
            raise MalformedHeader(f"missing value for {key!r}", lineno)
        vline, raw = tokens[pos + 1]
        if key_l in ("ncols", "nrows"):
            if not _INTEGER.match(raw) or int(raw) < 1:
                raise MalformedHeader(f"{key} must be a positive integer, got {raw!r}", vline)
            fields[key_l] = int(raw)
        else:
            try:
                fields[key_l] = _to_float(raw, vline, MalformedHeader)
            except NonFiniteValue as exc:
                raise MalformedHeader(f"{key} must be finite, got {raw!r}", vline) from exc
        pos += 2

    missing = [k for k in _HEADER_KEYS[:5] if k not in fields]
    if missing:
        lineno = tokens[pos][0] if pos < len(tokens) else None
        raise MalformedHeader(f"missing header keyword(s): {', '.join(missing)}", lineno)
    if fields["cellsize"] <= 0:
        raise MalformedHeader(f"cellsize must be > 0, got {fields['cellsize']!r}")
    fields.setdefault("nodata_value", DEFAULT_NODATA)
    header = GridHeader(**fields)

    payload = tokens[pos:]
    expected = header.ncols * header.nrows
    if len(payload) != expected:
        lineno = payload[expected][0] if len(payload) > expected else None
        raise CellCountMismatch(
            f"expected {expected} values for {header.nrows}x{header.ncols} grid, "
            f"found {len(payload)}", lineno)
    values = np.empty(expected, dtype=np.float64)
    for i, (lineno, tok) in enumerate(payload):
        values[i] = _to_float(tok, lineno, MalformedValue)
    return Grid(header, values.reshape(header.shape))


def serialize_grid(grid: Grid) -> str:
    """Canonical, byte-deterministic text form of ``grid``."""
    h = grid.header
    lines = [
        f"ncols {h.ncols}",
        f"nrows {h.nrows}",
        f"xllcorner {format_number(h.xllcorner)}",
        f"yllcorner {format_number(h.yllcorner)}",
        f"cellsize {format_number(h.cellsize)}",
        f"NODATA_value {format_number(h.nodata_value)}",
    ]
    nodata_token = format_number(h.nodata_value)
    for row in grid.values.tolist():
        lines.append(" ".join(nodata_token if v == h.nodata_value else repr(v) for v in row))
    return "\n".join(lines) + "\n"


def read_grid(path) -> Grid:
    return parse_grid(Path(path).read_text(encoding="ascii"))


def write_grid(grid: Grid, path):
    Path(path).write_text(serialize_grid(grid), encoding="ascii", newline="\n")


def cell_to_geo(header: GridHeader, row: int, col: int):
    """Map coordinates of the centre of cell ``(row, col)``."""
    if not (0 <= row < header.nrows and 0 <= col < header.ncols):
        raise IndexOutOfRange(f"cell ({row}, {col}) outside {header.nrows}x{header.ncols} grid")
    x = header.xllcorner + (col + 0.5) * header.cellsize
    y = header.yllcorner + (header.nrows - 1 - row + 0.5) * header.cellsize
    return x, y


def geo_to_cell(header: GridHeader, x: float, y: float):
    """Cell containing map point ``(x, y)``; points on a shared edge go to the smaller index."""
    u = (x - header.xllcorner) / header.cellsize
    v = (header.top - y) / header.cellsize
    if not (0 <= u <= header.ncols and 0 <= v <= header.nrows):
        raise OutOfBounds(f"point ({x!r}, {y!r}) lies outside the grid extent")
    col = max(0, math.ceil(u) - 1)
    row = max(0, math.ceil(v) - 1)
    return row, col
