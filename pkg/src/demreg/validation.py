"""Input checks shared by the estimator and the command line."""

from __future__ import annotations

import os
from numbers import Integral

import numpy as np

from .control_points import ControlPoint
from .grid_io import Grid

THREADS_ENV = "DEMREG_THREADS"


def check_grid(X, name="grid") -> Grid:
    """Return ``X`` as a :class:`Grid`.

    A bare 2-D array is wrapped with a unit-cell header anchored at the
    origin.
    """
    if isinstance(X, Grid):
        return X
    try:
        arr = np.asarray(X, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise TypeError(f"{name} must be a Grid or a 2-D array of elevations") from exc
    if arr.ndim != 2 or min(arr.shape) < 1:
        raise ValueError(f"{name} must be 2-D and non-empty, got shape {arr.shape}")
    return Grid.from_array(arr)


def check_control_points(points) -> list:
    """Normalise control points to a list of :class:`ControlPoint`.

    Accepts ``ControlPoint`` objects, ``(lat, lon, elevation)`` triples or
    an ``(n, 3)`` array.
    """
    if isinstance(points, np.ndarray):
        if points.ndim != 2 or points.shape[1] != 3:
            raise ValueError(f"control point array must have shape (n, 3), got {points.shape}")
        return [ControlPoint(*map(float, row)) for row in points]
    out = []
    for p in points:
        if isinstance(p, ControlPoint):
            out.append(p)
        else:
            lat, lon, elev = p
            out.append(ControlPoint(float(lat), float(lon), float(elev)))
    if not all(np.isfinite(v) for p in out for v in p):
        raise ValueError("control points must be finite")
    return out


def resolve_threads(n_jobs=None) -> int:
    """Worker count: ``n_jobs`` if given, else ``$DEMREG_THREADS``; 0 or -1 means all CPUs."""
    if n_jobs is None:
        raw = os.environ.get(THREADS_ENV, "1").strip() or "1"
        try:
            n_jobs = int(raw)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if not isinstance(n_jobs, Integral):
        raise TypeError("n_jobs must be an integer")
    if n_jobs in (0, -1):
        return os.cpu_count() or 1
    if n_jobs < 0:
        raise ValueError("n_jobs must be >= -1")
    return int(n_jobs)
