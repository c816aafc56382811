"""Scikit-learn style estimator for control-point DEM registration."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .constellation import build_parent_graph, estimate_transform, find_correspondence
from .control_points import (
    DIRECT,
    QUAD_EDGE,
    default_tolerances,
    direct_match,
    quad_edge_match,
    quad_signature,
    signature_field,
)
from .exceptions import BorderCell, NodataInRing
from .grid_io import geo_to_cell
from .metrics import error_report
from .registration import MergePolicy, merge_grids, place_candidate
from .validation import check_control_points, check_grid, resolve_threads

__all__ = ["DEMRegistration"]


class DEMRegistration(BaseEstimator):
    """Register a candidate DEM onto a reference DEM from control points.

    Parameters
    ----------
    method : {"quad-edge", "direct"}, default="quad-edge"
        How candidate cells are found for each control point.  ``"direct"``
        matches on elevation alone; ``"quad-edge"`` additionally compares
        the ring of neighbour-minus-centre differences.
    tol_elev, tol_edge : float or None
        Elevation and ring-signature tolerances in metres.  ``None`` derives
        them from the candidate's elevation quantization step.
    dist_tol : float or None
        Allowed edge-length mismatch in map units; ``None`` means
        1.5 cells.
    radius : int, default=1
        Ring radius for ``"quad-edge"`` signatures.
    min_support : int or None
        Fewest agreeing control points accepted; ``None`` means
        ``max(3, ceil(n / 4))``.
    policy : {"reference", "candidate", "average"}, default="reference"
        How :meth:`merge` resolves cells valid in both grids.
    n_jobs : int or None
        Threads used for the per-point search.  ``None`` reads
        ``DEMREG_THREADS``; 0 or -1 uses every CPU.  Results never depend
        on it.

    Attributes
    ----------
    transform_ : Transform
        Recovered shift, reference cell = candidate cell + (drow, dcol).
    correspondence_ : Correspondence
    parent_graph_ : ParentGraph
    candidates_ : list of list of CandidateMatch
        Every candidate found per control point, false positives included.
    tolerances_ : dict
    skipped_points_ : list of int
        Points with no usable reference signature (quad-edge only).
    """

    def __init__(self, method=QUAD_EDGE, tol_elev=None, tol_edge=None, dist_tol=None,
                 radius=1, min_support=None, policy="reference", n_jobs=None):
        self.method = method
        self.tol_elev = tol_elev
        self.tol_edge = tol_edge
        self.dist_tol = dist_tol
        self.radius = radius
        self.min_support = min_support
        self.policy = policy
        self.n_jobs = n_jobs

    def _validate_params(self):
        if self.method not in (DIRECT, QUAD_EDGE):
            raise ValueError(f"method must be 'direct' or 'quad-edge', got {self.method!r}")
        for name in ("tol_elev", "tol_edge", "dist_tol"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ValueError(f"{name} must be >= 0")
        if int(self.radius) != self.radius or self.radius < 1:
            raise ValueError("radius must be a positive integer")
        MergePolicy.coerce(self.policy)

    def fit(self, reference, candidate, control_points):
        """Find the shift that carries ``candidate`` onto ``reference``.

        Raises :class:`~demreg.exceptions.InsufficientMatches` when no
        consistent set reaches ``min_support``; ``candidates_`` and
        ``parent_graph_`` are still set for diagnostics.
        """
        self._validate_params()
        reference = check_grid(reference, "reference")
        candidate = check_grid(candidate, "candidate")
        points = check_control_points(control_points)

        cells = [geo_to_cell(reference.header, p.lon, p.lat) for p in points]
        self.parent_graph_ = build_parent_graph(zip(points, cells), reference.header.cellsize)

        auto_elev, _ = default_tolerances(candidate)
        tol_elev = auto_elev if self.tol_elev is None else float(self.tol_elev)
        tol_edge = 2.0 * tol_elev if self.tol_edge is None else float(self.tol_edge)
        dist_tol = (1.5 * reference.header.cellsize if self.dist_tol is None
                    else float(self.dist_tol))
        self.tolerances_ = {"tol_elev": tol_elev, "tol_edge": tol_edge, "dist_tol": dist_tol,
                            "radius": int(self.radius)}

        self.skipped_points_ = []
        if self.method == DIRECT:
            def search(k):
                return direct_match(candidate, points[k], tol_elev)
        else:
            field = signature_field(candidate, self.radius)

            def search(k):
                try:
                    ref_sig = quad_signature(reference, *cells[k], radius=self.radius)
                except (BorderCell, NodataInRing):
                    return None
                return quad_edge_match(candidate, points[k], ref_sig, tol_elev, tol_edge,
                                       radius=self.radius, field=field)

        workers = resolve_threads(self.n_jobs)
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                found = list(pool.map(search, range(len(points))))
        else:
            found = [search(k) for k in range(len(points))]
        self.skipped_points_ = [k for k, f in enumerate(found) if f is None]
        self.candidates_ = [f or [] for f in found]

        self.correspondence_ = find_correspondence(
            self.parent_graph_, self.candidates_, dist_tol=dist_tol, min_support=self.min_support)
        self.transform_ = estimate_transform(self.correspondence_)
        self.reference_ = reference
        return self

    def transform(self, candidate):
        """``candidate`` re-georeferenced into the reference frame."""
        check_is_fitted(self, "transform_")
        return place_candidate(self.reference_, check_grid(candidate, "candidate"),
                               self.transform_)

    def fit_transform(self, reference, candidate, control_points):
        return self.fit(reference, candidate, control_points).transform(candidate)

    def merge(self, candidate):
        """Mosaic of the reference and the registered candidate."""
        check_is_fitted(self, "transform_")
        return merge_grids(self.reference_, check_grid(candidate, "candidate"),
                           self.transform_, self.policy)

    def error_report(self, candidate):
        """Error matrix of the registered candidate against the reference."""
        return error_report(self.reference_, self.transform(candidate))

    def score(self, candidate):
        """Negative overlap RMSE, so that higher is better."""
        return -self.error_report(candidate).rmse
