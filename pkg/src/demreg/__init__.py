"""Control-point registration of ASCII-grid digital elevation models."""

__version__ = "0.1.0"

from .constellation import (
    Correspondence,
    ParentGraph,
    Transform,
    build_parent_graph,
    estimate_transform,
    find_correspondence,
)
from .control_points import (
    CandidateMatch,
    ControlPoint,
    QuadSignature,
    direct_match,
    load_control_points,
    quad_edge_match,
    quad_signature,
)
from .estimator import DEMRegistration
from .grid_io import Grid, GridHeader, cell_to_geo, geo_to_cell, parse_grid, serialize_grid
from .metrics import ErrorReport, error_report
from .registration import MergePolicy, merge_grids
from .render import ColorRamp, HYPSOMETRIC, render_grid
from .synth import SynthSpec, derive_candidate, generate_terrain
from .tiling import TileSet, assemble, partition

__all__ = [
    "Grid", "GridHeader", "parse_grid", "serialize_grid", "cell_to_geo", "geo_to_cell",
    "TileSet", "partition", "assemble",
    "ControlPoint", "CandidateMatch", "QuadSignature", "load_control_points", "direct_match",
    "quad_signature", "quad_edge_match",
    "Transform", "ParentGraph", "Correspondence", "build_parent_graph", "find_correspondence",
    "estimate_transform",
    "DEMRegistration", "MergePolicy", "merge_grids",
    "ErrorReport", "error_report",
    "ColorRamp", "HYPSOMETRIC", "render_grid",
    "SynthSpec", "generate_terrain", "derive_candidate",
]
