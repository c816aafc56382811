"""Command line interface: ``demreg {info,tile,register,synth,bench}``.

Exit codes: 0 success (metric degeneracies are reported as warnings),
1 unreadable or malformed input, 2 usage error, 3 no consistent match.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
import warnings
from pathlib import Path

from . import __version__
from .bench import format_table, run_bench
from .control_points import DIRECT, QUAD_EDGE, format_control_points, load_control_points
from .estimator import DEMRegistration
from .exceptions import (
    CellsizeMismatch,
    DemregError,
    DuplicateCell,
    DuplicateControlPointWarning,
    EmptyOverlapWarning,
    GridFormatError,
    InsufficientMatches,
    InvalidTileSize,
    MalformedLine,
    MetricDegeneracyWarning,
    NoOverlap,
    OutOfBounds,
    TooFewPoints,
)
from .grid_io import read_grid, write_grid
from .metrics import error_report
from .render import write_ppm
from .synth import SynthSpec, derive_candidate, generate_terrain, sample_control_points
from .tiling import partition, write_tiles
from .validation import resolve_threads

EXIT_OK, EXIT_PARSE, EXIT_USAGE, EXIT_MATCH = 0, 1, 2, 3

_USAGE_ERRORS = (InvalidTileSize, TooFewPoints, DuplicateCell, OutOfBounds, CellsizeMismatch,
                 ValueError)


def _pair(text):
    try:
        a, b = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two integers 'a,b', got {text!r}") from None
    return a, b


def _tile_size(text):
    parts = text.split(",")
    try:
        sizes = [int(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid tile size {text!r}") from None
    if len(sizes) == 1:
        return sizes[0], sizes[0]
    if len(sizes) == 2:
        return tuple(sizes)
    raise argparse.ArgumentTypeError(f"invalid tile size {text!r}")


def _dump_json(obj, path=None):
    text = json.dumps(obj, indent=2) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _read_grid(path):
    try:
        return read_grid(path)
    except GridFormatError as exc:
        raise type(exc)(f"{path}: {exc}") from None


# -- commands ----------------------------------------------------------------

def cmd_info(args):
    grid = _read_grid(args.dem)
    h = grid.header
    valid = grid.values[grid.valid_mask]
    print(f"file: {args.dem}")
    for key, value in h.to_dict().items():
        print(f"{key}: {value!r}" if isinstance(value, float) else f"{key}: {value}")
    print(f"cells: {h.nrows * h.ncols}")
    print(f"valid_cells: {valid.size}")
    if valid.size:
        print(f"min_elevation: {float(valid.min())!r}")
        print(f"max_elevation: {float(valid.max())!r}")
    else:
        print("min_elevation: absent")
        print("max_elevation: absent")
    return EXIT_OK


def cmd_tile(args):
    grid = _read_grid(args.dem)
    rows, cols = args.tile
    tiles = partition(grid, rows, cols)
    stem = args.stem or Path(args.dem).stem
    paths = write_tiles(tiles, args.out_dir, stem)
    print(f"wrote {len(paths)} tile(s) ({tiles.grid_shape[0]}x{tiles.grid_shape[1]}) "
          f"to {args.out_dir}")
    return EXIT_OK


def cmd_register(args):
    reference = _read_grid(args.reference)
    candidate = _read_grid(args.candidate)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DuplicateControlPointWarning)
        points = load_control_points(Path(args.points).read_text(encoding="utf-8"))
    duplicates = [str(w.message) for w in caught
                  if issubclass(w.category, DuplicateControlPointWarning)]

    est = DEMRegistration(method=args.method, tol_elev=args.tol_elev, tol_edge=args.tol_edge,
                          dist_tol=args.dist_tol, radius=args.radius,
                          min_support=args.min_support, policy=args.policy,
                          n_jobs=resolve_threads())
    report = {
        "inputs": {
            "reference": {"path": str(args.reference), "shape": list(reference.shape)},
            "candidate": {"path": str(args.candidate), "shape": list(candidate.shape)},
            "points": {"path": str(args.points), "count": len(points)},
        },
        "method": args.method,
        "policy": args.policy,
        "tolerances": None,
        "candidate_counts": None,
        "correspondence": None,
        "error_report": None,
        "warnings": {
            "false_positives": None,
            "duplicate_points": len(duplicates),
            "skipped_points": [],
            "empty_overlap": False,
            "messages": list(duplicates),
        },
        "status": "ok",
    }

    try:
        est.fit(reference, candidate, points)
    except InsufficientMatches as exc:
        counts = [len(c) for c in est.candidates_]
        report.update(tolerances=est.tolerances_, candidate_counts=counts,
                      status="insufficient_matches")
        report["warnings"]["false_positives"] = sum(counts)
        report["warnings"]["skipped_points"] = est.skipped_points_
        report["warnings"]["messages"].append(str(exc))
        _dump_json(report, args.out_report)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MATCH

    corr = est.correspondence_
    report.update(tolerances=est.tolerances_,
                  candidate_counts=[len(c) for c in est.candidates_],
                  correspondence=corr.to_dict())
    report["warnings"]["false_positives"] = corr.false_positives
    report["warnings"]["skipped_points"] = est.skipped_points_

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        merged = est.merge(candidate)
        try:
            report["error_report"] = error_report(reference, est.transform(candidate)).to_dict()
        except NoOverlap as exc:
            warnings.warn(str(exc), MetricDegeneracyWarning)
    for w in caught:
        if issubclass(w.category, EmptyOverlapWarning):
            report["warnings"]["empty_overlap"] = True
        report["warnings"]["messages"].append(str(w.message))

    if args.out_dem:
        write_grid(merged, args.out_dem)
    if args.out_render:
        write_ppm(merged, args.out_render)
    _dump_json(report, args.out_report)
    t = est.transform_
    print(f"offset ({t.drow}, {t.dcol}) support {t.support}/{len(points)}", file=sys.stderr)
    return EXIT_OK


def cmd_synth(args):
    spec = SynthSpec(args.seed, args.rows, args.cols, args.base, args.amplitude, args.roughness)
    reference = generate_terrain(spec)
    drow, dcol = args.offset
    candidate, truth = derive_candidate(reference, drow, dcol, args.sigma, args.bias, args.seed)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_grid(reference, out / "reference.asc")
    write_grid(candidate, out / "candidate.asc")
    record = {"offset": [truth.drow, truth.dcol], "bias": args.bias, "sigma": args.sigma,
              "seed": args.seed, "rows": args.rows, "cols": args.cols}
    if args.points:
        points = sample_control_points(reference, args.points, args.seed, candidate, truth)
        (out / "points.csv").write_text(format_control_points(p for p, _ in points),
                                        encoding="utf-8")
        record["points"] = args.points
    _dump_json(record, out / "truth.json")
    print(f"wrote synthetic pair to {out}")
    return EXIT_OK


def cmd_bench(args):
    seeds = list(range(args.seed, args.seed + args.seeds))
    result = run_bench(seeds, n_jobs=resolve_threads(), offsets=args.offset, size=args.size,
                       n_points=args.points, sigma=args.sigma, max_offset=args.max_offset,
                       quantize_step=args.quantize, decoys=args.decoys)
    sys.stdout.write(format_table(result))
    if args.out_report:
        _dump_json(result, args.out_report)
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="demreg", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("info", help="summarise an ASCII grid")
    p.add_argument("dem")
    p.set_defaults(func=cmd_info)

    p = sub.add_parser("tile", help="split an ASCII grid into child tiles")
    p.add_argument("dem")
    p.add_argument("--tile", type=_tile_size, default=(512, 512), metavar="ROWS[,COLS]")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--stem", default=None, help="tile file prefix (default: input stem)")
    p.set_defaults(func=cmd_tile)

    p = sub.add_parser("register", help="register a candidate DEM onto a reference DEM")
    p.add_argument("reference")
    p.add_argument("candidate")
    p.add_argument("points", help="control points, one 'lat,lon,elevation' per line")
    p.add_argument("--method", choices=(DIRECT, QUAD_EDGE), default=QUAD_EDGE)
    p.add_argument("--tol-elev", type=float, default=None)
    p.add_argument("--tol-edge", type=float, default=None)
    p.add_argument("--dist-tol", type=float, default=None)
    p.add_argument("--radius", type=int, default=1)
    p.add_argument("--min-support", type=int, default=None)
    p.add_argument("--policy", choices=("reference", "candidate", "average"),
                   default="reference")
    p.add_argument("--out-dem")
    p.add_argument("--out-render")
    p.add_argument("--out-report", help="report JSON path (default: stdout)")
    p.set_defaults(func=cmd_register)

    p = sub.add_parser("synth", help="write a synthetic reference/candidate pair")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rows", type=int, default=128)
    p.add_argument("--cols", type=int, default=128)
    p.add_argument("--base", type=float, default=0.0)
    p.add_argument("--amplitude", type=float, default=1000.0)
    p.add_argument("--roughness", type=float, default=0.5)
    p.add_argument("--offset", type=_pair, default=(0, 0), metavar="DROW,DCOL")
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--bias", type=float, default=0.0)
    p.add_argument("--points", type=int, default=40, help="control points to sample (0: none)")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("bench", help="compare direct and quad-edge matching")
    p.add_argument("--seeds", type=int, default=20, help="number of seeds")
    p.add_argument("--seed", type=int, default=0, help="first seed")
    p.add_argument("--size", type=int, default=128)
    p.add_argument("--offset", type=_pair, action="append", metavar="DROW,DCOL",
                   help="fixed offset; repeat to cycle over seeds (default: random)")
    p.add_argument("--max-offset", type=int, default=8)
    p.add_argument("--points", type=int, default=40)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--quantize", type=float, default=None, metavar="STEP")
    p.add_argument("--decoys", type=int, default=0)
    p.add_argument("--out-report")
    p.set_defaults(func=cmd_bench)
    return parser


_NEGATIVE_PAIR = re.compile(r"^-\d+,-?\d+$")


def _join_negative_pairs(argv):
    # argparse reads "-7,4" as an option; glue it to its flag instead
    out = []
    for token in argv:
        if out and out[-1] == "--offset" and _NEGATIVE_PAIR.match(token):
            out[-1] = f"--offset={token}"
        else:
            out.append(token)
    return out


def main(argv=None):
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_join_negative_pairs(argv))
    try:
        return args.func(args)
    except (GridFormatError, MalformedLine) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except _USAGE_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InsufficientMatches as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MATCH
    except DemregError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
