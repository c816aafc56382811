"""Parent graph of reference control points and consistent sub-graph search.

Every (node, candidate) pair implies a whole-cell offset
``reference_cell - candidate_cell``.  Two pairs can sit in the same
consistent set only if they imply the same offset, and pairs sharing an
offset automatically preserve every parent edge length.  The maximum
consistent set is therefore the largest group of pairs that vote for one
offset, which is found in a single linear pass.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .exceptions import DuplicateCell, InsufficientMatches, TooFewPoints

__all__ = [
    "Transform",
    "ParentGraph",
    "Correspondence",
    "build_parent_graph",
    "min_support_for",
    "find_correspondence",
    "estimate_transform",
]


class Transform(NamedTuple):
    """Whole-cell shift: reference cell = candidate cell + (drow, dcol)."""

    drow: int
    dcol: int
    support: int = 0

    @property
    def offset(self):
        return (self.drow, self.dcol)


@dataclass(frozen=True)
class ParentGraph:
    nodes: tuple  # ((ControlPoint, (row, col)), ...)
    cellsize: float
    lengths: np.ndarray = field(repr=False, compare=False)

    @property
    def n(self):
        return len(self.nodes)

    @property
    def cells(self):
        return [cell for _, cell in self.nodes]

    @property
    def edges(self):
        """``[(i, j, length), ...]`` for every unordered pair ``i < j``."""
        n = self.n
        return [(i, j, float(self.lengths[i, j])) for i in range(n) for j in range(i + 1, n)]

    def edge_length(self, i, j):
        return float(self.lengths[i, j])


@dataclass(frozen=True)
class Correspondence:
    pairs: dict  # node index -> CandidateMatch
    translation: Transform
    max_edge_error: float
    n_candidates: int = 0

    @property
    def support(self):
        return len(self.pairs)

    @property
    def false_positives(self):
        """Candidates rejected because they disagree with the consensus."""
        return self.n_candidates - self.support

    def to_dict(self):
        return {
            "pairs": [
                {"node": i, "row": m.row, "col": m.col, "residual": m.residual}
                for i, m in sorted(self.pairs.items())
            ],
            "offset": [self.translation.drow, self.translation.dcol],
            "support": self.support,
            "max_edge_error": self.max_edge_error,
            "candidates": self.n_candidates,
            "false_positives": self.false_positives,
        }


def _distance(a, b, cellsize):
    return cellsize * math.hypot(a[0] - b[0], a[1] - b[1])


def build_parent_graph(points, cellsize: float = 1.0) -> ParentGraph:
    """Complete graph over ``(ControlPoint, (row, col))`` reference nodes."""
    points = [(p, (int(cell[0]), int(cell[1]))) for p, cell in points]
    if len(points) < 2:
        raise TooFewPoints(f"a parent graph needs at least 2 control points, got {len(points)}")
    seen = {}
    for i, (_, cell) in enumerate(points):
        if cell in seen:
            raise DuplicateCell(f"control points {seen[cell]} and {i} share reference cell {cell}")
        seen[cell] = i
    n = len(points)
    lengths = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            lengths[i, j] = lengths[j, i] = _distance(points[i][1], points[j][1], cellsize)
    lengths.flags.writeable = False
    return ParentGraph(tuple(points), float(cellsize), lengths)


def min_support_for(n_nodes: int) -> int:
    return max(3, math.ceil(n_nodes / 4))


def _vote(parent: ParentGraph, candidates):
    """Best offset group as ``(offset, {node: match})`` or ``None``."""
    groups = defaultdict(dict)
    for i, matches in enumerate(candidates):
        ref = parent.nodes[i][1]
        for m in matches:
            offset = (ref[0] - m.row, ref[1] - m.col)
            group = groups[offset]
            # one node votes at most once per offset; keep its best candidate
            if i not in group or m < group[i]:
                group[i] = m
    best = None
    best_key = None
    for offset, group in groups.items():
        nodes = tuple(sorted(group))
        residual = math.fsum(group[i].residual for i in nodes)
        key = (-len(nodes), residual, nodes, offset)
        if best_key is None or key < best_key:
            best_key, best = key, (offset, group)
    return best


def find_correspondence(parent: ParentGraph, candidates, dist_tol: float | None = None,
                        min_support: int | None = None) -> Correspondence:
    """Largest geometrically consistent assignment of parent nodes to candidates.

    ``candidates[i]`` lists the :class:`CandidateMatch` objects for parent
    node ``i``.  Ties on support go to the smaller summed residual, then to
    the lexicographically smaller node set, then to the smaller offset.
    """
    candidates = list(candidates)
    if len(candidates) != parent.n:
        raise ValueError(f"expected {parent.n} candidate lists, got {len(candidates)}")
    if dist_tol is None:
        dist_tol = 1.5 * parent.cellsize
    if min_support is None:
        min_support = min_support_for(parent.n)
    n_candidates = sum(len(c) for c in candidates)

    best = _vote(parent, candidates)
    support = 0 if best is None else len(best[1])
    if support < min_support:
        raise InsufficientMatches(
            f"largest consistent match set has {support} node(s), need {min_support}",
            support=support, min_support=min_support)
    offset, group = best
    pairs = {i: group[i] for i in sorted(group)}

    max_err = 0.0
    nodes = list(pairs)
    for a in range(len(nodes)):
        for b in range(a + 1, len(nodes)):
            i, j = nodes[a], nodes[b]
            d = _distance(pairs[i].cell, pairs[j].cell, parent.cellsize)
            max_err = max(max_err, abs(d - parent.edge_length(i, j)))
    if max_err > dist_tol:
        # unreachable for whole-cell offsets; guards the invariant
        raise AssertionError(f"edge error {max_err} exceeds dist_tol {dist_tol}")
    return Correspondence(pairs, Transform(offset[0], offset[1], len(pairs)), max_err, n_candidates)


def estimate_transform(correspondence: Correspondence) -> Transform:
    t = correspondence.translation
    return Transform(t.drow, t.dcol, len(correspondence.pairs))
