import itertools

import numpy as np
import pytest

from demreg.constellation import (
    Transform,
    build_parent_graph,
    estimate_transform,
    find_correspondence,
    min_support_for,
)
from demreg.control_points import CandidateMatch, ControlPoint
from demreg.estimator import DEMRegistration
from demreg.exceptions import DuplicateCell, InsufficientMatches, TooFewPoints
from demreg.synth import SynthSpec, derive_candidate, generate_terrain, sample_control_points
from oracles import brute_force_correspondence


def _graph(cells, cellsize=1.0):
    return build_parent_graph([(ControlPoint(0, 0, float(i)), c) for i, c in enumerate(cells)],
                              cellsize)


def _m(row, col, residual=0.0):
    return CandidateMatch(residual, row, col)


# -- parent graph ----------------------------------------------------------------

def test_two_point_graph_345():
    g = _graph([(0, 0), (3, 4)])
    assert g.edges == [(0, 1, 5.0)]


def test_graph_edge_counts():
    assert len(_graph([(0, 0), (0, 1), (1, 0)]).edges) == 3
    cells = [(r, c) for r in range(5) for c in range(8)]
    g = _graph(cells, cellsize=90.0)
    assert len(g.edges) == 780
    assert all(length > 0 for _, _, length in g.edges)


def test_graph_lengths_in_map_units():
    g = _graph([(0, 0), (3, 4)], cellsize=90.0)
    assert g.edge_length(0, 1) == 450.0


def test_graph_errors():
    with pytest.raises(TooFewPoints):
        _graph([(0, 0)])
    with pytest.raises(TooFewPoints):
        _graph([])
    with pytest.raises(DuplicateCell):
        _graph([(1, 1), (2, 2), (1, 1)])


def test_min_support():
    assert min_support_for(2) == 3
    assert min_support_for(12) == 3
    assert min_support_for(13) == 4
    assert min_support_for(40) == 10


# -- correspondence ----------------------------------------------------------------

def test_identity_correspondence():
    cells = [(2, 3), (10, 1), (7, 7), (0, 9)]
    corr = find_correspondence(_graph(cells), [[_m(*c)] for c in cells])
    assert corr.translation.offset == (0, 0)
    assert corr.support == 4
    assert corr.max_edge_error == 0.0
    assert estimate_transform(corr) == Transform(0, 0, 4)


def test_triangle_with_decoy():
    cells = [(0, 0), (0, 10), (10, 0)]
    shift = (5, -3)  # reference = candidate + shift
    true = [(r - shift[0], c - shift[1]) for r, c in cells]
    cands = [[_m(*true[0]), _m(7, 7)], [_m(*true[1])], [_m(*true[2])]]
    corr = find_correspondence(_graph(cells), cands)
    assert corr.translation.offset == shift
    assert {i: m.cell for i, m in corr.pairs.items()} == dict(enumerate(true))
    assert corr.false_positives == 1
    assert estimate_transform(corr) == Transform(5, -3, 3)

    # exhaustive enumeration over the 2 x 1 x 1 assignments (plus omissions)
    best = None
    for choice in itertools.product(*[[None] + c for c in cands]):
        chosen = {i: m for i, m in enumerate(choice) if m is not None}
        offsets = {(cells[i][0] - m.row, cells[i][1] - m.col) for i, m in chosen.items()}
        if len(offsets) <= 1 and (best is None or len(chosen) > len(best)):
            best = chosen
    assert {i: m.cell for i, m in best.items()} == {i: m.cell for i, m in corr.pairs.items()}


def test_all_empty_candidates():
    with pytest.raises(InsufficientMatches) as info:
        find_correspondence(_graph([(0, 0), (1, 1), (2, 5)]), [[], [], []])
    assert info.value.support == 0


def test_below_min_support():
    cells = [(0, 0), (0, 4), (4, 0), (4, 4)]
    cands = [[_m(0, 0)], [_m(0, 4)], [], []]
    with pytest.raises(InsufficientMatches):
        find_correspondence(_graph(cells), cands)
    corr = find_correspondence(_graph(cells), cands, min_support=2)
    assert corr.support == 2


def test_tie_broken_by_residual():
    cells = [(0, 0), (0, 6), (6, 0), (6, 6)]
    # nodes 0,1 agree on (1, 1) with residual 0.5 each; nodes 2,3 on (-2, 0) with 0.1 each
    cands = [[_m(-1, -1, 0.5)], [_m(-1, 5, 0.5)], [_m(8, 0, 0.1)], [_m(8, 6, 0.1)]]
    corr = find_correspondence(_graph(cells), cands, min_support=2)
    assert corr.translation.offset == (-2, 0)
    oracle = brute_force_correspondence(
        cells, [[(m.row, m.col, m.residual) for m in c] for c in cands], 1.0, 1.5)
    assert oracle[0] == corr.translation.offset


def test_tie_broken_by_node_order():
    cells = [(0, 0), (0, 6), (6, 0), (6, 6)]
    cands = [[_m(-1, -1)], [_m(-1, 5)], [_m(8, 0)], [_m(8, 6)]]
    corr = find_correspondence(_graph(cells), cands, min_support=2)
    assert sorted(corr.pairs) == [0, 1]


def test_determinism():
    cells = [(0, 0), (3, 9), (8, 2), (5, 5)]
    cands = [[_m(1, 1), _m(2, 2)], [_m(4, 10), _m(0, 0)], [_m(9, 3)], [_m(6, 6), _m(1, 1)]]
    a = find_correspondence(_graph(cells), cands)
    b = find_correspondence(_graph(cells), [list(reversed(c)) for c in cands])
    assert a == b


def test_to_dict():
    cells = [(0, 0), (0, 4), (4, 0)]
    corr = find_correspondence(_graph(cells), [[_m(1, 1, 0.25)], [_m(1, 5)], [_m(5, 1)]])
    d = corr.to_dict()
    assert d["offset"] == [-1, -1]
    assert d["pairs"][0] == {"node": 0, "row": 1, "col": 1, "residual": 0.25}
    assert d["support"] == 3 and d["false_positives"] == 0


def random_instance(seed):
    """Small instance with one or two planted offsets and random decoys."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 7))
    flat = rng.choice(100, size=n, replace=False)
    cells = [(int(f // 10), int(f % 10)) for f in flat]
    planted = [tuple(int(v) for v in rng.integers(-3, 4, 2)) for _ in range(rng.integers(1, 3))]
    cands = []
    for r, c in cells:
        mine = set()
        k = int(rng.integers(0, 5))
        for off in planted:
            if len(mine) < k and rng.random() < 0.7:
                mine.add((r - off[0], c - off[1]))
        while len(mine) < k:
            mine.add(tuple(int(v) for v in rng.integers(-3, 13, 2)))
        cands.append([(a, b, float(rng.choice([0.0, 0.25, 0.5]))) for a, b in sorted(mine)])
    return cells, cands


def check_against_oracle(seed):
    cells, cands = random_instance(seed)
    oracle = brute_force_correspondence(cells, cands, 1.0, 1.5)
    matches = [[_m(*c) for c in node] for node in cands]
    if oracle is None:
        with pytest.raises(InsufficientMatches):
            find_correspondence(_graph(cells), matches, dist_tol=1.5, min_support=1)
        return
    corr = find_correspondence(_graph(cells), matches, dist_tol=1.5, min_support=1)
    assert corr.translation.offset == oracle[0]
    assert {i: (m.row, m.col) for i, m in corr.pairs.items()} == \
        {i: (c[0], c[1]) for i, c in oracle[1].items()}


@pytest.mark.parametrize("seed", range(40))
def test_voting_equals_brute_force(seed):
    check_against_oracle(seed)


@pytest.mark.parametrize("seed", range(100))
def test_decoys_do_not_move_offset(seed):
    rng = np.random.default_rng(1000 + seed)
    n = 8
    flat = rng.choice(32 * 32, size=n, replace=False)
    cells = [(int(f // 32), int(f % 32)) for f in flat]
    shift = tuple(int(v) for v in rng.integers(-8, 9, 2))
    k = int(rng.integers(1, 4))
    true_support = max(k + 1, 3) + int(rng.integers(0, n - 2 - k))
    cands = []
    for i, (r, c) in enumerate(cells):
        node = [_m(int(a), int(b), float(rng.random()))
                for a, b in rng.integers(0, 32, (k, 2))]
        if i < true_support:
            node.append(_m(r - shift[0], c - shift[1], float(rng.random())))
        cands.append(node)
    corr = find_correspondence(_graph(cells), cands, min_support=3)
    assert corr.translation.offset == shift


def test_soundness_all_offsets_32x32():
    ref = generate_terrain(SynthSpec(seed=32, rows=32, cols=32))
    wrong = []
    for drow in range(-8, 9):
        for dcol in range(-8, 9):
            cand, truth = derive_candidate(ref, drow, dcol)
            pts = [p for p, _ in sample_control_points(ref, 8, seed=drow * 17 + dcol,
                                                       candidate=cand, transform=truth)]
            est = DEMRegistration(method="direct").fit(ref, cand, pts)
            if est.transform_.offset != truth.offset:
                wrong.append((drow, dcol))
    assert wrong == []
