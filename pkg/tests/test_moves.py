import random

import pytest

from modules.core.moves import (
    MoveFlow,
    check_flow,
    compositions,
    flow_from_unit_moves,
    is_legal_move,
    team_successors,
    track_unit,
    unguarded_meetings,
    validate_team_move,
)
from modules.schemas.errors import IllegalMove, SumMismatch


def test_successors_on_p2(p2):
    assert team_successors(p2, (2, 0)) == {(2, 0), (1, 1), (0, 2)}


def test_successors_on_c3(c3):
    assert team_successors(c3, (1, 0, 0)) == {(1, 0, 0), (0, 1, 0), (0, 0, 1)}


def test_successors_on_p3_ends(p3):
    assert team_successors(p3, (1, 0, 1)) == {(1, 0, 1), (1, 1, 0), (0, 1, 1), (0, 2, 0)}


def test_single_unit_has_one_plus_degree_successors(c5_p2, star3):
    for g in (c5_p2, star3):
        for v in range(g.n):
            counts = tuple(1 if u == v else 0 for u in range(g.n))
            assert len(team_successors(g, counts)) == 1 + len(g.adjacency[v])


def test_successors_are_reversible(c4_pendant):
    rng = random.Random(7)
    configs = list(compositions(3, c4_pendant.n))
    for x in rng.sample(configs, 12):
        for y in team_successors(c4_pendant, x):
            assert x in team_successors(c4_pendant, y)


def test_successors_agree_with_flow_validation(p4):
    configs = list(compositions(3, p4.n))
    for x in configs:
        succ = team_successors(p4, x)
        for y in configs:
            assert (y in succ) == is_legal_move(p4, x, y)


def test_compositions_order_and_count():
    out = list(compositions(2, 3))
    assert out[0] == (2, 0, 0)
    assert out[-1] == (0, 0, 2)
    assert len(out) == 6


def test_validate_team_move_returns_witness(p3):
    flow = validate_team_move(p3, (2, 0, 0), (1, 1, 0))
    assert flow.stay == (1, 0, 0)
    assert flow.traverse == {(0, 1): 1}
    check_flow(p3, flow, (2, 0, 0), (1, 1, 0))


def test_validate_team_move_errors(p3):
    with pytest.raises(SumMismatch):
        validate_team_move(p3, (1, 0, 0), (1, 1, 0))
    with pytest.raises(SumMismatch):
        validate_team_move(p3, (1, 0, 0), (1, 0))
    with pytest.raises(IllegalMove):
        validate_team_move(p3, (1, 0, 0), (0, 0, 1))


def test_check_flow_rejects_non_edges(p3):
    flow = MoveFlow(stay=(0, 0, 0), traverse={(0, 2): 1})
    with pytest.raises(IllegalMove):
        check_flow(p3, flow, (1, 0, 0), (0, 0, 1))


def test_unguarded_meetings():
    assert unguarded_meetings((2, 1, 3), (0, 0, 1), 2) == frozenset({0})
    assert unguarded_meetings((1, 1, 1), (0, 0, 0), 2) == frozenset()


def test_unit_moves_and_tracking():
    flow = flow_from_unit_moves(3, [(0, 1), (0, 0), (2, 1)])
    assert flow.before() == (2, 0, 1)
    assert flow.after() == (1, 2, 0)
    assert track_unit(flow, 0) == 0
    assert track_unit(flow, 2) == 1
