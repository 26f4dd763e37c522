import random

import pytest

from modules.agents.base import StrategySpyAgent
from modules.agents.revolutionary_agents import RandomRevAgent
from modules.agents.spy_tree_agent import tree_budget
from modules.agents.spy_unicyclic_agent import UnicyclicSpyStrategy
from modules.core.families import cycle, unicyclic, with_pendants
from modules.core.graph_core import Graph
from modules.core.moves import check_flow, team_successors, unguarded_meetings
from modules.graph.builder import play_match, replay_transcript
from modules.schemas.errors import PreconditionViolated
from modules.schemas.messages import GameConfig
from modules.solver.sigma import sigma_formula
from modules.solver.verify import verify_strategy


def test_mode_selection(triangle_pendant, c4_pendant, c6_pendant):
    triangle = UnicyclicSpyStrategy(triangle_pendant, GameConfig(m=2, r=5, s=2))
    assert triangle.choose_mode(3, 2) == "Large"
    assert triangle.choose_mode(5, 2) == "Case2"
    assert triangle.choose_mode(1, 0) == "Idle"
    with pytest.raises(PreconditionViolated):
        triangle.choose_mode(5, 1)
    square = UnicyclicSpyStrategy(c4_pendant, GameConfig(m=2, r=7, s=3))
    assert square.choose_mode(7, 3) == "Case1"
    hexagon = UnicyclicSpyStrategy(c6_pendant, GameConfig(m=2, r=5, s=2))
    with pytest.raises(PreconditionViolated):
        hexagon.choose_mode(5, 2)


def test_rejects_trees(p4):
    with pytest.raises(PreconditionViolated):
        UnicyclicSpyStrategy(p4, GameConfig(m=2, r=3, s=2))


def test_shadow_start_guards_tree_meetings(triangle_pendant):
    cfg = GameConfig(m=2, r=3, s=2)
    strategy = UnicyclicSpyStrategy(triangle_pendant, cfg)
    spy, state = strategy.initial((1, 0, 0, 2))
    assert state.mode == "Large"
    assert spy[3] == 1
    assert sum(spy) == 2
    assert "mode=Large" in strategy.annotate(state)


@pytest.mark.parametrize("r", [2, 3, 4])
def test_large_mode_closure_on_triangle_with_pendant(triangle_pendant, r):
    cfg = GameConfig(m=2, r=r, s=-(-r // 2))
    result = verify_strategy(triangle_pendant, cfg, UnicyclicSpyStrategy(triangle_pendant, cfg, validate_moves=False))
    assert result.ok, result.detail


def test_triangle_mode_closure(triangle_pendant):
    cfg = GameConfig(m=2, r=5, s=2)
    result = verify_strategy(triangle_pendant, cfg, UnicyclicSpyStrategy(triangle_pendant, cfg, validate_moves=False))
    assert result.ok, result.detail


def test_detached_tree_is_played_separately(c5_p2):
    cfg = GameConfig(m=2, r=4, s=2)
    result = verify_strategy(c5_p2, cfg, UnicyclicSpyStrategy(c5_p2, cfg, validate_moves=False))
    assert result.ok, result.detail


@pytest.mark.slow
@pytest.mark.parametrize("r", [3, 4, 5])
def test_large_mode_closure_on_square_with_pendant(c4_pendant, r):
    cfg = GameConfig(m=2, r=r, s=-(-r // 2))
    result = verify_strategy(c4_pendant, cfg, UnicyclicSpyStrategy(c4_pendant, cfg, validate_moves=False))
    assert result.ok, result.detail


@pytest.mark.parametrize("seed", range(5))
def test_cycle_condition_holds_against_random_play(c6_pendant, seed):
    cfg = GameConfig(m=2, r=5, s=3)
    outcome, log = play_match(c6_pendant, cfg, RandomRevAgent(seed), StrategySpyAgent(UnicyclicSpyStrategy(c6_pendant, cfg)),
                              max_rounds=40, seed=seed)
    assert outcome.label() == "Spies:HorizonSurvived(40)"
    assert all("mode=Large" in step.note for step in log.steps if step.team == "S")


def c4_with_tail() -> Graph:
    return Graph.from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 4), (4, 5)], name="c4_tail")


def test_reserve_mode_closure_on_square_with_pendant(c4_pendant):
    cfg = GameConfig(m=2, r=7, s=3)
    result = verify_strategy(c4_pendant, cfg, UnicyclicSpyStrategy(c4_pendant, cfg, validate_moves=False))
    assert result.ok, result.detail


def test_reserve_returns_to_guard_its_mate(c4_pendant):
    cfg = GameConfig(m=2, r=7, s=3)
    strategy = UnicyclicSpyStrategy(c4_pendant, cfg)
    spy, state = strategy.initial((1, 0, 1, 1, 4))
    assert state.mode == "Case1"
    assert spy[4] == 1
    rev = (4, 1, 2, 0, 0)
    new_spy, state, flow = strategy.step(state, rev)
    check_flow(c4_pendant, flow, spy, new_spy)
    assert not unguarded_meetings(rev, new_spy, 2)
    assert new_spy[4] == 0
    assert state.core.lent is None
    assert len(set(state.core.cycle_spies)) == 2


def test_mate_lends_a_reserve_while_the_rest_of_the_cycle_meets(c4_pendant):
    cfg = GameConfig(m=2, r=7, s=3)
    strategy = UnicyclicSpyStrategy(c4_pendant, cfg)
    spy, state = strategy.initial((1, 2, 2, 2, 0))
    assert spy == (0, 1, 1, 1, 0)
    lent = state.core.lent
    assert lent[0] == 0 and lent[1] in (1, 3)
    assert f"lent=0>{lent[1]}" in strategy.annotate(state)

    same, state, _ = strategy.step(state, (1, 2, 2, 2, 0))
    assert same == spy
    assert state.core.lent == lent

    rev = (2, 1, 2, 2, 0)
    new_spy, state, flow = strategy.step(state, rev)
    check_flow(c4_pendant, flow, spy, new_spy)
    assert new_spy == (1, 0, 1, 1, 0)
    assert state.core.lent is None


def test_mate_with_a_meeting_keeps_one_reserve_home():
    g = c4_with_tail()
    cfg = GameConfig(m=2, r=9, s=4)
    strategy = UnicyclicSpyStrategy(g, cfg)
    rev = (2, 2, 2, 2, 0, 1)
    spy, state = strategy.initial(rev)
    assert state.mode == "Case1"
    assert spy == (1, 1, 1, 1, 0, 0)
    assert state.core.lent is not None
    assert not unguarded_meetings(rev, spy, 2)


@pytest.mark.parametrize("graph, r, s", [
    pytest.param(with_pendants(cycle(4), [0]), 7, 3, id="c4_pendant"),
    pytest.param(with_pendants(cycle(4), [0, 2]), 9, 4, id="c4_two_pendants"),
    pytest.param(c4_with_tail(), 9, 4, id="c4_tail"),
    pytest.param(with_pendants(cycle(5), [0, 0]), 11, 5, id="c5_twin_pendants", marks=pytest.mark.slow),
])
def test_reserve_mode_invariants_along_random_play(graph, r, s):
    cfg = GameConfig(m=2, r=r, s=s)
    strategy = UnicyclicSpyStrategy(graph, cfg)
    rng = random.Random(r * 31 + s)
    tree_vertices = [v for a in strategy.attached for v in a.tree.postorder]
    for _ in range(12):
        placed = [0] * graph.n
        for _ in range(r):
            placed[rng.randrange(graph.n)] += 1
        rev = tuple(placed)
        spy, state = strategy.initial(rev)
        for _ in range(25):
            assert state.mode == "Case1"
            cycle_spies = state.core.cycle_spies
            assert len(set(cycle_spies)) == len(cycle_spies)
            assert set(cycle_spies) <= set(strategy.cycle)
            budget = sum(tree_budget(a.tree, rev, 2, clipped=True) for a in strategy.attached)
            assert sum(spy[v] for v in tree_vertices) == budget
            assert not unguarded_meetings(rev, spy, 2)
            rev = rng.choice(sorted(team_successors(graph, rev)))
            new_spy, state, flow = strategy.step(state, rev)
            check_flow(graph, flow, spy, new_spy)
            spy = new_spy


@pytest.mark.parametrize("seed", range(8))
def test_reserve_mode_survives_random_matches(c4_pendant, seed):
    cfg = GameConfig(m=2, r=7, s=3)
    outcome, log = play_match(c4_pendant, cfg, RandomRevAgent(seed),
                              StrategySpyAgent(UnicyclicSpyStrategy(c4_pendant, cfg)), max_rounds=40, seed=seed)
    assert outcome.label() == "Spies:HorizonSurvived(40)"
    assert all("mode=Case1" in step.note for step in log.steps if step.team == "S")
    assert replay_transcript(c4_pendant, log).label() == outcome.label()


@pytest.mark.slow
@pytest.mark.parametrize("length", [3, 4, 5])
@pytest.mark.parametrize("t", [0, 1, 2])
def test_closed_form_spy_count_suffices_on_small_unicyclic_graphs(length, t):
    for g in unicyclic(length, t):
        for r in (3, 5, 7):
            if r > 2 * g.n:
                continue
            cfg = GameConfig(m=2, r=r, s=sigma_formula(g, 2, r).sigma)
            result = verify_strategy(g, cfg, UnicyclicSpyStrategy(g, cfg, validate_moves=False))
            assert result.ok, (g.name, r, result.detail)
