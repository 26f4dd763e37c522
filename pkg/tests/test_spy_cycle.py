import random

import pytest

from modules.agents.base import StrategySpyAgent
from modules.agents.revolutionary_agents import RandomRevAgent
from modules.agents.spy_cycle_agent import CycleSpyStrategy, lift_sorted, realign
from modules.core.families import cycle
from modules.graph.builder import play_match, replay_transcript
from modules.schemas.errors import PreconditionViolated
from modules.schemas.messages import GameConfig
from modules.solver.verify import verify_strategy


def test_lift_sorted_wraps_past_start():
    assert lift_sorted([4, 0, 2], start=2, length=5) == (2, 4, 5)


def test_realign_keeps_every_index_within_one_step():
    assert realign((0, 2), [1, 2], 5) == (1, 2)
    assert realign((0, 2), [4, 2], 5) == (-1, 2) or realign((0, 2), [4, 2], 5) == (4, 7)
    assert realign((0, 1), [3, 4], 6) is None


@pytest.mark.parametrize("graph_name", ["c3", "c4", "c5", "c6"])
@pytest.mark.parametrize("m, r", [
    (2, 2), (2, 3), (2, 4), (3, 3), (3, 4), (3, 5),
    pytest.param(2, 5, marks=pytest.mark.slow), pytest.param(2, 6, marks=pytest.mark.slow),
    pytest.param(3, 6, marks=pytest.mark.slow),
])
def test_follower_closure_holds(request, graph_name, m, r):
    g = request.getfixturevalue(graph_name)
    cfg = GameConfig(m=m, r=r, s=-(-r // m))
    strategy = CycleSpyStrategy(g, cfg, validate_moves=False)
    assert strategy.mode == "Follower"
    result = verify_strategy(g, cfg, strategy)
    assert result.ok, result.detail


@pytest.mark.parametrize("graph_name, r, s", [("c3", 3, 1), ("c4", 5, 2)])
def test_short_cycle_closure_holds(request, graph_name, r, s):
    g = request.getfixturevalue(graph_name)
    cfg = GameConfig(m=2, r=r, s=s)
    strategy = CycleSpyStrategy(g, cfg, validate_moves=False)
    assert strategy.mode == "Short"
    assert verify_strategy(g, cfg, strategy).ok


def test_fewer_revolutionaries_than_a_meeting_idles(c5):
    cfg = GameConfig(m=3, r=2, s=0)
    strategy = CycleSpyStrategy(c5, cfg)
    assert strategy.mode == "Idle"
    assert verify_strategy(c5, cfg, strategy).ok


def test_long_cycle_needs_the_ceiling(c6):
    with pytest.raises(PreconditionViolated):
        CycleSpyStrategy(c6, GameConfig(m=2, r=5, s=2))


def test_only_cycles_are_accepted(p4):
    with pytest.raises(PreconditionViolated):
        CycleSpyStrategy(p4, GameConfig(m=2, r=3, s=2))


@pytest.mark.parametrize("m", [2, 3])
def test_follower_survives_random_matches(m):
    rng = random.Random(31 + m)
    for seed in range(30):
        length = rng.randint(3, 9)
        g = cycle(length)
        r = rng.randint(m, min(8, m * length))
        cfg = GameConfig(m=m, r=r, s=-(-r // m))
        outcome, log = play_match(g, cfg, RandomRevAgent(seed), StrategySpyAgent(CycleSpyStrategy(g, cfg)),
                                  max_rounds=30, seed=seed)
        assert outcome.label() == "Spies:HorizonSurvived(30)", (g.name, r)
        assert replay_transcript(g, log).label() == outcome.label()
