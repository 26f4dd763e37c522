import math

import pytest

from modules.agents.baseline_agents import GuardingRandomSpyAgent, RandomSpyAgent
from modules.agents.revolutionary_agents import (
    CycleStrikeRevAgent,
    FloodRevAgent,
    StrikePlan,
    _arc_targets,
    flood_placement,
    unicyclic_rev_placement,
)
from modules.core.families import path
from modules.graph.builder import play_match
from modules.schemas.errors import PreconditionViolated
from modules.schemas.messages import GameConfig


@pytest.mark.parametrize("n, m, r, expected", [
    (3, 2, 6, (2, 2, 2)),
    (3, 2, 7, (3, 2, 2)),
    (3, 2, 1, (1, 0, 0)),
    (4, 2, 5, (2, 2, 1, 0)),
])
def test_flood_placement(n, m, r, expected):
    assert flood_placement(path(n), m, r) == expected


def test_flood_agent_never_moves(p4):
    cfg = GameConfig(m=2, r=5, s=1)
    outcome, log = play_match(p4, cfg, FloodRevAgent(), RandomSpyAgent(seed=1), max_rounds=5)
    assert outcome.winner == "Revolutionaries"
    assert {step.counts for step in log.steps if step.team == "R"} == {(2, 2, 1, 0)}


def test_unicyclic_placement_pins_off_cycle_meetings(c6_pendant):
    rev, plan = unicyclic_rev_placement(c6_pendant, GameConfig(m=2, r=5, s=2))
    assert plan.sites == (6,)
    assert plan.s_cycle == 1
    assert rev == (2, 1, 0, 0, 0, 0, 2)


def test_arc_targets_center_the_meetings():
    plan = StrikePlan(cycle=tuple(range(6)), m=2, s_cycle=3)
    # arc positions 1..5 away from S: meetings on 2..4, the spare unit after them
    assert _arc_targets(plan, 7) == [0, 0, 2, 2, 2, 1]
    with pytest.raises(PreconditionViolated):
        _arc_targets(plan, 11)


@pytest.mark.parametrize("graph_name, r, s", [
    ("c6", 7, 3),
    ("c5_p2", 7, 3),
    ("c6_pendant", 5, 2),
])
@pytest.mark.parametrize("spy_agent", [RandomSpyAgent, GuardingRandomSpyAgent])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_strike_beats_floor_many_spies(request, graph_name, r, s, spy_agent, seed):
    g = request.getfixturevalue(graph_name)
    cfg = GameConfig(m=2, r=r, s=s)
    outcome, _ = play_match(g, cfg, CycleStrikeRevAgent(), spy_agent(seed), max_rounds=300, seed=seed)
    assert outcome.winner == "Revolutionaries"
    assert outcome.reason == "UnguardedMeeting"


@pytest.mark.parametrize("m, r", [(2, 7), (3, 10)])
@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_distract_halves_what_the_spy_guards(c6, m, r, seed):
    agent = CycleStrikeRevAgent()
    play_match(c6, GameConfig(m=m, r=r, s=3), agent, GuardingRandomSpyAgent(seed), max_rounds=300, seed=seed)
    for _, before, after in agent.distract_log:
        assert after <= (before + 1) // 2
    for episode in agent.distract_episodes():
        assert len(episode) <= math.ceil(math.log2(episode[0][1]))


def test_more_meetings_than_spies_just_floods(c6):
    agent = CycleStrikeRevAgent()
    rev = agent.place(c6, GameConfig(m=2, r=7, s=2))
    assert rev == (2, 2, 2, 1, 0, 0)
    assert agent.annotate().startswith("phase=Done")


@pytest.mark.parametrize("graph_name, m, r, s", [
    ("c4", 2, 5, 2),
    ("p4", 2, 5, 2),
    ("c6", 2, 6, 3),
    ("c6", 3, 2, 0),
])
def test_strike_preconditions(request, graph_name, m, r, s):
    g = request.getfixturevalue(graph_name)
    with pytest.raises(PreconditionViolated):
        CycleStrikeRevAgent().place(g, GameConfig(m=m, r=r, s=s))
