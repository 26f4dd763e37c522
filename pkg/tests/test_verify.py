import pytest

from modules.agents.base import SpyStrategy
from modules.agents.baseline_agents import FollowerSpyStrategy
from modules.agents.spy_tree_agent import TreeSpyStrategy
from modules.graph.builder import replay_transcript
from modules.schemas.errors import PreconditionViolated, StateSpaceTooLarge
from modules.schemas.messages import GameConfig
from modules.solver.verify import verify_strategy


class SitOnFirstMeeting(SpyStrategy):
    """One spy that guards the placement's meeting and never moves again."""
    name = "sit"

    def initial(self, rev):
        meetings = [v for v, c in enumerate(rev) if c >= self.cfg.m]
        spy = [0] * self.g.n
        spy[meetings[0] if meetings else 0] = 1
        return tuple(spy), tuple(spy)

    def step(self, state, new_rev):
        return state, state, None


class Teleporter(SpyStrategy):
    """Jumps from the first vertex to the last one, which is illegal on a path."""
    name = "teleport"

    def initial(self, rev):
        return (1,) + (0,) * (self.g.n - 1), 0

    def step(self, state, new_rev):
        return (0,) * (self.g.n - 1) + (1,), state + 1, None


def test_shortest_counterexample_is_reported(p3):
    cfg = GameConfig(m=2, r=2, s=1)
    result = verify_strategy(p3, cfg, SitOnFirstMeeting(p3, cfg))
    assert not result.ok
    assert result.label() == "Counterexample(1)"
    assert result.detail == "unguarded meeting at 1"
    transcript = result.counterexample
    assert [step.counts for step in transcript.steps] == [(2, 0, 0), (1, 0, 0), (0, 2, 0), (1, 0, 0)]
    assert replay_transcript(p3, transcript).label() == "Revolutionaries:UnguardedMeeting(1,1)"


def test_illegal_spy_move_is_a_forfeit(p3):
    cfg = GameConfig(m=3, r=1, s=1)
    result = verify_strategy(p3, cfg, Teleporter(p3, cfg))
    assert not result.ok
    assert result.counterexample.outcome.reason == "Forfeit"
    assert result.counterexample.steps[-1].rejected


def test_follower_holds_with_r_minus_m_plus_one_spies(c4, p4):
    for g in (c4, p4):
        cfg = GameConfig(m=2, r=3, s=2)
        assert verify_strategy(g, cfg, FollowerSpyStrategy(g, cfg, validate_moves=False)).ok


def test_follower_refuses_too_few_spies(c4):
    with pytest.raises(PreconditionViolated):
        FollowerSpyStrategy(c4, GameConfig(m=2, r=4, s=2))


def test_closure_budget(p4):
    cfg = GameConfig(m=2, r=4, s=2)
    with pytest.raises(StateSpaceTooLarge):
        verify_strategy(p4, cfg, TreeSpyStrategy(p4, cfg, validate_moves=False), max_states=3)


def test_ok_result_reports_explored_states(p3):
    cfg = GameConfig(m=2, r=2, s=1)
    result = verify_strategy(p3, cfg, TreeSpyStrategy(p3, cfg, validate_moves=False))
    assert result.ok
    assert result.states >= 6
    assert result.counterexample is None
