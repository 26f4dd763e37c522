import pytest

from modules.agents.base import RevAgent, StrategySpyAgent
from modules.agents.baseline_agents import RandomSpyAgent
from modules.agents.revolutionary_agents import FloodRevAgent
from modules.agents.spy_tree_agent import TreeSpyStrategy
from modules.graph.builder import default_horizon, play_match, replay_transcript
from modules.schemas.errors import IllegalMove, StrategyIllegalMove
from modules.schemas.messages import GameConfig, Outcome, parse_transcript


class TeleportRevAgent(RevAgent):
    """Places everyone on vertex 0, then jumps them all to the last vertex."""
    name = "teleport"

    def place(self, g, cfg):
        self.n = g.n
        return (cfg.r,) + (0,) * (g.n - 1)

    def move(self, position):
        return (0,) * (self.n - 1) + (sum(position.rev),)


class ShortRevAgent(RevAgent):
    name = "short"

    def place(self, g, cfg):
        return (0,) * g.n

    def move(self, position):
        return position.rev


def test_default_horizon(p3):
    assert default_horizon(p3, GameConfig(m=2, r=4, s=2)) == 4 * 15


def test_tree_spies_survive_flood(p3):
    cfg = GameConfig(m=2, r=4, s=2)
    outcome, log = play_match(p3, cfg, FloodRevAgent(), StrategySpyAgent(TreeSpyStrategy(p3, cfg)), max_rounds=10)
    assert outcome.winner == "Spies"
    assert outcome.label() == "Spies:HorizonSurvived(10)"
    assert log.steps[0].counts == (2, 2, 0)
    assert log.steps[1].team == "S"
    assert log.outcome == outcome


def test_too_few_spies_lose_at_placement(p3):
    cfg = GameConfig(m=2, r=4, s=1)
    outcome, _ = play_match(p3, cfg, FloodRevAgent(), RandomSpyAgent(seed=3), max_rounds=10)
    assert outcome.winner == "Revolutionaries"
    assert outcome.reason == "UnguardedMeeting"
    assert outcome.round_index == 0
    assert outcome.vertex in (0, 1)


def test_illegal_revolutionary_move_forfeits(p4):
    cfg = GameConfig(m=2, r=2, s=1)
    outcome, log = play_match(p4, cfg, TeleportRevAgent(), StrategySpyAgent(TreeSpyStrategy(p4, cfg)), max_rounds=5)
    assert outcome.label() == "Spies:Forfeit(R,1)"
    assert log.steps[-1].rejected


def test_forfeit_error_names_team_and_round():
    error = StrategyIllegalMove("S", 3, "spy jumped")
    assert isinstance(error, IllegalMove)
    assert (error.team, error.round_index) == ("S", 3)
    assert str(error) == "S played illegally in round 3: spy jumped"


def test_wrong_placement_sum_forfeits(p3):
    cfg = GameConfig(m=1, r=2, s=2)
    outcome, log = play_match(p3, cfg, ShortRevAgent(), RandomSpyAgent(), max_rounds=5)
    assert outcome.reason == "Forfeit"
    assert outcome.offender == "R"
    assert len(log.steps) == 1


def test_transcript_text_round_trip_replays(c5):
    cfg = GameConfig(m=2, r=3, s=1)
    outcome, log = play_match(c5, cfg, FloodRevAgent(), RandomSpyAgent(seed=11), max_rounds=6, seed=11)
    text = log.to_text()
    assert text.startswith("graph=c5 m=2 r=3 s=1 seed=11\n")
    parsed = parse_transcript(text)
    assert [s.counts for s in parsed.steps] == [s.counts for s in log.steps]
    assert replay_transcript(c5, parsed).label() == outcome.label()


def test_replay_rejects_tampered_transcript(p4):
    cfg = GameConfig(m=2, r=2, s=1)
    _, log = play_match(p4, cfg, FloodRevAgent(), StrategySpyAgent(TreeSpyStrategy(p4, cfg)), max_rounds=3)
    lines = log.to_text().splitlines()
    lines[3] = "1 R 0 0 0 2"
    with pytest.raises(IllegalMove):
        replay_transcript(p4, parse_transcript("\n".join(lines)))


def test_outcome_rejects_inconsistent_winner():
    with pytest.raises(ValueError):
        Outcome(winner="Spies", reason="UnguardedMeeting", vertex=0)
    with pytest.raises(ValueError):
        Outcome(winner="Spies", reason="Forfeit", offender="S")
