"""
Reference opponents: random and greedy spies, the trivial-bound follower, and agents
replaying the exact solver's policies.
"""
import logging
import random
from dataclasses import dataclass
from typing import List, Optional, Tuple

import networkx as nx

from modules.agents.base import RevAgent, SpyAgent, SpyStrategy
from modules.core.graph_core import Graph
from modules.core.moves import (Counts, MoveFlow, counts_from_locations, flow_from_unit_moves, meeting_vertices,
                                unit_locations, validate_team_move)
from modules.schemas.errors import IllegalMove, IllegalRevMove, PreconditionViolated, SumMismatch
from modules.schemas.messages import GameConfig, Position
from modules.solver.exact_solver import DEFAULT_MAX_STATES, SafetySolver, WinSet

logger = logging.getLogger(__name__)


def _random_step(rng: random.Random, g: Graph, counts: Counts, stay_bias: float) -> Counts:
    targets = []
    for v in unit_locations(counts):
        if rng.random() < stay_bias:
            targets.append(v)
        else:
            targets.append(rng.choice(g.closed_neighborhood(v)))
    return counts_from_locations(targets, g.n)


class RandomSpyAgent(SpyAgent):
    name = "random"

    def __init__(self, seed: int = 0, stay_bias: float = 0.25):
        self.rng = random.Random(seed)
        self.stay_bias = stay_bias
        self.g: Optional[Graph] = None

    def place(self, g: Graph, cfg: GameConfig, rev: Counts) -> Counts:
        self.g = g
        return counts_from_locations([self.rng.randrange(g.n) for _ in range(cfg.s)], g.n)

    def move(self, position: Position) -> Counts:
        return _random_step(self.rng, self.g, position.spy, self.stay_bias)


def cover_meetings(g: Graph, spy: Counts, rev: Counts, m: int) -> Tuple[List[Tuple[int, int]], Counts]:
    """
    Sends spies onto as many meetings as one step allows, moving as few as possible.
    Returns the (from, to) moves of the committed spies and the spies left uncommitted.
    """
    meetings = meeting_vertices(rev, m)
    net = nx.DiGraph()
    for v in range(g.n):
        if not spy[v]:
            continue
        net.add_edge("src", ("s", v), capacity=spy[v], weight=0)
        for u in g.closed_neighborhood(v):
            if rev[u] >= m:
                net.add_edge(("s", v), ("meet", u), capacity=spy[v], weight=0 if u == v else 1)
    for u in meetings:
        net.add_edge(("meet", u), "sink", capacity=1, weight=0)
    if "src" not in net or "sink" not in net:
        return [], spy
    flow = nx.max_flow_min_cost(net, "src", "sink")
    moves: List[Tuple[int, int]] = []
    free = list(spy)
    for v in range(g.n):
        for target, k in flow.get(("s", v), {}).items():
            if k:
                moves.extend([(v, target[1])] * k)
                free[v] -= k
    return moves, tuple(free)


class GuardingRandomSpyAgent(SpyAgent):
    """Covers what it can reach, lets the rest wander."""
    name = "guarding-random"

    def __init__(self, seed: int = 0, stay_bias: float = 0.25):
        self.rng = random.Random(seed)
        self.stay_bias = stay_bias
        self.g: Optional[Graph] = None
        self.cfg: Optional[GameConfig] = None

    def place(self, g: Graph, cfg: GameConfig, rev: Counts) -> Counts:
        self.g, self.cfg = g, cfg
        spy = [0] * g.n
        for v in meeting_vertices(rev, cfg.m)[:cfg.s]:
            spy[v] = 1
        for _ in range(cfg.s - sum(spy)):
            spy[self.rng.randrange(g.n)] += 1
        return tuple(spy)

    def move(self, position: Position) -> Counts:
        moves, free = cover_meetings(self.g, position.spy, position.rev, self.cfg.m)
        wandered = _random_step(self.rng, self.g, free, self.stay_bias)
        committed = flow_from_unit_moves(self.g.n, moves).after()
        return tuple(a + b for a, b in zip(committed, wandered))


@dataclass(frozen=True)
class FollowerState:
    rev: Counts
    tracked: Counts
    spy: Counts


class FollowerSpyStrategy(SpyStrategy):
    """
    r-m+1 spies each shadow one revolutionary; the m-1 untracked ones can never meet
    alone. Spare spies stay where they were placed.
    """
    name = "follower"

    def __init__(self, g: Graph, cfg: GameConfig, validate_moves: bool = True):
        super().__init__(g, cfg)
        self.validate_moves = validate_moves
        self.followers = max(0, cfg.r - cfg.m + 1)
        if cfg.s < self.followers:
            raise PreconditionViolated(f"follower needs {self.followers} spies, has {cfg.s}")

    def initial(self, rev: Counts) -> Tuple[Counts, FollowerState]:
        tracked = counts_from_locations(unit_locations(rev)[:self.followers], self.g.n)
        spy = list(tracked)
        spy[0] += self.cfg.s - self.followers
        return tuple(spy), FollowerState(rev=tuple(rev), tracked=tracked, spy=tuple(spy))

    def step(self, state: FollowerState, new_rev: Counts) -> Tuple[Counts, FollowerState, MoveFlow]:
        try:
            rev_flow = validate_team_move(self.g, state.rev, new_rev)
        except (IllegalMove, SumMismatch) as e:
            raise IllegalRevMove(str(e))
        moves: List[Tuple[int, int]] = []
        for v in range(self.g.n):
            left = state.tracked[v]
            # tracked units take the stay slots first, then edges in label order
            take = min(left, rev_flow.stay[v])
            moves.extend([(v, v)] * take)
            left -= take
            for (u, w), k in sorted(rev_flow.traverse.items()):
                if u != v or not left:
                    continue
                take = min(left, k)
                moves.extend([(v, w)] * take)
                left -= take
        tracked = flow_from_unit_moves(self.g.n, moves).after()
        parked = [a - b for a, b in zip(state.spy, state.tracked)]
        moves.extend((v, v) for v in unit_locations(parked))
        flow = flow_from_unit_moves(self.g.n, moves)
        spy = flow.after()
        return spy, FollowerState(rev=tuple(new_rev), tracked=tracked, spy=spy), flow

    def annotate(self, state: FollowerState) -> str:
        return f"tracked={','.join(map(str, state.tracked))}"


class SolverSpyAgent(SpyAgent):
    """Plays the solver's spy policy: stay safe if possible, otherwise stall."""
    name = "solver"

    def __init__(self, winset: WinSet):
        self.winset = winset

    def place(self, g: Graph, cfg: GameConfig, rev: Counts) -> Counts:
        return self.winset.spy_placement(rev)

    def move(self, position: Position) -> Counts:
        return self.winset.spy_policy(position.rev, position.spy)


class SolverRevAgent(RevAgent):
    """Plays the solver's revolutionary policy, decreasing the rank every round."""
    name = "solver"

    def __init__(self, winset: WinSet):
        self.winset = winset

    def place(self, g: Graph, cfg: GameConfig) -> Counts:
        return self.winset.rev_placement()

    def move(self, position: Position) -> Counts:
        return self.winset.rev_policy(position.rev, position.spy)


def solver_agents(g: Graph, cfg: GameConfig, max_states: int = DEFAULT_MAX_STATES) -> Tuple[SolverRevAgent, SolverSpyAgent]:
    _, winset = SafetySolver(g, max_states).solve(cfg)
    return SolverRevAgent(winset), SolverSpyAgent(winset)
