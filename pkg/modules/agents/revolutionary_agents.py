"""
Revolutionary agents.

`FloodRevAgent` forms as many meetings as it can and never moves. `CycleStrikeRevAgent`
beats floor(r/m) spies on a long cycle: it distracts one designated spy S by splitting
whatever S guards, then packs the other revolutionaries into s consecutive meetings on
the far side of S. On unicyclic graphs it first pins spies with permanent meetings
outside the cycle and plays the cycle game with what is left.
"""
import logging
import random
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import networkx as nx

from modules.agents.base import RevAgent
from modules.core.graph_core import Graph, cycle_positions, find_cycle
from modules.core.moves import Counts, MoveFlow, counts_from_locations, track_unit, unit_locations
from modules.schemas.errors import PreconditionViolated
from modules.schemas.messages import GameConfig, Position

logger = logging.getLogger(__name__)

DISTRACT, SHORTEN, STRIKE, DONE = "Distract", "Shorten", "Strike", "Done"


def flood_placement(g: Graph, m: int, r: int) -> Counts:
    """
    floor(r/m) meetings of exactly m on the smallest labels (at most one per vertex),
    the remainder on the next vertex, or on vertex 0 when every vertex already hosts one.
    """
    rev = [0] * g.n
    full = min(g.n, r // m)
    for v in range(full):
        rev[v] = m
    rest = r - full * m
    if rest:
        rev[full if full < g.n else 0] += rest
    return tuple(rev)


class FloodRevAgent(RevAgent):
    """Floods once and stands still; wins exactly when the spies cannot cover the placement."""
    name = "flood"

    def place(self, g: Graph, cfg: GameConfig) -> Counts:
        return flood_placement(g, cfg.m, cfg.r)

    def move(self, position: Position) -> Counts:
        return position.rev


class RandomRevAgent(RevAgent):
    """Every unit independently stays or steps to a uniformly chosen neighbor."""
    name = "random"

    def __init__(self, seed: int = 0, stay_bias: float = 0.25):
        self.rng = random.Random(seed)
        self.stay_bias = stay_bias
        self.g: Optional[Graph] = None

    def place(self, g: Graph, cfg: GameConfig) -> Counts:
        self.g = g
        return counts_from_locations([self.rng.randrange(g.n) for _ in range(cfg.r)], g.n)

    def move(self, position: Position) -> Counts:
        targets = []
        for v in unit_locations(position.rev):
            if self.rng.random() < self.stay_bias or not self.g.adjacency[v]:
                targets.append(v)
            else:
                targets.append(self.rng.choice(self.g.closed_neighborhood(v)))
        return counts_from_locations(targets, self.g.n)


@dataclass(frozen=True)
class StrikePlan:
    """What the cycle game is played with once the off-cycle meetings are pinned."""
    cycle: Tuple[int, ...]
    m: int
    s_cycle: int
    sites: Tuple[int, ...] = ()

    @property
    def length(self) -> int:
        return len(self.cycle)


@dataclass(frozen=True)
class RevStrategyState:
    phase: str
    spy_at: Optional[int]
    guarded: int
    k: int
    round_index: int = 0


def unicyclic_rev_placement(g: Graph, cfg: GameConfig) -> Tuple[Counts, StrikePlan]:
    """
    Meetings of m on k = min(t, s-1) off-cycle vertices, the rest packed m per vertex
    along the cycle from its first vertex. For a bare cycle k is 0.
    """
    m, r, s = cfg.m, cfg.r, cfg.s
    cycle = find_cycle(g)
    if cycle is None:
        raise PreconditionViolated(f"{g.name} has no cycle")
    on_cycle = set(cycle)
    off = [v for v in range(g.n) if v not in on_cycle]
    k = min(len(off), max(s - 1, 0))
    r_c, s_c = r - k * m, s - k
    if r_c <= s_c * m:
        raise PreconditionViolated(f"{r_c} revolutionaries on the cycle do not outnumber {s_c} spies times {m}")
    if len(cycle) < s_c + 3:
        raise PreconditionViolated(f"cycle of length {len(cycle)} is shorter than {s_c + 3}")
    if r_c > len(cycle) * m:
        raise PreconditionViolated(f"{r_c} revolutionaries exceed {m} per cycle vertex")

    rev = [0] * g.n
    for v in off[:k]:
        rev[v] = m
    left = r_c
    for v in cycle:
        rev[v] = min(m, left)
        left -= rev[v]
    return tuple(rev), StrikePlan(cycle=tuple(cycle), m=m, s_cycle=s_c, sites=tuple(off[:k]))


def _distract(g: Graph, plan: StrikePlan, rev: Sequence[int], x: int) -> Counts:
    """
    Sends half of the units at x (rounded up) one way and the rest the other. Units on the
    two neighbors of x must step outward, everyone else may stay or shift, and no
    cycle vertex ends with more than m.
    """
    cycle, m, ell = plan.cycle, plan.m, plan.length
    index = cycle_positions(cycle)
    i = index[x]
    ahead, behind = cycle[(i + 1) % ell], cycle[(i - 1) % ell]
    reserved = {x, ahead, behind}
    held = rev[x]

    net = nx.DiGraph()
    active = 0
    for v in cycle:
        if rev[v]:
            net.add_edge("src", ("b", v), capacity=rev[v], weight=0)
            active += rev[v]
        if v != x:
            net.add_edge(("a", v), "sink", capacity=m, weight=0)
    net.add_edge(("b", x), ("a", ahead), capacity=(held + 1) // 2, weight=0)
    net.add_edge(("b", x), ("a", behind), capacity=held // 2, weight=0)
    for v, outward in ((ahead, cycle[(i + 2) % ell]), (behind, cycle[(i - 2) % ell])):
        if rev[v]:
            net.add_edge(("b", v), ("a", outward), capacity=rev[v], weight=1)
    for v in cycle:
        if not rev[v] or v in reserved:
            continue
        j = index[v]
        net.add_edge(("b", v), ("a", v), capacity=rev[v], weight=0)
        for u in (cycle[(j + 1) % ell], cycle[(j - 1) % ell]):
            if u not in reserved:
                net.add_edge(("b", v), ("a", u), capacity=rev[v], weight=1)

    flow = nx.max_flow_min_cost(net, "src", "sink")
    if sum(flow["src"].values()) != active:
        raise PreconditionViolated(f"cannot split the {held} revolutionaries at {x} within {m} per vertex")
    out = list(rev)
    for v in cycle:
        out[v] = 0
    for v in cycle:
        for target, k in flow.get(("b", v), {}).items():
            out[target[1]] += k
    return tuple(out)


def _arc_targets(plan: StrikePlan, units: int) -> List[int]:
    """
    Target occupancy along the arc positions 1..l-1 away from S: s meetings centered
    on the arc, leftovers next to them, at most m everywhere.
    """
    ell, m, s_c = plan.length, plan.m, plan.s_cycle
    target = [0] * ell
    start = 1 + (ell - 1 - s_c) // 2
    left = units
    for p in range(start, start + s_c):
        target[p] = min(m, left)
        left -= target[p]
    spill = []
    for d in range(ell):
        for p in (start + s_c + d, start - 1 - d):
            if 1 <= p <= ell - 1 and p not in spill and not start <= p < start + s_c:
                spill.append(p)
    for p in spill:
        if not left:
            break
        take = min(m, left)
        target[p] += take
        left -= take
    if left:
        raise PreconditionViolated(f"{units} revolutionaries do not fit beside S at {m} per vertex")
    return target


def _shorten(plan: StrikePlan, rev: Sequence[int], x: int) -> Tuple[Counts, bool]:
    """
    One step of packing the arc that avoids x. Units are matched to targets in arc order
    and each moves one step toward its target, which keeps every vertex at most m.
    Returns the new counts and whether the s meetings are in place.
    """
    cycle, ell, m = plan.cycle, plan.length, plan.m
    i = cycle_positions(cycle)[x]
    arc = [cycle[(i + p) % ell] for p in range(ell)]
    positions = [p for p in range(1, ell) for _ in range(rev[arc[p]])]
    target = _arc_targets(plan, len(positions))
    goals = [p for p in range(1, ell) for _ in range(target[p])]

    out = list(rev)
    for p in range(1, ell):
        out[arc[p]] = 0
    for p, q in zip(positions, goals):
        step = p + (q > p) - (q < p)
        out[arc[step]] += 1
    start = 1 + (ell - 1 - plan.s_cycle) // 2
    formed = all(out[arc[p]] >= m for p in range(start, start + plan.s_cycle))
    return tuple(out), formed


def long_cycle_step(g: Graph, plan: StrikePlan, state: RevStrategyState, rev: Counts) -> Tuple[Counts, RevStrategyState]:
    """
    One revolutionary move on the cycle given where S stands. S guarding two or more
    units means Distract, otherwise Shorten until the meetings are formed (Strike).
    """
    x = state.spy_at
    if x is None:
        x = min(plan.cycle, key=lambda v: (rev[v], v))
    guarded = rev[x]
    if guarded >= 2 and state.spy_at is not None:
        new_rev = _distract(g, plan, rev, x)
        phase = DISTRACT
    else:
        new_rev, formed = _shorten(plan, rev, x)
        phase = STRIKE if formed else SHORTEN
    return new_rev, RevStrategyState(
        phase=phase, spy_at=state.spy_at, guarded=guarded, k=state.k, round_index=state.round_index + 1,
    )


def unicyclic_rev_step(g: Graph, plan: StrikePlan, state: RevStrategyState, rev: Counts) -> Tuple[Counts, RevStrategyState]:
    """The flooded off-cycle meetings never move; the cycle plays `long_cycle_step`."""
    new_rev, state = long_cycle_step(g, plan, state, rev)
    for v in plan.sites:
        if new_rev[v] != rev[v]:
            raise PreconditionViolated(f"flooded meeting at {v} moved")
    return new_rev, state


class CycleStrikeRevAgent(RevAgent):
    """
    Wins against floor(r/m) spies on cycles of length at least s+3 and on unicyclic
    graphs with l >= max(s-t+3, 4), m not dividing r. With more than s meetings'
    worth of revolutionaries it just floods.
    """
    name = "strike"

    def __init__(self):
        self.g: Optional[Graph] = None
        self.plan: Optional[StrikePlan] = None
        self.state: Optional[RevStrategyState] = None
        self.rev: Optional[Counts] = None
        self.distract_log: List[Tuple[int, int, int]] = []

    def place(self, g: Graph, cfg: GameConfig) -> Counts:
        self.g = g
        if cfg.r < cfg.m:
            raise PreconditionViolated(f"{cfg.r} revolutionaries cannot form a meeting of {cfg.m}")
        if cfg.r // cfg.m > cfg.s and g.n > cfg.s:
            self.rev = flood_placement(g, cfg.m, cfg.r)
            self.state = RevStrategyState(phase=DONE, spy_at=None, guarded=0, k=0)
            return self.rev
        self.rev, self.plan = unicyclic_rev_placement(g, cfg)
        self.state = RevStrategyState(phase="Flood", spy_at=None, guarded=0, k=len(self.plan.sites))
        logger.debug(f"Flooded {self.plan.sites} on {g.name}; {self.plan.s_cycle} spies left for the cycle")
        return self.rev

    def _designate(self, spy: Sequence[int]) -> Optional[int]:
        candidates = [v for v in self.plan.cycle if spy[v]]
        if not candidates:
            return None
        return min(candidates, key=lambda v: (self.rev[v], v))

    def observe_spies(self, before: Counts, after: Counts, flow: Optional[MoveFlow]) -> None:
        if self.plan is None:
            return
        spy_at = self.state.spy_at
        tracked = flow is not None and spy_at is not None
        if tracked:
            spy_at = track_unit(flow, spy_at)
        if spy_at is None or spy_at not in cycle_positions(self.plan.cycle):
            tracked = False
            spy_at = self._designate(after)
            if spy_at is not None:
                logger.debug(f"Designated the spy at {spy_at} as S")
        if self.state.phase == DISTRACT and tracked:
            self.distract_log.append((self.state.round_index, self.state.guarded, self.rev[spy_at]))
        self.state = RevStrategyState(
            phase=self.state.phase, spy_at=spy_at, guarded=self.state.guarded,
            k=self.state.k, round_index=self.state.round_index,
        )

    def move(self, position: Position) -> Counts:
        if self.state.phase == DONE:
            return position.rev
        self.rev, self.state = unicyclic_rev_step(self.g, self.plan, self.state, tuple(position.rev))
        return self.rev

    def distract_episodes(self) -> List[List[Tuple[int, int, int]]]:
        """Distract rounds grouped into maximal runs of consecutive rounds."""
        episodes: List[List[Tuple[int, int, int]]] = []
        for entry in self.distract_log:
            if episodes and episodes[-1][-1][0] == entry[0] - 1:
                episodes[-1].append(entry)
            else:
                episodes.append([entry])
        return episodes

    def annotate(self) -> str:
        if self.state is None:
            return ""
        at = "-" if self.state.spy_at is None else self.state.spy_at
        return f"phase={self.state.phase} S={at} guarded={self.state.guarded}"
