"""
Spy strategies on a cycle.

Follower: with ceil(r/m) spies, units (revolutionaries plus stationary pads) are indexed
in cyclic order and spy i stays with unit i*m. Each round the new unit positions are
re-indexed so every index moves at most one step, and spies follow their index.

Short cycle: with floor(r/m) spies and l <= s+2, spies sit on distinct vertices and at
most two vertices are unguarded; each round the spies shift one step to uncover two
vertices without a meeting.
"""
import logging
from dataclasses import dataclass
from itertools import combinations
from typing import Dict, FrozenSet, Hashable, Iterable, List, Optional, Sequence, Tuple

import networkx as nx

from modules.agents.base import SpyStrategy
from modules.core.graph_core import Graph, GraphClass, classify, find_cycle
from modules.core.moves import Counts, MoveFlow, flow_from_unit_moves, meeting_vertices, validate_team_move
from modules.schemas.errors import (
    IllegalMove,
    IllegalRevMove,
    InvariantBroken,
    NoValidReindexing,
    PreconditionViolated,
    RevOffCycle,
    SumMismatch,
)
from modules.schemas.messages import GameConfig

logger = logging.getLogger(__name__)


def ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def lift_sorted(positions: Iterable[int], start: int, length: int) -> Tuple[int, ...]:
    """Cyclic order beginning at `start`; positions before it are lifted by one lap."""
    positions = list(positions)
    head = sorted(p for p in positions if p >= start)
    tail = sorted(p + length for p in positions if p < start)
    return tuple(head + tail)


def realign(old: Sequence[int], new_positions: Iterable[int], length: int) -> Optional[Tuple[int, ...]]:
    """
    Finds a cyclic indexing of `new_positions` in which index i lies within one step of
    old[i] (both lifted). Rotations are tried in increasing order; None if none works.
    The result is normalized so its first entry lies in [0, length).
    """
    q = sorted(new_positions)
    size = len(old)
    if size != len(q):
        raise NoValidReindexing(f"{size} indexed units but {len(q)} new positions")
    if size == 0:
        return ()
    for k in range(size):
        lap = (old[0] + 1 - q[k]) // length
        lifted = [q[(i + k) % size] + length * ((i + k) // size + lap) for i in range(size)]
        if all(abs(a - b) <= 1 for a, b in zip(old, lifted)):
            shift = (lifted[0] // length) * length
            return tuple(x - shift for x in lifted)
    return None


@dataclass(frozen=True)
class CycleSpyState:
    """
    `positions` holds the lifted cycle index of every unit in index order; spy i
    follows unit i*m. Pads are stationary units at cycle index `pad_at`.
    """
    cycle: Tuple[int, ...]
    m: int
    positions: Tuple[int, ...]
    pad_at: int
    pads: int
    rev: Counts
    extra_spies: int = 0

    @property
    def length(self) -> int:
        return len(self.cycle)

    def spy_indices(self) -> List[int]:
        return [self.positions[i] % self.length for i in range(0, len(self.positions), self.m)]


def _spy_counts(state: CycleSpyState, n: int) -> Counts:
    spy = [0] * n
    for p in state.spy_indices():
        spy[state.cycle[p]] += 1
    spy[state.cycle[state.pad_at]] += state.extra_spies
    return tuple(spy)


def _cycle_units(cycle: Sequence[int], rev: Sequence[int]) -> List[int]:
    index = {v: i for i, v in enumerate(cycle)}
    units = []
    for v, c in enumerate(rev):
        if not c:
            continue
        if v not in index:
            raise RevOffCycle(f"{c} revolutionaries at off-cycle vertex {v}")
        units.extend([index[v]] * c)
    return units


def cycle_initial_placement(cycle: Sequence[int], rev: Sequence[int], m: int, s: int) -> Tuple[Counts, CycleSpyState]:
    """
    Indexes the units from the smallest-label occupied vertex and puts spy i on unit i*m.
    With more spies than ceil(r/m), the surplus is parked at the pad vertex.
    """
    r = sum(rev)
    units = _cycle_units(cycle, rev)
    needed = ceil_div(r, m)
    if s < needed:
        raise PreconditionViolated(f"follower needs {needed} spies, got {s}")
    active = needed if r else 0
    occupied = [v for v in range(len(rev)) if rev[v]]
    start_vertex = min(occupied) if occupied else min(cycle)
    pad_at = list(cycle).index(start_vertex)
    pads = active * m - r
    positions = lift_sorted(units + [pad_at] * pads, pad_at, len(cycle))
    state = CycleSpyState(
        cycle=tuple(cycle), m=m, positions=positions, pad_at=pad_at, pads=pads,
        rev=tuple(rev), extra_spies=s - active,
    )
    return _spy_counts(state, len(rev)), state


def cycle_reindex(state: CycleSpyState, new_rev: Sequence[int]) -> Tuple[MoveFlow, CycleSpyState]:
    units = _cycle_units(state.cycle, new_rev) + [state.pad_at] * state.pads
    new_positions = realign(state.positions, units, state.length)
    if new_positions is None:
        raise NoValidReindexing(f"no index alignment for {tuple(new_rev)} from {state.positions}")
    new_state = CycleSpyState(
        cycle=state.cycle, m=state.m, positions=new_positions, pad_at=state.pad_at, pads=state.pads,
        rev=tuple(new_rev), extra_spies=state.extra_spies,
    )
    moves = [(state.cycle[a], state.cycle[b]) for a, b in zip(state.spy_indices(), new_state.spy_indices())]
    park = state.cycle[state.pad_at]
    moves.extend([(park, park)] * state.extra_spies)
    return flow_from_unit_moves(len(new_rev), moves), new_state


def min_move_assignment(
    g: Graph, sources: Sequence[int], targets: Sequence[int],
) -> Optional[List[Tuple[int, int]]]:
    """
    Sends one spy from each source vertex (with multiplicity) to each target vertex
    (with multiplicity) along at most one edge, moving as few spies as possible.
    None when no such assignment exists.
    """
    if len(sources) != len(targets):
        return None
    supply: Dict[int, int] = {}
    for v in sources:
        supply[v] = supply.get(v, 0) + 1
    demand: Dict[int, int] = {}
    for v in targets:
        demand[v] = demand.get(v, 0) + 1
    net = nx.DiGraph()
    for v, k in supply.items():
        net.add_edge("src", ("s", v), capacity=k, weight=0)
        for u in (v,) + g.adjacency[v]:
            if u in demand:
                net.add_edge(("s", v), ("t", u), capacity=k, weight=0 if u == v else 1)
    for u, k in demand.items():
        net.add_edge(("t", u), "sink", capacity=k, weight=0)
    if not sources:
        return []
    if "sink" not in net:
        return None
    flow = nx.max_flow_min_cost(net, "src", "sink")
    if sum(flow["src"].values()) != len(sources):
        return None
    moves = []
    for v in sorted(supply):
        for target, k in sorted(flow[("s", v)].items(), key=lambda kv: kv[0][1]):
            moves.extend([(v, target[1])] * k)
    return moves


@dataclass(frozen=True)
class ShortCycleState:
    """Spies on the distinct cycle vertices `guarded`; surplus spies parked at `park`."""
    cycle: Tuple[int, ...]
    guarded: FrozenSet[int]
    park: int
    extra_spies: int
    rev: Counts


def _short_counts(state: ShortCycleState, n: int) -> Counts:
    spy = [0] * n
    for v in state.guarded:
        spy[v] += 1
    spy[state.park] += state.extra_spies
    return tuple(spy)


def short_cycle_initial(g: Graph, cycle: Sequence[int], rev: Sequence[int], m: int, s: int) -> Tuple[Counts, ShortCycleState]:
    length = len(cycle)
    if length > s + 2:
        raise PreconditionViolated(f"cycle length {length} exceeds s+2={s + 2}")
    meetings = [v for v in meeting_vertices(rev, m) if v in cycle]
    if len(meetings) > s:
        raise PreconditionViolated(f"{len(meetings)} meetings against {s} spies")
    active = min(s, length)
    others = sorted(v for v in cycle if v not in meetings)
    guarded = frozenset(meetings + others[:active - len(meetings)])
    park = min(guarded) if guarded else min(cycle)
    state = ShortCycleState(cycle=tuple(cycle), guarded=guarded, park=park, extra_spies=s - active, rev=tuple(rev))
    return _short_counts(state, len(rev)), state


def short_cycle_respond(
    g: Graph, state: ShortCycleState, new_rev: Sequence[int], m: int, covered: FrozenSet[int] = frozenset(),
) -> Tuple[MoveFlow, ShortCycleState]:
    """
    Chooses the new unguarded vertices among those without a meeting, preferring
    choices that change the unguarded set least, then smallest labels. Meetings on
    `covered` vertices are guarded by someone else.
    """
    vertices = sorted(state.cycle)
    meetings = {v for v in meeting_vertices(new_rev, m) if v in state.cycle and v not in covered}
    unguarded = [v for v in vertices if v not in state.guarded]
    free = [v for v in vertices if v not in meetings]
    candidates = sorted(
        combinations(free, len(unguarded)),
        key=lambda c: (len(set(c) - set(unguarded)), c),
    )
    sources = sorted(state.guarded)
    for choice in candidates:
        targets = [v for v in vertices if v not in choice]
        moves = min_move_assignment(g, sources, targets)
        if moves is None:
            continue
        moves.extend([(state.park, state.park)] * state.extra_spies)
        new_state = ShortCycleState(
            cycle=state.cycle, guarded=frozenset(targets), park=state.park, extra_spies=state.extra_spies, rev=tuple(new_rev),
        )
        return flow_from_unit_moves(len(new_rev), moves), new_state
    raise InvariantBroken(f"no shift of the spies {sources} guards the meetings {sorted(meetings)}")


@dataclass(frozen=True)
class IdleState:
    spy: Counts
    rev: Counts


class CycleSpyStrategy(SpyStrategy):
    """
    Picks the follower when s >= ceil(r/m), the short-cycle rule when l <= s+2, and
    stands still when r < m.
    """
    name = "cycle"

    def __init__(self, g: Graph, cfg: GameConfig, validate_moves: bool = True):
        super().__init__(g, cfg)
        if classify(g) != GraphClass.CYCLE:
            raise PreconditionViolated(f"{g.name} is not a cycle")
        self.validate_moves = validate_moves
        self.cycle = find_cycle(g)
        m, r, s = cfg.m, cfg.r, cfg.s
        if r < m:
            self.mode = "Idle"
        elif s >= ceil_div(r, m):
            self.mode = "Follower"
        elif len(self.cycle) <= s + 2 and r // m <= s:
            self.mode = "Short"
        else:
            raise PreconditionViolated(f"cycle of length {len(self.cycle)} needs more than {s} spies")
        logger.debug(f"Cycle strategy on {g.name} in {self.mode} mode")

    def initial(self, rev: Counts) -> Tuple[Counts, Hashable]:
        m, s = self.cfg.m, self.cfg.s
        if self.mode == "Idle":
            spy = tuple(s if v == self.cycle[0] else 0 for v in range(self.g.n))
            return spy, IdleState(spy=spy, rev=tuple(rev))
        if self.mode == "Follower":
            return cycle_initial_placement(self.cycle, rev, m, s)
        return short_cycle_initial(self.g, self.cycle, rev, m, s)

    def step(self, state: Hashable, new_rev: Counts) -> Tuple[Counts, Hashable, MoveFlow]:
        if self.validate_moves:
            try:
                validate_team_move(self.g, state.rev, new_rev)
            except (IllegalMove, SumMismatch) as e:
                raise IllegalRevMove(str(e))
        if isinstance(state, IdleState):
            return state.spy, IdleState(spy=state.spy, rev=tuple(new_rev)), MoveFlow.identity(state.spy)
        if isinstance(state, CycleSpyState):
            flow, new_state = cycle_reindex(state, new_rev)
        else:
            flow, new_state = short_cycle_respond(self.g, state, new_rev, self.cfg.m)
        return flow.after(), new_state, flow

    def annotate(self, state: Hashable) -> str:
        if isinstance(state, CycleSpyState):
            return f"mode={self.mode} indices={','.join(map(str, state.positions))}"
        if isinstance(state, ShortCycleState):
            return f"mode={self.mode} unguarded={','.join(str(v) for v in self.cycle if v not in state.guarded)}"
        return f"mode={self.mode}"
