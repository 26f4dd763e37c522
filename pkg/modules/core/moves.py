"""
Move legality for one team: every unit stays put or crosses a single edge.
"""
import logging
from typing import Dict, FrozenSet, Iterator, List, Sequence, Set, Tuple

import networkx as nx
from pydantic import BaseModel, ConfigDict, Field

from modules.core.graph_core import Graph
from modules.schemas.errors import IllegalMove, SumMismatch

logger = logging.getLogger(__name__)

Counts = Tuple[int, ...]


class MoveFlow(BaseModel):
    """
    A team move as unit flows: `stay[v]` units remain at v, `traverse[(u, v)]` units cross u->v.
    """
    model_config = ConfigDict(frozen=True)

    stay: Tuple[int, ...] = Field(description="Units that do not move, per vertex.")
    traverse: Dict[Tuple[int, int], int] = Field(default_factory=dict, description="Units crossing each directed edge.")

    @classmethod
    def identity(cls, counts: Sequence[int]) -> "MoveFlow":
        return cls(stay=tuple(counts), traverse={})

    def before(self) -> Counts:
        out = list(self.stay)
        for (u, _), k in self.traverse.items():
            out[u] += k
        return tuple(out)

    def after(self) -> Counts:
        out = list(self.stay)
        for (_, v), k in self.traverse.items():
            out[v] += k
        return tuple(out)

    def moved_units(self) -> int:
        return sum(self.traverse.values())


def _flow_network(g: Graph, before: Sequence[int], after: Sequence[int]) -> nx.DiGraph:
    net = nx.DiGraph()
    for v in range(g.n):
        if before[v]:
            net.add_edge("src", ("b", v), capacity=before[v], weight=0)
        if after[v]:
            net.add_edge(("a", v), "sink", capacity=after[v], weight=0)
    for v in range(g.n):
        if not before[v]:
            continue
        if after[v]:
            net.add_edge(("b", v), ("a", v), capacity=before[v], weight=0)
        for u in g.adjacency[v]:
            if after[u]:
                net.add_edge(("b", v), ("a", u), capacity=before[v], weight=1)
    return net


def validate_team_move(g: Graph, before: Sequence[int], after: Sequence[int]) -> MoveFlow:
    """
    Returns a witness flow for before -> after. The witness moves as few units as
    possible, so it is canonical enough to track individual units across rounds.
    """
    if len(before) != g.n or len(after) != g.n:
        raise SumMismatch(f"count vectors must have length {g.n}")
    if any(c < 0 for c in before) or any(c < 0 for c in after):
        raise IllegalMove("negative count")
    total = sum(before)
    if total != sum(after):
        raise SumMismatch(f"before sums to {total}, after sums to {sum(after)}")
    if tuple(before) == tuple(after):
        return MoveFlow.identity(before)
    if total == 0:
        return MoveFlow.identity(before)

    net = _flow_network(g, before, after)
    if "src" not in net or "sink" not in net:
        raise IllegalMove("no feasible assignment")
    flow = nx.max_flow_min_cost(net, "src", "sink")
    value = sum(flow["src"].values())
    if value != total:
        raise IllegalMove(f"only {value} of {total} units can be matched within one edge")

    stay = [0] * g.n
    traverse: Dict[Tuple[int, int], int] = {}
    for v in range(g.n):
        for target, k in flow.get(("b", v), {}).items():
            if not k:
                continue
            u = target[1]
            if u == v:
                stay[v] = k
            else:
                traverse[(v, u)] = k
    return MoveFlow(stay=tuple(stay), traverse=traverse)


def is_legal_move(g: Graph, before: Sequence[int], after: Sequence[int]) -> bool:
    try:
        validate_team_move(g, before, after)
    except (IllegalMove, SumMismatch):
        return False
    return True


def check_flow(g: Graph, flow: MoveFlow, before: Sequence[int], after: Sequence[int]) -> None:
    """
    Checks an explicit flow without solving anything: edges exist and both marginals match.
    """
    for (u, v), k in flow.traverse.items():
        if k < 0 or not g.has_edge(u, v):
            raise IllegalMove(f"flow uses non-edge {u}->{v}")
    if any(k < 0 for k in flow.stay):
        raise IllegalMove("negative stay count")
    if flow.before() != tuple(before):
        raise IllegalMove(f"flow leaves from {flow.before()}, expected {tuple(before)}")
    if flow.after() != tuple(after):
        raise IllegalMove(f"flow arrives at {flow.after()}, expected {tuple(after)}")


def unguarded_meetings(rev: Sequence[int], spy: Sequence[int], m: int) -> FrozenSet[int]:
    return frozenset(v for v in range(len(rev)) if rev[v] >= m and spy[v] == 0)


def meeting_vertices(rev: Sequence[int], m: int) -> List[int]:
    return [v for v, c in enumerate(rev) if c >= m]


def _splits(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _splits(total - first, parts - 1):
            yield (first,) + rest


def team_successors(g: Graph, counts: Sequence[int]) -> Set[Counts]:
    """
    Every count vector reachable in one half-round, the identity included.
    """
    partial: Set[Counts] = {tuple([0] * g.n)}
    for v in range(g.n):
        c = counts[v]
        if not c:
            continue
        targets = (v,) + g.adjacency[v]
        expanded: Set[Counts] = set()
        for base in partial:
            for split in _splits(c, len(targets)):
                vec = list(base)
                for u, k in zip(targets, split):
                    vec[u] += k
                expanded.add(tuple(vec))
        partial = expanded
    return partial


def compositions(total: int, n: int) -> Iterator[Counts]:
    """All count vectors of length n summing to total, in lexicographically decreasing order."""
    if n == 0:
        if total == 0:
            yield ()
        return
    for first in range(total, -1, -1):
        for rest in compositions(total - first, n - 1):
            yield (first,) + rest


def unit_locations(counts: Sequence[int]) -> List[int]:
    """Expands a count vector into one vertex per unit, sorted."""
    return [v for v, c in enumerate(counts) for _ in range(c)]


def counts_from_locations(locations: Sequence[int], n: int) -> Counts:
    out = [0] * n
    for v in locations:
        out[v] += 1
    return tuple(out)


def flow_from_unit_moves(n: int, moves: Sequence[Tuple[int, int]]) -> MoveFlow:
    """Aggregates per-unit (from, to) pairs into a MoveFlow."""
    stay = [0] * n
    traverse: Dict[Tuple[int, int], int] = {}
    for u, v in moves:
        if u == v:
            stay[u] += 1
        else:
            traverse[(u, v)] = traverse.get((u, v), 0) + 1
    return MoveFlow(stay=tuple(stay), traverse=traverse)


def track_unit(flow: MoveFlow, v: int) -> int:
    """
    Where a unit that was at v went under `flow`: stay if anyone stayed, else the
    smallest target.
    """
    if flow.stay[v]:
        return v
    targets = sorted(u for (w, u), k in flow.traverse.items() if w == v and k)
    if not targets:
        raise IllegalMove(f"no unit left {v}")
    return targets[0]

