"""
Spy strategies on unicyclic graphs, connected or not.

Components without the cycle are played as independent clipped trees with
min(floor(r_H/m), |V(H)|) spies. The cycle component runs in one of four modes,
fixed at placement:

  Large  s >= ceil(r/m). Cycle units (revolutionaries, fakes, pads) are indexed as on a
         plain cycle; a revolutionary entering an attached tree leaves a fake behind at
         the mate, and whenever a tree needs another spy, the m units at the mate that
         include it are dropped from the index and their spy steps into the tree.
  Case2  triangle with floor(r/m) spies. The three trees of G - E(C) are played
         independently; spies freed in one tree hop to a root that needs them.
  Case1  floor(r/m) spies, more spies than off-cycle vertices. Each attached tree T owns
         |V(T)| spies: its clipped ledger inside T and the rest in reserve at the mate.
         The remaining cycle spies stand on distinct cycle vertices and shift to cover
         meetings without a reserve. When every other cycle vertex holds a meeting, one
         reserve spy is lent to a cycle neighbor of its mate and returns afterwards.
  Idle   fewer than m revolutionaries; nothing ever needs guarding.
"""
import logging
from bisect import bisect_right
from dataclasses import dataclass
from typing import Dict, Hashable, List, Optional, Sequence, Tuple

import networkx as nx

from modules.agents.base import SpyStrategy
from modules.agents.spy_cycle_agent import ceil_div, lift_sorted, realign
from modules.agents.spy_tree_agent import (
    TreeSpyState,
    forest_allocate,
    plan_tree_adjustment,
    subtree_weights,
    tree_budget,
    tree_initial_placement,
)
from modules.core.graph_core import Graph, GraphClass, classify, decompose_unicyclic, root_tree
from modules.core.moves import Counts, MoveFlow, flow_from_unit_moves, validate_team_move
from modules.schemas.errors import (
    CycleConditionBroken,
    IllegalMove,
    IllegalRevMove,
    InvariantBroken,
    NoValidReindexing,
    PreconditionViolated,
    SumMismatch,
)
from modules.schemas.messages import GameConfig

logger = logging.getLogger(__name__)

Moves = List[Tuple[int, int]]


@dataclass(frozen=True)
class LargeModeState:
    """
    Lifted cycle positions of the indexed units (spy i follows unit i*m), the pad
    placement, and one ledger per attached tree.
    """
    positions: Tuple[int, ...]
    pad_at: int
    pads: int
    trees: Tuple[TreeSpyState, ...]
    rev: Counts


@dataclass(frozen=True)
class TriangleState:
    trees: Tuple[TreeSpyState, ...]
    rev: Counts


@dataclass(frozen=True)
class ReserveState:
    """
    Clipped ledgers of the attached trees, the cycle spies (distinct vertices, sorted),
    cycle spies beyond one per vertex parked at the first cycle vertex, and the reserve
    spy on loan as (mate, position).
    """
    trees: Tuple[TreeSpyState, ...]
    cycle_spies: Tuple[int, ...]
    parked: int
    lent: Optional[Tuple[int, int]]
    rev: Counts


@dataclass(frozen=True)
class IdleCoreState:
    spy: Counts
    rev: Counts


@dataclass(frozen=True)
class UnicyclicSpyState:
    mode: str
    rev: Counts
    spy: Counts
    core: Hashable
    forest: Tuple[TreeSpyState, ...] = ()


class UnicyclicSpyStrategy(SpyStrategy):
    name = "unicyclic"

    def __init__(self, g: Graph, cfg: GameConfig, validate_moves: bool = True):
        super().__init__(g, cfg)
        if classify(g) not in (GraphClass.CYCLE, GraphClass.UNICYCLIC, GraphClass.UNICYCLIC_FOREST):
            raise PreconditionViolated(f"{g.name} is {classify(g).value}, not unicyclic")
        self.validate_moves = validate_moves
        dec = decompose_unicyclic(g)
        self.cycle = dec.cycle
        self.length = len(dec.cycle)
        self.cycle_index = {v: i for i, v in enumerate(dec.cycle)}
        self.attached = dec.cycle_component_trees()
        self.detached = [a.tree for a in dec.detached_trees()]
        self.component = sorted(set(dec.cycle) | {v for a in self.attached for v in a.tree.postorder})
        self.t_component = len(self.component) - self.length
        self._shifts: Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], Moves] = {}
        self.triangle_trees = []
        if self.length == 3:
            cycle_set = frozenset(self.cycle)
            self.triangle_trees = [root_tree(g, v, exclude=cycle_set - {v}) for v in self.cycle]

    # ---- mode selection -------------------------------------------------

    def choose_mode(self, r_c: int, s_c: int) -> str:
        m = self.cfg.m
        if r_c < m:
            return "Idle"
        if s_c >= ceil_div(r_c, m):
            return "Large"
        if s_c < r_c // m:
            raise PreconditionViolated(f"{s_c} spies cannot guard {r_c // m} meetings on the cycle component")
        if self.length == 3:
            return "Case2"
        if s_c > self.t_component and self.length <= s_c - self.t_component + 2:
            return "Case1"
        raise PreconditionViolated(
            f"cycle length {self.length} with t={self.t_component} needs ceil(r/m) spies, got {s_c}"
        )

    def initial(self, rev: Counts) -> Tuple[Counts, UnicyclicSpyState]:
        m, s = self.cfg.m, self.cfg.s
        allocation = forest_allocate(self.detached, rev, m, clipped=True)
        s_c = s - allocation.needed
        if s_c < 0:
            raise PreconditionViolated(f"{s} spies cannot cover {allocation.needed} off-cycle meetings")
        forest_spy, forest = allocation.spy, allocation.states
        r_c = sum(rev[v] for v in self.component)
        mode = self.choose_mode(r_c, s_c)
        logger.debug(f"Unicyclic strategy on {self.g.name}: mode={mode}, cycle spies budget {s_c}")
        if mode == "Large":
            core_spy, core = self._large_initial(rev, s_c)
        elif mode == "Case2":
            core_spy, core = self._triangle_initial(rev, s_c)
        elif mode == "Case1":
            core_spy, core = self._reserve_initial(rev, s_c)
        else:
            core_spy = tuple(s_c if v == self.cycle[0] else 0 for v in range(self.g.n))
            core = IdleCoreState(spy=core_spy, rev=tuple(rev))
        spy = tuple(a + b for a, b in zip(forest_spy, core_spy))
        return spy, UnicyclicSpyState(mode=mode, rev=tuple(rev), spy=spy, core=core, forest=forest)

    def step(self, state: UnicyclicSpyState, new_rev: Counts) -> Tuple[Counts, UnicyclicSpyState, MoveFlow]:
        new_rev = tuple(new_rev)
        if self.validate_moves:
            try:
                validate_team_move(self.g, state.rev, new_rev)
            except (IllegalMove, SumMismatch) as e:
                raise IllegalRevMove(str(e))
        moves: Moves = []
        forest = []
        for tree_state in state.forest:
            plan = plan_tree_adjustment(tree_state, new_rev)
            if plan.delta[tree_state.root]:
                raise IllegalRevMove(f"revolutionaries crossed into the component of {tree_state.root}")
            moves.extend(plan.moves)
            forest.append(plan.state)

        if state.mode == "Large":
            core_moves, core = self._large_step(state.core, new_rev)
        elif state.mode == "Case2":
            core_moves, core = self._triangle_step(state.core, new_rev)
        elif state.mode == "Case1":
            core_moves, core = self._reserve_step(state.core, new_rev)
        else:
            core_moves = [(v, v) for v, c in enumerate(state.core.spy) for _ in range(c)]
            core = IdleCoreState(spy=state.core.spy, rev=new_rev)
        moves.extend(core_moves)

        flow = flow_from_unit_moves(self.g.n, moves)
        spy = flow.after()
        if state.mode == "Large":
            self.check_cycle_condition(core, spy)
        return spy, UnicyclicSpyState(mode=state.mode, rev=new_rev, spy=spy, core=core, forest=tuple(forest)), flow

    # ---- Large mode -----------------------------------------------------

    def _tree_weights(self, rev: Sequence[int]) -> List[int]:
        return [sum(rev[v] for v in a.tree.postorder) for a in self.attached]

    def fakes(self, core: LargeModeState) -> Dict[int, int]:
        """Fake revolutionaries per mate vertex."""
        out: Dict[int, int] = {}
        for a, weight in zip(self.attached, self._tree_weights(core.rev)):
            out[a.mate] = out.get(a.mate, 0) + weight % self.cfg.m
        return out

    def _cycle_units(self, rev: Sequence[int], pad_at: int, pads: int) -> List[int]:
        units = [i for i, v in enumerate(self.cycle) for _ in range(rev[v])]
        for a, weight in zip(self.attached, self._tree_weights(rev)):
            units.extend([self.cycle_index[a.mate]] * (weight % self.cfg.m))
        units.extend([pad_at] * pads)
        return units

    def _large_spy(self, core: LargeModeState) -> Counts:
        spy = [0] * self.g.n
        for i in range(0, len(core.positions), self.cfg.m):
            spy[self.cycle[core.positions[i] % self.length]] += 1
        for tree_state in core.trees:
            for v in tree_state.tree.postorder:
                spy[v] += tree_state.spy[v]
        return tuple(spy)

    def _shadow(self, rev: Sequence[int], k: int) -> Counts:
        """Tree revolutionaries k steps along the path from their mate to where they stand."""
        vec = list(rev)
        for a in self.attached:
            for x in a.tree.postorder:
                vec[x] = 0
        for a in self.attached:
            for x in a.tree.postorder:
                if rev[x]:
                    path = [a.mate] + a.tree.path_from_root(x)
                    vec[path[min(k, len(path) - 1)]] += rev[x]
        return tuple(vec)

    def _large_initial(self, rev: Counts, s_c: int) -> Tuple[Counts, LargeModeState]:
        m = self.cfg.m
        start = self._shadow(rev, 0)
        r_c = sum(start[v] for v in self.cycle)
        occupied = [v for v in self.cycle if start[v]]
        pad_at = self.cycle_index[min(occupied) if occupied else min(self.cycle)]
        pads = m * s_c - r_c
        units = [i for i, v in enumerate(self.cycle) for _ in range(start[v])] + [pad_at] * pads
        trees = tuple(tree_initial_placement(a.tree, start, m)[1] for a in self.attached)
        core = LargeModeState(
            positions=lift_sorted(units, pad_at, self.length), pad_at=pad_at, pads=pads, trees=trees, rev=start,
        )
        depth = max((a.tree.depth(x) + 1 for a in self.attached for x in a.tree.postorder if rev[x]), default=0)
        for k in range(1, depth + 1):
            _, core = self._large_step(core, self._shadow(rev, k))
        if depth:
            logger.debug(f"Shadow start walked {depth} virtual rounds")
        return self._large_spy(core), core

    def _normalize(self, positions: List[int]) -> List[int]:
        if not positions:
            return positions
        lap = (positions[0] // self.length) * self.length
        return [p - lap for p in positions]

    def _remove_window(self, positions: List[int], origin: List[Optional[int]], p: int, size: int):
        """
        Drops `size` consecutive indexed units standing at cycle index p. The list is
        first rotated by a multiple of m so the window does not wrap.
        """
        m, total = self.cfg.m, len(positions)
        block = [i for i in range(total) if positions[i] % self.length == p]
        if len(block) < size:
            raise CycleConditionBroken(f"only {len(block)} units at {self.cycle[p]}, need {size}")
        if len(block) == total:
            start = 0
        else:
            members = set(block)
            start = next(i for i in block if (i - 1) % total not in members)
        shift = (start // m) * m
        positions = positions[shift:] + [x + self.length for x in positions[:shift]]
        origin = origin[shift:] + origin[:shift]
        w = start - shift
        leaving = [o for o in origin[w:w + size] if o is not None]
        positions = self._normalize(positions[:w] + positions[w + size:])
        origin = origin[:w] + origin[w + size:]
        return positions, origin, leaving

    def _insert_block(self, positions: List[int], origin: List[Optional[int]], p: int):
        m = self.cfg.m
        if not positions:
            return [p] * m, [None] * m
        y = positions[0] + (p - positions[0]) % self.length
        b = bisect_right(positions, y)
        return positions[:b] + [y] * m + positions[b:], origin[:b] + [None] * m + origin[b:]

    def _large_step(self, core: LargeModeState, new_rev: Counts) -> Tuple[Moves, LargeModeState]:
        m = self.cfg.m
        old_w = self._tree_weights(core.rev)
        new_w = self._tree_weights(new_rev)
        dq = [b // m - a // m for a, b in zip(old_w, new_w)]

        positions = list(core.positions)
        origin: List[Optional[int]] = [
            self.cycle[positions[i] % self.length] if i % m == 0 else None for i in range(len(positions))
        ]
        moves: Moves = []

        entering: Dict[int, List[int]] = {}
        returning: Dict[int, int] = {}
        for i, a in enumerate(self.attached):
            if dq[i] > 0:
                entering.setdefault(a.mate, []).extend([a.tree.root] * dq[i])
            elif dq[i] < 0:
                returning[a.mate] = returning.get(a.mate, 0) - dq[i]

        for mate in sorted(entering, key=self.cycle_index.get):
            roots = entering[mate]
            positions, origin, leaving = self._remove_window(positions, origin, self.cycle_index[mate], m * len(roots))
            if len(leaving) != len(roots):
                raise CycleConditionBroken(f"{len(leaving)} spies at {mate} for {len(roots)} tree entries")
            moves.extend((mate, root) for root in roots)

        units = self._cycle_units(new_rev, core.pad_at, core.pads)
        for mate, k in returning.items():
            p = self.cycle_index[mate]
            for _ in range(m * k):
                try:
                    units.remove(p)
                except ValueError:
                    raise CycleConditionBroken(f"not enough units at {mate} for a returning spy")

        realigned = realign(positions, units, self.length)
        if realigned is None:
            raise NoValidReindexing(f"no index alignment on the cycle for {new_rev}")
        positions = list(realigned)
        for i in range(0, len(positions), m):
            if origin[i] is None:
                raise CycleConditionBroken(f"index {i} lost its spy")
            moves.append((origin[i], self.cycle[positions[i] % self.length]))

        for mate in sorted(returning, key=self.cycle_index.get):
            for _ in range(returning[mate]):
                positions, origin = self._insert_block(positions, origin, self.cycle_index[mate])

        trees = []
        for i, (a, tree_state) in enumerate(zip(self.attached, core.trees)):
            plan = plan_tree_adjustment(
                tree_state, new_rev, inflow=max(dq[i], 0), outflow_to=[a.mate] * max(-dq[i], 0),
            )
            moves.extend(plan.moves)
            trees.append(plan.state)

        new_core = LargeModeState(
            positions=tuple(positions), pad_at=core.pad_at, pads=core.pads, trees=tuple(trees), rev=new_rev,
        )
        return moves, new_core

    def check_cycle_condition(self, core: LargeModeState, spy: Sequence[int]) -> None:
        """
        Units on the cycle (revolutionaries, fakes, pads) are m times the spies on the
        cycle, and the indexed positions are exactly those units.
        """
        m = self.cfg.m
        units = sorted(self._cycle_units(core.rev, core.pad_at, core.pads))
        indexed = sorted(p % self.length for p in core.positions)
        if units != indexed:
            raise CycleConditionBroken(f"indexed units {indexed} differ from units {units}")
        on_cycle = sum(spy[v] for v in self.cycle)
        if len(units) != m * on_cycle:
            raise CycleConditionBroken(f"{len(units)} units on the cycle against {on_cycle} spies")

    # ---- Case 2: triangle -------------------------------------------------

    def _triangle_initial(self, rev: Counts, s_c: int) -> Tuple[Counts, TriangleState]:
        allocation = forest_allocate(self.triangle_trees, rev, self.cfg.m, s_c)
        return allocation.spy, TriangleState(trees=allocation.states, rev=tuple(rev))

    def _triangle_step(self, core: TriangleState, new_rev: Counts) -> Tuple[Moves, TriangleState]:
        m = self.cfg.m
        deltas = [
            subtree_weights(ts.tree, new_rev)[ts.root] // m - ts.w[ts.root] // m for ts in core.trees
        ]
        spare = [ts.extra - d for ts, d in zip(core.trees, deltas)]
        inflow = [0] * 3
        outflow: List[List[int]] = [[], [], []]
        for i in range(3):
            need = -spare[i]
            for j in range(3):
                if need <= 0:
                    break
                if spare[j] <= 0:
                    continue
                k = min(need, spare[j])
                outflow[j].extend([core.trees[i].root] * k)
                spare[j] -= k
                inflow[i] += k
                need -= k
            if need > 0:
                raise InvariantBroken(f"tree at {core.trees[i].root} needs {need} more spies than the other roots free")
        moves: Moves = []
        trees = []
        for i, ts in enumerate(core.trees):
            plan = plan_tree_adjustment(ts, new_rev, inflow=inflow[i], outflow_to=outflow[i])
            moves.extend(plan.moves)
            trees.append(plan.state)
        return moves, TriangleState(trees=tuple(trees), rev=new_rev)

    # ---- Case 1: reserves and cycle spies ---------------------------------

    def reserves(self, trees: Sequence[TreeSpyState]) -> Dict[int, int]:
        """Spies each mate holds for its trees: |V(T)| minus the spies inside T."""
        m = self.cfg.m
        home: Dict[int, int] = {}
        for a, ts in zip(self.attached, trees):
            home[a.mate] = home.get(a.mate, 0) + len(a.tree.postorder) - ts.w[ts.root] // m
        return home

    def cycle_neighbors(self, v: int) -> Tuple[int, int]:
        i = self.cycle_index[v]
        return self.cycle[(i - 1) % self.length], self.cycle[(i + 1) % self.length]

    def unreserved_meetings(self, rev: Sequence[int], home: Dict[int, int]) -> List[int]:
        return [v for v in self.cycle if rev[v] >= self.cfg.m and not home.get(v, 0)]

    def _lender(self, home: Dict[int, int], rev: Sequence[int], needed: Sequence[int]) -> int:
        """The one mate still holding reserves, when every other cycle vertex is a meeting."""
        holders = [v for v in self.cycle if home.get(v, 0)]
        if len(holders) != 1 or len(needed) != self.length - 1:
            raise InvariantBroken(f"{len(needed)} unreserved cycle meetings with reserves at {holders}")
        v = holders[0]
        if rev[v] >= self.cfg.m and home[v] < 2:
            raise InvariantBroken(f"mate {v} holds a meeting and a single reserve spy")
        return v

    def _cycle_layout(self, needed: Sequence[int], current: Sequence[int], spots: int) -> Tuple[int, ...]:
        """`spots` distinct cycle vertices covering `needed`, keeping current ones first."""
        if len(needed) > spots:
            raise InvariantBroken(f"{len(needed)} unreserved cycle meetings for {spots} cycle spies")
        chosen = list(needed)
        for v in list(current) + list(self.cycle):
            if len(chosen) == spots:
                break
            if v not in chosen:
                chosen.append(v)
        return tuple(sorted(chosen))

    def shift_cycle_spies(self, current: Sequence[int], chosen: Sequence[int]) -> Moves:
        """Min-cost matching of cycle spies onto `chosen`; each stays or takes one cycle edge."""
        key = (tuple(current), tuple(chosen))
        if key in self._shifts:
            return list(self._shifts[key])
        wanted = set(chosen)
        net = nx.DiGraph()
        for v in current:
            net.add_edge("src", ("from", v), capacity=1, weight=0)
            for u in (v,) + self.cycle_neighbors(v):
                if u in wanted:
                    net.add_edge(("from", v), ("to", u), capacity=1, weight=0 if u == v else 1)
        for u in chosen:
            net.add_edge(("to", u), "sink", capacity=1, weight=0)
        flow = nx.max_flow_min_cost(net, "src", "sink")
        moves = [(v, u) for v in current for (_, u), k in flow.get(("from", v), {}).items() if k]
        if len(moves) != len(current):
            raise InvariantBroken(f"cycle spies at {list(current)} cannot reach {list(chosen)} in one step")
        self._shifts[key] = moves
        return list(moves)

    def _reserve_spy(self, core: ReserveState) -> Counts:
        spy = [0] * self.g.n
        for ts in core.trees:
            for v in ts.tree.postorder:
                spy[v] += ts.spy[v]
        for mate, k in self.reserves(core.trees).items():
            spy[mate] += k
        if core.lent:
            spy[core.lent[0]] -= 1
            spy[core.lent[1]] += 1
        for v in core.cycle_spies:
            spy[v] += 1
        spy[self.cycle[0]] += core.parked
        return tuple(spy)

    def _reserve_initial(self, rev: Counts, s_c: int) -> Tuple[Counts, ReserveState]:
        m = self.cfg.m
        trees = tuple(tree_initial_placement(a.tree, rev, m, clipped=True)[1] for a in self.attached)
        home = self.reserves(trees)
        spies = s_c - self.t_component
        spots = min(spies, self.length)
        needed = self.unreserved_meetings(rev, home)
        lent = None
        if len(needed) > spots:
            v = self._lender(home, rev, needed)
            lent = (v, next(u for u in self.cycle_neighbors(v) if u in needed))
            needed.remove(lent[1])
        core = ReserveState(
            trees=trees,
            cycle_spies=self._cycle_layout(needed, (), spots),
            parked=spies - spots,
            lent=lent,
            rev=tuple(rev),
        )
        return self._reserve_spy(core), core

    def _reserve_step(self, core: ReserveState, new_rev: Counts) -> Tuple[Moves, ReserveState]:
        m = self.cfg.m
        home = self.reserves(core.trees)
        moves: Moves = []
        trees = []
        pulled: Dict[int, int] = {}
        for a, ts in zip(self.attached, core.trees):
            d = tree_budget(a.tree, new_rev, m, clipped=True) - ts.w[ts.root] // m
            plan = plan_tree_adjustment(ts, new_rev, inflow=max(d, 0), outflow_to=[a.mate] * max(-d, 0))
            moves.extend(plan.moves)
            moves.extend([(a.mate, a.tree.root)] * max(d, 0))
            pulled[a.mate] = pulled.get(a.mate, 0) + max(d, 0)
            trees.append(plan.state)

        spots = len(core.cycle_spies)
        needed = self.unreserved_meetings(new_rev, self.reserves(trees))
        lent = None
        if len(needed) > spots:
            v = self._lender(self.reserves(trees), new_rev, needed)
            if core.lent is None:
                lent = (v, next(u for u in self.cycle_neighbors(v) if u in needed))
                logger.debug(f"Mate {v} lends a reserve spy to {lent[1]}")
            elif core.lent[0] == v and core.lent[1] in needed:
                lent = core.lent
            else:
                raise InvariantBroken(f"reserve spy on loan from {core.lent[0]} while {v} must lend")
            needed.remove(lent[1])

        for mate, k in home.items():
            stay = k - pulled.get(mate, 0)
            if core.lent and core.lent[0] == mate:
                stay -= 1
            if lent and core.lent is None and lent[0] == mate:
                stay -= 1
                moves.append(lent)
            if stay < 0:
                raise InvariantBroken(f"mate {mate} cannot feed its trees and the loan")
            moves.extend([(mate, mate)] * stay)
        if core.lent:
            moves.append((core.lent[1], core.lent[1] if lent == core.lent else core.lent[0]))

        chosen = self._cycle_layout(needed, core.cycle_spies, spots)
        moves.extend(self.shift_cycle_spies(core.cycle_spies, chosen))
        moves.extend([(self.cycle[0], self.cycle[0])] * core.parked)
        new_core = ReserveState(trees=tuple(trees), cycle_spies=chosen, parked=core.parked, lent=lent, rev=new_rev)
        return moves, new_core

    def annotate(self, state: UnicyclicSpyState) -> str:
        if state.mode == "Large":
            fakes = ",".join(f"{v}:{k}" for v, k in sorted(self.fakes(state.core).items()))
            indices = ",".join(map(str, state.core.positions))
            return f"fake={fakes} mode=Large indices={indices}"
        if state.mode == "Case2":
            extras = ",".join(f"{ts.root}:{ts.extra}" for ts in state.core.trees)
            return f"mode=Case2 extra={extras}"
        if state.mode == "Case1":
            lent = f"{state.core.lent[0]}>{state.core.lent[1]}" if state.core.lent else "-"
            return f"mode=Case1 cycle={','.join(map(str, state.core.cycle_spies))} lent={lent}"
        return f"mode={state.mode}"
