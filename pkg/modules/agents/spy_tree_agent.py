"""
Spy strategy on trees and forests.

Every vertex v holds floor(w(v)/m) - sum over children u of floor(w(u)/m) spies, where
w(v) counts the revolutionaries in the subtree of v. After a revolutionary move the
targets are restored bottom-up: each child u whose floor(w(u)/m) grew pulls that many
spies from its parent, each child whose value shrank pushes spies up. Forests get one
independent tree per component with budget floor(r_i/m).

A clipped ledger caps w(v) at m times the size of the subtree of v, so a tree never
asks for more spies than it has vertices.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from modules.agents.base import SpyStrategy
from modules.core.graph_core import Graph, RootedTree, components, root_tree
from modules.core.moves import Counts, MoveFlow, flow_from_unit_moves, validate_team_move
from modules.schemas.errors import IllegalMove, IllegalRevMove, InvariantBroken, SumMismatch
from modules.schemas.messages import GameConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TreeSpyState:
    """
    Ledger for one rooted tree. Vectors span the whole graph and are zero off the tree.
    `extra` spies sit at the root on top of its target.
    """
    root: int
    m: int
    w: Counts
    target: Counts
    spy: Counts
    extra: int = 0
    clipped: bool = False
    tree: Optional[RootedTree] = field(default=None, compare=False, hash=False, repr=False)


@dataclass
class AdjustmentPlan:
    delta: Dict[int, int]
    moves: List[Tuple[int, int]]
    state: TreeSpyState
    pulled: Dict[int, int] = field(default_factory=dict)
    pushed: Dict[int, int] = field(default_factory=dict)


def subtree_weights(tree: RootedTree, rev: Sequence[int]) -> Counts:
    w = [0] * len(rev)
    for v in tree.postorder:
        w[v] = rev[v] + sum(w[u] for u in tree.children[v])
    return tuple(w)


def subtree_sizes(tree: RootedTree) -> Dict[int, int]:
    size: Dict[int, int] = {}
    for v in tree.postorder:
        size[v] = 1 + sum(size[u] for u in tree.children[v])
    return size


def ledger_weights(tree: RootedTree, rev: Sequence[int], m: int, clipped: bool = False) -> Counts:
    w = subtree_weights(tree, rev)
    if not clipped:
        return w
    size = subtree_sizes(tree)
    return tuple(min(x, m * size[v]) if v in size else x for v, x in enumerate(w))


def spy_targets(tree: RootedTree, w: Sequence[int], m: int) -> Counts:
    target = [0] * len(w)
    for v in tree.postorder:
        target[v] = w[v] // m - sum(w[u] // m for u in tree.children[v])
    return tuple(target)


def tree_budget(tree: RootedTree, rev: Sequence[int], m: int, clipped: bool = False) -> int:
    """Spies the ledger keeps inside the tree: floor(r_T/m), capped at |V(T)| when clipped."""
    r_tree = sum(rev[v] for v in tree.postorder)
    if clipped:
        return min(r_tree // m, len(tree.postorder))
    return r_tree // m


def check_tree_invariants(state: TreeSpyState) -> None:
    """Asserts the per-vertex targets and the subtree sums they add up to."""
    tree, m = state.tree, state.m
    below: Dict[int, int] = {}
    for v in tree.postorder:
        if state.target[v] < 0:
            raise InvariantBroken(f"negative target at {v}")
        expected = state.target[v] + (state.extra if v == state.root else 0)
        if state.spy[v] != expected:
            raise InvariantBroken(f"vertex {v} holds {state.spy[v]} spies, target {expected}")
        below[v] = state.target[v] + sum(below[u] for u in tree.children[v])
        if below[v] != state.w[v] // m:
            raise InvariantBroken(f"subtree of {v} holds {below[v]} targets, expected {state.w[v] // m}")


def tree_initial_placement(
    tree: RootedTree, rev: Sequence[int], m: int, extra: int = 0, clipped: bool = False,
) -> Tuple[Counts, TreeSpyState]:
    w = ledger_weights(tree, rev, m, clipped)
    target = spy_targets(tree, w, m)
    spy = list(target)
    spy[tree.root] += extra
    state = TreeSpyState(
        root=tree.root, m=m, w=w, target=target, spy=tuple(spy), extra=extra, clipped=clipped, tree=tree,
    )
    return tuple(spy), state


def plan_tree_adjustment(
    state: TreeSpyState,
    new_rev: Sequence[int],
    inflow: int = 0,
    outflow_to: Sequence[int] = (),
) -> AdjustmentPlan:
    """
    Restores the targets for `new_rev`. `inflow` spies arrive at the root from outside
    the tree and one root spy leaves to each vertex of `outflow_to`; both are for
    composite strategies. The returned moves cover every spy that started in the tree.
    """
    tree, m = state.tree, state.m
    root = tree.root
    w2 = ledger_weights(tree, new_rev, m, state.clipped)
    target2 = spy_targets(tree, w2, m)
    delta = {v: w2[v] // m - state.w[v] // m for v in tree.postorder}
    outflow = len(outflow_to)
    extra2 = state.extra + inflow - outflow - delta[root]
    if extra2 < 0:
        raise InvariantBroken(f"root {root} short by {-extra2} spies after external moves")

    moves: List[Tuple[int, int]] = []
    pulled_by: Dict[int, int] = {}
    pushed_to: Dict[int, int] = {}
    spy2 = [0] * len(new_rev)
    for v in tree.postorder:
        originals = state.spy[v]
        kids = tree.children[v]
        pulled = sum(delta[u] for u in kids if delta[u] > 0)
        arriving = sum(-delta[u] for u in kids if delta[u] < 0)
        up = -delta[v] if v != root and delta[v] < 0 else 0
        out = outflow if v == root else 0
        final = target2[v] + (extra2 if v == root else 0)
        if pulled > originals:
            raise InvariantBroken(f"children of {v} need {pulled} spies, only {originals} at {v}")
        if arriving > final:
            raise InvariantBroken(f"{arriving} spies pushed up to {v}, target only {final}")
        if pulled + up + out > originals:
            raise InvariantBroken(f"vertex {v} must send {pulled + up + out} spies, holds {originals}")
        for u in kids:
            if delta[u] > 0:
                moves.extend([(v, u)] * delta[u])
        if up:
            moves.extend([(v, tree.parent[v])] * up)
        if out:
            moves.extend((v, u) for u in outflow_to)
        moves.extend([(v, v)] * (originals - pulled - up - out))
        spy2[v] = final
        pulled_by[v] = pulled
        pushed_to[v] = arriving

    new_state = TreeSpyState(
        root=root, m=m, w=w2, target=target2, spy=tuple(spy2), extra=extra2, clipped=state.clipped, tree=tree,
    )
    arrived = [0] * len(new_rev)
    for _, v in moves:
        if v in tree.children:
            arrived[v] += 1
    arrived[root] += inflow
    for v in tree.postorder:
        if arrived[v] != spy2[v]:
            raise InvariantBroken(f"adjustment leaves {arrived[v]} spies at {v}, target {spy2[v]}")
    return AdjustmentPlan(delta=delta, moves=moves, state=new_state, pulled=pulled_by, pushed=pushed_to)


def tree_update(state: TreeSpyState, new_rev: Sequence[int]) -> Tuple[MoveFlow, TreeSpyState]:
    plan = plan_tree_adjustment(state, new_rev)
    if plan.delta[state.root]:
        raise IllegalRevMove(f"revolutionaries entered or left the tree rooted at {state.root}")
    return flow_from_unit_moves(len(new_rev), plan.moves), plan.state


@dataclass(frozen=True)
class ForestAllocation:
    spy: Counts
    configs: Tuple[GameConfig, ...]
    states: Tuple[TreeSpyState, ...]
    surplus: int = 0

    @property
    def needed(self) -> int:
        return sum(cfg.s for cfg in self.configs) - self.surplus


def forest_allocate(
    trees: Sequence[RootedTree], rev: Sequence[int], m: int, s: Optional[int] = None, clipped: bool = False,
) -> ForestAllocation:
    """
    One GameConfig and tree ledger per component. Component i gets tree_budget spies;
    with `s` given, spare spies are parked on the first root.
    """
    budgets = [tree_budget(tree, rev, m, clipped) for tree in trees]
    surplus = 0 if s is None or not trees else max(0, s - sum(budgets))
    spy = [0] * len(rev)
    states = []
    for i, tree in enumerate(trees):
        placed, state = tree_initial_placement(tree, rev, m, extra=surplus if i == 0 else 0, clipped=clipped)
        states.append(state)
        for v in tree.postorder:
            spy[v] += placed[v]
    configs = tuple(
        GameConfig(m=m, r=sum(rev[v] for v in tree.postorder), s=budget + (surplus if i == 0 else 0))
        for i, (tree, budget) in enumerate(zip(trees, budgets))
    )
    return ForestAllocation(spy=tuple(spy), configs=configs, states=tuple(states), surplus=surplus)


def truncated_placement(targets: Sequence[int], s: int) -> Counts:
    """Fills targets in label order until the s available spies run out."""
    spy = [0] * len(targets)
    left = s
    for v, k in enumerate(targets):
        take = min(k, left)
        spy[v] = take
        left -= take
    return tuple(spy)


@dataclass(frozen=True)
class ForestSpyState:
    rev: Counts
    spy: Counts
    trees: Tuple[TreeSpyState, ...] = ()
    deficit: bool = False


class TreeSpyStrategy(SpyStrategy):
    """
    Forest strategy with floor(r_i/m) spies per component. With fewer spies than the
    targets need, spies take targets in label order and then stand still.
    """
    name = "tree"

    def __init__(self, g: Graph, cfg: GameConfig, validate_moves: bool = True):
        super().__init__(g, cfg)
        self.validate_moves = validate_moves
        self.trees = [root_tree(g, comp[0]) for comp in components(g)]

    def initial(self, rev: Counts) -> Tuple[Counts, ForestSpyState]:
        m, s = self.cfg.m, self.cfg.s
        allocation = forest_allocate(self.trees, rev, m, s)
        if s < allocation.needed:
            logger.debug(f"{s} spies cannot cover {allocation.needed} targets on {self.g.name}")
            spy = truncated_placement(allocation.spy, s)
            return spy, ForestSpyState(rev=tuple(rev), spy=spy, deficit=True)
        return allocation.spy, ForestSpyState(rev=tuple(rev), spy=allocation.spy, trees=allocation.states)

    def step(self, state: ForestSpyState, new_rev: Counts) -> Tuple[Counts, ForestSpyState, MoveFlow]:
        if self.validate_moves:
            try:
                validate_team_move(self.g, state.rev, new_rev)
            except (IllegalMove, SumMismatch) as e:
                raise IllegalRevMove(str(e))
        if state.deficit:
            return state.spy, ForestSpyState(rev=tuple(new_rev), spy=state.spy, deficit=True), MoveFlow.identity(state.spy)
        moves: List[Tuple[int, int]] = []
        updated = []
        for tree_state in state.trees:
            plan = plan_tree_adjustment(tree_state, new_rev)
            if plan.delta[tree_state.root]:
                raise IllegalRevMove(f"revolutionaries crossed into the component of {tree_state.root}")
            moves.extend(plan.moves)
            updated.append(plan.state)
        flow = flow_from_unit_moves(self.g.n, moves)
        spy = flow.after()
        return spy, ForestSpyState(rev=tuple(new_rev), spy=spy, trees=tuple(updated)), flow

    def annotate(self, state: ForestSpyState) -> str:
        if state.deficit:
            return "deficit"
        w = [0] * self.g.n
        target = [0] * self.g.n
        for tree_state in state.trees:
            for v in tree_state.tree.postorder:
                w[v] = tree_state.w[v]
                target[v] = tree_state.target[v]
        return f"w={','.join(map(str, w))} target={','.join(map(str, target))}"
