"""
Adversarial closure search: every legal revolutionary behavior against one
deterministic spy strategy, breadth first from every placement.
"""
import logging
from collections import deque
from typing import Deque, Dict, Hashable, List, Optional, Tuple

from modules.agents.base import SpyStrategy
from modules.core.graph_core import Graph
from modules.core.moves import Counts, check_flow, compositions, team_successors, unguarded_meetings, validate_team_move
from modules.schemas.errors import IllegalMove, StateSpaceTooLarge, StrategyError, SumMismatch
from modules.schemas.messages import GameConfig, Outcome, Transcript, TranscriptStep, VerifyResult
from modules.solver.exact_solver import DEFAULT_MAX_STATES

logger = logging.getLogger(__name__)

Node = Tuple[Counts, Hashable]


class _Failure(Exception):
    def __init__(self, rev: Counts, spy: Optional[Counts], outcome: Outcome, detail: str):
        self.rev = rev
        self.spy = spy
        self.outcome = outcome
        self.detail = detail


def _respond(g: Graph, cfg: GameConfig, strategy: SpyStrategy, state: Hashable, spy: Counts,
             new_rev: Counts, round_index: int) -> Tuple[Counts, Hashable]:
    """One strategy response with every check the engine would apply."""
    try:
        spy2, state2, flow = strategy.step(state, new_rev)
    except (StrategyError, IllegalMove) as e:
        raise _Failure(new_rev, None, Outcome(winner="Revolutionaries", reason="Forfeit",
                                              round_index=round_index, offender="S"), str(e))
    spy2 = tuple(spy2)
    try:
        if len(spy2) != g.n or sum(spy2) != cfg.s:
            raise SumMismatch(f"spy counts {spy2} do not sum to {cfg.s}")
        if flow is not None:
            check_flow(g, flow, spy, spy2)
        else:
            validate_team_move(g, spy, spy2)
    except (IllegalMove, SumMismatch) as e:
        raise _Failure(new_rev, spy2, Outcome(winner="Revolutionaries", reason="Forfeit",
                                              round_index=round_index, offender="S"), str(e))
    _check_guarded(cfg, new_rev, spy2, round_index)
    return spy2, state2


def _check_guarded(cfg: GameConfig, rev: Counts, spy: Counts, round_index: int) -> None:
    unguarded = unguarded_meetings(rev, spy, cfg.m)
    if unguarded:
        vertex = min(unguarded)
        raise _Failure(rev, spy, Outcome(winner="Revolutionaries", reason="UnguardedMeeting",
                                         vertex=vertex, round_index=round_index),
                       f"unguarded meeting at {vertex}")


def _transcript(g: Graph, cfg: GameConfig, path: List[Tuple[Counts, Counts]], failure: _Failure) -> Transcript:
    transcript = Transcript(graph_path=g.name, config=cfg)
    for round_index, (rev, spy) in enumerate(path):
        transcript.steps.append(TranscriptStep(round_index=round_index, team="R", counts=rev))
        transcript.steps.append(TranscriptStep(round_index=round_index, team="S", counts=spy))
    last = failure.outcome.round_index
    transcript.steps.append(TranscriptStep(round_index=last, team="R", counts=failure.rev))
    if failure.spy is not None:
        transcript.steps.append(TranscriptStep(
            round_index=last, team="S", counts=failure.spy, note=failure.detail,
            rejected=failure.outcome.reason == "Forfeit",
        ))
    else:
        transcript.steps.append(TranscriptStep(
            round_index=last, team="S", counts=tuple([0] * g.n), note=failure.detail, rejected=True,
        ))
    transcript.outcome = failure.outcome
    return transcript


def verify_strategy(g: Graph, cfg: GameConfig, strategy: SpyStrategy,
                    max_states: int = DEFAULT_MAX_STATES) -> VerifyResult:
    """
    Ok iff no reachable position after a spy action has an unguarded meeting. Otherwise
    the result carries a shortest losing transcript. Closure nodes are keyed on the
    revolutionary counts and the strategy's full state.
    """
    parent: Dict[Node, Optional[Node]] = {}
    spies: Dict[Node, Counts] = {}
    depth: Dict[Node, int] = {}
    queue: Deque[Node] = deque()

    def path_to(node: Node) -> List[Tuple[Counts, Counts]]:
        out = []
        while node is not None:
            out.append((node[0], spies[node]))
            node = parent[node]
        return out[::-1]

    def fail(node: Optional[Node], failure: _Failure) -> VerifyResult:
        path = path_to(node) if node is not None else []
        transcript = _transcript(g, cfg, path, failure)
        logger.info(f"{strategy.name} loses on {g.name} (m={cfg.m}, r={cfg.r}, s={cfg.s}) "
                    f"in round {failure.outcome.round_index}: {failure.detail}")
        return VerifyResult(graph_id=g.name, config=cfg, strategy=strategy.name, ok=False, states=len(parent),
                            depth=failure.outcome.round_index, detail=failure.detail, counterexample=transcript)

    for rev in compositions(cfg.r, g.n):
        try:
            try:
                spy, state = strategy.initial(rev)
            except (StrategyError, IllegalMove) as e:
                raise _Failure(rev, None, Outcome(winner="Revolutionaries", reason="Forfeit",
                                                  round_index=0, offender="S"), str(e))
            spy = tuple(spy)
            if len(spy) != g.n or sum(spy) != cfg.s:
                raise _Failure(rev, spy, Outcome(winner="Revolutionaries", reason="Forfeit",
                                                 round_index=0, offender="S"),
                               f"placement {spy} does not hold {cfg.s} spies")
            _check_guarded(cfg, rev, spy, 0)
        except _Failure as failure:
            return fail(None, failure)
        node = (rev, state)
        if node not in parent:
            parent[node] = None
            spies[node] = spy
            depth[node] = 0
            queue.append(node)
            if len(parent) > max_states:
                raise StateSpaceTooLarge(len(parent), max_states)

    while queue:
        node = queue.popleft()
        rev, state = node
        round_index = depth[node] + 1
        for new_rev in sorted(team_successors(g, rev)):
            try:
                spy2, state2 = _respond(g, cfg, strategy, state, spies[node], new_rev, round_index)
            except _Failure as failure:
                return fail(node, failure)
            child = (new_rev, state2)
            if child in parent:
                continue
            parent[child] = node
            spies[child] = spy2
            depth[child] = round_index
            queue.append(child)
            if len(parent) > max_states:
                raise StateSpaceTooLarge(len(parent), max_states)

    explored = max(depth.values(), default=0)
    logger.info(f"{strategy.name} holds on {g.name} (m={cfg.m}, r={cfg.r}, s={cfg.s}): {len(parent)} closure states")
    return VerifyResult(graph_id=g.name, config=cfg, strategy=strategy.name, ok=True,
                        states=len(parent), depth=explored)
