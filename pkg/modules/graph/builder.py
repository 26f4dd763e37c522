import logging
from math import comb
from typing import Optional, Sequence, Tuple

from langgraph.graph import END, StateGraph

from modules.agents.base import RevAgent, SpyAgent
from modules.core.graph_core import Graph
from modules.core.moves import validate_team_move, unguarded_meetings
from modules.graph.state import MatchState
from modules.schemas.errors import IllegalMove, StrategyError, StrategyIllegalMove, SumMismatch
from modules.schemas.messages import GameConfig, Outcome, Position, Transcript, TranscriptStep

logger = logging.getLogger(__name__)


def default_horizon(g: Graph, cfg: GameConfig) -> int:
    """Four times the number of revolutionary configurations."""
    return 4 * comb(g.n + cfg.r - 1, cfg.r)


def _shape_error(g: Graph, counts: Sequence[int], total: int) -> Optional[str]:
    if len(counts) != g.n:
        return f"expected {g.n} counts, got {len(counts)}"
    if any(c < 0 for c in counts):
        return "negative count"
    if sum(counts) != total:
        return f"counts sum to {sum(counts)}, expected {total}"
    return None


def _forfeit(state: MatchState, team: str, counts: Sequence[int], detail: str) -> MatchState:
    error = StrategyIllegalMove(team, state['round_index'], detail)
    logger.warning(f"{error}; {team} forfeits")
    state['transcript'].steps.append(TranscriptStep(
        round_index=state['round_index'], team=team, counts=tuple(counts), note=detail, rejected=True,
    ))
    state['outcome'] = Outcome(
        winner="Spies" if team == "R" else "Revolutionaries",
        reason="Forfeit",
        round_index=state['round_index'],
        offender=team,
    )
    state['transcript'].outcome = state['outcome']
    state['status'] = "forfeit"
    state['error_message'] = str(error)
    return state


def _record(state: MatchState, team: str, counts: Tuple[int, ...], note: str) -> None:
    state['transcript'].steps.append(TranscriptStep(
        round_index=state['round_index'], team=team, counts=counts, note=note,
    ))


def _attach_transcript(state: MatchState, exc: StrategyError) -> None:
    exc.transcript_text = state['transcript'].to_text()
    logger.error(f"Strategy assertion failed in round {state['round_index']}: {exc}")


def rev_placement_node(state: MatchState) -> MatchState:
    logger.debug("---REVOLUTIONARY PLACEMENT---")
    g, cfg = state['graph'], state['config']
    counts = tuple(state['rev_agent'].place(g, cfg))
    problem = _shape_error(g, counts, cfg.r)
    if problem:
        return _forfeit(state, "R", counts, problem)
    state['rev'] = counts
    _record(state, "R", counts, state['rev_agent'].annotate())
    state['status'] = "running"
    return state


def spy_placement_node(state: MatchState) -> MatchState:
    logger.debug("---SPY PLACEMENT---")
    g, cfg = state['graph'], state['config']
    try:
        counts = tuple(state['spy_agent'].place(g, cfg, state['rev']))
    except StrategyError as e:
        _attach_transcript(state, e)
        raise
    problem = _shape_error(g, counts, cfg.s)
    if problem:
        return _forfeit(state, "S", counts, problem)
    state['spy'] = counts
    _record(state, "S", counts, state['spy_agent'].annotate())
    state['rev_agent'].observe_spies(counts, counts, None)
    return state


def guard_check_node(state: MatchState) -> MatchState:
    logger.debug("---GUARD CHECK---")
    unguarded = unguarded_meetings(state['rev'], state['spy'], state['config'].m)
    if unguarded:
        state['outcome'] = Outcome(
            winner="Revolutionaries", reason="UnguardedMeeting",
            vertex=min(unguarded), round_index=state['round_index'],
        )
    elif state['round_index'] >= state['max_rounds']:
        state['outcome'] = Outcome(winner="Spies", reason="HorizonSurvived", round_index=state['round_index'])
    if state['outcome'] is not None:
        state['transcript'].outcome = state['outcome']
        state['status'] = "finished"
    return state


def rev_move_node(state: MatchState) -> MatchState:
    logger.debug("---REVOLUTIONARY MOVE---")
    g, cfg = state['graph'], state['config']
    state['round_index'] += 1
    before = state['rev']
    after = tuple(state['rev_agent'].move(Position(rev=before, spy=state['spy'])))
    problem = _shape_error(g, after, cfg.r)
    if problem is None:
        try:
            validate_team_move(g, before, after)
        except (IllegalMove, SumMismatch) as e:
            problem = str(e)
    if problem:
        return _forfeit(state, "R", after, problem)
    state['rev'] = after
    _record(state, "R", after, state['rev_agent'].annotate())
    return state


def spy_move_node(state: MatchState) -> MatchState:
    logger.debug("---SPY MOVE---")
    g, cfg = state['graph'], state['config']
    before = state['spy']
    try:
        after = tuple(state['spy_agent'].move(Position(rev=state['rev'], spy=before)))
    except StrategyError as e:
        _attach_transcript(state, e)
        raise
    problem = _shape_error(g, after, cfg.s)
    flow = None
    if problem is None:
        try:
            flow = validate_team_move(g, before, after)
        except (IllegalMove, SumMismatch) as e:
            problem = str(e)
    if problem:
        return _forfeit(state, "S", after, problem)
    state['spy'] = after
    _record(state, "S", after, state['spy_agent'].annotate())
    state['rev_agent'].observe_spies(before, after, flow)
    return state


def check_move_status(next_node: str):
    def route(state: MatchState) -> str:
        if state.get("status") == "forfeit":
            return END
        return next_node
    return route


def check_match_over(state: MatchState) -> str:
    if state.get("status") in ("finished", "forfeit"):
        return END
    return "rev_move"


def create_match_workflow():
    """
    Creates and compiles the LangGraph workflow for one match:
    placements, then alternating revolutionary and spy moves with a guard check
    after every spy action.
    """
    workflow = StateGraph(MatchState)

    workflow.add_node("rev_placement", rev_placement_node)
    workflow.add_node("spy_placement", spy_placement_node)
    workflow.add_node("guard_check", guard_check_node)
    workflow.add_node("rev_move", rev_move_node)
    workflow.add_node("spy_move", spy_move_node)

    workflow.set_entry_point("rev_placement")

    workflow.add_conditional_edges("rev_placement", check_move_status("spy_placement"), {
        "spy_placement": "spy_placement",
        END: END,
    })
    workflow.add_conditional_edges("spy_placement", check_move_status("guard_check"), {
        "guard_check": "guard_check",
        END: END,
    })
    workflow.add_conditional_edges("guard_check", check_match_over, {
        "rev_move": "rev_move",
        END: END,
    })
    workflow.add_conditional_edges("rev_move", check_move_status("spy_move"), {
        "spy_move": "spy_move",
        END: END,
    })
    workflow.add_conditional_edges("spy_move", check_move_status("guard_check"), {
        "guard_check": "guard_check",
        END: END,
    })

    app = workflow.compile()
    return app


_MATCH_APP = None


def _match_app():
    global _MATCH_APP
    if _MATCH_APP is None:
        _MATCH_APP = create_match_workflow()
    return _MATCH_APP


def play_match(
    g: Graph,
    cfg: GameConfig,
    rev_agent: RevAgent,
    spy_agent: SpyAgent,
    max_rounds: Optional[int] = None,
    seed: int = 0,
) -> Tuple[Outcome, Transcript]:
    """
    Plays one match to completion and returns the outcome with the full transcript.
    Illegal agent output forfeits; strategy assertion errors propagate.
    """
    horizon = default_horizon(g, cfg) if max_rounds is None else max_rounds
    initial: MatchState = {
        "graph": g,
        "config": cfg,
        "rev_agent": rev_agent,
        "spy_agent": spy_agent,
        "rev": None,
        "spy": None,
        "round_index": 0,
        "max_rounds": horizon,
        "transcript": Transcript(graph_path=g.name, config=cfg, seed=seed),
        "outcome": None,
        "status": "pending",
        "error_message": None,
    }
    final = _match_app().invoke(initial, config={"recursion_limit": 3 * horizon + 10})
    outcome = final['outcome']
    logger.info(f"Match on {g.name} (m={cfg.m}, r={cfg.r}, s={cfg.s}) "
                f"{rev_agent.name} vs {spy_agent.name}: {outcome.label()}")
    return outcome, final['transcript']


def replay_transcript(g: Graph, transcript: Transcript) -> Outcome:
    """
    Re-validates every half-round of a transcript and recomputes its outcome.
    Raises IllegalMove or SumMismatch on the first inconsistent step.
    """
    cfg = transcript.config
    last = {"R": None, "S": None}
    totals = {"R": cfg.r, "S": cfg.s}
    for step in transcript.steps:
        if step.rejected:
            return Outcome(
                winner="Spies" if step.team == "R" else "Revolutionaries",
                reason="Forfeit", round_index=step.round_index, offender=step.team,
            )
        if len(step.counts) != g.n or sum(step.counts) != totals[step.team]:
            raise SumMismatch(f"round {step.round_index} {step.team}: wrong counts {step.counts}")
        if last[step.team] is not None:
            validate_team_move(g, last[step.team], step.counts)
        last[step.team] = step.counts
        if step.team == "S":
            unguarded = unguarded_meetings(last["R"], last["S"], cfg.m)
            if unguarded:
                return Outcome(winner="Revolutionaries", reason="UnguardedMeeting",
                               vertex=min(unguarded), round_index=step.round_index)
    final_round = transcript.steps[-1].round_index if transcript.steps else 0
    return Outcome(winner="Spies", reason="HorizonSurvived", round_index=final_round)
