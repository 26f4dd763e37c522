from typing import Any, Optional, Tuple, TypedDict

from modules.schemas.messages import GameConfig, Outcome, Transcript


class MatchState(TypedDict):
    """
    Represents the state of one match between a revolutionary agent and a spy agent.

    Attributes:
        graph (Graph): The board the match is played on.
        config (GameConfig): Meeting size and team sizes.
        rev_agent (RevAgent): Agent choosing revolutionary placements and moves.
        spy_agent (SpyAgent): Agent choosing spy placements and moves.
        rev (Optional[Tuple[int, ...]]): Current revolutionary counts per vertex, None before placement.
        spy (Optional[Tuple[int, ...]]): Current spy counts per vertex, None before placement.
        round_index (int): Current round; 0 is the placement round.
        max_rounds (int): Horizon after which the spies are declared winners.
        transcript (Transcript): Every half-round played so far.
        outcome (Optional[Outcome]): Set once the match has ended.
        status (str): One of "pending", "running", "finished", "forfeit".
        error_message (Optional[str]): Description of the rejected move for forfeits.
    """
    graph: Any
    config: GameConfig
    rev_agent: Any
    spy_agent: Any
    rev: Optional[Tuple[int, ...]]
    spy: Optional[Tuple[int, ...]]
    round_index: int
    max_rounds: int
    transcript: Transcript
    outcome: Optional[Outcome]
    status: str
    error_message: Optional[str]
