"""
Agent interfaces. A spy strategy is a pure state machine (`SpyStrategy`) so the
closure search can branch on it; agents wrap strategies for match play.
"""
import logging
from abc import ABC, abstractmethod
from typing import Hashable, Optional, Tuple

from modules.core.graph_core import Graph
from modules.core.moves import Counts, MoveFlow
from modules.schemas.messages import GameConfig, Position

logger = logging.getLogger(__name__)


class SpyStrategy(ABC):
    """
    Deterministic spy strategy for a fixed (graph, config). `state` values must be
    hashable and must capture everything the strategy remembers.
    """
    name: str = "spy"

    def __init__(self, g: Graph, cfg: GameConfig):
        self.g = g
        self.cfg = cfg

    @abstractmethod
    def initial(self, rev: Counts) -> Tuple[Counts, Hashable]:
        """Spy placement after observing the revolutionary placement."""

    @abstractmethod
    def step(self, state: Hashable, new_rev: Counts) -> Tuple[Counts, Hashable, Optional[MoveFlow]]:
        """Spy response to a revolutionary move. The flow is None when the strategy has no explicit one."""

    def annotate(self, state: Hashable) -> str:
        return ""


class SpyAgent(ABC):
    name: str = "spy"

    @abstractmethod
    def place(self, g: Graph, cfg: GameConfig, rev: Counts) -> Counts:
        ...

    @abstractmethod
    def move(self, position: Position) -> Counts:
        """`position.rev` already reflects this round's revolutionary move."""

    def annotate(self) -> str:
        return ""


class RevAgent(ABC):
    name: str = "rev"

    @abstractmethod
    def place(self, g: Graph, cfg: GameConfig) -> Counts:
        ...

    @abstractmethod
    def move(self, position: Position) -> Counts:
        ...

    def observe_spies(self, before: Counts, after: Counts, flow: Optional[MoveFlow]) -> None:
        """Called after every spy action with the engine's witness flow."""

    def annotate(self) -> str:
        return ""


class StrategySpyAgent(SpyAgent):
    """
    Plays a `SpyStrategy` by holding its state between rounds.
    """

    def __init__(self, strategy: SpyStrategy):
        self.strategy = strategy
        self.name = strategy.name
        self.state: Hashable = None

    def place(self, g: Graph, cfg: GameConfig, rev: Counts) -> Counts:
        spy, self.state = self.strategy.initial(tuple(rev))
        return spy

    def move(self, position: Position) -> Counts:
        spy, self.state, _ = self.strategy.step(self.state, position.rev)
        return spy

    def annotate(self) -> str:
        return self.strategy.annotate(self.state)
