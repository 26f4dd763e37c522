import logging
from typing import Callable, Dict

from modules.agents.base import RevAgent, SpyAgent, SpyStrategy, StrategySpyAgent
from modules.agents.baseline_agents import (FollowerSpyStrategy, GuardingRandomSpyAgent, RandomSpyAgent,
                                            solver_agents)
from modules.agents.revolutionary_agents import CycleStrikeRevAgent, FloodRevAgent, RandomRevAgent
from modules.agents.spy_cycle_agent import CycleSpyStrategy
from modules.agents.spy_tree_agent import TreeSpyStrategy
from modules.agents.spy_unicyclic_agent import UnicyclicSpyStrategy
from modules.core.graph_core import Graph, GraphClass, classify
from modules.schemas.errors import UnsupportedClass
from modules.schemas.messages import GameConfig

logger = logging.getLogger(__name__)

SPY_STRATEGIES: Dict[str, Callable[..., SpyStrategy]] = {
    "tree": TreeSpyStrategy,
    "cycle": CycleSpyStrategy,
    "unicyclic": UnicyclicSpyStrategy,
    "follower": FollowerSpyStrategy,
}

SPY_AGENTS = sorted(set(SPY_STRATEGIES) | {"auto", "random", "guarding-random", "solver"})
REV_AGENTS = ["flood", "strike", "random", "solver"]


def auto_strategy_name(g: Graph) -> str:
    cls = classify(g)
    if cls in (GraphClass.TREE, GraphClass.FOREST):
        return "tree"
    if cls == GraphClass.CYCLE:
        return "cycle"
    if cls in (GraphClass.UNICYCLIC, GraphClass.UNICYCLIC_FOREST):
        return "unicyclic"
    raise UnsupportedClass(f"no spy strategy for {g.name} ({cls.value})")


def make_spy_strategy(name: str, g: Graph, cfg: GameConfig, validate_moves: bool = True) -> SpyStrategy:
    if name == "auto":
        name = auto_strategy_name(g)
    if name not in SPY_STRATEGIES:
        raise ValueError(f"unknown spy strategy {name!r}; choose from {', '.join(sorted(SPY_STRATEGIES))}")
    return SPY_STRATEGIES[name](g, cfg, validate_moves=validate_moves)


def make_spy_agent(name: str, g: Graph, cfg: GameConfig, seed: int = 0, max_states: int = 5_000_000) -> SpyAgent:
    if name == "random":
        return RandomSpyAgent(seed)
    if name == "guarding-random":
        return GuardingRandomSpyAgent(seed)
    if name == "solver":
        return solver_agents(g, cfg, max_states)[1]
    return StrategySpyAgent(make_spy_strategy(name, g, cfg))


def make_rev_agent(name: str, g: Graph, cfg: GameConfig, seed: int = 0, max_states: int = 5_000_000) -> RevAgent:
    if name == "flood":
        return FloodRevAgent()
    if name == "strike":
        return CycleStrikeRevAgent()
    if name == "random":
        return RandomRevAgent(seed)
    if name == "solver":
        return solver_agents(g, cfg, max_states)[0]
    raise ValueError(f"unknown revolutionary strategy {name!r}; choose from {', '.join(REV_AGENTS)}")
