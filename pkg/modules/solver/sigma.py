import logging
import time
from typing import Dict, Optional, Tuple

from modules.core.graph_core import Graph, GraphClass, classify, find_cycle
from modules.schemas.errors import AssumptionViolated, MultipleCycles, RevSpyError, UnsupportedClass
from modules.schemas.messages import GameConfig, SigmaResult, Winner, trivial_bounds
from modules.solver.exact_solver import DEFAULT_MAX_STATES, SafetySolver, state_count

logger = logging.getLogger(__name__)


def sigma_exact(
    g: Graph,
    m: int,
    r: int,
    max_states: int = DEFAULT_MAX_STATES,
    solver: Optional[SafetySolver] = None,
    confirm_monotone: bool = False,
    record_timings: bool = True,
) -> SigmaResult:
    """
    Smallest s for which the spies win, searching upward from the trivial lower bound.
    With `confirm_monotone` every count above sigma up to the trivial upper bound, and
    at least sigma + 1 while it fits on the graph, is solved as well and must also be a
    spy win.
    """
    solver = solver or SafetySolver(g, max_states)
    low, high = trivial_bounds(g.n, m, r)
    verdicts: Dict[int, Winner] = {}
    states = 0
    started = time.perf_counter()

    sigma = None
    for s in range(low, high + 1):
        winner, _ = solver.solve(GameConfig(m=m, r=r, s=s))
        verdicts[s] = winner
        states += state_count(g.n, r, s)
        if winner == "Spies":
            sigma = s
            break
    if sigma is None:
        raise RevSpyError(f"no spy win on {g.name} up to the trivial upper bound {high}")

    if confirm_monotone:
        for s in range(sigma + 1, min(max(high, sigma + 1), g.n) + 1):
            winner, _ = solver.solve(GameConfig(m=m, r=r, s=s))
            verdicts[s] = winner
            states += state_count(g.n, r, s)
            if winner != "Spies":
                raise RevSpyError(f"spies win with {sigma} but lose with {s} on {g.name}")

    millis = int((time.perf_counter() - started) * 1000) if record_timings else 0
    logger.info(f"sigma({g.name}, m={m}, r={r}) = {sigma} by exact search over {states} states")
    return SigmaResult(graph_id=g.name, n=g.n, m=m, r=r, sigma=sigma, method="Exact",
                       verdicts=verdicts, states=states, millis=millis)


def cycle_shape(g: Graph) -> Tuple[int, int]:
    """(cycle length, off-cycle vertex count); (0, n) for forests, (0, 0) with several cycles."""
    try:
        cycle = find_cycle(g)
    except MultipleCycles:
        return 0, 0
    if cycle is None:
        return 0, g.n
    return len(cycle), g.n - len(cycle)


def sigma_formula(g: Graph, m: int, r: int) -> SigmaResult:
    """
    Closed form for forests, cycles and graphs with one cycle:
    floor(r/m) when m divides r, on forests, or when the cycle is short enough,
    ceil(r/m) otherwise.
    """
    cls = classify(g)
    if cls == GraphClass.OTHER:
        raise UnsupportedClass(f"{g.name} has more than one cycle")
    if r > m * g.n:
        raise AssumptionViolated(f"r/m = {r}/{m} exceeds |V| = {g.n}")

    floor_, ceil_ = r // m, -(-r // m)
    ell, t = cycle_shape(g)
    if cls in (GraphClass.TREE, GraphClass.FOREST) or r % m == 0 or r < m:
        sigma = floor_
    elif cls == GraphClass.CYCLE:
        sigma = floor_ if ell <= floor_ + 2 else ceil_
    else:
        sigma = floor_ if ell <= max(floor_ - t + 2, 3) else ceil_

    low, high = trivial_bounds(g.n, m, r)
    verdicts: Dict[int, Winner] = {s: ("Spies" if s >= sigma else "Revolutionaries") for s in range(low, high + 1)}
    return SigmaResult(graph_id=g.name, n=g.n, m=m, r=r, sigma=sigma, method="Formula", verdicts=verdicts)
