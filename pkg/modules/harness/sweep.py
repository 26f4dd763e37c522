"""
Batch runner: expands a RunConfig into one task per (graph, r) instance and runs the
requested mode on each, optionally in worker processes. Rows come back in task order.
"""
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional

from pydantic import BaseModel, Field
from tqdm import tqdm

from modules.agents.registry import auto_strategy_name, make_rev_agent, make_spy_agent, make_spy_strategy
from modules.core.families import family
from modules.core.graph_core import Graph, classify, load_graph
from modules.graph.builder import play_match
from modules.schemas.errors import PreconditionViolated, StateSpaceTooLarge, UnsupportedClass
from modules.schemas.messages import GameConfig, RunConfig, SweepRow
from modules.solver.sigma import cycle_shape, sigma_exact, sigma_formula
from modules.solver.verify import verify_strategy

logger = logging.getLogger(__name__)


class SweepTask(BaseModel):
    graph: Graph
    mode: str
    m: int
    r: int
    s: Optional[int] = None
    spy_strategy: str = "auto"
    rev_strategy: str = "flood"
    max_states: int = 5_000_000
    max_rounds: Optional[int] = None
    seed: int = 0
    record_timings: bool = False


class SweepResult(BaseModel):
    rows: List[SweepRow] = Field(default_factory=list)
    budget_exhausted: int = 0


def load_instances(config: RunConfig) -> List[Graph]:
    graphs = [load_graph(path) for path in config.graphs]
    if config.family:
        graphs.extend(family(config.family))
    return graphs


def default_spy_count(strategy: str, m: int, r: int, g: Optional[Graph] = None) -> int:
    """
    floor(r/m) for forests, r-m+1 for the follower. The cycle-based strategies get the
    closed-form sigma of `g`, so short cycles run on floor(r/m) spies; without a graph
    they get ceil(r/m).
    """
    if strategy == "tree":
        return r // m
    if strategy == "follower":
        return max(0, r - m + 1)
    if g is not None and strategy in ("cycle", "unicyclic"):
        return sigma_formula(g, m, r).sigma
    return -(-r // m)


def plan_tasks(config: RunConfig) -> List[SweepTask]:
    r_values = config.r_values or ([config.r] if config.r is not None else [])
    if config.mode != "classify" and not r_values:
        raise ValueError("mode needs -r or r_values")
    tasks = []
    for g in load_instances(config):
        for r in (r_values or [0]):
            if config.mode != "classify" and r > config.m * g.n:
                logger.debug(f"Skipping {g.name} r={r}: more than {config.m} revolutionaries per vertex")
                continue
            tasks.append(SweepTask(
                graph=g, mode=config.mode, m=config.m, r=r, s=config.s,
                spy_strategy=config.spy_strategy, rev_strategy=config.rev_strategy,
                max_states=config.max_states, max_rounds=config.max_rounds, seed=config.seed,
                record_timings=config.record_timings,
            ))
    return tasks


def _row(task: SweepTask, method: str, verdict: str, s: int = 0, states: int = 0, millis: int = 0) -> SweepRow:
    ell, t = cycle_shape(task.graph)
    return SweepRow(graph=task.graph.name, cls=classify(task.graph).value, l=ell, t=t, m=task.m, r=task.r,
                    s=s, method=method, verdict=verdict, states=states,
                    millis=millis if task.record_timings else 0)


def run_instance(task: SweepTask) -> SweepRow:
    g, m, r = task.graph, task.m, task.r
    started = time.perf_counter()

    def elapsed() -> int:
        return int((time.perf_counter() - started) * 1000)

    try:
        if task.mode == "classify":
            return _row(task, "Classify", classify(g).value)
        if task.mode == "sigma-formula":
            result = sigma_formula(g, m, r)
            return _row(task, "Formula", f"sigma={result.sigma}", s=result.sigma)
        if task.mode == "sigma-exact":
            result = sigma_exact(g, m, r, task.max_states, record_timings=task.record_timings)
            return _row(task, "Exact", f"sigma={result.sigma}", s=result.sigma, states=result.states, millis=result.millis)
        if task.mode == "compare":
            exact = sigma_exact(g, m, r, task.max_states, record_timings=task.record_timings)
            try:
                formula = sigma_formula(g, m, r).sigma
            except UnsupportedClass:
                return _row(task, "Compare", "exact-only", s=exact.sigma, states=exact.states, millis=exact.millis)
            verdict = "agree" if formula == exact.sigma else f"DISAGREE:formula={formula}"
            if formula != exact.sigma:
                logger.error(f"{g.name} m={m} r={r}: formula gives {formula}, exact search {exact.sigma}")
            return _row(task, "Compare", verdict, s=exact.sigma, states=exact.states, millis=exact.millis)
        if task.mode == "verify":
            name = auto_strategy_name(g) if task.spy_strategy == "auto" else task.spy_strategy
            s = task.s if task.s is not None else default_spy_count(name, m, r, g)
            cfg = GameConfig(m=m, r=r, s=s)
            result = verify_strategy(g, cfg, make_spy_strategy(name, g, cfg, validate_moves=False), task.max_states)
            return _row(task, f"Verify:{name}", result.label(), s=s, states=result.states, millis=elapsed())
        if task.mode == "match":
            s = task.s if task.s is not None else r // m
            cfg = GameConfig(m=m, r=r, s=s)
            rev_agent = make_rev_agent(task.rev_strategy, g, cfg, task.seed, task.max_states)
            spy_agent = make_spy_agent(task.spy_strategy, g, cfg, task.seed, task.max_states)
            outcome, _ = play_match(g, cfg, rev_agent, spy_agent, task.max_rounds, task.seed)
            return _row(task, f"Match:{rev_agent.name}-{spy_agent.name}", outcome.label(), s=s, millis=elapsed())
    except StateSpaceTooLarge as e:
        return _row(task, task.mode, f"Budget({e.estimate})", s=task.s or 0)
    except UnsupportedClass:
        return _row(task, task.mode, "Unsupported", s=task.s or 0)
    except PreconditionViolated as e:
        logger.warning(f"{g.name} m={m} r={r}: {e}")
        return _row(task, task.mode, "Precondition", s=task.s or 0)
    raise ValueError(f"unknown mode {task.mode!r}")


def run_sweep(config: RunConfig, progress: bool = True) -> SweepResult:
    tasks = plan_tasks(config)
    logger.info(f"---SWEEP: {len(tasks)} instances, mode={config.mode}, workers={config.workers}---")
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            rows = list(tqdm(pool.map(run_instance, tasks), total=len(tasks), disable=not progress))
    else:
        rows = [run_instance(task) for task in tqdm(tasks, disable=not progress)]
    exhausted = sum(1 for row in rows if row.verdict.startswith("Budget"))
    return SweepResult(rows=rows, budget_exhausted=exhausted)
