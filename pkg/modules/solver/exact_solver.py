"""
Exact solution of RS(G, m, r, s) as a safety game.

Positions are pairs (revolutionary counts, spy counts) over labeled vertices. The
revolutionaries' winning region is the least fixed point of

    L_spy[i, j] = every spy successor j' of j has L_rev[i, j']
    L_rev[i, j] = bad[i, j] or some revolutionary successor i' of i has L_spy[i', j]

starting from the positions with an unguarded meeting. Both sides' successor relations
are sparse 0/1 matrices, so one iteration is two sparse-dense products.
"""
import logging
import time
from dataclasses import dataclass, field
from math import comb
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import sparse

from modules.core.graph_core import Graph
from modules.core.moves import Counts, compositions, team_successors
from modules.schemas.errors import StateSpaceTooLarge
from modules.schemas.messages import GameConfig, SolverRecord, Winner

logger = logging.getLogger(__name__)

DEFAULT_MAX_STATES = 5_000_000


def state_count(n: int, r: int, s: int) -> int:
    """Both turns of every (revolutionary, spy) configuration pair."""
    return 2 * comb(n + r - 1, r) * comb(n + s - 1, s)


@dataclass
class ConfigSpace:
    """All count vectors of one team, indexed, with the successor matrix."""
    configs: List[Counts]
    lookup: Dict[Counts, int]
    succ: sparse.csr_matrix
    out_degree: np.ndarray

    def __len__(self) -> int:
        return len(self.configs)

    def successors(self, i: int) -> np.ndarray:
        return self.succ.indices[self.succ.indptr[i]:self.succ.indptr[i + 1]]


def build_config_space(g: Graph, total: int) -> ConfigSpace:
    configs = list(compositions(total, g.n))
    lookup = {c: i for i, c in enumerate(configs)}
    rows: List[int] = []
    cols: List[int] = []
    for i, c in enumerate(configs):
        for nxt in team_successors(g, c):
            rows.append(i)
            cols.append(lookup[nxt])
    size = len(configs)
    succ = sparse.csr_matrix((np.ones(len(rows), dtype=np.int32), (rows, cols)), shape=(size, size))
    succ.sort_indices()
    out_degree = np.diff(succ.indptr).astype(np.int32)
    return ConfigSpace(configs=configs, lookup=lookup, succ=succ, out_degree=out_degree)


def bad_positions(rev_space: ConfigSpace, spy_space: ConfigSpace, m: int) -> np.ndarray:
    """bad[i, j] is True when configuration pair (i, j) shows an unguarded meeting."""
    meetings = np.array(rev_space.configs, dtype=np.int32) >= m
    empty = np.array(spy_space.configs, dtype=np.int32) == 0
    if not meetings.size or not empty.size:
        return np.zeros((len(rev_space), len(spy_space)), dtype=bool)
    return (meetings.astype(np.int32) @ empty.astype(np.int32).T) > 0


@dataclass
class WinSet:
    """
    Certificates of one solved instance. `losing[i, j]` marks revolutionary-to-move
    positions the revolutionaries win; `losing_spy_turn[i, j]` marks spy-to-move ones.
    Ranks are the fixed-point iteration a position entered its set at, -1 if never.
    """
    cfg: GameConfig
    rev_space: ConfigSpace
    spy_space: ConfigSpace
    bad: np.ndarray
    losing: np.ndarray
    losing_spy_turn: np.ndarray
    rank: np.ndarray
    rank_spy_turn: np.ndarray
    iterations: int = 0
    winning_placements: List[int] = field(default_factory=list)

    def index(self, rev: Counts, spy: Counts) -> Tuple[int, int]:
        return self.rev_space.lookup[tuple(rev)], self.spy_space.lookup[tuple(spy)]

    def is_losing(self, rev: Counts, spy: Counts) -> bool:
        i, j = self.index(rev, spy)
        return bool(self.losing[i, j])

    def rev_placement(self) -> Counts:
        """A winning placement if one exists (fastest first), else the one most spy placements lose to."""
        if self.winning_placements:
            i = min(self.winning_placements, key=lambda k: (int(self.rank[k].max()), k))
        else:
            i = int(np.argmax(self.losing.sum(axis=1)))
        return self.rev_space.configs[i]

    def spy_placement(self, rev: Counts) -> Counts:
        i = self.rev_space.lookup[tuple(rev)]
        return self.spy_space.configs[self._best_spy_choice(i, np.arange(len(self.spy_space)))]

    def rev_policy(self, rev: Counts, spy: Counts) -> Counts:
        """Moves to the spy-to-move position with the smallest rank; stays put when nothing wins."""
        i, j = self.index(rev, spy)
        options = [k for k in self.rev_space.successors(i) if self.losing_spy_turn[k, j]]
        if not options:
            return self.rev_space.configs[i]
        best = min(options, key=lambda k: (int(self.rank_spy_turn[k, j]), k))
        return self.rev_space.configs[best]

    def spy_policy(self, rev: Counts, spy: Counts) -> Counts:
        """`rev` already includes this round's revolutionary move."""
        i, j = self.index(rev, spy)
        return self.spy_space.configs[self._best_spy_choice(i, self.spy_space.successors(j), prefer=j)]

    def _best_spy_choice(self, i: int, options: np.ndarray, prefer: Optional[int] = None) -> int:
        safe = [k for k in options if not self.losing[i, k]]
        if safe:
            return prefer if prefer in safe else int(min(safe))
        # every choice loses: stall as long as possible
        return int(max(options, key=lambda k: (not self.bad[i, k], int(self.rank[i, k]), -k)))


class SafetySolver:
    """
    Solves instances on one graph, caching each team's configuration space by size so
    that solving several spy counts reuses the revolutionary side.
    """

    def __init__(self, g: Graph, max_states: int = DEFAULT_MAX_STATES):
        self.g = g
        self.max_states = max_states
        self._spaces: Dict[int, ConfigSpace] = {}

    def space(self, total: int) -> ConfigSpace:
        if total not in self._spaces:
            self._spaces[total] = build_config_space(self.g, total)
        return self._spaces[total]

    def check_budget(self, cfg: GameConfig) -> int:
        estimate = state_count(self.g.n, cfg.r, cfg.s)
        if estimate > self.max_states:
            logger.warning(f"{self.g.name} m={cfg.m} r={cfg.r} s={cfg.s}: {estimate} states exceed budget {self.max_states}")
            raise StateSpaceTooLarge(estimate, self.max_states)
        return estimate

    def solve(self, cfg: GameConfig) -> Tuple[Winner, WinSet]:
        self.check_budget(cfg)
        rev_space, spy_space = self.space(cfg.r), self.space(cfg.s)
        bad = bad_positions(rev_space, spy_space, cfg.m)

        losing = bad.copy()
        losing_spy_turn = np.zeros_like(bad)
        rank = np.where(bad, 0, -1).astype(np.int32)
        rank_spy_turn = np.full(bad.shape, -1, dtype=np.int32)
        degree = spy_space.out_degree[None, :]

        iteration = 0
        while True:
            iteration += 1
            # count[i, j] = losing successors of spy configuration j against i
            count = np.asarray(spy_space.succ @ losing.T.astype(np.int32)).T
            spy_turn = count == degree
            fresh_spy = spy_turn & ~losing_spy_turn
            rank_spy_turn[fresh_spy] = iteration
            losing_spy_turn |= spy_turn

            reach = np.asarray(rev_space.succ @ losing_spy_turn.astype(np.int32)) > 0
            fresh = reach & ~losing
            if not fresh.any() and not fresh_spy.any():
                break
            rank[fresh] = iteration
            losing |= reach

        winning_placements = [int(i) for i in np.flatnonzero(losing.all(axis=1))]
        winner: Winner = "Revolutionaries" if winning_placements else "Spies"
        logger.debug(f"{self.g.name} m={cfg.m} r={cfg.r} s={cfg.s}: {winner} after {iteration} iterations")
        return winner, WinSet(
            cfg=cfg, rev_space=rev_space, spy_space=spy_space, bad=bad,
            losing=losing, losing_spy_turn=losing_spy_turn, rank=rank, rank_spy_turn=rank_spy_turn,
            iterations=iteration, winning_placements=winning_placements,
        )


def solve_safety(g: Graph, cfg: GameConfig, max_states: int = DEFAULT_MAX_STATES) -> Tuple[Winner, WinSet]:
    """
    Decides RS(g, m, r, s). Revolutionaries win iff some placement loses against every
    spy placement. Raises StateSpaceTooLarge when the position count exceeds `max_states`.
    """
    return SafetySolver(g, max_states).solve(cfg)


def solve_record(g: Graph, cfg: GameConfig, max_states: int = DEFAULT_MAX_STATES,
                 solver: Optional[SafetySolver] = None, record_timings: bool = True) -> SolverRecord:
    solver = solver or SafetySolver(g, max_states)
    started = time.perf_counter()
    winner, _ = solver.solve(cfg)
    millis = int((time.perf_counter() - started) * 1000) if record_timings else 0
    return SolverRecord(graph_id=g.name, m=cfg.m, r=cfg.r, s=cfg.s, winner=winner,
                        states=state_count(g.n, cfg.r, cfg.s), millis=millis)
