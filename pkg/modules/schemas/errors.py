from typing import Optional


class RevSpyError(Exception):
    """Base class for every error raised by the revolutionaries-and-spies toolkit."""


class GraphFormatError(RevSpyError):
    """A graph file could not be parsed."""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        prefix = f"line {line_number}: " if line_number is not None else ""
        super().__init__(f"{prefix}{message}")


class MultipleCycles(RevSpyError):
    """The graph contains two or more cycles."""


class NotUnicyclic(RevSpyError):
    """A unicyclic decomposition was requested for a graph that is not unicyclic."""


class ComponentHasCycle(RevSpyError):
    """A tree rooting was requested inside a component that contains a cycle."""


class SumMismatch(RevSpyError):
    """Two count vectors of one team have different totals."""


class IllegalMove(RevSpyError):
    """No assignment moves every unit along at most one edge."""


class IllegalRevMove(IllegalMove):
    """A strategy was handed a revolutionary move that is not legal."""


class StrategyIllegalMove(IllegalMove):
    """An agent produced an illegal placement or move; its team forfeits."""

    def __init__(self, team: str, round_index: int, detail: str):
        self.team = team
        self.round_index = round_index
        super().__init__(f"{team} played illegally in round {round_index}: {detail}")


class PreconditionViolated(RevSpyError):
    """A strategy was asked to play outside the hypotheses it is built for."""


class RevOffCycle(PreconditionViolated):
    """The cycle strategy saw revolutionaries off the cycle."""


class StrategyError(RevSpyError):
    """A strategy's internal invariant failed. Surfaced, never patched."""

    def __init__(self, message: str, transcript_text: Optional[str] = None):
        self.transcript_text = transcript_text
        super().__init__(message)


class InvariantBroken(StrategyError):
    pass


class NoValidReindexing(StrategyError):
    pass


class CycleConditionBroken(StrategyError):
    pass


class StateSpaceTooLarge(RevSpyError):
    """The exact solver or closure search would exceed its state budget."""

    def __init__(self, estimate: int, budget: int):
        self.estimate = estimate
        self.budget = budget
        super().__init__(f"state space estimate {estimate} exceeds budget {budget}")


class UnsupportedClass(RevSpyError):
    """No closed formula is known for this graph class."""


class AssumptionViolated(RevSpyError):
    """The standing assumption r/m <= |V(G)| does not hold."""
