from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from modules.schemas.errors import GraphFormatError

Team = Literal["R", "S"]
Winner = Literal["Revolutionaries", "Spies"]


class GameConfig(BaseModel):
    """
    Parameters of one game RS(G, m, r, s).
    """
    model_config = ConfigDict(frozen=True)

    m: int = Field(ge=1, description="Meeting size: revolutionaries needed at one vertex to form a meeting.")
    r: int = Field(ge=0, description="Number of revolutionaries.")
    s: int = Field(ge=0, description="Number of spies.")


class Outcome(BaseModel):
    """
    How a match ended.
    """
    model_config = ConfigDict(frozen=True)

    winner: Winner = Field(description="Team that won the match.")
    reason: Literal["UnguardedMeeting", "HorizonSurvived", "Forfeit"] = Field(description="Why the match ended.")
    vertex: Optional[int] = Field(default=None, description="Vertex of the unguarded meeting, if any.")
    round_index: int = Field(default=0, description="Round in which the match ended.")
    offender: Optional[Team] = Field(default=None, description="Team that forfeited, for Forfeit outcomes.")

    @model_validator(mode="after")
    def _reason_matches_winner(self) -> "Outcome":
        if self.reason == "UnguardedMeeting" and self.winner != "Revolutionaries":
            raise ValueError("only revolutionaries win by an unguarded meeting")
        if self.reason == "HorizonSurvived" and self.winner != "Spies":
            raise ValueError("only spies win by surviving the horizon")
        if self.reason == "Forfeit":
            if self.offender is None:
                raise ValueError("a forfeit names the offending team")
            expected = "Spies" if self.offender == "R" else "Revolutionaries"
            if self.winner != expected:
                raise ValueError("the non-offending team wins a forfeit")
        return self

    def label(self) -> str:
        if self.reason == "UnguardedMeeting":
            return f"{self.winner}:UnguardedMeeting({self.vertex},{self.round_index})"
        if self.reason == "HorizonSurvived":
            return f"{self.winner}:HorizonSurvived({self.round_index})"
        return f"{self.winner}:Forfeit({self.offender},{self.round_index})"


class TranscriptStep(BaseModel):
    """
    One half-round: the count vector of `team` after it acted.
    """
    round_index: int = Field(description="Round number; 0 is the placement round.")
    team: Team = Field(description="'R' for revolutionaries, 'S' for spies.")
    counts: Tuple[int, ...] = Field(description="Per-vertex counts of the team after its action.")
    note: str = Field(default="", description="Strategy annotation for debugging and property tests.")
    rejected: bool = Field(default=False, description="True when the move was illegal and caused a forfeit.")


class Transcript(BaseModel):
    """
    Replayable per-half-round match log.
    """
    graph_path: str = Field(default="-", description="Path or id of the graph the match was played on.")
    config: GameConfig
    seed: int = Field(default=0)
    steps: List[TranscriptStep] = Field(default_factory=list)
    outcome: Optional[Outcome] = None

    def last_counts(self, team: Team) -> Optional[Tuple[int, ...]]:
        for step in reversed(self.steps):
            if step.team == team and not step.rejected:
                return step.counts
        return None

    def to_text(self) -> str:
        cfg = self.config
        lines = [f"graph={self.graph_path} m={cfg.m} r={cfg.r} s={cfg.s} seed={self.seed}"]
        for step in self.steps:
            line = f"{step.round_index} {step.team} " + " ".join(str(c) for c in step.counts)
            note = step.note
            if step.rejected:
                note = ("rejected " + note).strip()
            if note:
                line += f" note={note}"
            lines.append(line)
        if self.outcome is not None:
            lines.append(f"outcome={self.outcome.label()}")
        return "\n".join(lines) + "\n"


def parse_transcript(text: str) -> Transcript:
    """
    Parses the text produced by `Transcript.to_text`. The outcome line is kept only as
    far as the winner and reason kind; replay recomputes the rest.
    """
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise GraphFormatError("empty transcript")
    header = dict(token.split("=", 1) for token in lines[0].split())
    config = GameConfig(m=int(header["m"]), r=int(header["r"]), s=int(header["s"]))
    transcript = Transcript(graph_path=header.get("graph", "-"), config=config, seed=int(header.get("seed", 0)))
    for number, line in enumerate(lines[1:], start=2):
        if line.startswith("outcome="):
            continue
        head, _, note = line.partition(" note=")
        parts = head.split()
        if len(parts) < 2 or parts[1] not in ("R", "S"):
            raise GraphFormatError(f"malformed transcript line {line!r}", number)
        rejected = note.startswith("rejected")
        if rejected:
            note = note[len("rejected"):].strip()
        transcript.steps.append(TranscriptStep(
            round_index=int(parts[0]),
            team=parts[1],
            counts=tuple(int(x) for x in parts[2:]),
            note=note,
            rejected=rejected,
        ))
    return transcript


class SigmaResult(BaseModel):
    """
    The threshold sigma(G, m, r) and how it was obtained.
    """
    graph_id: str
    n: int = Field(description="Vertex count of the graph.")
    m: int
    r: int
    sigma: int = Field(description="Minimum number of spies that wins.")
    method: Literal["Exact", "Formula"]
    verdicts: Dict[int, Winner] = Field(default_factory=dict, description="Winner for every solved spy count.")
    states: int = Field(default=0, description="Total solver states over all solved spy counts.")
    millis: int = Field(default=0)

    @model_validator(mode="after")
    def _within_trivial_bounds(self) -> "SigmaResult":
        low, high = trivial_bounds(self.n, self.m, self.r)
        if not low <= self.sigma <= high:
            raise ValueError(f"sigma={self.sigma} outside trivial bounds [{low}, {high}]")
        return self


def trivial_bounds(n: int, m: int, r: int) -> Tuple[int, int]:
    """min{|V|, floor(r/m)} <= sigma <= min{|V|, r-m+1}, with the upper bound clamped at 0."""
    return min(n, r // m), max(0, min(n, r - m + 1))


class SolverRecord(BaseModel):
    """
    One-line record emitted per solved instance.
    """
    graph_id: str
    m: int
    r: int
    s: int
    winner: Winner
    states: int
    millis: int

    def to_line(self) -> str:
        return (f"graph={self.graph_id} m={self.m} r={self.r} s={self.s} "
                f"winner={self.winner} states={self.states} millis={self.millis}")


class SweepRow(BaseModel):
    """
    One row of a sweep report.
    """
    graph: str
    cls: str
    l: int = Field(description="Cycle length, 0 for acyclic graphs.")
    t: int = Field(description="Vertices off the cycle.")
    m: int
    r: int
    s: int = Field(description="Spy count reported by the row (sigma for sigma rows).")
    method: str
    verdict: str
    states: int = 0
    millis: int = 0


class RunConfig(BaseModel):
    """
    Everything one CLI invocation needs. Built from a key=value file, the environment
    and CLI flags.
    """
    mode: Literal["classify", "sigma-exact", "sigma-formula", "compare", "verify", "match"] = "classify"
    graphs: List[str] = Field(default_factory=list, description="Graph file paths.")
    family: Optional[str] = Field(default=None, description="Family generator: trees:<n>, cycles:<a>-<b>, unicyclic:<l-range>:<t-range>.")
    m: int = 2
    r: Optional[int] = None
    r_values: List[int] = Field(default_factory=list)
    s: Optional[int] = None
    spy_strategy: str = "auto"
    rev_strategy: str = "flood"
    max_rounds: Optional[int] = None
    max_states: int = 5_000_000
    seed: int = 0
    workers: int = 1
    record_timings: bool = False
    output: Optional[str] = None
    transcript: Optional[str] = None


class Position(BaseModel):
    """
    Full public game state: per-vertex revolutionary and spy counts.
    """
    model_config = ConfigDict(frozen=True)

    rev: Tuple[int, ...] = Field(description="Revolutionaries per vertex.")
    spy: Tuple[int, ...] = Field(description="Spies per vertex.")


class VerifyResult(BaseModel):
    """
    Outcome of an adversarial closure search against one spy strategy.
    """
    graph_id: str
    config: GameConfig
    strategy: str
    ok: bool = Field(description="True when no reachable position shows an unguarded meeting.")
    states: int = Field(default=0, description="Closure nodes (revolutionary counts x strategy state) explored.")
    depth: int = Field(default=0, description="Rounds explored, or the round of the counterexample.")
    detail: str = Field(default="", description="Why the counterexample fails the spies.")
    counterexample: Optional[Transcript] = Field(default=None, description="Shortest losing transcript, if any.")

    def label(self) -> str:
        if self.ok:
            return "Ok"
        return f"Counterexample({self.depth})"
