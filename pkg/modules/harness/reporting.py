import logging
from typing import List, Sequence

import pandas as pd
from rich.console import Console
from rich.table import Table

from modules.schemas.messages import SweepRow

logger = logging.getLogger(__name__)

COLUMNS = ["graph", "cls", "l", "t", "m", "r", "s", "method", "verdict", "states", "millis"]
SCHEMA_LINE = "#schema graph,class,l,t,m,r,s,method,verdict,states,millis"


def rows_to_frame(rows: Sequence[SweepRow]) -> pd.DataFrame:
    return pd.DataFrame([row.model_dump() for row in rows], columns=COLUMNS)


def write_report(rows: Sequence[SweepRow], path: str) -> None:
    """Schema line first, then one comma-separated row per instance in the given order."""
    frame = rows_to_frame(rows)
    with open(path, "w", newline="") as f:
        f.write(SCHEMA_LINE + "\n")
        frame.to_csv(f, header=False, index=False, lineterminator="\n")
    logger.info(f"Wrote {len(frame)} rows to {path}")


def read_report(path: str) -> pd.DataFrame:
    with open(path) as f:
        first = f.readline().strip()
    if first != SCHEMA_LINE:
        raise ValueError(f"{path} does not start with the report schema line")
    return pd.read_csv(path, skiprows=1, names=COLUMNS, keep_default_na=False)


def disagreements(rows: Sequence[SweepRow]) -> List[SweepRow]:
    return [row for row in rows if row.verdict.startswith("DISAGREE")]


def render_summary(rows: Sequence[SweepRow], console: Console, title: str = "Sweep") -> None:
    table = Table(title=title)
    for column in COLUMNS:
        table.add_column(column, justify="right" if column in ("l", "t", "m", "r", "s", "states", "millis") else "left")
    for row in rows:
        style = "bold red" if row.verdict.startswith(("DISAGREE", "Counterexample")) else None
        table.add_row(*(str(v) for v in row.model_dump().values()), style=style)
    console.print(table)
    frame = rows_to_frame(rows)
    if not frame.empty:
        counts = frame.groupby("method")["verdict"].count()
        console.print(", ".join(f"{method}: {n} rows" for method, n in counts.items()))
    bad = disagreements(rows)
    if bad:
        console.print(f"[bold red]{len(bad)} formula/exact disagreement(s)[/bold red]")
