import logging
from contextlib import contextmanager
from typing import List, Optional

import typer
from dotenv import load_dotenv
from rich.console import Console

from modules.agents.registry import make_rev_agent, make_spy_agent, make_spy_strategy
from modules.core.graph_core import classify, load_graph
from modules.graph.builder import play_match
from modules.harness.config import Settings, build_run_config
from modules.harness.reporting import disagreements, render_summary, write_report
from modules.harness.sweep import run_sweep
from modules.schemas.errors import RevSpyError, StateSpaceTooLarge
from modules.schemas.messages import GameConfig
from modules.solver.exact_solver import solve_record
from modules.solver.sigma import cycle_shape, sigma_exact, sigma_formula
from modules.solver.verify import verify_strategy

# --- Load Environment Variables ---
load_dotenv()

app = typer.Typer(add_completion=False, help="Revolutionaries and spies: strategies, exact solver and sweeps.")
console = Console()

EXIT_OK, EXIT_FOUND, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


@contextmanager
def exit_codes():
    """Maps library errors onto the CLI exit codes."""
    try:
        yield
    except StateSpaceTooLarge as e:
        console.print(f"[red]budget exhausted:[/red] {e}")
        raise typer.Exit(code=EXIT_BUDGET)
    except (RevSpyError, ValueError, OSError) as e:
        console.print(f"[red]error:[/red] {e}")
        raise typer.Exit(code=EXIT_USAGE)


@app.callback()
def configure(log_level: Optional[str] = typer.Option(None, "--log-level", help="DEBUG, INFO, WARNING or ERROR.")):
    level = log_level or Settings().log_level
    logging.basicConfig(level=getattr(logging, level.upper(), logging.INFO),
                        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')


@app.command("classify")
def classify_cmd(graph: List[str] = typer.Option(..., "--graph", "-g", help="Graph file(s).")):
    with exit_codes():
        for path in graph:
            g = load_graph(path)
            ell, t = cycle_shape(g)
            typer.echo(f"{g.name}: {classify(g).value} n={g.n} l={ell} t={t}")


@app.command("sigma")
def sigma_cmd(
    graph: str = typer.Option(..., "--graph", "-g"),
    m: int = typer.Option(..., "-m", help="Meeting size."),
    r: int = typer.Option(..., "-r", help="Number of revolutionaries."),
    exact: bool = typer.Option(False, "--exact", help="Solve exactly."),
    formula: bool = typer.Option(False, "--formula", help="Use the closed formula."),
    compare: bool = typer.Option(False, "--compare", help="Run both and compare."),
    max_states: Optional[int] = typer.Option(None, "--max-states"),
):
    with exit_codes():
        budget = max_states or Settings().max_states
        g = load_graph(graph)
        if compare or (exact and formula):
            found = sigma_exact(g, m, r, budget).sigma
            expected = sigma_formula(g, m, r).sigma
            if found != expected:
                console.print(f"[bold red]disagree: formula={expected} exact={found}[/bold red]")
                raise typer.Exit(code=EXIT_FOUND)
            typer.echo(f"agree: {found}")
            return
        result = sigma_formula(g, m, r) if formula else sigma_exact(g, m, r, budget)
        typer.echo(f"sigma={result.sigma}")


@app.command("solve")
def solve_cmd(
    graph: str = typer.Option(..., "--graph", "-g"),
    m: int = typer.Option(..., "-m"),
    r: int = typer.Option(..., "-r"),
    s: int = typer.Option(..., "-s"),
    max_states: Optional[int] = typer.Option(None, "--max-states"),
):
    """Decides one game and prints its solver record."""
    with exit_codes():
        g = load_graph(graph)
        record = solve_record(g, GameConfig(m=m, r=r, s=s), max_states or Settings().max_states)
        typer.echo(record.to_line())


@app.command("verify")
def verify_cmd(
    graph: str = typer.Option(..., "--graph", "-g"),
    strategy: str = typer.Option("auto", "--strategy", help="tree, cycle, unicyclic, follower or auto."),
    m: int = typer.Option(..., "-m"),
    r: int = typer.Option(..., "-r"),
    s: int = typer.Option(..., "-s"),
    max_states: Optional[int] = typer.Option(None, "--max-states"),
    transcript: Optional[str] = typer.Option(None, "--transcript", help="Where to write a counterexample."),
):
    with exit_codes():
        g = load_graph(graph)
        cfg = GameConfig(m=m, r=r, s=s)
        result = verify_strategy(g, cfg, make_spy_strategy(strategy, g, cfg, validate_moves=False),
                                 max_states or Settings().max_states)
        typer.echo(f"{result.label()} states={result.states}")
    if not result.ok:
        console.print(f"[bold red]{result.detail}[/bold red]")
        if transcript:
            with open(transcript, "w") as f:
                f.write(result.counterexample.to_text())
        raise typer.Exit(code=EXIT_FOUND)


@app.command("match")
def match_cmd(
    graph: str = typer.Option(..., "--graph", "-g"),
    m: int = typer.Option(..., "-m"),
    r: int = typer.Option(..., "-r"),
    s: int = typer.Option(..., "-s"),
    rev: str = typer.Option("flood", "--rev", help="flood, strike, random or solver."),
    spy: str = typer.Option("auto", "--spy", help="auto, tree, cycle, unicyclic, follower, random, guarding-random or solver."),
    seed: Optional[int] = typer.Option(None, "--seed"),
    max_rounds: Optional[int] = typer.Option(None, "--max-rounds"),
    transcript: Optional[str] = typer.Option(None, "--transcript"),
):
    with exit_codes():
        settings = Settings()
        seed = settings.seed if seed is None else seed
        g = load_graph(graph)
        cfg = GameConfig(m=m, r=r, s=s)
        outcome, log = play_match(g, cfg, make_rev_agent(rev, g, cfg, seed, settings.max_states),
                                  make_spy_agent(spy, g, cfg, seed, settings.max_states), max_rounds, seed)
        typer.echo(outcome.label())
        if transcript:
            with open(transcript, "w") as f:
                f.write(log.to_text())


@app.command("sweep")
def sweep_cmd(
    config: Optional[str] = typer.Option(None, "--config", "-c", help="key=value config file."),
    mode: Optional[str] = typer.Option(None, "--mode", help="classify, sigma-exact, sigma-formula, compare, verify or match."),
    family: Optional[str] = typer.Option(None, "--family", help="trees:<n-range>, cycles:<range>, unicyclic:<l-range>:<t-range>."),
    graph: Optional[List[str]] = typer.Option(None, "--graph", "-g"),
    m: Optional[int] = typer.Option(None, "-m"),
    r: Optional[int] = typer.Option(None, "-r"),
    r_values: Optional[str] = typer.Option(None, "--r-values", help="Comma-separated r values."),
    s: Optional[int] = typer.Option(None, "-s"),
    spy: Optional[str] = typer.Option(None, "--spy"),
    rev: Optional[str] = typer.Option(None, "--rev"),
    workers: Optional[int] = typer.Option(None, "--workers"),
    max_states: Optional[int] = typer.Option(None, "--max-states"),
    seed: Optional[int] = typer.Option(None, "--seed"),
    record_timings: Optional[bool] = typer.Option(None, "--record-timings/--no-timings"),
    output: Optional[str] = typer.Option(None, "--output", "-o", help="Report path."),
    quiet: bool = typer.Option(False, "--quiet", help="No progress bar or table."),
):
    with exit_codes():
        run = build_run_config(
            config, mode=mode, family=family, graphs=graph or None, m=m, r=r,
            r_values=[int(x) for x in r_values.split(",")] if r_values else None,
            s=s, spy_strategy=spy, rev_strategy=rev, workers=workers, max_states=max_states,
            seed=seed, record_timings=record_timings, output=output,
        )
        result = run_sweep(run, progress=not quiet)
        if run.output:
            write_report(result.rows, run.output)
    if not quiet:
        render_summary(result.rows, console, title=f"{run.mode} sweep")
    if result.budget_exhausted:
        console.print(f"[yellow]{result.budget_exhausted} instance(s) exceeded the state budget[/yellow]")
    failed = disagreements(result.rows) or [row for row in result.rows if row.verdict.startswith("Counterexample")]
    if failed:
        raise typer.Exit(code=EXIT_FOUND)


if __name__ == "__main__":
    app()
