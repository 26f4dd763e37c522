import logging

import pytest
from rich.console import Console
from typer.testing import CliRunner

from main import EXIT_BUDGET, EXIT_FOUND, EXIT_USAGE, app
from modules.harness.config import Settings, build_run_config, read_config_file
from modules.harness.reporting import SCHEMA_LINE, disagreements, read_report, render_summary, write_report
from modules.harness.sweep import default_spy_count, plan_tasks, run_sweep
from modules.schemas.messages import RunConfig

runner = CliRunner()


def test_read_config_file(tmp_path, caplog):
    path = tmp_path / "run.cfg"
    path.write_text("# sweep\nmode=compare\ngraphs=a.txt, b.txt\nm=3\nbogus=1\n")
    with caplog.at_level(logging.WARNING):
        values = read_config_file(str(path))
    assert values == {"mode": "compare", "graphs": ["a.txt", "b.txt"], "m": "3"}
    assert "bogus" in caplog.text


def test_flags_beat_environment_beat_file(tmp_path, monkeypatch):
    path = tmp_path / "run.cfg"
    path.write_text("mode=sigma-formula\nm=3\nseed=1\nworkers=1\nr=4\n")
    monkeypatch.setenv("REVSPY_SEED", "7")
    run = build_run_config(str(path), Settings(_env_file=None), workers=2, r=None)
    assert run.mode == "sigma-formula"
    assert run.m == 3
    assert run.seed == 7
    assert run.workers == 2
    assert run.r == 4


def test_invalid_values_name_the_key():
    with pytest.raises(ValueError, match="mode"):
        build_run_config(None, Settings(_env_file=None), mode="guess")


def test_plan_skips_overfull_instances(graph_file):
    config = RunConfig(mode="sigma-formula", graphs=[graph_file("p3.txt")], m=2, r_values=[3, 7])
    assert [task.r for task in plan_tasks(config)] == [3]
    with pytest.raises(ValueError):
        plan_tasks(RunConfig(mode="compare", graphs=[graph_file("p3.txt")]))


def test_default_spy_counts(c4, c6, c4_pendant):
    assert default_spy_count("tree", 2, 5) == 2
    assert default_spy_count("cycle", 2, 5) == 3
    assert default_spy_count("follower", 2, 5) == 4
    assert default_spy_count("cycle", 2, 5, c4) == 2
    assert default_spy_count("cycle", 2, 5, c6) == 3
    assert default_spy_count("unicyclic", 2, 7, c4_pendant) == 3
    assert default_spy_count("unicyclic", 2, 5, c4_pendant) == 3


def test_verify_sweep_runs_short_cycles_on_the_floor():
    rows = run_sweep(RunConfig(mode="verify", family="unicyclic:4-4:1-1", m=2, r=7), progress=False).rows
    assert len(rows) == 2
    assert {(row.method, row.s, row.verdict) for row in rows} == {("Verify:unicyclic", 3, "Ok")}


def test_compare_sweep_on_cycles_agrees():
    result = run_sweep(RunConfig(mode="compare", family="cycles:3-5", m=2, r_values=[3, 5]), progress=False)
    assert len(result.rows) == 6
    assert {row.verdict for row in result.rows} == {"agree"}
    assert not disagreements(result.rows)
    assert [row.graph for row in result.rows[:2]] == ["c3", "c3"]


def test_sweep_modes(graph_file):
    p4, c5, bowtie = graph_file("p4.txt"), graph_file("c5.txt"), graph_file("bowtie.txt")
    verify = run_sweep(RunConfig(mode="verify", graphs=[p4], m=2, r=4), progress=False).rows[0]
    assert (verify.method, verify.verdict, verify.s) == ("Verify:tree", "Ok", 2)

    match = run_sweep(RunConfig(mode="match", graphs=[c5], m=2, r=4, max_rounds=20), progress=False).rows[0]
    assert match.verdict == "Spies:HorizonSurvived(20)"
    short = run_sweep(RunConfig(mode="match", graphs=[c5], m=2, r=3), progress=False).rows[0]
    assert short.verdict == "Precondition"

    formula = run_sweep(RunConfig(mode="sigma-formula", graphs=[bowtie], m=2, r=3), progress=False).rows[0]
    assert formula.verdict == "Unsupported"
    compare = run_sweep(RunConfig(mode="compare", graphs=[bowtie], m=2, r=3), progress=False).rows[0]
    assert compare.verdict == "exact-only"

    budget = run_sweep(RunConfig(mode="sigma-exact", graphs=[c5], m=2, r=3, max_states=10), progress=False)
    assert budget.rows[0].verdict.startswith("Budget(")
    assert budget.budget_exhausted == 1

    classify = run_sweep(RunConfig(mode="classify", graphs=[c5]), progress=False).rows[0]
    assert (classify.verdict, classify.l, classify.t) == ("Cycle", 5, 0)


def test_reports_are_byte_identical(tmp_path):
    config = RunConfig(mode="sigma-exact", family="trees:4-5", m=2, r_values=[3, 4])
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    write_report(run_sweep(config, progress=False).rows, str(first))
    write_report(run_sweep(config, progress=False).rows, str(second))
    assert first.read_bytes() == second.read_bytes()
    assert first.read_text().splitlines()[0] == SCHEMA_LINE
    frame = read_report(str(first))
    assert len(frame) == 2 * (2 + 3)
    assert set(frame["millis"]) == {0}


def test_render_summary_flags_disagreements():
    rows = run_sweep(RunConfig(mode="sigma-formula", family="cycles:5-5", m=2, r=7), progress=False).rows
    rows[0] = rows[0].model_copy(update={"verdict": "DISAGREE:formula=4"})
    console = Console(record=True, width=160)
    render_summary(rows, console)
    assert "1 formula/exact disagreement(s)" in console.export_text()


def test_cli_sigma(graph_file):
    result = runner.invoke(app, ["sigma", "--graph", graph_file("c5.txt"), "-m", "2", "-r", "7", "--exact"])
    assert result.exit_code == 0
    assert "sigma=3" in result.output
    result = runner.invoke(app, ["sigma", "--graph", graph_file("c5.txt"), "-m", "2", "-r", "7", "--compare"])
    assert result.exit_code == 0
    assert "agree: 3" in result.output


def test_cli_verify(graph_file, tmp_path):
    p4 = graph_file("p4.txt")
    result = runner.invoke(app, ["verify", "--graph", p4, "--strategy", "tree", "-m", "2", "-r", "4", "-s", "2"])
    assert result.exit_code == 0
    assert "Ok states=" in result.output
    transcript = tmp_path / "lost.txt"
    result = runner.invoke(app, ["verify", "--graph", p4, "-m", "2", "-r", "4", "-s", "1", "--transcript", str(transcript)])
    assert result.exit_code == EXIT_FOUND
    assert transcript.read_text().startswith(f"graph={p4} m=2 r=4 s=1")


def test_cli_exit_codes(graph_file, tmp_path):
    c5 = graph_file("c5.txt")
    result = runner.invoke(app, ["solve", "--graph", c5, "-m", "2", "-r", "3", "-s", "1", "--max-states", "10"])
    assert result.exit_code == EXIT_BUDGET
    result = runner.invoke(app, ["classify", "--graph", str(tmp_path / "missing.txt")])
    assert result.exit_code == EXIT_USAGE
    result = runner.invoke(app, ["classify", "--graph", c5])
    assert result.exit_code == 0
    assert "Cycle n=5 l=5 t=0" in result.output


def test_cli_sweep_writes_report(tmp_path):
    report = tmp_path / "sweep.csv"
    result = runner.invoke(app, ["sweep", "--mode", "compare", "--family", "cycles:3-4", "-m", "2",
                                 "--r-values", "3", "--quiet", "--output", str(report)])
    assert result.exit_code == 0
    lines = report.read_text().splitlines()
    assert lines[0] == SCHEMA_LINE
    assert lines[1] == "c3,Cycle,3,0,2,3,1,Compare,agree,60,0"


def test_cli_match(graph_file, tmp_path):
    c6 = graph_file("c6.txt")
    transcript = tmp_path / "match.txt"
    result = runner.invoke(app, ["match", "--graph", c6, "-m", "2", "-r", "7", "-s", "3", "--rev", "strike",
                                 "--spy", "guarding-random", "--seed", "0", "--transcript", str(transcript)])
    assert result.exit_code == 0
    assert "Revolutionaries:UnguardedMeeting" in result.output
    assert transcript.read_text().startswith(f"graph={c6} m=2 r=7 s=3 seed=0")
    result = runner.invoke(app, ["match", "--graph", c6, "-m", "2", "-r", "7", "-s", "3", "--rev", "teleport"])
    assert result.exit_code == EXIT_USAGE
