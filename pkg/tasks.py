# Copyright (c) 2024 WAVEDECAY Laboratory
# All rights reserved.

"""Build and development tasks for the wavedecay laboratory."""

from pathlib import Path

from invoke import Context, task

MAIN_DIRECTORY_PATH = Path(__file__).parent

SCENARIO_DIRECTORY = MAIN_DIRECTORY_PATH / "scenarios"


@task(name="format")
def format_all(context: Context) -> None:
    """Run RUFF to format all Python files."""
    exec_cmds = ["ruff format .", "ruff check . --fix"]
    with context.cd(MAIN_DIRECTORY_PATH):
        for cmd in exec_cmds:
            context.run(cmd, pty=True)


@task
def lint_ruff(context: Context) -> None:
    """Run Linter to check all Python files."""
    exec_cmd = "ruff check ."
    with context.cd(MAIN_DIRECTORY_PATH):
        context.run(exec_cmd, pty=True)


@task
def lint_mypy(context: Context) -> None:
    """Type-check the sources."""
    exec_cmd = "mypy src"
    with context.cd(MAIN_DIRECTORY_PATH):
        context.run(exec_cmd, pty=True)


@task(name="lint")
def lint_all(context: Context) -> None:
    """Run all linters."""
    lint_ruff(context)
    lint_mypy(context)


@task(name="test")
def test(context: Context) -> None:
    """Run the test suite."""
    with context.cd(MAIN_DIRECTORY_PATH):
        context.run("pytest", pty=True)


@task(name="baseline")
def baseline(context: Context, scenario: str = "baseline", out: str = "results") -> None:
    """Run one of the bundled scenarios end to end."""
    path = SCENARIO_DIRECTORY / f"{scenario}.json"
    with context.cd(MAIN_DIRECTORY_PATH):
        context.run(f"python src/main.py run --scenario {path} --out {out}", pty=True)
