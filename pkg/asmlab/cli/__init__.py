"""CLI module for asmlab."""

from asmlab.cli.main import app, main_cli
from asmlab.cli import analyze, evaluate, gen_data, report, train

__all__ = [
    "app",
    "main_cli",
    "analyze",
    "evaluate",
    "gen_data",
    "report",
    "train",
]
