"""CLI for aoilab."""

from aoilab.cli.commands import cli, main

__all__ = ["cli", "main"]
