"""Command-line interface."""

from lorentzfm.cli.main import build_parser, main

__all__ = ["build_parser", "main"]
