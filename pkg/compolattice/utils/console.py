"""Shared console and logging utilities for CLI output."""

from __future__ import annotations

from functools import lru_cache
import logging

from rich.console import Console
from rich.logging import RichHandler


@lru_cache(maxsize=1)
def get_console() -> Console:
    """Get the Rich console shared by the CLI.

    Output goes to stderr so that data written to stdout stays clean.

    Returns:
        Console: Rich console instance.
    """
    terminal = Console(width=120, stderr=True)
    return terminal


# Convenience instance for modules that just need a console
console: Console = get_console()


def configure_logging(verbose: bool = False) -> None:
    """Route package loggers through a RichHandler bound to the shared console.

    Args:
        verbose: Emit debug records when true, warnings and above otherwise.
    """
    logger = logging.getLogger("compolattice")
    logger.setLevel(logging.DEBUG if verbose else logging.WARNING)
    if not any(isinstance(handler, RichHandler) for handler in logger.handlers):
        logger.addHandler(
            RichHandler(console=console, show_path=False, markup=False)
        )
