"""Observations file parser: ``cell_id,y_1,...,y_D`` compositions."""

from __future__ import annotations

from pathlib import Path

import pandas as pd

from compolattice.errors import CompositionError
from compolattice.parsers.table import ID_COLUMN, read_table
from compolattice.utils.console import console


def parse(path: Path) -> pd.DataFrame:
    """Parse observed compositions, sorted by ``cell_id``.

    Raises:
        CompositionError: With fewer than two parts or negative parts.
    """
    frame = read_table(path, kind="Observations", min_columns=3)
    parts = frame.drop(columns=[ID_COLUMN])
    if (parts < 0).any().any():
        raise CompositionError(f"Observations file {path} has negative parts.")
    return frame.sort_values(ID_COLUMN, kind="stable").reset_index(drop=True)


def report(frame: pd.DataFrame) -> int:
    """Print a one-line observations summary and return the row count."""
    parts = frame.shape[1] - 1
    console.print(
        f"[cyan]Observations: {len(frame)} compositions with {parts} parts.[/cyan]"
    )
    return len(frame)
