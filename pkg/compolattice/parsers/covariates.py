"""Covariates file parser: ``cell_id,b_1,...`` for every active cell."""

from __future__ import annotations

from pathlib import Path

import pandas as pd

from compolattice.parsers.table import ID_COLUMN, read_table
from compolattice.utils.console import console


def parse(path: Path) -> pd.DataFrame:
    """Parse covariates sorted by ``cell_id``; the intercept is added at ingestion."""
    frame = read_table(path, kind="Covariates", min_columns=2)
    return frame.sort_values(ID_COLUMN, kind="stable").reset_index(drop=True)


def report(frame: pd.DataFrame) -> int:
    """Print a one-line covariates summary and return the column count."""
    names = [column for column in frame.columns if column != ID_COLUMN]
    console.print(
        f"[cyan]Covariates: {len(names)} column(s) for {len(frame)} cells: "
        f"{', '.join(names)}[/cyan]"
    )
    return len(names)
