"""Grid file parser: active cells as ``cell_id,row,col``."""

from __future__ import annotations

from pathlib import Path

import pandas as pd

from compolattice.errors import LatticeError
from compolattice.parsers.table import read_table
from compolattice.utils.console import console

COLUMNS = ["cell_id", "row", "col"]


def parse(path: Path) -> pd.DataFrame:
    """Parse a grid file, sorted row-major by ``(row, col)``."""
    frame = read_table(path, kind="Grid", min_columns=3)
    missing = [column for column in COLUMNS if column not in frame.columns]
    if missing:
        raise LatticeError(f"Grid file {path} is missing columns: {missing}")
    frame = frame[COLUMNS]
    if not all(pd.api.types.is_integer_dtype(frame[c]) for c in ("row", "col")):
        raise LatticeError(f"Grid file {path} has non-integer row/col values.")
    if (frame[["row", "col"]] < 0).any().any():
        raise LatticeError(f"Grid file {path} has negative row/col values.")
    if frame.duplicated(["row", "col"]).any():
        raise LatticeError(f"Grid file {path} lists a cell position twice.")
    if frame.empty:
        raise LatticeError(f"Grid file {path} lists no cells.")
    return frame.sort_values(["row", "col"], kind="stable").reset_index(drop=True)


def report(frame: pd.DataFrame) -> int:
    """Print a one-line grid summary and return the number of active cells."""
    n_rows = int(frame["row"].max()) + 1
    n_cols = int(frame["col"].max()) + 1
    console.print(
        f"[cyan]Grid: {len(frame)} active cells on a {n_rows}x{n_cols} lattice.[/cyan]"
    )
    return len(frame)
