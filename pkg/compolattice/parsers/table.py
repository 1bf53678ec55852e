"""Shared CSV reading for the input parsers."""

from __future__ import annotations

from pathlib import Path

import pandas as pd

from compolattice.errors import DataError

ID_COLUMN = "cell_id"


def read_table(path: Path, *, kind: str, min_columns: int = 2) -> pd.DataFrame:
    """Read a numeric CSV keyed by ``cell_id``.

    Lines starting with ``#`` are comments. Floats are parsed with round-trip
    precision so emitted files reproduce their values exactly.

    Raises:
        DataError: If the file is missing or malformed, has non-numeric or
            missing values, or repeats a cell id.
    """
    location = Path(path)
    if not location.is_file():
        raise DataError(f"{kind} file not found: {location}")
    try:
        frame = pd.read_csv(location, comment="#", float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise DataError(f"Cannot parse {kind} file {location}: {exc}") from exc
    frame.columns = [str(column).strip() for column in frame.columns]
    if ID_COLUMN not in frame.columns:
        raise DataError(f"{kind} file {location} has no '{ID_COLUMN}' column.")
    if frame.shape[1] < min_columns:
        raise DataError(
            f"{kind} file {location} needs at least {min_columns} columns, got {frame.shape[1]}."
        )
    if frame.isna().any().any():
        raise DataError(f"{kind} file {location} has missing values.")
    non_numeric = [
        column for column in frame.columns if not pd.api.types.is_numeric_dtype(frame[column])
    ]
    if non_numeric:
        raise DataError(f"{kind} file {location} has non-numeric columns: {non_numeric}")
    if not pd.api.types.is_integer_dtype(frame[ID_COLUMN]):
        raise DataError(f"{kind} file {location} has non-integer cell ids.")
    duplicated = frame[ID_COLUMN][frame[ID_COLUMN].duplicated()].unique().tolist()
    if duplicated:
        raise DataError(f"{kind} file {location} repeats cell ids: {duplicated}")
    return frame
