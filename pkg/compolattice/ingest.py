"""CSV ingestion of lattice inputs and their exact emission."""

from __future__ import annotations

from collections.abc import Sequence
import logging
from pathlib import Path

import numpy as np
import pandas as pd

from compolattice import parsers
from compolattice.core.composition import alr, closure, repair
from compolattice.core.lattice import LatticeModel, build_lattice
from compolattice.core.likelihood import Observations
from compolattice.errors import CompositionError, DataError, LatticeError
from compolattice.parsers.table import ID_COLUMN

logger = logging.getLogger(__name__)

SUM_TOLERANCE = 1e-6
INPUT_FILES = {
    "grid": "grid.csv",
    "observations": "observations.csv",
    "covariates": "covariates.csv",
}


def _lattice_from_grid(frame: pd.DataFrame, spacing: float) -> LatticeModel:
    rows = frame["row"].to_numpy(dtype=np.int64)
    cols = frame["col"].to_numpy(dtype=np.int64)
    n_rows, n_cols = int(rows.max()) + 1, int(cols.max()) + 1
    mask = np.zeros((n_rows, n_cols), dtype=bool)
    mask[rows, cols] = True
    return build_lattice(
        n_rows,
        n_cols,
        spacing,
        mask=mask,
        cell_ids=frame[ID_COLUMN].to_numpy(dtype=np.int64),
    )


def _alr_groups(frame: pd.DataFrame, groups: Sequence[Sequence[str]]) -> pd.DataFrame:
    """Replace each compositional column group by its alr coordinates."""
    result = frame.copy()
    for group in groups:
        missing = [column for column in group if column not in result.columns]
        if missing:
            raise DataError(f"alr covariate columns not found: {missing}")
        values = result[list(group)].to_numpy(dtype=np.float64)
        if np.any(values <= 0):
            raise CompositionError(f"alr covariate group {list(group)} has non-positive values.")
        coordinates = alr(closure(values))
        result = result.drop(columns=list(group))
        for k, name in enumerate(group[:-1]):
            result[f"{name}_alr"] = coordinates[:, k]
    return result


def _covariate_matrix(
    frame: pd.DataFrame, cell_ids: np.ndarray, groups: Sequence[Sequence[str]]
) -> np.ndarray:
    known = set(cell_ids.tolist())
    present = set(frame[ID_COLUMN].tolist())
    missing = sorted(known - present)
    if missing:
        raise DataError(f"Covariates are missing for cells: {missing[:10]}")
    extra = sorted(present - known)
    if extra:
        raise LatticeError(f"Covariates reference unknown cells: {extra[:10]}")
    aligned = _alr_groups(frame.set_index(ID_COLUMN).loc[cell_ids], groups)
    values = aligned.to_numpy(dtype=np.float64)
    return np.column_stack([np.ones(len(cell_ids)), values])


def ingest(
    grid_csv: Path,
    obs_csv: Path,
    cov_csv: Path | None = None,
    *,
    spacing: float = 1.0,
    alr_covariates: Sequence[Sequence[str]] = (),
    report: bool = False,
) -> tuple[LatticeModel, Observations]:
    """Build a lattice and its observations from CSV inputs.

    Args:
        grid_csv: Active cells as ``cell_id,row,col``.
        obs_csv: Observed compositions as ``cell_id,y_1,...,y_D``.
        cov_csv: Covariates for every active cell; intercept only when omitted.
        spacing: Distance between neighbouring cell centroids.
        alr_covariates: Groups of compositional covariate columns to alr-transform.
        report: Print a summary line per parsed file.

    Returns:
        The lattice with ``obs_index`` sorted by cell id and the repaired
        observations in the same order.

    Raises:
        DataError: For unknown or duplicate cell ids, rows not summing to one,
            or missing covariates.
    """
    grid_frame = parsers.get("grid").parse(grid_csv)
    obs_frame = parsers.get("observations").parse(obs_csv)
    cov_frame = parsers.get("covariates").parse(cov_csv) if cov_csv is not None else None
    if report:
        parsers.get("grid").report(grid_frame)
        parsers.get("observations").report(obs_frame)
        if cov_frame is not None:
            parsers.get("covariates").report(cov_frame)

    lattice = _lattice_from_grid(grid_frame, spacing)
    cell_ids = lattice.ids
    lookup = pd.Series(np.arange(lattice.N), index=cell_ids)

    unknown = sorted(set(obs_frame[ID_COLUMN]) - set(cell_ids.tolist()))
    if unknown:
        raise LatticeError(f"Observations reference unknown cells: {unknown[:10]}")
    raw = obs_frame.drop(columns=[ID_COLUMN]).to_numpy(dtype=np.float64)
    deviation = np.abs(raw.sum(axis=1) - 1.0)
    if np.any(deviation > SUM_TOLERANCE):
        bad = obs_frame[ID_COLUMN][deviation > SUM_TOLERANCE].tolist()
        raise CompositionError(f"Observations do not sum to 1 for cells: {bad[:10]}")
    y, repaired = repair(raw)
    obs_index = lookup.loc[obs_frame[ID_COLUMN]].to_numpy(dtype=np.int64)

    covariates = None
    if cov_frame is not None:
        covariates = _covariate_matrix(cov_frame, cell_ids, alr_covariates)
    return lattice.with_design(obs_index, covariates), Observations(y, repaired=repaired)


def _write(frame: pd.DataFrame, path: Path, comment: str | None) -> Path:
    with path.open("w", encoding="utf-8", newline="") as handle:
        if comment:
            handle.write(f"# {comment}\n")
        frame.to_csv(handle, index=False)
    return path


def emit(
    lattice: LatticeModel,
    data: Observations,
    directory: Path,
    *,
    comment: str | None = None,
) -> dict[str, Path]:
    """Write grid, observations and covariates CSV files readable by :func:`ingest`.

    Returns:
        Paths keyed by input kind; ``covariates`` is absent for an
        intercept-only design.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    ids = lattice.ids
    paths = {
        "grid": _write(
            pd.DataFrame(
                {ID_COLUMN: ids, "row": lattice.coords[:, 0], "col": lattice.coords[:, 1]}
            ),
            directory / INPUT_FILES["grid"],
            comment,
        )
    }
    observed = pd.DataFrame(
        data.y, columns=[f"y_{k + 1}" for k in range(data.D)]
    )
    observed.insert(0, ID_COLUMN, ids[lattice.obs_index])
    paths["observations"] = _write(
        observed.sort_values(ID_COLUMN, kind="stable"),
        directory / INPUT_FILES["observations"],
        comment,
    )
    if lattice.p > 1:
        covariates = pd.DataFrame(
            lattice.covariates[:, 1:], columns=[f"b_{j}" for j in range(1, lattice.p)]
        )
        covariates.insert(0, ID_COLUMN, ids)
        paths["covariates"] = _write(
            covariates, directory / INPUT_FILES["covariates"], comment
        )
    return paths


__all__ = ["INPUT_FILES", "emit", "ingest"]
