"""CLI helper utilities."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
from pydantic import ValidationError
from rich.table import Table
from yaml import YAMLError

from compolattice import DEFAULT_CONFIG_FILENAME
from compolattice import schema
from compolattice.core.lattice import LatticeModel
from compolattice.core.likelihood import Observations
from compolattice.errors import ConfigError
from compolattice.ingest import ingest
from compolattice.utils.console import console

VARIANT_FLAGS: dict[str, tuple[schema.Variant, ...]] = {
    "full": ("full",),
    "rm": ("regression_only",),
    "both": ("full", "regression_only"),
}


def load_config(path: Path | None, **overrides: Any) -> schema.RunConfig:
    """Load a run configuration and apply CLI overrides.

    Without ``path`` the default file in the working directory is used when it
    exists, otherwise built-in defaults.

    Args:
        path: Path to a YAML run configuration.
        overrides: Dotted-path overrides; ``None`` values are ignored.

    Returns:
        Validated run configuration.

    Raises:
        ConfigError: If the file is missing or invalid.
    """
    try:
        if path is not None:
            location = path.expanduser()
            if not location.is_file():
                raise ConfigError(f"Configuration file not found: {location}")
            console.print(f"[cyan]Reading configuration: {location}[/cyan]")
            config = schema.RunConfig.from_yaml(location)
        elif Path(DEFAULT_CONFIG_FILENAME).is_file():
            console.print(f"[cyan]Reading configuration: {DEFAULT_CONFIG_FILENAME}[/cyan]")
            config = schema.RunConfig.from_yaml(Path(DEFAULT_CONFIG_FILENAME))
        else:
            config = schema.RunConfig()
        return config.with_overrides(**overrides)
    except ValidationError as exc:
        raise ConfigError(f"Invalid configuration: {exc}") from exc
    except YAMLError as exc:
        raise ConfigError(f"Configuration is not valid YAML: {exc}") from exc


def variants_for(flag: str | None, default: tuple[schema.Variant, ...]) -> tuple[schema.Variant, ...]:
    """Translate a ``--variant`` flag into model variants."""
    if flag is None:
        return default
    try:
        return VARIANT_FLAGS[flag]
    except KeyError:
        raise ConfigError(f"Unknown variant '{flag}'; use full, rm or both.") from None


def load_inputs(config: schema.RunConfig) -> tuple[LatticeModel, Observations]:
    """Ingest the grid, observations and covariates named by ``config.data``."""
    data = config.data
    if data.grid is None or data.observations is None:
        raise ConfigError("data.grid and data.observations must be set.")
    lattice, observations = ingest(
        data.grid,
        data.observations,
        data.covariates,
        spacing=data.spacing,
        alr_covariates=data.alr_covariates,
        report=True,
    )
    config.hyper.check_dimension(observations.d)
    return lattice, observations


def meta(config: schema.RunConfig, **extra: Any) -> dict[str, Any]:
    """Provenance block embedded in every output file."""
    return {"config_hash": config.config_hash(), "seed": config.sampler.seed, **extra}


def comment_line(payload: dict[str, Any]) -> str:
    """Render provenance as the ``key=value`` comment heading a CSV file."""
    return " ".join(f"{key}={value}" for key, value in payload.items())


def _jsonable(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def write_json(payload: dict[str, Any], path: Path) -> Path:
    """Write a JSON document with sorted keys."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(payload, indent=2, sort_keys=True, default=_jsonable) + "\n",
        encoding="utf-8",
    )
    console.print(f"[cyan]Wrote {path}[/cyan]")
    return path


def write_csv(frame: pd.DataFrame, path: Path, provenance: dict[str, Any]) -> Path:
    """Write a CSV file headed by a ``# config_hash=... seed=...`` comment."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        handle.write(f"# {comment_line(provenance)}\n")
        frame.to_csv(handle, index=False)
    console.print(f"[cyan]Wrote {path}[/cyan]")
    return path


def print_table(frame: pd.DataFrame, title: str) -> None:
    """Print a data frame as a rich table."""
    table = Table(title=title)
    for column in frame.columns:
        table.add_column(str(column))
    for row in frame.itertuples(index=False):
        table.add_row(
            *(f"{value:.4f}" if isinstance(value, float) else str(value) for value in row)
        )
    console.print(table)


def print_json_output(payload: object) -> None:
    """Print JSON payload with formatting.

    Args:
        payload: Parsed JSON payload.
    """
    console.print_json(json.dumps(payload, indent=2, default=_jsonable))
