"""Tests for CLI helper utilities."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from compolattice import DEFAULT_CONFIG_FILENAME
from compolattice.cli import helpers
from compolattice.errors import ConfigError
from compolattice.schema import RunConfig


def test_load_config_defaults_without_file(monkeypatch, tmp_path: Path) -> None:
    """Without a file in the working directory the built-in defaults are used."""
    monkeypatch.chdir(tmp_path)

    config = helpers.load_config(None, **{"sampler.seed": 4})

    assert config.sampler.seed == 4
    assert config.data.grid is None


def test_load_config_prefers_working_directory_file(monkeypatch, tmp_path: Path) -> None:
    """The default file name in the working directory is picked up."""
    monkeypatch.chdir(tmp_path)
    RunConfig().with_overrides(**{"cv.folds": 4}).save(tmp_path / DEFAULT_CONFIG_FILENAME)

    assert helpers.load_config(None).cv.folds == 4


def test_load_config_errors(tmp_path: Path) -> None:
    """Missing files, bad YAML and invalid overrides are configuration errors."""
    with pytest.raises(ConfigError, match="not found"):
        helpers.load_config(tmp_path / "absent.yaml")

    broken = tmp_path / "broken.yaml"
    broken.write_text("sampler: [unclosed\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="YAML"):
        helpers.load_config(broken)

    with pytest.raises(ConfigError, match="Invalid configuration"):
        helpers.load_config(None, **{"sampler.n_iter": 1})


def test_variants_for_flags() -> None:
    """Flags map to model variants; None keeps the default."""
    assert helpers.variants_for("rm", ()) == ("regression_only",)
    assert helpers.variants_for("both", ()) == ("full", "regression_only")
    assert helpers.variants_for(None, ("full",)) == ("full",)
    with pytest.raises(ConfigError):
        helpers.variants_for("spatial", ())


def test_load_inputs_requires_data_paths() -> None:
    """Fitting needs at least a grid and observations."""
    with pytest.raises(ConfigError, match="data.grid"):
        helpers.load_inputs(RunConfig())


def test_load_inputs_reads_fixture(fixtures_dir: Path) -> None:
    """The toy configuration ingests three cells and two observations."""
    config = RunConfig.from_yaml(fixtures_dir / "compolattice.valid.yml")
    lattice, data = helpers.load_inputs(config)

    assert lattice.N == 3
    assert data.n_obs == 2


def test_write_csv_adds_provenance_comment(tmp_path: Path) -> None:
    """CSV outputs start with a config hash and seed comment."""
    config = RunConfig()
    provenance = helpers.meta(config, level=0.9)
    path = helpers.write_csv(
        pd.DataFrame({"a": [1, 2]}), tmp_path / "out" / "table.csv", provenance
    )

    first, header = path.read_text(encoding="utf-8").splitlines()[:2]
    assert first == f"# config_hash={config.config_hash()} seed=0 level=0.9"
    assert header == "a"
    assert pd.read_csv(path, comment="#")["a"].tolist() == [1, 2]


def test_write_json_handles_arrays(tmp_path: Path) -> None:
    """numpy values and paths are serialized."""
    path = helpers.write_json(
        {"x": np.arange(3), "y": np.float64(1.5), "p": Path("a")}, tmp_path / "o.json"
    )

    assert json.loads(path.read_text(encoding="utf-8")) == {"p": "a", "x": [0, 1, 2], "y": 1.5}
