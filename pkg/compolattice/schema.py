"""Configuration contract for compolattice runs."""

from __future__ import annotations

from copy import deepcopy
import math
from pathlib import Path
from typing import Any, Literal, cast

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    ValidationInfo,
    field_validator,
    model_validator,
)
from yaml import dump as yaml_dump
from yaml import safe_load

from compolattice import DEFAULT_CONFIG_FILENAME
from compolattice.errors import ConfigError
from compolattice.utils.runtime import digest

Variant = Literal["full", "regression_only"]
DATA_PATH_FIELDS = ("grid", "observations", "covariates")


def _normalize_relative_data_paths(
    payload: dict[str, Any], *, base: Path | None
) -> dict[str, Any]:
    """Resolve relative data file paths against the config file directory."""
    if base is None:
        return payload

    normalized = deepcopy(payload)
    data = normalized.get("data")
    if not isinstance(data, dict):
        return normalized
    for key in DATA_PATH_FIELDS:
        source = data.get(key)
        if not isinstance(source, str):
            continue
        source_path = Path(source)
        if source_path.is_absolute():
            continue
        data[key] = str((base / source_path).resolve())
    return normalized


class HyperParams(BaseModel):
    """Hyperparameters of the hierarchical model priors."""

    a_alpha: float = Field(
        1.5,
        gt=0,
        title="Gamma shape for alpha",
        description="Shape of the Gamma prior on the Dirichlet scale.",
        examples=[1.5],
    )
    b_alpha: float = Field(
        0.1,
        gt=0,
        title="Gamma rate for alpha",
        description="Rate of the Gamma prior on the Dirichlet scale.",
        examples=[0.1],
    )
    a_kappa: float = Field(
        1.0,
        gt=0,
        title="Gamma shape for kappa",
        description="Shape of the Gamma prior on the spatial scale.",
        examples=[1.0],
    )
    b_kappa: float = Field(
        math.log(100) / math.sqrt(8),
        gt=0,
        title="Gamma rate for kappa",
        description="Rate of the Gamma prior on kappa; 1% prior mass on range < 1.",
        examples=[1.6282],
    )
    a_rho: float = Field(
        1.0,
        gt=0,
        title="Inverse-Wishart scale",
        description="Multiplier of the identity scale matrix of the rho prior.",
        examples=[1.0],
    )
    b_rho: float = Field(
        10.0,
        gt=0,
        title="Inverse-Wishart degrees of freedom",
        description="Degrees of freedom of the rho prior.",
        examples=[10.0],
    )
    q_beta: float = Field(
        1e-3,
        gt=0,
        title="Coefficient prior precision",
        description="Precision of the Gaussian prior on the regression coefficients.",
        examples=[1e-3],
    )

    model_config = ConfigDict(extra="forbid", validate_assignment=True)

    def check_dimension(self, d: int) -> None:
        """Require a proper inverse-Wishart prior for ``d`` latent fields."""
        if self.b_rho <= d - 1:
            raise ConfigError(
                f"b_rho must exceed d - 1 = {d - 1} for a proper prior, got {self.b_rho}."
            )


class SamplerConfig(BaseModel):
    """Settings of the two-block MCMC sampler."""

    n_iter: int = Field(
        100_000, ge=1, title="Iterations", description="Total MCMC iterations."
    )
    burn_in: int = Field(
        10_000, ge=0, title="Burn-in", description="Discarded leading iterations."
    )
    thin: int = Field(1, ge=1, title="Thinning", description="Keep every thin-th draw.")
    eps0: float = Field(
        0.1, gt=0, title="Initial MALA step", description="Initial MALA step size."
    )
    sigma_kappa0: float = Field(
        0.3,
        gt=0,
        title="Initial kappa step",
        description="Initial standard deviation of the log-kappa random walk.",
    )
    target_mala: float = Field(
        0.57, gt=0, lt=1, description="Target MALA acceptance rate."
    )
    target_rw: float = Field(
        0.4, gt=0, lt=1, description="Target kappa random-walk acceptance rate."
    )
    seed: int = Field(0, ge=0, lt=2**64, description="Master random seed.")
    model_variant: Variant = Field(
        "full",
        description="Spatial model with latent field, or covariates only.",
        examples=["full", "regression_only"],
    )
    progress: bool = Field(
        False,
        description="Show a progress bar on stderr.",
        json_schema_extra={"richforms": {"exclude": True}},
    )

    model_config = ConfigDict(extra="forbid", validate_assignment=True)

    @model_validator(mode="after")
    def validate_burn_in(self) -> "SamplerConfig":
        """Require at least one post-burn-in iteration."""
        if self.burn_in >= self.n_iter:
            raise ValueError("burn_in must be smaller than n_iter.")
        return self

    @property
    def n_samples(self) -> int:
        """Number of draws stored in the trace."""
        return (self.n_iter - self.burn_in) // self.thin


class DataConfig(BaseModel):
    """Input files describing the lattice, observations and covariates."""

    grid: Path | None = Field(
        None,
        title="Grid file",
        description="CSV listing active cells: cell_id,row,col.",
        examples=["grid.csv"],
    )
    observations: Path | None = Field(
        None,
        title="Observations file",
        description="CSV of observed compositions: cell_id,y_1,...,y_D.",
        examples=["observations.csv"],
    )
    covariates: Path | None = Field(
        None,
        title="Covariates file",
        description="CSV of covariates for every active cell: cell_id,b_1,...",
        examples=["covariates.csv"],
    )
    spacing: float = Field(
        1.0, gt=0, description="Distance between neighbouring cell centroids."
    )
    alr_covariates: list[list[str]] = Field(
        [],
        description="Groups of compositional covariate columns to alr-transform.",
        examples=[[["lpj_1", "lpj_2", "lpj_3"]]],
    )

    model_config = ConfigDict(extra="forbid", validate_assignment=True)

    @field_validator("alr_covariates")
    @classmethod
    def validate_groups(cls, value: list[list[str]]) -> list[list[str]]:
        """Each compositional group needs at least two parts."""
        for group in value:
            if len(group) < 2:
                raise ValueError("alr covariate groups need at least two columns.")
        return value


class SimulationConfig(BaseModel):
    """Truth used by the ``simulate`` command."""

    n_rows: int = Field(27, ge=1)
    n_cols: int = Field(40, ge=1)
    n_obs: int = Field(180, ge=1, description="Number of observed cells.")
    n_covariates: int = Field(2, ge=0, description="Covariates besides the intercept.")
    parts: int = Field(3, ge=2, description="Number of compositional parts D.")
    alpha: float = Field(8.0, gt=0)
    kappa: float = Field(0.25, gt=0)
    rho_scale: float = Field(1.0, gt=0, description="Diagonal entries of the true rho.")
    rho_correlation: float = Field(
        0.5, gt=-1, lt=1, description="Correlation between latent fields."
    )
    beta: list[float] | None = Field(
        None,
        description="Field-major coefficients (d blocks of p); drawn when omitted.",
    )

    model_config = ConfigDict(extra="forbid", validate_assignment=True)

    @model_validator(mode="after")
    def validate_obs(self) -> "SimulationConfig":
        """Observed cells must fit in the grid."""
        if self.n_obs > self.n_rows * self.n_cols:
            raise ValueError("n_obs cannot exceed the number of grid cells.")
        return self


class CvConfig(BaseModel):
    """Repeated k-fold cross-validation settings."""

    folds: int = Field(6, ge=2)
    repeats: int = Field(10, ge=1)
    n_iter: int = Field(20_000, ge=1, description="Chain length of each refit.")
    burn_in: int = Field(5_000, ge=0, description="Burn-in of each refit.")
    thin: int = Field(10, ge=1)
    variants: list[Variant] = Field(["full", "regression_only"], min_length=1)

    model_config = ConfigDict(extra="forbid", validate_assignment=True)

    @model_validator(mode="after")
    def validate_chain(self) -> "CvConfig":
        """Refit chains need post-burn-in draws."""
        if self.burn_in >= self.n_iter:
            raise ValueError("cv.burn_in must be smaller than cv.n_iter.")
        return self


class RegionConfig(BaseModel):
    """Settings of the confidence/prediction region products."""

    level: float = Field(0.95, gt=0, le=1)
    cells: list[int] | None = Field(
        None, description="Cell ids to summarize; all cells when omitted."
    )
    summary: Literal["mean_z", "inv_alr_mean_eta"] = Field(
        "mean_z",
        description="Point summary: posterior mean of z, or inv_alr of mean eta.",
    )
    boundary_points: int = Field(4096, ge=8)

    model_config = ConfigDict(extra="forbid", validate_assignment=True)


class RunConfig(BaseModel):
    """Canonical run configuration for the compolattice CLI."""

    version: Literal[1] = Field(
        1,
        description="Configuration schema version.",
        json_schema_extra={"richforms": {"exclude": True}},
    )
    data: DataConfig = Field(
        default_factory=DataConfig, title="Data", description="Input files."
    )
    hyper: HyperParams = Field(
        default_factory=HyperParams,
        title="Hyperparameters",
        description="Prior settings.",
    )
    sampler: SamplerConfig = Field(
        default_factory=SamplerConfig, title="Sampler", description="MCMC settings."
    )
    cv: CvConfig = Field(default_factory=CvConfig, title="Cross-validation")
    regions: RegionConfig = Field(default_factory=RegionConfig, title="Regions")
    simulation: SimulationConfig = Field(
        default_factory=SimulationConfig, title="Simulation"
    )
    output: Path = Field(Path("out"), description="Output directory.")

    model_config = ConfigDict(
        extra="forbid",
        validate_assignment=True,
        json_schema_extra={"title": "compolattice run configuration"},
    )

    @model_validator(mode="before")
    @classmethod
    def normalize_relative_paths_with_context(
        cls, payload: Any, info: ValidationInfo
    ) -> Any:
        """Normalize relative data paths using optional base_dir validation context."""
        if not isinstance(payload, dict):
            return payload
        context = info.context or {}
        base_dir = context.get("base_dir")
        if isinstance(base_dir, str):
            base_dir = Path(base_dir)
        if not isinstance(base_dir, Path):
            return payload
        return _normalize_relative_data_paths(payload, base=base_dir)

    @classmethod
    def from_yaml(cls, path: Path | str) -> "RunConfig":
        """Load a run configuration from a YAML file."""
        location = Path(path).expanduser().resolve()
        with location.open("r", encoding="utf-8") as datafile:
            data = safe_load(datafile)
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigError("Configuration must be a dictionary.")
        return cls.model_validate(
            cast(dict[str, Any], data),
            context={"base_dir": location.parent},
        )

    @classmethod
    def from_dict(
        cls, data: dict[str, Any], *, base_dir: Path | None = None
    ) -> "RunConfig":
        """Load a run configuration from a dictionary payload."""
        if not isinstance(data, dict):
            raise ConfigError("Configuration must be a dictionary.")
        context = (
            {"base_dir": base_dir.expanduser().resolve()}
            if base_dir is not None
            else None
        )
        return cls.model_validate(data, context=context)

    def save(self, path: Path = Path.cwd() / DEFAULT_CONFIG_FILENAME) -> None:
        """Save the configuration to YAML with fully materialized defaults."""
        payload = self.model_dump(mode="json", exclude_defaults=False)
        with path.open("w", encoding="utf-8") as datafile:
            yaml_dump(payload, datafile, sort_keys=False)

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON form, embedded in every output."""
        return digest(self.model_dump(mode="json", exclude={"sampler": {"progress"}}))

    def with_overrides(self, **overrides: Any) -> "RunConfig":
        """Return a copy with dotted-path overrides applied, ignoring ``None`` values.

        Example: ``with_overrides(**{"sampler.seed": 3, "output": Path("x")})``.
        """
        payload = self.model_dump(mode="python")
        for dotted, value in overrides.items():
            if value is None:
                continue
            node = payload
            *parents, leaf = dotted.split(".")
            for key in parents:
                node = node[key]
            node[leaf] = value
        return type(self).model_validate(payload)


if __name__ == "__main__":
    import json

    print(json.dumps(RunConfig.model_json_schema(), indent=2))
