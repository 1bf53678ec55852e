"""Shared model fixtures."""

from __future__ import annotations

import numpy as np
import pytest

from compolattice.core import Observations, build_lattice
from compolattice.core.lattice import LatticeModel
from compolattice.core.likelihood import ModelState
from compolattice.sampler.chain import run_chain
from compolattice.sampler.trace import McmcTrace
from compolattice.schema import HyperParams, SamplerConfig, SimulationConfig
from compolattice.validation.simulate import (
    SyntheticDataset,
    simulate_dataset,
    synthetic_lattice,
    true_state,
)


@pytest.fixture()
def rng() -> np.random.Generator:
    """Provide a seeded random stream."""
    return np.random.default_rng(20240611)


@pytest.fixture()
def hp() -> HyperParams:
    """Provide default hyperparameters."""
    return HyperParams()


@pytest.fixture()
def small_lattice(rng: np.random.Generator) -> LatticeModel:
    """3x3 lattice with five observed nodes and one covariate."""
    lattice = build_lattice(3, 3)
    covariates = np.column_stack([np.ones(9), np.linspace(-1.0, 1.0, 9)])
    return lattice.with_design([0, 2, 4, 6, 8], covariates)


@pytest.fixture()
def small_data(rng: np.random.Generator) -> Observations:
    """Five interior three-part compositions."""
    return Observations(rng.dirichlet([4.0, 3.0, 2.0], size=5))


@pytest.fixture()
def small_state(rng: np.random.Generator) -> ModelState:
    """A valid state on the 3x3 lattice with d = 2 fields and p = 2."""
    return ModelState(
        X=0.3 * rng.standard_normal(18),
        beta=np.array([0.2, -0.1, 0.4, 0.3]),
        alpha=6.0,
        kappa=0.8,
        rho=np.array([[1.0, 0.3], [0.3, 0.7]]),
    )


BENCHMARK_BETA = [0.3, 0.5, -0.3, -0.2, 0.2, 0.4]


def synthetic_dataset(
    n_rows: int, n_cols: int, n_obs: int, seed: int, **truth
) -> SyntheticDataset:
    """Draw full-model data with the default simulation truth and two covariates."""
    rng = np.random.default_rng(seed)
    settings = SimulationConfig(n_rows=n_rows, n_cols=n_cols, n_obs=n_obs, **truth)
    lattice = synthetic_lattice(
        n_rows, n_cols, n_obs, rng, n_covariates=settings.n_covariates
    )
    return simulate_dataset(lattice, true_state(lattice, settings, rng), rng)


@pytest.fixture(scope="session")
def benchmark_fit() -> tuple[SyntheticDataset, McmcTrace]:
    """A 20x20 simulated dataset with 150 observed cells and a long full-model fit."""
    dataset = synthetic_dataset(20, 20, 150, seed=2024, beta=BENCHMARK_BETA)
    config = SamplerConfig(n_iter=20_000, burn_in=8_000, thin=10, seed=7)
    trace = run_chain(dataset.lattice, dataset.observations, HyperParams(), config)
    return dataset, trace
