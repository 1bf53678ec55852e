"""Tests for synthetic lattices and datasets."""

from __future__ import annotations

import numpy as np
import pytest

from compolattice.core.lattice import assemble_q
from compolattice.errors import ConfigError
from compolattice.schema import SimulationConfig
from compolattice.validation.simulate import (
    dirichlet_draws,
    equicorrelation,
    simulate_dataset,
    synthetic_lattice,
    true_state,
)


def test_synthetic_lattice_design(rng: np.random.Generator) -> None:
    """Sorted distinct observed cells and standardized covariates after an intercept."""
    lattice = synthetic_lattice(4, 5, 12, rng, n_covariates=2)

    assert lattice.N == 20
    assert lattice.obs_index.size == 12
    assert np.all(np.diff(lattice.obs_index) > 0)
    assert lattice.p == 3
    np.testing.assert_array_equal(lattice.covariates[:, 0], 1.0)
    np.testing.assert_allclose(lattice.covariates[:, 1:].mean(axis=0), 0.0, atol=1e-12)
    np.testing.assert_allclose(lattice.covariates[:, 1:].std(axis=0), 1.0)


def test_synthetic_lattice_rejects_bad_settings(rng: np.random.Generator) -> None:
    """Too many covariates or observed cells is a configuration error."""
    with pytest.raises(ConfigError, match="covariates"):
        synthetic_lattice(4, 5, 12, rng, n_covariates=7)
    with pytest.raises(ConfigError, match="n_obs"):
        synthetic_lattice(2, 2, 5, rng)


def test_equicorrelation() -> None:
    """Scaled equicorrelation matrix, positive definite or rejected."""
    np.testing.assert_allclose(
        equicorrelation(2, 2.0, 0.5), np.array([[2.0, 1.0], [1.0, 2.0]])
    )
    with pytest.raises(ConfigError):
        equicorrelation(3, 1.0, -0.6)


def test_true_state_uses_configured_beta(rng: np.random.Generator) -> None:
    """A given beta is used verbatim and must have d * p entries."""
    lattice = synthetic_lattice(3, 3, 4, rng, n_covariates=1)
    settings = SimulationConfig(
        n_rows=3, n_cols=3, n_obs=4, n_covariates=1, beta=[0.1, 0.2, 0.3, 0.4]
    )
    state = true_state(lattice, settings, rng)

    np.testing.assert_array_equal(state.beta, [0.1, 0.2, 0.3, 0.4])
    assert state.alpha == settings.alpha

    with pytest.raises(ConfigError, match="beta"):
        true_state(lattice, settings.model_copy(update={"beta": [1.0]}), rng)


def test_huge_alpha_observes_the_truth(rng: np.random.Generator) -> None:
    """Very concentrated Dirichlet draws sit on the true compositions."""
    lattice = synthetic_lattice(4, 4, 10, rng, n_covariates=1)
    settings = SimulationConfig(n_rows=4, n_cols=4, n_obs=10, n_covariates=1, alpha=1e8)
    dataset = simulate_dataset(lattice, true_state(lattice, settings, rng), rng)

    observed = dataset.observations.y
    np.testing.assert_allclose(observed, dataset.z_all[lattice.obs_index], atol=1e-3)
    np.testing.assert_allclose(observed.sum(axis=1), 1.0)
    assert dataset.state.X.shape == (lattice.N * 2,)


def test_tiny_rho_gives_negligible_field(rng: np.random.Generator) -> None:
    """The latent field scales with rho."""
    lattice = synthetic_lattice(4, 4, 10, rng, n_covariates=0)
    settings = SimulationConfig(
        n_rows=4, n_cols=4, n_obs=10, n_covariates=0, rho_scale=1e-12, beta=[0.0, 0.0]
    )
    dataset = simulate_dataset(lattice, true_state(lattice, settings, rng), rng)

    assert np.max(np.abs(dataset.state.X)) < 1e-3
    np.testing.assert_allclose(dataset.z_all, 1 / 3, atol=1e-3)


def test_regression_only_simulation_has_no_field(rng: np.random.Generator) -> None:
    """Compositions come from the covariates alone."""
    lattice = synthetic_lattice(3, 4, 6, rng, n_covariates=1)
    settings = SimulationConfig(n_rows=3, n_cols=4, n_obs=6, n_covariates=1)
    dataset = simulate_dataset(
        lattice, true_state(lattice, settings, rng), rng, "regression_only"
    )

    np.testing.assert_array_equal(dataset.state.X, 0.0)
    assert dataset.observations.n_obs == 6


def test_simulation_is_seeded() -> None:
    """Same seed, same dataset."""
    settings = SimulationConfig(n_rows=3, n_cols=3, n_obs=5)

    def draw() -> np.ndarray:
        rng = np.random.default_rng(3)
        lattice = synthetic_lattice(3, 3, 5, rng)
        return simulate_dataset(lattice, true_state(lattice, settings, rng), rng).observations.y

    np.testing.assert_array_equal(draw(), draw())


@pytest.mark.slow
def test_latent_field_covariance_is_rho_kron_q_inverse() -> None:
    """Empirical covariance of simulated fields matches rho kron inv(Q) entrywise."""
    rng = np.random.default_rng(41)
    lattice = synthetic_lattice(3, 3, 3, rng, n_covariates=0)
    settings = SimulationConfig(
        n_rows=3, n_cols=3, n_obs=3, n_covariates=0, kappa=0.8, rho_correlation=0.4
    )
    truth = true_state(lattice, settings, rng)
    n = 10_000
    fields = np.array([simulate_dataset(lattice, truth, rng).state.X for _ in range(n)])

    expected = np.kron(truth.rho, np.linalg.inv(assemble_q(lattice, truth.kappa).toarray()))
    diagonal = np.diag(expected)
    se = np.sqrt((expected**2 + np.outer(diagonal, diagonal)) / n)
    assert np.all(np.abs(np.cov(fields.T) - expected) <= 4.5 * se)


def test_dirichlet_draws_moments(rng: np.random.Generator) -> None:
    """Draws have mean z and variance z (1 - z) / (alpha + 1)."""
    z = np.array([0.5, 0.3, 0.2])
    alpha = 6.0
    draws = dirichlet_draws(np.tile(z, (100_000, 1)), alpha, rng)

    np.testing.assert_allclose(draws.sum(axis=1), 1.0)
    np.testing.assert_allclose(draws.mean(axis=0), z, atol=3e-3)
    np.testing.assert_allclose(draws.var(axis=0), z * (1 - z) / (alpha + 1), rtol=0.03)
