"""Synthetic lattices and datasets drawn from the hierarchical model."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from numpy.typing import NDArray

from compolattice.core.composition import closure, inv_alr, repair
from compolattice.core.factor import factorize, sample_gmrf
from compolattice.core.lattice import LatticeModel, assemble_q, build_lattice
from compolattice.core.likelihood import ModelState, Observations
from compolattice.errors import ConfigError
from compolattice.schema import SimulationConfig, Variant


@dataclass(frozen=True, slots=True)
class SyntheticDataset:
    """A simulated dataset together with the truth that generated it.

    Attributes:
        lattice: Lattice with the observation design used for the draw.
        observations: Dirichlet observations at ``lattice.obs_index``.
        state: True state, including the drawn latent field ``X``.
        z_all: True compositions at every node, ``(N, D)``.
    """

    lattice: LatticeModel
    observations: Observations
    state: ModelState
    z_all: NDArray[np.float64]


def _standardize(column: NDArray[np.float64]) -> NDArray[np.float64]:
    centered = column - column.mean()
    scale = centered.std()
    return centered / scale if scale > 0 else centered


def synthetic_covariates(
    coords: NDArray[np.int64], n_rows: int, n_cols: int, n_covariates: int
) -> NDArray[np.float64]:
    """Smooth trend covariates with an intercept column first."""
    rows = coords[:, 0].astype(np.float64)
    cols = coords[:, 1].astype(np.float64)
    pool = [
        rows,
        cols,
        np.sin(2 * np.pi * rows / max(n_rows, 2)) * np.cos(2 * np.pi * cols / max(n_cols, 2)),
        rows * cols,
        rows**2,
        cols**2,
    ]
    if n_covariates > len(pool):
        raise ConfigError(
            f"At most {len(pool)} synthetic covariates are available, got {n_covariates}."
        )
    columns = [np.ones(coords.shape[0])]
    columns += [_standardize(column) for column in pool[:n_covariates]]
    return np.column_stack(columns)


def synthetic_lattice(
    n_rows: int,
    n_cols: int,
    n_obs: int,
    rng: np.random.Generator,
    n_covariates: int = 2,
    spacing: float = 1.0,
) -> LatticeModel:
    """Full rectangular lattice with trend covariates and random observed cells."""
    lattice = build_lattice(n_rows, n_cols, spacing)
    if not 0 < n_obs <= lattice.N:
        raise ConfigError(f"n_obs must lie in [1, {lattice.N}], got {n_obs}.")
    observed = np.sort(rng.choice(lattice.N, size=n_obs, replace=False))
    covariates = synthetic_covariates(lattice.coords, n_rows, n_cols, n_covariates)
    return lattice.with_design(observed, covariates)


def equicorrelation(d: int, scale: float, correlation: float) -> NDArray[np.float64]:
    """``scale * ((1 - r) I + r 11^T)``, the cross-field covariance used for truths."""
    rho = scale * ((1.0 - correlation) * np.eye(d) + correlation * np.ones((d, d)))
    if np.any(np.linalg.eigvalsh(rho) <= 0):
        raise ConfigError(
            f"Correlation {correlation} does not give a positive definite {d}x{d} rho."
        )
    return rho


def true_state(
    lattice: LatticeModel, settings: SimulationConfig, rng: np.random.Generator
) -> ModelState:
    """Truth described by a simulation config; ``beta`` is drawn when omitted."""
    d = settings.parts - 1
    size = lattice.p * d
    if settings.beta is None:
        beta = rng.normal(0.0, 0.5, size=size)
    else:
        beta = np.asarray(settings.beta, dtype=np.float64)
        if beta.shape != (size,):
            raise ConfigError(f"simulation.beta needs {size} values, got {beta.size}.")
    return ModelState(
        X=np.zeros(lattice.N * d),
        beta=beta,
        alpha=settings.alpha,
        kappa=settings.kappa,
        rho=equicorrelation(d, settings.rho_scale, settings.rho_correlation),
    )


def dirichlet_draws(
    z: NDArray[np.float64], alpha: float | NDArray[np.float64], rng: np.random.Generator
) -> NDArray[np.float64]:
    """One Dirichlet draw per row of ``z`` with concentration ``alpha * z``."""
    shapes = np.asarray(alpha, dtype=np.float64)[..., None] * z
    draws = rng.gamma(shapes)
    return closure(np.maximum(draws, np.finfo(np.float64).tiny))


def simulate_dataset(
    lattice: LatticeModel,
    truth: ModelState,
    rng: np.random.Generator,
    variant: Variant = "full",
) -> SyntheticDataset:
    """Draw ``X ~ N(0, rho kron Q^-1)`` and Dirichlet observations at the observed nodes.

    ``truth.X`` is replaced by the draw; the regression-only model keeps
    ``X = 0``.
    """
    d = truth.rho.shape[0]
    truth.validate(lattice, d)
    if variant == "full":
        fields = sample_gmrf(
            factorize(assemble_q(lattice, truth.kappa)), 0.0, rng, size=d
        )
        x = fields @ np.linalg.cholesky(truth.rho).T
        state = replace(truth, X=x.T.ravel())
    else:
        state = replace(truth, X=np.zeros(lattice.N * d))
    z_all = inv_alr(state.eta_all(lattice))
    y, repaired = repair(dirichlet_draws(z_all[lattice.obs_index], state.alpha, rng))
    return SyntheticDataset(
        lattice=lattice,
        observations=Observations(y, repaired=repaired),
        state=state,
        z_all=z_all,
    )


__all__ = [
    "SyntheticDataset",
    "dirichlet_draws",
    "equicorrelation",
    "simulate_dataset",
    "synthetic_covariates",
    "synthetic_lattice",
    "true_state",
]
