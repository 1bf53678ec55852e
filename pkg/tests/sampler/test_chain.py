"""Tests for the two-block chain driver."""

from __future__ import annotations

from collections import Counter

import numpy as np
import pytest

from compolattice.core import lattice as lattice_module
from compolattice.core import likelihood as likelihood_module
from compolattice.core.lattice import build_lattice
from compolattice.core.likelihood import Observations
from compolattice.errors import ChainFailure, NumericalError
from compolattice.sampler import chain as chain_module
from compolattice.sampler.chain import initial_state, run_chain, run_chains
from compolattice.schema import SamplerConfig
from tests.conftest import BENCHMARK_BETA, synthetic_dataset


def _config(**overrides) -> SamplerConfig:
    settings = {"n_iter": 40, "burn_in": 10, "thin": 3, "seed": 42}
    settings.update(overrides)
    return SamplerConfig(**settings)


def test_regression_only_start_is_the_heuristic(small_lattice, small_data, hp) -> None:
    """Least-squares beta, X = 0 and the range-based kappa."""
    state = initial_state(small_lattice, small_data, hp, "regression_only")

    state.validate(small_lattice, small_data.d)
    np.testing.assert_array_equal(state.X, 0.0)
    assert state.alpha == pytest.approx(15.0)
    assert state.kappa == pytest.approx(np.sqrt(8.0) / (np.hypot(2.0, 2.0) / 5.0))


def test_full_start_draws_a_latent_field(small_lattice, small_data, hp) -> None:
    """The full-model start carries a field and refits kappa and rho to it."""
    rng = np.random.default_rng(8)
    state = initial_state(small_lattice, small_data, hp, "full", rng)

    state.validate(small_lattice, small_data.d)
    assert np.all(np.isfinite(state.X))
    assert np.linalg.norm(state.X) > 0
    heuristic = np.sqrt(8.0) / (np.hypot(2.0, 2.0) / 5.0)
    assert heuristic / 20.0**3 <= state.kappa <= heuristic * 20.0**3
    again = initial_state(small_lattice, small_data, hp, "full", np.random.default_rng(8))
    np.testing.assert_array_equal(state.X, again.X)


def test_full_start_falls_back_on_failure(monkeypatch, small_lattice, small_data, hp, caplog):
    """A failed factorization leaves the heuristic start with a warning."""

    def broken(*args, **kwargs):
        raise NumericalError("singular")

    monkeypatch.setattr(chain_module, "factorize", broken)
    state = initial_state(small_lattice, small_data, hp, "full")

    np.testing.assert_array_equal(state.X, 0.0)
    assert "Data-informed start failed" in caplog.text


def test_initial_state_single_cell_uses_unit_kappa(hp) -> None:
    """A one-cell domain has no diameter."""
    lattice = build_lattice(1, 1).with_design([0])
    data = Observations(np.array([[0.2, 0.3, 0.5]]))
    state = initial_state(lattice, data, hp, "regression_only")

    assert state.kappa == 1.0
    np.testing.assert_array_equal(state.rho, np.eye(2))


def test_run_chain_is_deterministic(small_lattice, small_data, hp) -> None:
    """Identical seeds produce identical traces."""
    first = run_chain(small_lattice, small_data, hp, _config())
    second = run_chain(small_lattice, small_data, hp, _config())

    for name in ("X", "beta", "alpha", "kappa", "rho", "mala_prob", "eps_history"):
        np.testing.assert_array_equal(getattr(first, name), getattr(second, name))


def test_run_chain_stores_thinned_samples(small_lattice, small_data, hp) -> None:
    """S = (n_iter - burn_in) // thin samples at the thinned iterations."""
    trace = run_chain(small_lattice, small_data, hp, _config())

    assert trace.n_samples == 10
    assert trace.X.shape == (10, 18)
    assert trace.iterations.tolist() == list(range(12, 40, 3))
    assert np.all(trace.alpha > 0)
    assert np.all(trace.kappa > 0)
    assert trace.header.elapsed > 0


def test_adaptation_stops_after_burn_in(small_lattice, small_data, hp) -> None:
    """Step sizes are frozen once burn-in ends."""
    trace = run_chain(small_lattice, small_data, hp, _config())

    assert np.unique(trace.eps_history[10:]).size == 1
    assert np.unique(trace.sigma_history[10:]).size == 1


def test_regression_only_skips_latent_blocks(small_lattice, small_data, hp) -> None:
    """No X columns and no kappa updates for the regression-only model."""
    trace = run_chain(
        small_lattice, small_data, hp, _config(model_variant="regression_only")
    )

    assert trace.X.shape == (10, 0)
    assert not trace.kappa_accepted.any()
    assert np.unique(trace.kappa).size == 1
    np.testing.assert_array_equal(trace.state(0).X, 0.0)


def test_numerical_failure_becomes_chain_failure(
    monkeypatch, small_lattice, small_data, hp
) -> None:
    """Failures carry the iteration and a state summary."""

    def broken(*args, **kwargs):
        raise NumericalError("boom")

    monkeypatch.setattr(chain_module, "kappa_rho_step", broken)

    with pytest.raises(ChainFailure) as caught:
        run_chain(small_lattice, small_data, hp, _config())
    failure = caught.value
    assert failure.iteration == 0
    assert failure.exit_code == 4
    report = failure.postmortem()
    assert report["iteration"] == 0
    assert {"alpha", "kappa", "rho", "beta"} <= set(report["state"])


def test_run_chains_uses_independent_streams(small_lattice, small_data, hp) -> None:
    """Chains share settings but not random streams, reproducibly."""
    first = run_chains(small_lattice, small_data, hp, _config(), 2)
    again = run_chains(small_lattice, small_data, hp, _config(), 2)

    assert len(first) == 2
    assert not np.array_equal(first[0].alpha, first[1].alpha)
    np.testing.assert_array_equal(first[1].alpha, again[1].alpha)
    with pytest.raises(ValueError):
        run_chains(small_lattice, small_data, hp, _config(), 0)


def test_full_iteration_factors_each_matrix_once(
    monkeypatch, small_lattice, small_data, hp
) -> None:
    """Per iteration: the Fisher information at current and proposal, and Q(kappa*)."""
    start = initial_state(small_lattice, small_data, hp)
    counts: Counter[str] = Counter()

    def counting(module, label: str) -> None:
        original = module.factorize

        def wrapped(matrix, *args, **kwargs):
            counts[label] += 1
            return original(matrix, *args, **kwargs)

        monkeypatch.setattr(module, "factorize", wrapped)

    counting(likelihood_module, "fisher")
    counting(lattice_module, "q")
    n_iter = 30
    run_chain(
        small_lattice, small_data, hp, _config(n_iter=n_iter, burn_in=10, thin=1), state=start
    )

    assert n_iter < counts["fisher"] <= 2 * n_iter
    assert counts["q"] == n_iter + 1


@pytest.mark.slow
def test_benchmark_throughput(hp) -> None:
    """At least 10 iterations per second on a 27x40 lattice with 180 observed cells."""
    dataset = synthetic_dataset(27, 40, 180, seed=11)
    config = SamplerConfig(n_iter=300, burn_in=100, thin=1, seed=1)

    trace = run_chain(dataset.lattice, dataset.observations, hp, config)

    assert trace.iterations_per_second >= 10.0


@pytest.mark.slow
def test_adapted_acceptance_rates_hit_their_bands(benchmark_fit) -> None:
    """Post-burn-in acceptance sits near 0.57 for MALA and 0.4 for kappa."""
    _, trace = benchmark_fit

    assert 0.50 <= trace.acceptance_rate("mala") <= 0.65
    assert 0.30 <= trace.acceptance_rate("kappa") <= 0.50


@pytest.mark.slow
def test_chain_recovers_simulated_parameters(hp) -> None:
    """95% intervals cover alpha, kappa and every beta in at least 4 of 5 replicates."""
    config = SamplerConfig(n_iter=30_000, burn_in=10_000, thin=10, seed=3)
    covered = 0
    for replicate in range(5):
        dataset = synthetic_dataset(20, 20, 150, seed=300 + replicate, beta=BENCHMARK_BETA)
        trace = run_chain(dataset.lattice, dataset.observations, hp, config)
        truth = dataset.state
        pairs = [(trace.alpha, truth.alpha), (trace.kappa, truth.kappa)]
        pairs += [(trace.beta[:, j], truth.beta[j]) for j in range(truth.beta.size)]
        covered += all(
            np.quantile(draws, 0.025) <= value <= np.quantile(draws, 0.975)
            for draws, value in pairs
        )

    assert covered >= 4
