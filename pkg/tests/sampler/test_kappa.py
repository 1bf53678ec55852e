"""Tests for the rho-marginalized kappa update and the conjugate rho draw."""

from __future__ import annotations

import numpy as np
import pytest
from scipy import integrate
from scipy.special import gammaln

from compolattice.core.lattice import assemble_q, build_lattice
from compolattice.core.likelihood import ModelState
from compolattice.sampler import kappa as kappa_module
from compolattice.sampler.kappa import draw_rho, kappa_rho_step, log_kappa_marginal
from compolattice.schema import HyperParams


def _log_integrated(kappa: float, x: np.ndarray, lattice, hp: HyperParams) -> float:
    """log of the integral over rho of P(x | kappa, rho) P(rho), plus log P(kappa)."""
    Q = assemble_q(lattice, kappa).toarray()
    N = lattice.N
    s = float(x @ Q @ x)
    _, log_det = np.linalg.slogdet(Q)
    shape, scale = hp.b_rho / 2.0, hp.a_rho / 2.0

    def log_integrand(t: float) -> float:
        rho = np.exp(t)
        log_lik = 0.5 * log_det - 0.5 * N * t - 0.5 * s / rho
        log_prior = shape * np.log(scale) - gammaln(shape) - (shape + 1) * t - scale / rho
        return log_lik + log_prior + t

    grid = np.linspace(-20.0, 20.0, 4001)
    values = [log_integrand(t) for t in grid]
    mode = grid[int(np.argmax(values))]
    peak = max(values)
    value, _ = integrate.quad(
        lambda t: np.exp(log_integrand(t) - peak),
        mode - 15.0,
        mode + 15.0,
        points=[mode],
        epsabs=0.0,
        epsrel=1e-12,
        limit=400,
    )
    return peak + np.log(value) + (hp.a_kappa - 1) * np.log(kappa) - hp.b_kappa * kappa


def test_marginal_matches_quadrature_for_one_field(rng: np.random.Generator) -> None:
    """With d = 1 the closed form equals numerical integration over rho."""
    lattice = build_lattice(2, 2)
    hp = HyperParams(a_kappa=2.0, b_kappa=0.7)
    x = rng.standard_normal(4)
    kappas = np.geomspace(0.1, 5.0, 20)

    closed = np.array([log_kappa_marginal(k, x, lattice, hp, 1) for k in kappas])
    numeric = np.array([_log_integrated(k, x, lattice, hp) for k in kappas])

    # both are defined up to the same kappa-free constant
    np.testing.assert_allclose(
        closed - closed[0], numeric - numeric[0], rtol=1e-6, atol=1e-8
    )


def test_marginal_is_minus_infinity_for_non_positive_kappa(hp) -> None:
    """kappa outside (0, inf) has no mass."""
    lattice = build_lattice(2, 2)
    assert log_kappa_marginal(0.0, np.zeros(4), lattice, hp, 1) == -np.inf


def test_rho_draws_match_inverse_wishart_mean(rng: np.random.Generator, hp) -> None:
    """The sample mean of rho matches (a_rho I + x^T Q x) / (N + b_rho - d - 1)."""
    lattice = build_lattice(3, 3)
    X = rng.standard_normal(18)
    kappa = 0.9
    x = X.reshape(2, 9).T
    scale = hp.a_rho * np.eye(2) + x.T @ (assemble_q(lattice, kappa) @ x)
    expected = scale / (lattice.N + hp.b_rho - 2 - 1)

    draws = np.array([draw_rho(X, kappa, lattice, hp, rng) for _ in range(4000)])
    error = draws.std(axis=0) / np.sqrt(draws.shape[0])
    assert np.all(np.abs(draws.mean(axis=0) - expected) < 4 * error)
    assert np.all(np.linalg.eigvalsh(draws) > 0)


def test_rejected_kappa_still_redraws_rho(monkeypatch, small_lattice, small_state, hp):
    """rho is refreshed at the current kappa when the proposal is rejected."""
    monkeypatch.setattr(
        kappa_module,
        "log_kappa_marginal",
        lambda kappa, *args: 0.0 if kappa == small_state.kappa else -np.inf,
    )
    result = kappa_rho_step(small_state, small_lattice, hp, 0.3, np.random.default_rng(1))

    assert not result.accepted
    assert result.acc_prob == 0.0
    assert result.kappa == small_state.kappa
    assert not np.array_equal(result.rho, small_state.rho)


def test_kappa_rho_step_is_seeded(small_lattice, small_state, hp) -> None:
    """Identical seeds give identical updates."""
    first = kappa_rho_step(small_state, small_lattice, hp, 0.3, np.random.default_rng(5))
    second = kappa_rho_step(small_state, small_lattice, hp, 0.3, np.random.default_rng(5))

    assert first.kappa == second.kappa
    np.testing.assert_array_equal(first.rho, second.rho)


@pytest.mark.slow
def test_log_walk_targets_kappa_density_not_log_kappa(monkeypatch, hp) -> None:
    """A flat target on [1, 2] yields a flat kappa histogram thanks to the Jacobian."""
    monkeypatch.setattr(
        kappa_module,
        "log_kappa_marginal",
        lambda kappa, *args: 0.0 if 1.0 <= kappa <= 2.0 else -np.inf,
    )
    lattice = build_lattice(2, 2)
    state = ModelState(
        X=np.zeros(4), beta=np.zeros(1), alpha=1.0, kappa=1.5, rho=np.eye(1)
    )
    rng = np.random.default_rng(11)
    draws = np.empty(40_000)
    for i in range(draws.size):
        result = kappa_rho_step(state, lattice, hp, 0.3, rng)
        state = ModelState(
            X=state.X, beta=state.beta, alpha=state.alpha, kappa=result.kappa, rho=result.rho
        )
        draws[i] = result.kappa

    # a flat density has mean 1.5; a 1/kappa density would give 1 / log 2 = 1.443
    assert draws.mean() == pytest.approx(1.5, abs=0.02)
    assert np.mean(draws < 1.5) == pytest.approx(0.5, abs=0.03)
