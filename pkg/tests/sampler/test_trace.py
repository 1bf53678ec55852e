"""Tests for trace storage and parameter summaries."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from compolattice.core.likelihood import ModelState
from compolattice.sampler.trace import McmcTrace, TraceHeader, parameter_summary


def _filled_trace(variant: str = "full") -> McmcTrace:
    header = TraceHeader(
        N=3, p=2, d=2, n_iter=12, burn_in=2, thin=2, variant=variant, seed=9
    )
    trace = McmcTrace.allocate(header)
    rng = np.random.default_rng(0)
    for slot in range(trace.n_samples):
        trace.store(
            slot,
            ModelState(
                X=rng.standard_normal(6),
                beta=np.array([1.0, 2.0, 3.0, 4.0]) + slot,
                alpha=5.0 + slot,
                kappa=0.5,
                rho=np.array([[1.0, 0.2], [0.2, 2.0]]),
            ),
        )
    trace.mala_accepted[::2] = True
    return trace


def test_allocate_sizes_arrays() -> None:
    """Sample arrays hold (n_iter - burn_in) // thin rows."""
    trace = _filled_trace()

    assert trace.n_samples == 5
    assert trace.X.shape == (5, 6)
    assert trace.rho.shape == (5, 2, 2)
    assert trace.mala_prob.shape == (12,)
    assert trace.iterations.tolist() == [3, 5, 7, 9, 11]


def test_acceptance_rate_after_burn_in() -> None:
    """Acceptance is measured on post-burn-in iterations by default."""
    trace = _filled_trace()

    assert trace.acceptance_rate("mala") == pytest.approx(0.5)
    assert trace.acceptance_rate("mala", post_burn_in=False) == pytest.approx(0.5)
    assert trace.acceptance_rate("kappa") == 0.0


def test_eta_combines_covariates_and_field() -> None:
    """eta at a node is B[node] beta_k + X_k[node]."""
    trace = _filled_trace()
    covariates = np.array([[1.0, 0.0], [1.0, 1.0], [1.0, -1.0]])
    eta = trace.eta(covariates, 1)

    beta = trace.beta[0]
    expected = [beta[0] + beta[1] + trace.X[0, 1], beta[2] + beta[3] + trace.X[0, 4]]
    np.testing.assert_allclose(eta[0], expected)


def test_save_and_load_preserve_trace(tmp_path: Path) -> None:
    """The npz file restores arrays and header metadata."""
    trace = _filled_trace()
    trace.header.config_hash = "abc"
    path = trace.save(tmp_path / "nested" / "trace.npz")
    restored = McmcTrace.load(path)

    assert restored.header == trace.header
    np.testing.assert_array_equal(restored.X, trace.X)
    np.testing.assert_array_equal(restored.rho, trace.rho)
    np.testing.assert_array_equal(restored.mala_accepted, trace.mala_accepted)


def test_scalars_export_columns() -> None:
    """Scalar export has alpha, kappa and the upper triangle of rho."""
    frame = _filled_trace().scalars()

    assert list(frame.columns) == [
        "iteration",
        "alpha",
        "kappa",
        "rho_1_1",
        "rho_1_2",
        "rho_2_2",
    ]
    assert frame["alpha"].tolist() == [5.0, 6.0, 7.0, 8.0, 9.0]


def test_parameter_summary_rows() -> None:
    """Estimates and intervals for every scalar parameter."""
    summary = parameter_summary(_filled_trace())

    assert summary["parameter"].tolist() == [
        "alpha",
        "kappa",
        "rho[1,1]",
        "rho[1,2]",
        "rho[2,2]",
        "beta[1,0]",
        "beta[1,1]",
        "beta[2,0]",
        "beta[2,1]",
    ]
    alpha = summary.set_index("parameter").loc["alpha"]
    assert alpha["estimate"] == pytest.approx(7.0)
    assert alpha["lower"] <= alpha["estimate"] <= alpha["upper"]


def test_parameter_summary_regression_only() -> None:
    """kappa and rho are not reported for the regression-only model."""
    header = TraceHeader(
        N=3, p=1, d=1, n_iter=4, burn_in=0, thin=1, variant="regression_only", seed=0
    )
    trace = McmcTrace.allocate(header)
    trace.alpha[:] = 3.0

    assert parameter_summary(trace)["parameter"].tolist() == ["alpha", "beta[1,0]"]
