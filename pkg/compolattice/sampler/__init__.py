"""Two-block adaptive MCMC sampler and trace storage."""

from __future__ import annotations

from compolattice.sampler.adapt import adapt_step
from compolattice.sampler.chain import initial_state, run_chain, run_chains
from compolattice.sampler.kappa import (
    KappaRhoResult,
    draw_rho,
    kappa_rho_step,
    log_kappa_marginal,
    rho_scatter,
)
from compolattice.sampler.mala import MalaResult, mala_step, proposal_log_density
from compolattice.sampler.trace import McmcTrace, TraceHeader, parameter_summary

__all__ = [
    "adapt_step",
    "initial_state",
    "run_chain",
    "run_chains",
    "KappaRhoResult",
    "draw_rho",
    "kappa_rho_step",
    "log_kappa_marginal",
    "rho_scatter",
    "MalaResult",
    "mala_step",
    "proposal_log_density",
    "McmcTrace",
    "TraceHeader",
    "parameter_summary",
]
