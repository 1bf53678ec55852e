"""Rho-marginalized log random walk for kappa with a conjugate redraw of rho."""

from __future__ import annotations

from dataclasses import dataclass
import logging

import numpy as np
from numpy.typing import NDArray
from scipy.stats import invwishart

from compolattice.core.lattice import LatticeModel, PrecisionCache, assemble_q
from compolattice.core.likelihood import ModelState
from compolattice.errors import NotPositiveDefiniteError
from compolattice.schema import HyperParams

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class KappaRhoResult:
    """Outcome of one ``(kappa, rho)`` update."""

    kappa: float
    rho: NDArray[np.float64]
    accepted: bool
    acc_prob: float


def _fields(X: NDArray[np.float64], lattice: LatticeModel, d: int) -> NDArray[np.float64]:
    """Reshape field-major ``X`` into an ``(N, d)`` matrix."""
    return np.asarray(X, dtype=np.float64).reshape(d, lattice.N).T


def _scatter(Q, x: NDArray[np.float64], hp: HyperParams) -> NDArray[np.float64]:
    """Inverse-Wishart scale ``a_rho I + x^T Q x``."""
    d = x.shape[1]
    scatter = hp.a_rho * np.eye(d) + x.T @ (Q @ x)
    return 0.5 * (scatter + scatter.T)


def rho_scatter(
    X: NDArray[np.float64],
    kappa: float,
    lattice: LatticeModel,
    hp: HyperParams,
    cache: PrecisionCache | None = None,
) -> NDArray[np.float64]:
    """Scale ``a_rho I + x^T Q(kappa) x`` of the conditional inverse-Wishart of ``rho``."""
    d = np.asarray(X).size // lattice.N
    Q = cache.q(kappa) if cache is not None else assemble_q(lattice, kappa)
    return _scatter(Q, _fields(X, lattice, d), hp)


def log_kappa_marginal(
    kappa: float,
    X: NDArray[np.float64],
    lattice: LatticeModel,
    hp: HyperParams,
    d: int,
    cache: PrecisionCache | None = None,
) -> float:
    """Log-density of ``kappa`` given ``X`` with ``rho`` integrated out.

    Equals ``d/2 log|Q| - (N + b_rho)/2 log|a_rho I + x^T Q x|`` plus the Gamma
    log-prior, up to a constant.

    Raises:
        NotPositiveDefiniteError: If ``Q(kappa)`` cannot be factored.
    """
    if not kappa > 0:
        return -np.inf
    cache = cache or PrecisionCache(lattice)
    log_det_q = cache.log_det(kappa)
    scatter = _scatter(cache.q(kappa), _fields(X, lattice, d), hp)
    sign, log_det_scatter = np.linalg.slogdet(scatter)
    if sign <= 0:
        raise NotPositiveDefiniteError("Inverse-Wishart scale is not positive definite.")
    return (
        0.5 * d * log_det_q
        - 0.5 * (lattice.N + hp.b_rho) * log_det_scatter
        + (hp.a_kappa - 1.0) * np.log(kappa)
        - hp.b_kappa * kappa
    )


def draw_rho(
    X: NDArray[np.float64],
    kappa: float,
    lattice: LatticeModel,
    hp: HyperParams,
    rng: np.random.Generator,
    cache: PrecisionCache | None = None,
) -> NDArray[np.float64]:
    """Draw ``rho ~ IW(a_rho I + x^T Q(kappa) x, N + b_rho)``."""
    scale = rho_scatter(X, kappa, lattice, hp, cache)
    draw = invwishart(df=lattice.N + hp.b_rho, scale=scale).rvs(random_state=rng)
    return np.atleast_2d(np.asarray(draw, dtype=np.float64))


def kappa_rho_step(
    state: ModelState,
    lattice: LatticeModel,
    hp: HyperParams,
    sigma_kappa: float,
    rng: np.random.Generator,
    cache: PrecisionCache | None = None,
) -> KappaRhoResult:
    """Propose ``log kappa* = log kappa + N(0, sigma^2)`` and refresh ``rho``.

    The acceptance ratio includes the ``kappa*/kappa`` Jacobian of the log
    scale. ``rho`` is redrawn from its full conditional at the accepted
    ``kappa*`` or, on rejection, at the current ``kappa``.
    """
    d = state.rho.shape[0]
    cache = cache or PrecisionCache(lattice)
    current = log_kappa_marginal(state.kappa, state.X, lattice, hp, d, cache)
    proposal = float(state.kappa * np.exp(sigma_kappa * rng.standard_normal()))
    log_u = np.log(rng.uniform())
    try:
        candidate = log_kappa_marginal(proposal, state.X, lattice, hp, d, cache)
    except NotPositiveDefiniteError as exc:
        logger.debug("kappa proposal %g rejected: %s", proposal, exc)
        candidate = -np.inf
    log_ratio = candidate - current + np.log(proposal) - np.log(state.kappa)
    acc_prob = float(np.exp(min(0.0, log_ratio))) if np.isfinite(log_ratio) else 0.0
    accepted = bool(log_u < log_ratio)
    kappa = proposal if accepted else state.kappa
    rho = draw_rho(state.X, kappa, lattice, hp, rng, cache)
    return KappaRhoResult(kappa=kappa, rho=rho, accepted=accepted, acc_prob=acc_prob)


__all__ = [
    "KappaRhoResult",
    "draw_rho",
    "kappa_rho_step",
    "log_kappa_marginal",
    "rho_scatter",
]
