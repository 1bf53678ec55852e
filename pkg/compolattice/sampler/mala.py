"""Fisher-preconditioned Metropolis-adjusted Langevin update of ``(X, beta, alpha)``."""

from __future__ import annotations

from dataclasses import dataclass
import logging

import numpy as np
from numpy.typing import NDArray

from compolattice.core.factor import PrecisionFactor, sample_gmrf
from compolattice.core.likelihood import BlockPoint, BlockTarget, ModelState
from compolattice.errors import CompositionError, NotPositiveDefiniteError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class MalaResult:
    """Outcome of one MALA update.

    Attributes:
        state: State after the update; the input state when rejected.
        accepted: Whether the proposal was accepted.
        log_acc: Log Metropolis-Hastings ratio, ``-inf`` for invalid proposals.
        acc_prob: ``min(1, exp(log_acc))``, the quantity used for adaptation.
        point: Evaluation of the block target at ``state``.
    """

    state: ModelState
    accepted: bool
    log_acc: float
    acc_prob: float
    point: BlockPoint | None = None


def _log_density(
    residual: NDArray[np.float64], factor: PrecisionFactor, eps: float
) -> float:
    quadratic = float(residual @ (factor.matrix @ residual)) / eps**2
    log_det = factor.log_det - 2.0 * residual.size * np.log(eps)
    return 0.5 * log_det - 0.5 * quadratic


def proposal_log_density(
    theta_to: NDArray[np.float64],
    theta_from: NDArray[np.float64],
    grad_from: NDArray[np.float64],
    factor_from: PrecisionFactor,
    eps: float,
) -> float:
    """Log-density of ``N(theta_from + eps^2/2 I^-1 g, eps^2 I^-1)`` at ``theta_to``.

    The ``2 pi`` normalizer is omitted; it cancels between the forward and
    reverse moves.
    """
    drift = factor_from.solve(grad_from)
    return _log_density(theta_to - theta_from - 0.5 * eps**2 * drift, factor_from, eps)


def _reject(state: ModelState, point: BlockPoint, reason: str) -> MalaResult:
    logger.debug("MALA proposal rejected: %s", reason)
    return MalaResult(
        state=state, accepted=False, log_acc=-np.inf, acc_prob=0.0, point=point
    )


def mala_step(
    target: BlockTarget,
    state: ModelState,
    eps: float,
    rng: np.random.Generator,
    current: BlockPoint | None = None,
) -> MalaResult:
    """Run one preconditioned MALA update.

    The proposal is drawn with precision ``I / eps^2`` around
    ``theta + eps^2/2 I^-1 grad``, and the reverse density is evaluated with
    the gradient and Fisher information recomputed at the proposal.

    Args:
        target: Block log-posterior at the current ``(kappa, rho)``.
        state: Current state.
        eps: Step size.
        rng: Chain random stream.
        current: Evaluation of ``target`` at ``state`` when the caller has one.

    Raises:
        NotPositiveDefiniteError: If the Fisher information at the current
            state cannot be factored.
    """
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}.")
    if current is None:
        current = target.point(target.pack(state))
    theta = current.theta
    half = 0.5 * eps**2
    proposal = theta + half * current.drift + eps * sample_gmrf(current.factor, 0.0, rng)
    log_u = np.log(rng.uniform())

    if not proposal[-1] > 0:
        return _reject(state, current, "non-positive alpha")
    try:
        candidate = target.point(proposal)
    except (NotPositiveDefiniteError, CompositionError, FloatingPointError) as exc:
        return _reject(state, current, str(exc))
    if not np.isfinite(candidate.value) or not np.all(np.isfinite(candidate.gradient)):
        return _reject(state, current, "non-finite log-posterior")

    log_acc = (
        candidate.value
        - current.value
        + _log_density(theta - proposal - half * candidate.drift, candidate.factor, eps)
        - _log_density(proposal - theta - half * current.drift, current.factor, eps)
    )
    if not np.isfinite(log_acc):
        return _reject(state, current, "non-finite acceptance ratio")
    acc_prob = float(np.exp(min(0.0, log_acc)))
    if log_u < log_acc:
        return MalaResult(
            state=target.unpack(proposal, state),
            accepted=True,
            log_acc=float(log_acc),
            acc_prob=acc_prob,
            point=candidate,
        )
    return MalaResult(
        state=state,
        accepted=False,
        log_acc=float(log_acc),
        acc_prob=acc_prob,
        point=current,
    )


__all__ = ["MalaResult", "mala_step", "proposal_log_density"]
