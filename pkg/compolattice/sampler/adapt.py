"""Robbins-Monro step-size adaptation."""

from __future__ import annotations

STEP_FLOOR = 1e-8


def adapt_step(eps: float, acc_prob: float, iteration: int, target: float) -> float:
    """Move a step size towards a target acceptance rate.

    Returns ``eps + iteration**-0.5 * (acc_prob - target)`` floored at ``1e-8``.
    """
    if iteration < 1:
        raise ValueError(f"iteration must be >= 1, got {iteration}.")
    return max(eps + iteration**-0.5 * (acc_prob - target), STEP_FLOOR)


__all__ = ["STEP_FLOOR", "adapt_step"]
