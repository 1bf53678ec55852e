"""Simplex algebra: alr transform, inverse derivatives and the Aitchison distance.

Every function is vectorized over leading axes; the last axis holds the
``D`` parts of a composition or the ``d = D - 1`` alr coordinates.
"""

from __future__ import annotations

import logging

import numpy as np
from numpy.typing import ArrayLike, NDArray

from compolattice.errors import CompositionError

logger = logging.getLogger(__name__)

REPAIR_FLOOR = 1e-6


def closure(parts: ArrayLike) -> NDArray[np.float64]:
    """Rescale positive vectors so that their parts sum to one."""
    values = np.asarray(parts, dtype=np.float64)
    total = values.sum(axis=-1, keepdims=True)
    if np.any(total <= 0):
        raise CompositionError("Cannot close a vector with a non-positive total.")
    return values / total


def check_composition(parts: ArrayLike, atol: float = 1e-12) -> NDArray[np.float64]:
    """Validate points of the open simplex and return them as an array.

    Raises:
        CompositionError: If a part lies outside ``(0, 1)`` or a row does not
            sum to one within ``atol``.
    """
    values = np.asarray(parts, dtype=np.float64)
    if values.ndim == 0 or values.shape[-1] < 2:
        raise CompositionError("A composition needs at least two parts.")
    if not np.all(np.isfinite(values)):
        raise CompositionError("Composition has non-finite parts.")
    if np.any(values <= 0) or np.any(values >= 1):
        raise CompositionError("Composition parts must lie strictly inside (0, 1).")
    error = np.abs(values.sum(axis=-1) - 1.0)
    if np.any(error > atol):
        raise CompositionError(
            f"Composition parts must sum to 1 (worst deviation {error.max():.3g})."
        )
    return values


def repair(
    parts: ArrayLike, floor: float = REPAIR_FLOOR
) -> tuple[NDArray[np.float64], int]:
    """Pull boundary compositions into the interior.

    Parts below ``floor`` are set to exactly ``floor`` and the remaining parts
    of the row are rescaled so the row sums to one. Repaired rows are fixed
    points of a second repair.

    Returns:
        The repaired compositions and the number of rows that were changed.
    """
    values = np.atleast_2d(np.asarray(parts, dtype=np.float64)).copy()
    if np.any(values < 0) or not np.all(np.isfinite(values)):
        raise CompositionError("Compositions must have finite non-negative parts.")
    low = values < floor
    touched = np.any(low, axis=-1)
    count = int(touched.sum())
    if count:
        rows = values[touched]
        mask = low[touched]
        if np.any(mask.all(axis=-1)):
            raise CompositionError("Cannot repair a composition with no positive part.")
        kept = np.where(mask, 0.0, rows)
        budget = 1.0 - floor * mask.sum(axis=-1, keepdims=True)
        values[touched] = np.where(
            mask, floor, kept * budget / kept.sum(axis=-1, keepdims=True)
        )
        logger.warning(
            "Repaired %d composition(s) on the simplex boundary (floor %g).",
            count,
            floor,
        )
    return values, count


def alr(z: ArrayLike) -> NDArray[np.float64]:
    """Additive log-ratio transform against the last part."""
    values = np.asarray(z, dtype=np.float64)
    if np.any(values <= 0):
        raise CompositionError("alr requires strictly positive parts.")
    logs = np.log(values)
    return logs[..., :-1] - logs[..., -1:]


def inv_alr(eta: ArrayLike) -> NDArray[np.float64]:
    """Inverse alr transform with an overflow-safe max shift."""
    coords = np.asarray(eta, dtype=np.float64)
    if not np.all(np.isfinite(coords)):
        raise CompositionError("inv_alr requires finite coordinates.")
    shift = np.maximum(coords.max(axis=-1, keepdims=True), 0.0)
    numerators = np.exp(coords - shift)
    last = np.exp(-shift)
    parts = np.concatenate([numerators, last], axis=-1)
    return parts / parts.sum(axis=-1, keepdims=True)


def d_inv_alr(z: ArrayLike) -> NDArray[np.float64]:
    """First derivatives ``[..., i, k] = dz_k / d eta_i`` of the inverse alr.

    ``z_k (1 - z_k)`` on the diagonal and ``-z_i z_k`` elsewhere, including
    ``k = D``.
    """
    parts = np.asarray(z, dtype=np.float64)
    d = parts.shape[-1] - 1
    head = parts[..., :d]
    jac = -head[..., :, None] * parts[..., None, :]
    idx = np.arange(d)
    jac[..., idx, idx] += head
    return jac


def d2_inv_alr(z: ArrayLike) -> NDArray[np.float64]:
    """Second derivatives ``[..., i, j, k] = d^2 z_k / d eta_i d eta_j``.

    With ``J[i, k] = dz_k/d eta_i`` the tensor equals
    ``delta_ik J[j, k] - z_i J[j, k] - z_k J[j, i]`` for ``i < D``, which
    covers the four cases and is symmetric in ``i`` and ``j``.
    """
    parts = np.asarray(z, dtype=np.float64)
    d = parts.shape[-1] - 1
    head = parts[..., :d]
    jac = d_inv_alr(parts)
    # J[j, k] broadcast over i
    first = jac[..., None, :, :] * (
        (np.arange(d)[:, None] == np.arange(d + 1)[None, :])[:, None, :]
        - head[..., :, None, None]
    )
    # z_k J[j, i], with i indexing rows of J^T
    second = parts[..., None, None, :] * np.swapaxes(jac[..., :, :d], -1, -2)[..., :, :, None]
    return first - second


def acd(u: ArrayLike, v: ArrayLike) -> NDArray[np.float64] | float:
    """Aitchison compositional distance between compositions.

    Computes ``sqrt(delta^T J^{-1} delta)`` with ``delta = alr(u) - alr(v)`` and
    ``J^{-1} = I - 11^T / D``.

    Raises:
        CompositionError: If either argument has a part outside ``(0, 1)``.
    """
    first = np.asarray(u, dtype=np.float64)
    second = np.asarray(v, dtype=np.float64)
    for values in (first, second):
        if np.any(values <= 0) or np.any(values >= 1):
            raise CompositionError("acd requires interior compositions.")
    delta = alr(first) - alr(second)
    D = delta.shape[-1] + 1
    quadratic = np.sum(delta**2, axis=-1) - np.sum(delta, axis=-1) ** 2 / D
    distance = np.sqrt(np.maximum(quadratic, 0.0))
    return float(distance) if distance.ndim == 0 else distance


__all__ = [
    "REPAIR_FLOOR",
    "closure",
    "check_composition",
    "repair",
    "alr",
    "inv_alr",
    "d_inv_alr",
    "d2_inv_alr",
    "acd",
]
