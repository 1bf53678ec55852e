"""Posterior compositions and joint confidence/prediction regions per node.

Regions are ellipses in alr space, ``(eta - mu)^T Sigma^{-1} (eta - mu) <= c``,
with ``c`` the empirical quantile of the squared Mahalanobis distances of the
samples themselves. Ternary bounds map the ellipse boundary back to the simplex.
"""

from __future__ import annotations

from dataclasses import dataclass
import logging
import math
from typing import Any, Literal

import numpy as np
import pandas as pd
from numpy.typing import NDArray

from compolattice.core.composition import alr, closure, inv_alr
from compolattice.core.lattice import LatticeModel
from compolattice.sampler.trace import McmcTrace

logger = logging.getLogger(__name__)

RegionKind = Literal["confidence", "prediction"]
PointSummary = Literal["mean_z", "inv_alr_mean_eta"]
BOUNDARY_POINTS = 4096
MIN_REGION_SAMPLES = 100
JITTER_SCALE = 1e-10


@dataclass(frozen=True, slots=True)
class RegionSummary:
    """Elliptical region in alr coordinates."""

    mu: NDArray[np.float64]
    sigma: NDArray[np.float64]
    c_quantile: float
    kind: RegionKind
    level: float
    n_samples: int
    jittered: bool = False

    def contains(self, eta: NDArray[np.float64]) -> NDArray[np.bool_] | bool:
        """Whether alr points lie inside the region."""
        distances = _mahalanobis(np.atleast_2d(eta), self.mu, self.sigma)
        inside = distances <= self.c_quantile
        return bool(inside[0]) if np.ndim(eta) == 1 else inside

    def ellipse(self) -> dict[str, Any]:
        return {
            "mu": self.mu.tolist(),
            "sigma": self.sigma.tolist(),
            "c": float(self.c_quantile),
        }


@dataclass(frozen=True, slots=True)
class TernaryBounds:
    """Joint per-component extremes of a region's boundary on the simplex.

    ``lower_companions[k]`` is the full composition at which component ``k``
    attains its minimum; ``upper_companions[k]`` likewise for the maximum.
    """

    center: NDArray[np.float64]
    lower: NDArray[np.float64]
    upper: NDArray[np.float64]
    lower_companions: NDArray[np.float64]
    upper_companions: NDArray[np.float64]

    def to_dict(self) -> dict[str, Any]:
        return {
            "center": self.center.tolist(),
            "lower": self.lower.tolist(),
            "upper": self.upper.tolist(),
            "lower_companions": self.lower_companions.tolist(),
            "upper_companions": self.upper_companions.tolist(),
        }


def _mahalanobis(
    points: NDArray[np.float64], mu: NDArray[np.float64], sigma: NDArray[np.float64]
) -> NDArray[np.float64]:
    centered = points - mu
    solved = np.linalg.solve(sigma, centered.T).T
    return np.sum(centered * solved, axis=-1)


def node_eta(trace: McmcTrace, lattice: LatticeModel, node: int) -> NDArray[np.float64]:
    """Samples of eta at ``node`` as an ``(S, d)`` matrix."""
    if not 0 <= node < lattice.N:
        raise ValueError(f"Node {node} is outside the lattice (N={lattice.N}).")
    if trace.n_samples == 0:
        raise ValueError("Trace holds no samples.")
    return trace.eta(lattice.covariates, node)


def posterior_composition(
    trace: McmcTrace, lattice: LatticeModel, node: int
) -> NDArray[np.float64]:
    """Posterior mean of the composition ``z`` at ``node``."""
    return inv_alr(node_eta(trace, lattice, node)).mean(axis=0)


def point_composition(
    trace: McmcTrace,
    lattice: LatticeModel,
    node: int,
    summary: PointSummary = "mean_z",
) -> NDArray[np.float64]:
    """Point summary at ``node``: mean of ``z`` or ``inv_alr`` of the mean eta."""
    if summary == "mean_z":
        return posterior_composition(trace, lattice, node)
    if summary == "inv_alr_mean_eta":
        return inv_alr(node_eta(trace, lattice, node).mean(axis=0))
    raise ValueError(f"Unknown point summary: {summary}")


def composition_map(
    trace: McmcTrace, lattice: LatticeModel, summary: PointSummary = "mean_z"
) -> NDArray[np.float64]:
    """Point compositions at every node as an ``(N, D)`` matrix."""
    return np.vstack(
        [point_composition(trace, lattice, node, summary) for node in range(lattice.N)]
    )


def _region(
    samples: NDArray[np.float64], level: float, kind: RegionKind
) -> RegionSummary:
    if not 0 < level <= 1:
        raise ValueError(f"level must lie in (0, 1], got {level}.")
    S, d = samples.shape
    if S < MIN_REGION_SAMPLES:
        raise ValueError(
            f"A region needs at least {MIN_REGION_SAMPLES} samples, got {S}."
        )
    mu = samples.mean(axis=0)
    sigma = np.atleast_2d(np.cov(samples, rowvar=False))
    jittered = False
    try:
        np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        scale = np.trace(sigma) / d
        sigma = sigma + JITTER_SCALE * (scale if scale > 0 else 1.0) * np.eye(d)
        jittered = True
        logger.warning("Degenerate %s region covariance; added jitter.", kind)
    distances = np.sort(_mahalanobis(samples, mu, sigma))
    rank = max(math.ceil(level * S), 1) - 1
    return RegionSummary(
        mu=mu,
        sigma=sigma,
        c_quantile=float(distances[rank]),
        kind=kind,
        level=level,
        n_samples=S,
        jittered=jittered,
    )


def confidence_region(
    trace: McmcTrace, lattice: LatticeModel, node: int, level: float = 0.95
) -> RegionSummary:
    """Region covering ``level`` of the posterior eta samples at ``node``."""
    return _region(node_eta(trace, lattice, node), level, "confidence")


def prediction_region(
    trace: McmcTrace,
    lattice: LatticeModel,
    node: int,
    level: float,
    rng: np.random.Generator,
) -> RegionSummary:
    """Region covering ``level`` of new Dirichlet observations at ``node``.

    One observation ``y* ~ Dirichlet(alpha * inv_alr(eta))`` is drawn per
    stored sample and the region is built from ``alr(y*)``.
    """
    z = inv_alr(node_eta(trace, lattice, node))
    shapes = trace.alpha[:, None] * z
    draws = rng.gamma(shapes)
    draws = closure(np.maximum(draws, np.finfo(np.float64).tiny))
    return _region(alr(draws), level, "prediction")


def ternary_bounds(
    region: RegionSummary, n_points: int = BOUNDARY_POINTS
) -> TernaryBounds:
    """Per-component minima and maxima of a three-part region on the simplex.

    Raises:
        ValueError: If the region is not two-dimensional in alr space.
    """
    if region.mu.shape != (2,):
        raise ValueError("Ternary bounds need D = 3 compositions (d = 2).")
    chol = np.linalg.cholesky(region.sigma)
    angles = np.linspace(0.0, 2.0 * np.pi, n_points, endpoint=False)
    circle = np.vstack([np.cos(angles), np.sin(angles)])
    radius = math.sqrt(max(region.c_quantile, 0.0))
    boundary = region.mu + radius * (chol @ circle).T
    parts = inv_alr(boundary)
    low, high = parts.argmin(axis=0), parts.argmax(axis=0)
    columns = np.arange(parts.shape[1])
    return TernaryBounds(
        center=inv_alr(region.mu),
        lower=parts[low, columns],
        upper=parts[high, columns],
        lower_companions=parts[low],
        upper_companions=parts[high],
    )


def _region_entry(region: RegionSummary, n_points: int) -> dict[str, Any]:
    bounds = ternary_bounds(region, n_points) if region.mu.shape == (2,) else None
    return {
        "ellipse": region.ellipse(),
        "level": region.level,
        "jittered": region.jittered,
        "ternary_bounds": None if bounds is None else bounds.to_dict(),
    }


def region_records(
    trace: McmcTrace,
    lattice: LatticeModel,
    nodes: list[int] | NDArray[np.integer],
    level: float,
    rng: np.random.Generator,
    *,
    summary: PointSummary = "mean_z",
    n_points: int = BOUNDARY_POINTS,
) -> tuple[list[dict[str, Any]], pd.DataFrame]:
    """JSON records and a flat table of both regions for each node.

    Ternary bounds are only present when ``D = 3``; the raw ellipse is always
    emitted.
    """
    records: list[dict[str, Any]] = []
    rows: list[dict[str, Any]] = []
    ids = lattice.ids
    for node in (int(n) for n in nodes):
        point = point_composition(trace, lattice, node, summary)
        confidence = confidence_region(trace, lattice, node, level)
        prediction = prediction_region(trace, lattice, node, level, rng)
        entry = {
            "node": node,
            "cell_id": int(ids[node]),
            "mean_composition": point.tolist(),
            "confidence": _region_entry(confidence, n_points),
            "prediction": _region_entry(prediction, n_points),
        }
        records.append(entry)
        for kind in ("confidence", "prediction"):
            region = entry[kind]
            row: dict[str, Any] = {"node": node, "cell_id": entry["cell_id"], "kind": kind}
            row.update({f"mean_{k + 1}": v for k, v in enumerate(entry["mean_composition"])})
            row.update({f"mu_{k + 1}": v for k, v in enumerate(region["ellipse"]["mu"])})
            row["c"] = region["ellipse"]["c"]
            if region["ternary_bounds"] is not None:
                bounds = region["ternary_bounds"]
                row.update({f"lower_{k + 1}": v for k, v in enumerate(bounds["lower"])})
                row.update({f"upper_{k + 1}": v for k, v in enumerate(bounds["upper"])})
            rows.append(row)
    return records, pd.DataFrame(rows)


__all__ = [
    "BOUNDARY_POINTS",
    "PointSummary",
    "RegionSummary",
    "TernaryBounds",
    "composition_map",
    "confidence_region",
    "node_eta",
    "point_composition",
    "posterior_composition",
    "prediction_region",
    "region_records",
    "ternary_bounds",
]
