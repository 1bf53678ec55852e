"""Posterior products: compositions and joint regions per node."""

from __future__ import annotations

from compolattice.inference.regions import (
    BOUNDARY_POINTS,
    RegionSummary,
    TernaryBounds,
    composition_map,
    confidence_region,
    node_eta,
    point_composition,
    posterior_composition,
    prediction_region,
    region_records,
    ternary_bounds,
)

__all__ = [
    "BOUNDARY_POINTS",
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
