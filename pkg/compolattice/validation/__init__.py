"""Synthetic-data oracles and cross-validation."""

from __future__ import annotations

from compolattice.validation.crossval import (
    CvReport,
    compare_to_reference,
    cross_validate,
    fold_assignments,
)
from compolattice.validation.simulate import (
    SyntheticDataset,
    simulate_dataset,
    synthetic_lattice,
    true_state,
)

__all__ = [
    "CvReport",
    "compare_to_reference",
    "cross_validate",
    "fold_assignments",
    "SyntheticDataset",
    "simulate_dataset",
    "synthetic_lattice",
    "true_state",
]
