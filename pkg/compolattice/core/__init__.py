"""Model core: lattice operators, factorization, simplex algebra and likelihood."""

from __future__ import annotations

from compolattice.core.composition import (
    acd,
    alr,
    check_composition,
    closure,
    d2_inv_alr,
    d_inv_alr,
    inv_alr,
    repair,
)
from compolattice.core.factor import PrecisionFactor, factorize, sample_gmrf
from compolattice.core.lattice import (
    LatticeModel,
    PrecisionCache,
    assemble_joint_precision,
    assemble_q,
    build_lattice,
)
from compolattice.core.likelihood import (
    BlockPoint,
    BlockTarget,
    LikelihoodTerms,
    ModelState,
    Observations,
    dirichlet_loglik,
    fisher_information,
    grad_log_posterior,
    log_posterior,
)

__all__ = [
    "acd",
    "alr",
    "check_composition",
    "closure",
    "d2_inv_alr",
    "d_inv_alr",
    "inv_alr",
    "repair",
    "PrecisionFactor",
    "factorize",
    "sample_gmrf",
    "LatticeModel",
    "PrecisionCache",
    "assemble_joint_precision",
    "assemble_q",
    "build_lattice",
    "BlockPoint",
    "BlockTarget",
    "LikelihoodTerms",
    "ModelState",
    "Observations",
    "dirichlet_loglik",
    "fisher_information",
    "grad_log_posterior",
    "log_posterior",
]
