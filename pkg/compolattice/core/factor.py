"""Sparse Cholesky factorization contract for GMRF precision matrices.

Two backends are available. ``cholmod`` uses scikit-sparse when it is
installed; ``superlu`` runs scipy's SuperLU in symmetric mode with diagonal
pivoting only, which yields an ``L D L^T`` factor under a fill-reducing
symmetric permutation. ``COMPOLATTICE_FACTOR_BACKEND`` selects one explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass
import logging
import os
from typing import Any, Literal

import numpy as np
import scipy.sparse as sp
from numpy.typing import NDArray
from scipy.sparse.linalg import splu

from compolattice import FACTOR_BACKEND_ENV
from compolattice.errors import ConfigError, NotPositiveDefiniteError

try:  # optional extra
    from sksparse import cholmod
except ImportError:  # pragma: no cover - depends on the environment
    cholmod = None

logger = logging.getLogger(__name__)

Backend = Literal["cholmod", "superlu"]


def default_backend() -> Backend:
    """Return the backend named by the environment, else the best installed one."""
    requested = os.environ.get(FACTOR_BACKEND_ENV, "").strip().lower()
    if requested == "cholmod":
        if cholmod is None:
            raise ConfigError(
                f"{FACTOR_BACKEND_ENV}=cholmod but scikit-sparse is not installed."
            )
        return "cholmod"
    if requested == "superlu":
        return "superlu"
    if requested:
        raise ConfigError(f"Unknown factorization backend: {requested}")
    return "cholmod" if cholmod is not None else "superlu"


@dataclass(frozen=True, slots=True, eq=False)
class PrecisionFactor:
    """Immutable factorization of a sparse symmetric positive-definite matrix.

    Attributes:
        matrix: The factored matrix in CSC format.
        handle: Backend factor object.
        log_det: Log-determinant of ``matrix``.
        backend: Name of the backend that produced ``handle``.
    """

    matrix: sp.csc_matrix
    handle: Any
    log_det: float
    backend: Backend

    @property
    def size(self) -> int:
        """Dimension of the factored matrix."""
        return int(self.matrix.shape[0])

    def solve(self, b: NDArray[np.float64]) -> NDArray[np.float64]:
        """Solve ``matrix @ x = b`` for a vector or a column stack."""
        b = np.asarray(b, dtype=np.float64)
        if b.shape[0] != self.size:
            raise ValueError(f"Right-hand side has {b.shape[0]} rows, expected {self.size}.")
        if self.backend == "cholmod":
            return np.asarray(self.handle.solve_A(b))
        return self.handle.solve(b)

    def lower(self) -> tuple[sp.csc_matrix, NDArray[np.int64]]:
        """Return ``(L, perm)`` with ``matrix[perm][:, perm] == L @ L.T``."""
        if self.backend == "cholmod":
            return self.handle.L().tocsc(), np.asarray(self.handle.P(), dtype=np.int64)
        lu = self.handle
        scale = np.sqrt(lu.U.diagonal())
        lower = (lu.L @ sp.diags(scale)).tocsc()
        return lower, np.argsort(lu.perm_c).astype(np.int64)

    def inverse_transpose(self, z: NDArray[np.float64]) -> NDArray[np.float64]:
        """Return ``P^T L^{-T} z``, a draw with precision ``matrix`` when ``z`` is white."""
        if self.backend == "cholmod":
            return np.asarray(
                self.handle.apply_Pt(
                    self.handle.solve_Lt(z, use_LDLt_decomposition=False)
                )
            )
        # P^T L^-T D^-1/2 z == A^-1 P^T (L D^1/2 z) for A = P^T L D L^T P
        lu = self.handle
        root = np.sqrt(lu.U.diagonal())
        scaled = z * (root[:, None] if z.ndim == 2 else root)
        return lu.solve((lu.L @ scaled)[lu.perm_c])


def _superlu(matrix: sp.csc_matrix) -> tuple[Any, float]:
    try:
        lu = splu(
            matrix,
            permc_spec="MMD_AT_PLUS_A",
            diag_pivot_thresh=0.0,
            options=dict(SymmetricMode=True, Equil=False),
        )
    except RuntimeError as exc:
        raise NotPositiveDefiniteError(f"Factorization failed: {exc}") from exc
    diagonal = lu.U.diagonal()
    if not np.array_equal(lu.perm_r, lu.perm_c) or not np.all(diagonal > 0):
        raise NotPositiveDefiniteError("Matrix is not positive definite.")
    return lu, float(np.sum(np.log(diagonal)))


def _cholmod(matrix: sp.csc_matrix) -> tuple[Any, float]:
    try:
        handle = cholmod.cholesky(matrix)
    except cholmod.CholmodNotPositiveDefiniteError as exc:
        raise NotPositiveDefiniteError(f"Matrix is not positive definite: {exc}") from exc
    return handle, float(handle.logdet())


def factorize(matrix: sp.spmatrix, backend: Backend | None = None) -> PrecisionFactor:
    """Factor a sparse symmetric positive-definite matrix.

    Args:
        matrix: Square symmetric matrix.
        backend: ``cholmod`` or ``superlu``; defaults to :func:`default_backend`.

    Returns:
        The immutable factor with its log-determinant.

    Raises:
        NotPositiveDefiniteError: If the matrix is not positive definite or
            contains non-finite entries. Samplers use this to reject proposals.
    """
    csc = sp.csc_matrix(matrix, dtype=np.float64)
    if csc.shape[0] != csc.shape[1]:
        raise ValueError(f"Matrix must be square, got {csc.shape}.")
    if not np.all(np.isfinite(csc.data)):
        raise NotPositiveDefiniteError("Matrix has non-finite entries.")
    chosen = backend or default_backend()
    if chosen == "cholmod":
        handle, log_det = _cholmod(csc)
    else:
        handle, log_det = _superlu(csc)
    return PrecisionFactor(matrix=csc, handle=handle, log_det=log_det, backend=chosen)


def sample_gmrf(
    factor: PrecisionFactor,
    mean_shift: NDArray[np.float64] | float,
    rng: np.random.Generator,
    size: int | None = None,
) -> NDArray[np.float64]:
    """Draw ``mean_shift + L^{-T} z`` with the permutation undone.

    Args:
        factor: Factor of the precision matrix.
        mean_shift: Mean of the draw, a vector or a scalar.
        rng: Caller-owned random stream.
        size: Number of independent draws stacked as columns.

    Returns:
        A vector, or an ``(n, size)`` array when ``size`` is given.
    """
    n = factor.size
    shift = np.asarray(mean_shift, dtype=np.float64)
    if shift.ndim and shift.shape[0] != n:
        raise ValueError(f"mean_shift has length {shift.shape[0]}, expected {n}.")
    if size is None:
        return shift + factor.inverse_transpose(rng.standard_normal(n))
    draws = factor.inverse_transpose(rng.standard_normal((n, size)))
    return (shift[:, None] if shift.ndim else shift) + draws


__all__ = [
    "Backend",
    "PrecisionFactor",
    "default_backend",
    "factorize",
    "sample_gmrf",
]
