"""Lattice graph operators and SPDE precision matrices."""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
from numpy.typing import NDArray

from compolattice.core.factor import factorize
from compolattice.errors import LatticeError, NotPositiveDefiniteError


@dataclass(frozen=True, slots=True, eq=False)
class LatticeModel:
    """Grid geometry, observation design and the sparse operators C and G.

    Nodes are the active cells numbered in row-major order. ``obs_index``
    selects the observed nodes (the rows of the observation matrix A) and
    ``B`` holds covariates for every node with the intercept in column 0.
    """

    n_rows: int
    n_cols: int
    C: sp.dia_matrix
    G: sp.csr_matrix
    coords: NDArray[np.int64]
    spacing: float = 1.0
    cell_ids: NDArray[np.int64] | None = None
    obs_index: NDArray[np.int64] = field(
        default_factory=lambda: np.zeros(0, dtype=np.int64)
    )
    B: NDArray[np.float64] | None = None
    _design: dict[int, sp.csr_matrix] = field(
        default_factory=dict, repr=False, compare=False
    )

    @property
    def N(self) -> int:
        """Number of active nodes."""
        return int(self.coords.shape[0])

    @property
    def n_obs(self) -> int:
        """Number of observed nodes."""
        return int(self.obs_index.shape[0])

    @property
    def p(self) -> int:
        """Number of covariate columns including the intercept."""
        return 1 if self.B is None else int(self.B.shape[1])

    @property
    def covariates(self) -> NDArray[np.float64]:
        """Covariate matrix, an intercept column when none was supplied."""
        if self.B is None:
            return np.ones((self.N, 1))
        return self.B

    @property
    def ids(self) -> NDArray[np.int64]:
        """External cell identifiers of the nodes."""
        if self.cell_ids is None:
            return self.coords[:, 0] * self.n_cols + self.coords[:, 1]
        return self.cell_ids

    @property
    def diameter(self) -> float:
        """Euclidean extent of the active domain."""
        span = (self.coords.max(axis=0) - self.coords.min(axis=0)) * self.spacing
        return float(np.hypot(*span))

    def node_of(self, cell_id: int) -> int:
        """Return the node index of an external cell id."""
        matches = np.flatnonzero(self.ids == cell_id)
        if matches.size != 1:
            raise LatticeError(f"Unknown cell id: {cell_id}")
        return int(matches[0])

    def with_design(
        self,
        obs_index: NDArray[np.integer] | list[int],
        B: NDArray[np.float64] | None = None,
    ) -> "LatticeModel":
        """Return a copy with a new observation index set and covariates."""
        index = np.asarray(obs_index, dtype=np.int64)
        if index.ndim != 1:
            raise LatticeError("obs_index must be one-dimensional.")
        if index.size and (index.min() < 0 or index.max() >= self.N):
            raise LatticeError("obs_index entries must lie in [0, N).")
        if np.unique(index).size != index.size:
            raise LatticeError("obs_index entries must be distinct.")
        covariates = self.B if B is None else np.asarray(B, dtype=np.float64)
        if covariates is not None:
            if covariates.ndim != 2 or covariates.shape[0] != self.N:
                raise LatticeError(
                    f"Covariate matrix must have {self.N} rows, got {covariates.shape}."
                )
            if not np.allclose(covariates[:, 0], 1.0):
                raise LatticeError("Column 0 of the covariate matrix must be ones.")
        return replace(self, obs_index=index, B=covariates, _design={})

    def subset_observations(self, keep: NDArray[np.integer]) -> "LatticeModel":
        """Keep the observations at positions ``keep`` of ``obs_index``."""
        return self.with_design(self.obs_index[np.asarray(keep, dtype=np.int64)])

    def design_matrix(self, d: int) -> sp.csr_matrix:
        """Sparse ``[A, AB]`` mapping ``(X, beta)`` to eta at the observed nodes.

        Rows are ordered field-major (``k * n_obs + s``); columns are ``X``
        (``k * N + node``) followed by ``beta`` (``N * d + k * p + j``).
        """
        cached = self._design.get(d)
        if cached is not None:
            return cached
        N, n_obs, p = self.N, self.n_obs, self.p
        selector = sp.csr_matrix(
            (np.ones(n_obs), (np.arange(n_obs), self.obs_index)), shape=(n_obs, N)
        )
        observed_b = sp.csr_matrix(self.covariates[self.obs_index])
        identity = sp.identity(d, format="csr")
        design = sp.hstack(
            [
                sp.kron(identity, selector, format="csr"),
                sp.kron(identity, observed_b, format="csr"),
            ],
            format="csr",
        )
        self._design[d] = design
        return design


def _grid_neighbours(active: NDArray[np.bool_]) -> tuple[NDArray, NDArray, NDArray]:
    """Return node coordinates and 4-neighbour pairs (i < j) of active cells."""
    n_rows, n_cols = active.shape
    numbering = -np.ones(active.shape, dtype=np.int64)
    rows, cols = np.nonzero(active)
    numbering[rows, cols] = np.arange(rows.size)

    heads: list[NDArray] = []
    tails: list[NDArray] = []
    # right neighbours, then down neighbours
    right = active[:, :-1] & active[:, 1:]
    heads.append(numbering[:, :-1][right])
    tails.append(numbering[:, 1:][right])
    down = active[:-1, :] & active[1:, :]
    heads.append(numbering[:-1, :][down])
    tails.append(numbering[1:, :][down])
    coords = np.column_stack([rows, cols]).astype(np.int64)
    return coords, np.concatenate(heads), np.concatenate(tails)


def build_lattice(
    n_rows: int,
    n_cols: int,
    unit_spacing: float = 1.0,
    mask: NDArray[np.bool_] | None = None,
    cell_ids: NDArray[np.integer] | None = None,
) -> LatticeModel:
    """Build C and G for a rectangular lattice with an optional active mask.

    Args:
        n_rows: Number of grid rows.
        n_cols: Number of grid columns.
        unit_spacing: Distance between neighbouring cell centroids.
        mask: Boolean ``(n_rows, n_cols)`` array of active cells.
        cell_ids: External identifiers of the active cells in row-major order.

    Returns:
        A lattice with no observations. ``C = spacing**2 * I`` and ``G`` is the
        zero-row-sum 4-neighbour graph Laplacian.

    Raises:
        LatticeError: For empty grids, non-positive spacing or bad masks.
    """
    if n_rows < 1 or n_cols < 1:
        raise LatticeError(f"Grid must be non-empty, got {n_rows}x{n_cols}.")
    if not unit_spacing > 0:
        raise LatticeError(f"unit_spacing must be positive, got {unit_spacing}.")
    if mask is None:
        active = np.ones((n_rows, n_cols), dtype=bool)
    else:
        active = np.asarray(mask, dtype=bool)
        if active.shape != (n_rows, n_cols):
            raise LatticeError(
                f"Mask shape {active.shape} does not match grid {(n_rows, n_cols)}."
            )
    if not active.any():
        raise LatticeError("Mask leaves no active cells.")

    coords, heads, tails = _grid_neighbours(active)
    N = coords.shape[0]
    degree = np.bincount(heads, minlength=N) + np.bincount(tails, minlength=N)
    rows = np.concatenate([np.arange(N), heads, tails])
    cols = np.concatenate([np.arange(N), tails, heads])
    values = np.concatenate(
        [degree.astype(np.float64), -np.ones(heads.size), -np.ones(tails.size)]
    )
    G = sp.csr_matrix((values, (rows, cols)), shape=(N, N))
    C = sp.dia_matrix(
        (np.full(N, unit_spacing**2)[np.newaxis, :], [0]), shape=(N, N)
    )
    ids = None if cell_ids is None else np.asarray(cell_ids, dtype=np.int64)
    if ids is not None and ids.shape != (N,):
        raise LatticeError(f"Expected {N} cell ids, got {ids.shape}.")
    return LatticeModel(
        n_rows=n_rows,
        n_cols=n_cols,
        C=C,
        G=G,
        coords=coords,
        spacing=float(unit_spacing),
        cell_ids=ids,
    )


def assemble_q(lattice: LatticeModel, kappa: float) -> sp.csc_matrix:
    """Assemble the SPDE precision ``kappa^4 C + 2 kappa^2 G + G C^-1 G``.

    The upper triangle is assembled once and mirrored so the result is
    symmetric in floating point.
    """
    if not kappa > 0:
        raise ValueError(f"kappa must be positive, got {kappa}.")
    c = lattice.C.diagonal()
    G = lattice.G
    full = (
        sp.diags(kappa**4 * c)
        + 2.0 * kappa**2 * G
        + G @ sp.diags(1.0 / c) @ G
    )
    upper = sp.triu(full, format="csc")
    return (upper + sp.triu(upper, k=1, format="csc").T).tocsc()


def assemble_joint_precision(
    Q: sp.spmatrix, rho: NDArray[np.float64]
) -> sp.csc_matrix:
    """Return ``inv(rho) kron Q`` in field-major order.

    Block ``(k, l)`` equals ``inv(rho)[k, l] * Q``.

    Raises:
        NotPositiveDefiniteError: If ``rho`` is not symmetric positive definite.
    """
    rho = np.atleast_2d(np.asarray(rho, dtype=np.float64))
    if rho.shape[0] != rho.shape[1] or not np.allclose(rho, rho.T):
        raise NotPositiveDefiniteError("rho must be a symmetric matrix.")
    try:
        chol = np.linalg.cholesky(rho)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError("rho is not positive definite.") from exc
    chol_inv = np.linalg.inv(chol)
    rho_inv = chol_inv.T @ chol_inv
    rho_inv = 0.5 * (rho_inv + rho_inv.T)
    return sp.kron(rho_inv, Q, format="csc")


class PrecisionCache:
    """``Q(kappa)`` and ``log|Q(kappa)|`` for the most recent kappa values.

    One cache belongs to one chain; the kappa update and the latent prior of
    the next iteration look up the same entries.
    """

    def __init__(self, lattice: LatticeModel, size: int = 4) -> None:
        self.lattice = lattice
        self.size = size
        self._q: OrderedDict[float, sp.csc_matrix] = OrderedDict()
        self._log_det: dict[float, float] = {}

    def q(self, kappa: float) -> sp.csc_matrix:
        """Return ``Q(kappa)``, assembling it on a miss."""
        key = float(kappa)
        if key in self._q:
            self._q.move_to_end(key)
            return self._q[key]
        matrix = assemble_q(self.lattice, key)
        self._q[key] = matrix
        while len(self._q) > self.size:
            evicted, _ = self._q.popitem(last=False)
            self._log_det.pop(evicted, None)
        return matrix

    def log_det(self, kappa: float) -> float:
        """Return ``log|Q(kappa)|``.

        Raises:
            NotPositiveDefiniteError: If ``Q(kappa)`` cannot be factored.
        """
        matrix = self.q(kappa)
        key = float(kappa)
        if key not in self._log_det:
            self._log_det[key] = factorize(matrix).log_det
        return self._log_det[key]


__all__ = [
    "LatticeModel",
    "PrecisionCache",
    "build_lattice",
    "assemble_q",
    "assemble_joint_precision",
]
