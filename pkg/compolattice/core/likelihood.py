"""Dirichlet observation model, joint log-posterior, gradient and Fisher information.

The MALA block updates ``theta = (X, beta, alpha)`` for the full model and
``theta = (beta, alpha)`` for the regression-only model, with ``kappa`` and
``rho`` held fixed. Vectors are field-major throughout: ``X[k * N + node]``,
``beta[k * p + j]`` and observed eta ``[k * n_obs + s]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np
import scipy.sparse as sp
from numpy.typing import NDArray
from scipy.special import digamma, gammaln, polygamma

from compolattice.core.composition import d_inv_alr, inv_alr
from compolattice.core.factor import PrecisionFactor, factorize
from compolattice.core.lattice import (
    LatticeModel,
    assemble_joint_precision,
    assemble_q,
)
from compolattice.errors import CompositionError
from compolattice.schema import HyperParams, Variant

ALPHA_INFORMATION_FLOOR = 1e-8


def trigamma(x: NDArray[np.float64] | float) -> NDArray[np.float64]:
    """First derivative of the digamma function."""
    return polygamma(1, x)


@dataclass(frozen=True, slots=True)
class Observations:
    """Observed compositions at the lattice's observed nodes, in ``obs_index`` order.

    Attributes:
        y: ``(n_obs, D)`` interior compositions.
        repaired: Number of rows pulled off the simplex boundary at ingestion.
    """

    y: NDArray[np.float64]
    repaired: int = 0
    log_y: NDArray[np.float64] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        y = np.atleast_2d(np.asarray(self.y, dtype=np.float64))
        if y.shape[1] < 2:
            raise CompositionError("Observations need at least two parts.")
        if np.any(y <= 0) or np.any(y >= 1):
            raise CompositionError("Observed compositions must be interior.")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "log_y", np.log(y))

    @property
    def D(self) -> int:
        return int(self.y.shape[1])

    @property
    def d(self) -> int:
        return self.D - 1

    @property
    def n_obs(self) -> int:
        return int(self.y.shape[0])

    def subset(self, rows: NDArray[np.integer]) -> "Observations":
        """Return the observations at positions ``rows``."""
        return Observations(self.y[np.asarray(rows, dtype=np.int64)])


@dataclass(frozen=True, slots=True)
class ModelState:
    """Current values of every unknown of the hierarchical model."""

    X: NDArray[np.float64]
    beta: NDArray[np.float64]
    alpha: float
    kappa: float
    rho: NDArray[np.float64]

    def validate(self, lattice: LatticeModel, d: int) -> "ModelState":
        """Check dimensions and positivity against a lattice with ``d`` fields."""
        if self.X.shape != (lattice.N * d,):
            raise ValueError(f"X must have length {lattice.N * d}, got {self.X.shape}.")
        if self.beta.shape != (lattice.p * d,):
            raise ValueError(
                f"beta must have length {lattice.p * d}, got {self.beta.shape}."
            )
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}.")
        if not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}.")
        if self.rho.shape != (d, d):
            raise ValueError(f"rho must be {d}x{d}, got {self.rho.shape}.")
        if not np.allclose(self.rho, self.rho.T) or np.any(
            np.linalg.eigvalsh(self.rho) <= 0
        ):
            raise ValueError("rho must be symmetric positive definite.")
        return self

    def eta_all(self, lattice: LatticeModel) -> NDArray[np.float64]:
        """Linear predictor ``B beta + X`` at every node as an ``(N, d)`` matrix."""
        d = self.rho.shape[0]
        coefficients = self.beta.reshape(d, lattice.p).T
        return lattice.covariates @ coefficients + self.X.reshape(d, lattice.N).T

    def summary(self) -> dict[str, Any]:
        """JSON-friendly digest used in post-mortem reports."""
        return {
            "alpha": float(self.alpha),
            "kappa": float(self.kappa),
            "rho": np.asarray(self.rho).tolist(),
            "beta": np.asarray(self.beta).tolist(),
            "X_norm": float(np.linalg.norm(self.X)),
            "X_finite": bool(np.all(np.isfinite(self.X))),
        }


def _site_loglik(
    log_y: NDArray[np.float64], z: NDArray[np.float64], alpha: float
) -> NDArray[np.float64]:
    scaled = alpha * z
    return (
        gammaln(alpha)
        - gammaln(scaled).sum(axis=-1)
        + ((scaled - 1.0) * log_y).sum(axis=-1)
    )


def dirichlet_loglik(
    y: NDArray[np.float64], z: NDArray[np.float64], alpha: float
) -> NDArray[np.float64] | float:
    """Dirichlet log-density of ``y`` with mean ``z`` and scale ``alpha``.

    Vectorized over leading axes of ``y`` and ``z``.

    Raises:
        CompositionError: If ``y`` or ``z`` has a part outside ``(0, 1)``.
        ValueError: If ``alpha`` is not positive.
    """
    y = np.asarray(y, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    for name, values in (("y", y), ("z", z)):
        if np.any(values <= 0) or np.any(values >= 1):
            raise CompositionError(f"{name} must be interior compositions.")
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}.")
    value = _site_loglik(np.log(y), z, alpha)
    return float(value) if np.ndim(value) == 0 else value


@dataclass(frozen=True, slots=True, eq=False)
class LikelihoodTerms:
    """Dirichlet likelihood contributions at one ``theta``.

    They do not depend on ``(kappa, rho)``, so a chain keeps them across a
    ``(kappa, rho)`` update.

    Attributes:
        loglik: Data log-likelihood.
        grad_latent: Data gradient over ``(X, beta)`` or ``beta``.
        grad_alpha: Data gradient over ``alpha``.
        latent: Expected information of the latent coordinates, symmetric.
        cross: Expected information between the latent coordinates and ``alpha``.
        info_alpha: Expected information of ``alpha``.
    """

    loglik: float
    grad_latent: NDArray[np.float64]
    grad_alpha: float
    latent: sp.csr_matrix
    cross: NDArray[np.float64]
    info_alpha: float


@dataclass(frozen=True, slots=True, eq=False)
class BlockPoint:
    """Log-posterior, gradient and factored Fisher information at ``theta``."""

    theta: NDArray[np.float64]
    value: float
    gradient: NDArray[np.float64]
    factor: PrecisionFactor
    drift: NDArray[np.float64]
    terms: LikelihoodTerms


class BlockTarget:
    """Log-posterior of the MALA block at fixed ``(kappa, rho)``.

    The Gaussian prior precision of ``X`` is assembled once per target, so a
    new target is built after every ``(kappa, rho)`` update. ``q`` lets the
    caller pass an already assembled ``Q(kappa)``.
    """

    def __init__(
        self,
        lattice: LatticeModel,
        data: Observations,
        hp: HyperParams,
        kappa: float,
        rho: NDArray[np.float64],
        variant: Variant = "full",
        *,
        q: sp.spmatrix | None = None,
    ) -> None:
        if data.n_obs != lattice.n_obs:
            raise ValueError(
                f"Lattice observes {lattice.n_obs} nodes but data has {data.n_obs} rows."
            )
        self.lattice = lattice
        self.data = data
        self.hp = hp
        self.kappa = float(kappa)
        self.rho = np.atleast_2d(np.asarray(rho, dtype=np.float64))
        self.variant = variant
        self.d = data.d
        self.n_x = lattice.N * self.d if variant == "full" else 0
        self.n_beta = lattice.p * self.d
        design = lattice.design_matrix(self.d)
        if variant == "full":
            self.design = design
            self.prior = assemble_joint_precision(
                assemble_q(lattice, self.kappa) if q is None else q, self.rho
            )
            prior_blocks = [self.prior, sp.identity(self.n_beta) * hp.q_beta]
        else:
            self.design = design[:, lattice.N * self.d :].tocsr()
            self.prior = None
            prior_blocks = [sp.identity(self.n_beta) * hp.q_beta]
        self.prior_latent = sp.block_diag(prior_blocks, format="csr")

    @property
    def dimension(self) -> int:
        """Length of ``theta``."""
        return self.n_x + self.n_beta + 1

    def pack(self, state: ModelState) -> NDArray[np.float64]:
        """Flatten the block coordinates of ``state`` into ``theta``."""
        parts = [state.X] if self.variant == "full" else []
        parts += [state.beta, np.array([state.alpha])]
        return np.concatenate(parts).astype(np.float64)

    def unpack(self, theta: NDArray[np.float64], state: ModelState) -> ModelState:
        """Return ``state`` with the block coordinates replaced by ``theta``."""
        X, beta, alpha = self.split(theta)
        if self.variant != "full":
            X = np.zeros(self.lattice.N * self.d)
        return ModelState(
            X=X.copy(), beta=beta.copy(), alpha=alpha, kappa=state.kappa, rho=state.rho
        )

    def split(
        self, theta: NDArray[np.float64]
    ) -> tuple[NDArray[np.float64], NDArray[np.float64], float]:
        """Split ``theta`` into ``(X, beta, alpha)``; ``X`` is empty for regression only."""
        X = theta[: self.n_x]
        beta = theta[self.n_x : self.n_x + self.n_beta]
        return X, beta, float(theta[-1])

    def observed_eta(self, theta: NDArray[np.float64]) -> NDArray[np.float64]:
        """Linear predictor at the observed nodes as an ``(n_obs, d)`` matrix."""
        flat = self.design @ theta[:-1]
        return flat.reshape(self.d, self.lattice.n_obs).T

    def likelihood_terms(self, theta: NDArray[np.float64]) -> LikelihoodTerms:
        """Evaluate the data part of value, gradient and Fisher information.

        Raises:
            ValueError: If ``alpha <= 0``.
        """
        _, _, alpha = self.split(theta)
        if not alpha > 0:
            raise ValueError(f"alpha must be positive, got {alpha}.")
        z = inv_alr(self.observed_eta(theta))
        log_y = self.data.log_y
        n_obs, d = self.lattice.n_obs, self.d
        psi = digamma(alpha * z)
        jac = d_inv_alr(z)
        weights = trigamma(alpha * z)

        # dl/dz_l per site, pushed through dz/d eta
        outer = alpha * (log_y - psi)
        eta_grad = np.einsum("skl,sl->sk", jac, outer)
        grad_alpha = (
            n_obs * digamma(alpha)
            - float(np.sum(z * psi))
            + float(np.sum(z * log_y))
        )

        site_blocks = alpha**2 * np.einsum("sil,sl,sjl->sij", jac, weights, jac)
        rows = np.arange(d)[None, :, None] * n_obs + np.arange(n_obs)[:, None, None]
        cols = np.arange(d)[None, None, :] * n_obs + np.arange(n_obs)[:, None, None]
        h_eta = sp.csr_matrix(
            (
                site_blocks.ravel(),
                (
                    np.broadcast_to(rows, site_blocks.shape).ravel(),
                    np.broadcast_to(cols, site_blocks.shape).ravel(),
                ),
            ),
            shape=(n_obs * d, n_obs * d),
        )
        latent = self.design.T @ h_eta @ self.design
        cross_eta = alpha * np.einsum("skl,sl,sl->sk", jac, z, weights)
        return LikelihoodTerms(
            loglik=float(np.sum(_site_loglik(log_y, z, alpha))),
            grad_latent=self.design.T @ eta_grad.T.ravel(),
            grad_alpha=float(grad_alpha),
            latent=(0.5 * (latent + latent.T)).tocsr(),
            cross=self.design.T @ cross_eta.T.ravel(),
            info_alpha=float(np.sum(z**2 * weights)) - n_obs * float(trigamma(alpha)),
        )

    def _log_prior(self, theta: NDArray[np.float64]) -> float:
        X, beta, alpha = self.split(theta)
        quadratic = 0.0 if self.prior is None else float(X @ (self.prior @ X))
        return (
            -0.5 * quadratic
            - 0.5 * self.hp.q_beta * float(beta @ beta)
            + (self.hp.a_alpha - 1.0) * np.log(alpha)
            - self.hp.b_alpha * alpha
        )

    def _gradient(self, theta: NDArray[np.float64], terms: LikelihoodTerms):
        alpha = float(theta[-1])
        latent = terms.grad_latent - self.prior_latent @ theta[:-1]
        grad_alpha = terms.grad_alpha + (self.hp.a_alpha - 1.0) / alpha - self.hp.b_alpha
        return np.append(latent, grad_alpha)

    def _fisher(self, theta: NDArray[np.float64], terms: LikelihoodTerms) -> sp.csc_matrix:
        alpha = float(theta[-1])
        information_alpha = max(
            terms.info_alpha + (self.hp.a_alpha - 1.0) / alpha**2,
            ALPHA_INFORMATION_FLOOR,
        )
        column = sp.csr_matrix(terms.cross[:, None])
        return sp.bmat(
            [
                [terms.latent + self.prior_latent, column],
                [column.T, sp.csr_matrix([[information_alpha]])],
            ],
            format="csc",
        )

    def value(self, theta: NDArray[np.float64]) -> float:
        """Log-posterior up to a constant; ``-inf`` when ``alpha <= 0``."""
        _, _, alpha = self.split(theta)
        if not alpha > 0:
            return -np.inf
        z = inv_alr(self.observed_eta(theta))
        loglik = float(np.sum(_site_loglik(self.data.log_y, z, alpha)))
        return loglik + self._log_prior(theta)

    def gradient(self, theta: NDArray[np.float64]) -> NDArray[np.float64]:
        """Gradient of :meth:`value` with respect to ``theta``."""
        return self._gradient(theta, self.likelihood_terms(theta))

    def fisher(self, theta: NDArray[np.float64]) -> sp.csc_matrix:
        """Expected Fisher information plus prior curvature at ``theta``.

        The alpha diagonal entry is floored at ``1e-8``.
        """
        return self._fisher(theta, self.likelihood_terms(theta))

    def point(
        self,
        theta: NDArray[np.float64],
        terms: LikelihoodTerms | None = None,
    ) -> BlockPoint:
        """Evaluate and factor everything a MALA move needs at ``theta``.

        ``terms`` reuses likelihood terms computed for the same ``theta``
        under another ``(kappa, rho)``.

        Raises:
            ValueError: If ``alpha <= 0``.
            NotPositiveDefiniteError: If the Fisher information cannot be factored.
        """
        if terms is None:
            terms = self.likelihood_terms(theta)
        gradient = self._gradient(theta, terms)
        factor = factorize(self._fisher(theta, terms))
        return BlockPoint(
            theta=theta,
            value=terms.loglik + self._log_prior(theta),
            gradient=gradient,
            factor=factor,
            drift=factor.solve(gradient),
            terms=terms,
        )


def log_posterior(
    state: ModelState,
    lattice: LatticeModel,
    data: Observations,
    hp: HyperParams,
    variant: Variant = "full",
) -> float:
    """Joint log-posterior of ``(X, beta, alpha)`` at fixed ``(kappa, rho)``."""
    target = BlockTarget(lattice, data, hp, state.kappa, state.rho, variant)
    return target.value(target.pack(state))


def grad_log_posterior(
    state: ModelState,
    lattice: LatticeModel,
    data: Observations,
    hp: HyperParams,
    variant: Variant = "full",
) -> NDArray[np.float64]:
    """Gradient of :func:`log_posterior` over ``(X, beta, alpha)``."""
    target = BlockTarget(lattice, data, hp, state.kappa, state.rho, variant)
    return target.gradient(target.pack(state))


def fisher_information(
    state: ModelState,
    lattice: LatticeModel,
    data: Observations,
    hp: HyperParams,
    variant: Variant = "full",
) -> sp.csc_matrix:
    """Expected Fisher information of the MALA block at ``state``."""
    target = BlockTarget(lattice, data, hp, state.kappa, state.rho, variant)
    return target.fisher(target.pack(state))


__all__ = [
    "ALPHA_INFORMATION_FLOOR",
    "Observations",
    "ModelState",
    "BlockPoint",
    "BlockTarget",
    "LikelihoodTerms",
    "dirichlet_loglik",
    "log_posterior",
    "grad_log_posterior",
    "fisher_information",
    "trigamma",
]
