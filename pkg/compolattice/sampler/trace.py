"""MCMC trace container, columnar persistence and parameter summaries."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
import json
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
from numpy.typing import NDArray

from compolattice.core.likelihood import ModelState

ARRAY_FIELDS = (
    "X",
    "beta",
    "alpha",
    "kappa",
    "rho",
    "mala_accepted",
    "kappa_accepted",
    "mala_prob",
    "kappa_prob",
    "eps_history",
    "sigma_history",
)


@dataclass(slots=True)
class TraceHeader:
    """Dimension and provenance metadata stored next to the trace arrays."""

    N: int
    p: int
    d: int
    n_iter: int
    burn_in: int
    thin: int
    variant: str
    seed: int
    elapsed: float = 0.0
    config: dict[str, Any] = field(default_factory=dict)
    config_hash: str | None = None


@dataclass(slots=True)
class McmcTrace:
    """Post-burn-in draws of every unknown plus per-iteration sampler diagnostics.

    Sample arrays have ``S = (n_iter - burn_in) // thin`` rows. ``X`` has zero
    columns for the regression-only model. Diagnostics cover all ``n_iter``
    iterations, burn-in included.
    """

    header: TraceHeader
    X: NDArray[np.float64]
    beta: NDArray[np.float64]
    alpha: NDArray[np.float64]
    kappa: NDArray[np.float64]
    rho: NDArray[np.float64]
    mala_accepted: NDArray[np.bool_]
    kappa_accepted: NDArray[np.bool_]
    mala_prob: NDArray[np.float64]
    kappa_prob: NDArray[np.float64]
    eps_history: NDArray[np.float64]
    sigma_history: NDArray[np.float64]

    @classmethod
    def allocate(cls, header: TraceHeader) -> "McmcTrace":
        """Create an empty trace sized for ``header``."""
        S = (header.n_iter - header.burn_in) // header.thin
        n_x = header.N * header.d if header.variant == "full" else 0
        return cls(
            header=header,
            X=np.zeros((S, n_x)),
            beta=np.zeros((S, header.p * header.d)),
            alpha=np.zeros(S),
            kappa=np.zeros(S),
            rho=np.zeros((S, header.d, header.d)),
            mala_accepted=np.zeros(header.n_iter, dtype=bool),
            kappa_accepted=np.zeros(header.n_iter, dtype=bool),
            mala_prob=np.zeros(header.n_iter),
            kappa_prob=np.zeros(header.n_iter),
            eps_history=np.zeros(header.n_iter),
            sigma_history=np.zeros(header.n_iter),
        )

    @property
    def n_samples(self) -> int:
        return int(self.alpha.shape[0])

    @property
    def d(self) -> int:
        return self.header.d

    @property
    def iterations(self) -> NDArray[np.int64]:
        """Zero-based chain iteration of every stored sample."""
        h = self.header
        return h.burn_in + h.thin * np.arange(1, self.n_samples + 1) - 1

    @property
    def iterations_per_second(self) -> float:
        if self.header.elapsed <= 0:
            return float("nan")
        return self.header.n_iter / self.header.elapsed

    def acceptance_rate(self, block: str = "mala", post_burn_in: bool = True) -> float:
        """Fraction of accepted proposals of ``block`` (``mala`` or ``kappa``)."""
        flags = {"mala": self.mala_accepted, "kappa": self.kappa_accepted}[block]
        if post_burn_in:
            flags = flags[self.header.burn_in :]
        return float(flags.mean()) if flags.size else float("nan")

    def store(self, index: int, state: ModelState) -> None:
        """Write ``state`` into sample slot ``index``."""
        if self.X.shape[1]:
            self.X[index] = state.X
        self.beta[index] = state.beta
        self.alpha[index] = state.alpha
        self.kappa[index] = state.kappa
        self.rho[index] = state.rho

    def state(self, index: int) -> ModelState:
        """Rebuild the stored state at sample slot ``index``."""
        X = self.X[index] if self.X.shape[1] else np.zeros(self.header.N * self.d)
        return ModelState(
            X=X.copy(),
            beta=self.beta[index].copy(),
            alpha=float(self.alpha[index]),
            kappa=float(self.kappa[index]),
            rho=self.rho[index].copy(),
        )

    def eta(self, covariates: NDArray[np.float64], node: int) -> NDArray[np.float64]:
        """Samples of the linear predictor at ``node`` as an ``(S, d)`` matrix."""
        h = self.header
        coefficients = self.beta.reshape(self.n_samples, h.d, h.p)
        eta = coefficients @ covariates[node]
        if self.X.shape[1]:
            eta = eta + self.X[:, node + h.N * np.arange(h.d)]
        return eta

    def save(self, path: Path) -> Path:
        """Write a compressed ``.npz`` with a JSON header entry."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        arrays = {name: getattr(self, name) for name in ARRAY_FIELDS}
        header = json.dumps(asdict(self.header), sort_keys=True)
        with path.open("wb") as handle:
            np.savez_compressed(handle, header=np.array(header), **arrays)
        return path

    @classmethod
    def load(cls, path: Path) -> "McmcTrace":
        """Read a trace written by :meth:`save`."""
        with np.load(Path(path), allow_pickle=False) as payload:
            header = TraceHeader(**json.loads(str(payload["header"])))
            arrays = {name: payload[name] for name in ARRAY_FIELDS}
        return cls(header=header, **arrays)

    def scalars(self) -> pd.DataFrame:
        """Scalar parameters per stored iteration: alpha, kappa and rho entries."""
        frame = pd.DataFrame(
            {"iteration": self.iterations, "alpha": self.alpha, "kappa": self.kappa}
        )
        for k, l in zip(*np.triu_indices(self.d)):
            frame[f"rho_{k + 1}_{l + 1}"] = self.rho[:, k, l]
        return frame


def _interval(name: str, draws: NDArray[np.float64]) -> dict[str, Any]:
    lower, upper = np.quantile(draws, [0.025, 0.975])
    return {
        "parameter": name,
        "estimate": float(np.mean(draws)),
        "lower": float(lower),
        "upper": float(upper),
    }


def parameter_summary(trace: McmcTrace) -> pd.DataFrame:
    """Posterior means and empirical 95% intervals of the scalar parameters.

    Rows cover ``alpha``, ``kappa``, ``rho[k,l]`` for ``k <= l`` and
    ``beta[k,j]`` (field ``k``, covariate ``j`` with 0 the intercept).
    ``kappa`` and ``rho`` are omitted for the regression-only model.
    """
    if trace.n_samples == 0:
        raise ValueError("Trace holds no samples.")
    rows = [_interval("alpha", trace.alpha)]
    if trace.header.variant == "full":
        rows.append(_interval("kappa", trace.kappa))
        for k, l in zip(*np.triu_indices(trace.d)):
            rows.append(_interval(f"rho[{k + 1},{l + 1}]", trace.rho[:, k, l]))
    p = trace.header.p
    for k in range(trace.d):
        for j in range(p):
            rows.append(_interval(f"beta[{k + 1},{j}]", trace.beta[:, k * p + j]))
    return pd.DataFrame(rows, columns=["parameter", "estimate", "lower", "upper"])


__all__ = ["McmcTrace", "TraceHeader", "parameter_summary"]
