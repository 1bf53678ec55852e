"""Repeated k-fold cross-validation scored with the Aitchison distance."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import logging
from typing import Any, Protocol

import numpy as np
import pandas as pd
from numpy.typing import NDArray

from compolattice.core.composition import acd
from compolattice.core.lattice import LatticeModel
from compolattice.core.likelihood import Observations
from compolattice.errors import ConfigError
from compolattice.inference.regions import point_composition
from compolattice.sampler.chain import run_chain
from compolattice.schema import HyperParams, SamplerConfig, Variant
from compolattice.utils.runtime import make_rng, worker_count

logger = logging.getLogger(__name__)

VARIANT_LABELS: dict[str, str] = {"full": "Full", "regression_only": "RM"}


class FitPredict(Protocol):
    """Fit on training data and predict compositions at held-out nodes."""

    def __call__(
        self,
        lattice: LatticeModel,
        data: Observations,
        nodes: NDArray[np.int64],
        seed: np.random.SeedSequence,
        variant: Variant,
    ) -> NDArray[np.float64]: ...


def fold_assignments(n_obs: int, k: int, rng: np.random.Generator) -> NDArray[np.int64]:
    """Random fold label per observation; fold sizes differ by at most one.

    Raises:
        ConfigError: If a fold would be empty.
    """
    if k < 2:
        raise ConfigError(f"Cross-validation needs at least 2 folds, got {k}.")
    if k > n_obs:
        raise ConfigError(f"Cannot split {n_obs} observations into {k} folds.")
    return rng.permutation(np.arange(n_obs) % k).astype(np.int64)


def compare_to_reference(predicted: Any, reference: Any) -> float:
    """Mean Aitchison distance between two composition maps.

    Accepts ``(n, D)`` arrays in matching order, or DataFrames indexed by cell
    id, which are aligned on the index first.

    Raises:
        ValueError: If the cell sets or shapes differ.
    """
    if isinstance(predicted, pd.DataFrame) and isinstance(reference, pd.DataFrame):
        if set(predicted.index) != set(reference.index):
            raise ValueError("Predicted and reference maps cover different cells.")
        reference = reference.loc[predicted.index]
    left = np.atleast_2d(np.asarray(predicted, dtype=np.float64))
    right = np.atleast_2d(np.asarray(reference, dtype=np.float64))
    if left.shape != right.shape:
        raise ValueError(f"Map shapes differ: {left.shape} vs {right.shape}.")
    if left.shape[0] == 0:
        raise ValueError("Cannot compare empty maps.")
    return float(np.mean(acd(left, right)))


def posterior_mean_predictor(config: SamplerConfig, hp: HyperParams) -> FitPredict:
    """Predictor that refits the model and returns posterior mean compositions."""

    def fit_predict(
        lattice: LatticeModel,
        data: Observations,
        nodes: NDArray[np.int64],
        seed: np.random.SeedSequence,
        variant: Variant,
    ) -> NDArray[np.float64]:
        chain_config = config.model_copy(update={"model_variant": variant, "progress": False})
        trace = run_chain(lattice, data, hp, chain_config, seed=seed)
        return np.vstack([point_composition(trace, lattice, int(n)) for n in nodes])

    return fit_predict


@dataclass(slots=True)
class CvReport:
    """Per-fold mean ACD for every variant, repeat and fold.

    Attributes:
        errors: ``variant -> (repeats, k)`` mean ACD of each test fold.
        sizes: ``(repeats, k)`` number of held-out cells per fold.
        settings: Chain lengths and seed recorded with the report.
    """

    errors: dict[str, NDArray[np.float64]]
    sizes: NDArray[np.int64]
    settings: dict[str, Any] = field(default_factory=dict)

    @property
    def variants(self) -> list[str]:
        return list(self.errors)

    def repeat_means(self, variant: str) -> NDArray[np.float64]:
        """Mean ACD over all held-out cells of each repeat."""
        weights = self.sizes / self.sizes.sum(axis=1, keepdims=True)
        return np.sum(self.errors[variant] * weights, axis=1)

    def mean(self, variant: str) -> float:
        return float(np.mean(self.repeat_means(variant)))

    def sd(self, variant: str) -> float:
        means = self.repeat_means(variant)
        return float(np.std(means, ddof=1)) if means.size > 1 else 0.0

    def table(self) -> pd.DataFrame:
        """One column per variant (``Full``, ``RM``) with mean and sd rows."""
        return pd.DataFrame(
            {
                VARIANT_LABELS.get(v, v): [self.mean(v), self.sd(v)]
                for v in self.variants
            },
            index=pd.Index(["mean", "sd"], name="statistic"),
        )

    def fold_table(self) -> pd.DataFrame:
        """Long table of every fold score."""
        rows = []
        for variant, errors in self.errors.items():
            for repeat, fold in np.ndindex(errors.shape):
                rows.append(
                    {
                        "variant": variant,
                        "repeat": repeat,
                        "fold": fold,
                        "size": int(self.sizes[repeat, fold]),
                        "acd": float(errors[repeat, fold]),
                    }
                )
        return pd.DataFrame(rows)

    def to_dict(self) -> dict[str, Any]:
        return {
            "settings": self.settings,
            "summary": {
                v: {"mean": self.mean(v), "sd": self.sd(v), "repeat_means": self.repeat_means(v).tolist()}
                for v in self.variants
            },
            "folds": {v: e.tolist() for v, e in self.errors.items()},
            "fold_sizes": self.sizes.tolist(),
        }


def cross_validate(
    lattice: LatticeModel,
    data: Observations,
    hp: HyperParams,
    config: SamplerConfig,
    k: int = 6,
    repeats: int = 10,
    *,
    variants: tuple[Variant, ...] | list[Variant] = ("full", "regression_only"),
    fit_predict: FitPredict | None = None,
) -> CvReport:
    """Score variants by repeated k-fold cross-validation.

    Every variant sees the same folds. Held-out cells are predicted by their
    posterior mean composition and scored by ACD against the held-out ``y``.
    Jobs run in a thread pool capped by ``COMPOLATTICE_THREADS`` and each
    job's seed is a child of ``SeedSequence(config.seed)``, so the report is
    deterministic for a fixed seed.

    Args:
        lattice: Lattice with the full observation design.
        data: Observations at ``lattice.obs_index``.
        hp: Prior hyperparameters.
        config: Chain settings of each refit; ``model_variant`` is overridden.
        k: Number of folds.
        repeats: Number of independent fold partitions.
        variants: Model variants to score.
        fit_predict: Replacement predictor; defaults to refitting the model.
    """
    if repeats < 1:
        raise ConfigError(f"repeats must be >= 1, got {repeats}.")
    if not variants:
        raise ConfigError("At least one variant is required.")
    predictor = fit_predict or posterior_mean_predictor(config, hp)
    fold_root, job_root = np.random.SeedSequence(config.seed).spawn(2)
    labels = np.vstack(
        [fold_assignments(data.n_obs, k, make_rng(s)) for s in fold_root.spawn(repeats)]
    )
    sizes = np.stack([np.bincount(row, minlength=k) for row in labels])

    jobs = [
        (variant, repeat, fold)
        for variant in variants
        for repeat in range(repeats)
        for fold in range(k)
    ]
    seeds = job_root.spawn(len(jobs))

    def score(job: tuple[Variant, int, int], seed: np.random.SeedSequence) -> float:
        variant, repeat, fold = job
        test = np.flatnonzero(labels[repeat] == fold)
        train = np.flatnonzero(labels[repeat] != fold)
        predicted = predictor(
            lattice.subset_observations(train),
            data.subset(train),
            lattice.obs_index[test],
            seed,
            variant,
        )
        return compare_to_reference(predicted, data.y[test])

    with ThreadPoolExecutor(max_workers=worker_count(len(jobs))) as pool:
        scores = list(pool.map(score, jobs, seeds))

    errors = {
        variant: np.array(
            [s for (v, _, _), s in zip(jobs, scores) if v == variant]
        ).reshape(repeats, k)
        for variant in variants
    }
    for variant in variants:
        logger.info("CV %s: mean ACD %.4f", variant, float(np.mean(errors[variant])))
    return CvReport(
        errors=errors,
        sizes=sizes,
        settings={
            "folds": k,
            "repeats": repeats,
            "n_iter": config.n_iter,
            "burn_in": config.burn_in,
            "thin": config.thin,
            "seed": config.seed,
            "target": "held-out observations",
        },
    )


__all__ = [
    "CvReport",
    "FitPredict",
    "VARIANT_LABELS",
    "compare_to_reference",
    "cross_validate",
    "fold_assignments",
    "posterior_mean_predictor",
]
