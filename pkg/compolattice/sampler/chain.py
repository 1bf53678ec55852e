"""Two-block MCMC driver: MALA over ``(X, beta, alpha)`` then ``(kappa, rho)``."""

from __future__ import annotations

from collections.abc import Callable, Iterator
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import replace
import logging
import math
import time

import numpy as np
from numpy.typing import NDArray
from rich.progress import Progress

from compolattice.core.composition import alr
from compolattice.core.factor import factorize, sample_gmrf
from compolattice.core.lattice import LatticeModel, PrecisionCache
from compolattice.core.likelihood import BlockPoint, BlockTarget, ModelState, Observations
from compolattice.errors import ChainFailure, CompositionError, ConfigError, NumericalError
from compolattice.sampler.adapt import adapt_step
from compolattice.sampler.kappa import kappa_rho_step, log_kappa_marginal, rho_scatter
from compolattice.sampler.mala import mala_step
from compolattice.sampler.trace import McmcTrace, TraceHeader
from compolattice.schema import HyperParams, SamplerConfig, Variant
from compolattice.utils.console import console
from compolattice.utils.runtime import make_rng, spawn_seeds, worker_count

logger = logging.getLogger(__name__)

ALPHA_RANGE = (1.0, 50.0)
RHO_JITTER = 1e-6
START_ROUNDS = 3
SCORING_STEPS = 5
KAPPA_FACTORS = np.geomspace(0.05, 20.0, 41)


def _heuristic_state(
    lattice: LatticeModel, data: Observations, hp: HyperParams
) -> ModelState:
    d, p = data.d, lattice.p
    targets = alr(data.y)
    design = lattice.covariates[lattice.obs_index]
    if data.n_obs:
        coefficients, *_ = np.linalg.lstsq(design, targets, rcond=None)
    else:
        coefficients = np.zeros((p, d))
    rho = np.eye(d)
    if data.n_obs > p + 1:
        residuals = targets - design @ coefficients
        estimate = np.atleast_2d(np.cov(residuals, rowvar=False)) + RHO_JITTER * np.eye(d)
        if np.all(np.isfinite(estimate)) and np.all(np.linalg.eigvalsh(estimate) > 0):
            rho = estimate
    diameter = lattice.diameter
    kappa = math.sqrt(8.0) / (diameter / 5.0) if diameter > 0 else 1.0
    alpha = float(np.clip(hp.a_alpha / hp.b_alpha, *ALPHA_RANGE))
    return ModelState(
        X=np.zeros(lattice.N * d),
        beta=np.asarray(coefficients, dtype=np.float64).T.ravel(),
        alpha=alpha,
        kappa=kappa,
        rho=rho,
    )


def _scoring_mode(target: BlockTarget, theta: NDArray[np.float64]) -> NDArray[np.float64]:
    """Fisher scoring over the latent coordinates with ``alpha`` held fixed."""
    value = target.value(theta)
    for _ in range(SCORING_STEPS):
        fisher = factorize(target.fisher(theta)[:-1, :-1])
        step = fisher.solve(target.gradient(theta)[:-1])
        scale = 1.0
        for _ in range(6):
            trial = theta.copy()
            trial[:-1] += scale * step
            trial_value = target.value(trial)
            if trial_value > value:
                theta, value = trial, trial_value
                break
            scale *= 0.5
        else:
            break
    return theta


def _profile_kappa(
    X: NDArray[np.float64],
    kappa: float,
    lattice: LatticeModel,
    hp: HyperParams,
    d: int,
) -> float:
    """Conditional mode of ``kappa`` given ``X`` over a log grid around ``kappa``."""
    best, best_value = kappa, -np.inf
    for candidate in kappa * KAPPA_FACTORS:
        try:
            value = log_kappa_marginal(candidate, X, lattice, hp, d)
        except NumericalError:
            continue
        if value > best_value:
            best, best_value = float(candidate), value
    return best


def initial_state(
    lattice: LatticeModel,
    data: Observations,
    hp: HyperParams,
    variant: Variant = "full",
    rng: np.random.Generator | None = None,
) -> ModelState:
    """Data-informed starting point of a chain.

    ``beta`` starts at the least-squares fit of ``alr(y)`` on the observed
    covariates and ``alpha`` at ``clip(a_alpha / b_alpha, 1, 50)``; the
    regression-only model keeps ``X = 0``. For the full model ``kappa``
    starts where the practical range is a fifth of the domain diameter and
    ``rho`` at the residual covariance. A few rounds then draw ``X`` from the
    Gaussian approximation of its conditional posterior around the scoring
    mode, move ``kappa`` to its conditional mode given that field and set
    ``rho`` to its conditional mean.

    Falls back to the heuristic start, with a warning, when a factorization
    fails on the way.
    """
    start = _heuristic_state(lattice, data, hp)
    if variant != "full":
        return start
    rng = rng if rng is not None else make_rng(0)
    d = data.d
    state = start
    try:
        for _ in range(START_ROUNDS):
            target = BlockTarget(lattice, data, hp, state.kappa, state.rho)
            theta = _scoring_mode(target, target.pack(state))
            fisher = factorize(target.fisher(theta)[:-1, :-1])
            X = theta[: target.n_x] + sample_gmrf(fisher, 0.0, rng)[: target.n_x]
            kappa = _profile_kappa(X, state.kappa, lattice, hp, d)
            rho = rho_scatter(X, kappa, lattice, hp) / max(lattice.N + hp.b_rho - d - 1, 1.0)
            state = replace(
                target.unpack(theta, state), X=X, kappa=kappa, rho=0.5 * (rho + rho.T)
            )
        return state.validate(lattice, d)
    except ConfigError:
        raise
    except (NumericalError, CompositionError, ValueError, np.linalg.LinAlgError) as exc:
        logger.warning("Data-informed start failed (%s); starting from X = 0.", exc)
        return start


@contextmanager
def _progress(enabled: bool, total: int, label: str) -> Iterator[Callable[[], None]]:
    """Yield an ``advance`` callback backed by a rich progress bar on stderr."""
    if not enabled:
        yield lambda: None
        return
    with Progress(console=console, transient=True) as progress:
        task = progress.add_task(label, total=total)
        yield lambda: progress.advance(task)


def run_chain(
    lattice: LatticeModel,
    data: Observations,
    hp: HyperParams,
    config: SamplerConfig,
    *,
    seed: int | np.random.SeedSequence | None = None,
    state: ModelState | None = None,
) -> McmcTrace:
    """Run one chain and return its thinned post-burn-in trace.

    Step sizes adapt during burn-in only. The regression-only model keeps
    ``X`` at zero and skips the ``(kappa, rho)`` block.

    Args:
        lattice: Lattice with its observation design.
        data: Observations at ``lattice.obs_index``.
        hp: Prior hyperparameters.
        config: Chain length, thinning, step sizes and variant.
        seed: Random stream override; defaults to ``config.seed``.
        state: Starting state; defaults to :func:`initial_state`.

    Raises:
        ChainFailure: On an unrecoverable numerical failure, carrying the
            iteration index and a summary of the last valid state.
    """
    variant = config.model_variant
    hp.check_dimension(data.d)
    rng = make_rng(config.seed if seed is None else seed)
    current = state or initial_state(lattice, data, hp, variant, rng)
    current.validate(lattice, data.d)

    trace = McmcTrace.allocate(
        TraceHeader(
            N=lattice.N,
            p=lattice.p,
            d=data.d,
            n_iter=config.n_iter,
            burn_in=config.burn_in,
            thin=config.thin,
            variant=variant,
            seed=config.seed,
            config=config.model_dump(mode="json"),
        )
    )
    eps, sigma = config.eps0, config.sigma_kappa0
    cache = PrecisionCache(lattice)
    target: BlockTarget | None = None
    point: BlockPoint | None = None
    slot = 0
    started = time.perf_counter()
    with _progress(config.progress, config.n_iter, f"{variant} chain") as advance:
        for iteration in range(config.n_iter):
            try:
                # the regression-only target never changes; the full one follows (kappa, rho)
                if target is None or variant == "full":
                    target = BlockTarget(
                        lattice,
                        data,
                        hp,
                        current.kappa,
                        current.rho,
                        variant,
                        q=cache.q(current.kappa) if variant == "full" else None,
                    )
                    terms = None if point is None else point.terms
                    point = target.point(target.pack(current), terms)
                step = mala_step(target, current, eps, rng, point)
                current, point = step.state, step.point
                trace.mala_accepted[iteration] = step.accepted
                trace.mala_prob[iteration] = step.acc_prob
                if variant == "full":
                    block = kappa_rho_step(current, lattice, hp, sigma, rng, cache)
                    current = replace(current, kappa=block.kappa, rho=block.rho)
                    trace.kappa_accepted[iteration] = block.accepted
                    trace.kappa_prob[iteration] = block.acc_prob
            except (NumericalError, CompositionError, np.linalg.LinAlgError) as exc:
                raise ChainFailure(
                    f"Chain failed: {exc}", iteration=iteration, state=current.summary()
                ) from exc

            if iteration < config.burn_in:
                eps = adapt_step(eps, step.acc_prob, iteration + 1, config.target_mala)
                if variant == "full":
                    sigma = adapt_step(
                        sigma, block.acc_prob, iteration + 1, config.target_rw
                    )
            trace.eps_history[iteration] = eps
            trace.sigma_history[iteration] = sigma

            if iteration >= config.burn_in and (iteration - config.burn_in + 1) % config.thin == 0:
                trace.store(slot, current)
                slot += 1
            advance()
    trace.header.elapsed = time.perf_counter() - started
    logger.info(
        "Chain finished: %d iterations in %.1fs, MALA acceptance %.3f",
        config.n_iter,
        trace.header.elapsed,
        trace.acceptance_rate("mala"),
    )
    return trace


def run_chains(
    lattice: LatticeModel,
    data: Observations,
    hp: HyperParams,
    config: SamplerConfig,
    n_chains: int,
) -> list[McmcTrace]:
    """Run independent chains in a thread pool capped by ``COMPOLATTICE_THREADS``.

    Chain ``c`` uses child ``c`` of ``SeedSequence(config.seed)``.
    """
    if n_chains < 1:
        raise ValueError(f"n_chains must be >= 1, got {n_chains}.")
    seeds = spawn_seeds(config.seed, n_chains)
    with ThreadPoolExecutor(max_workers=worker_count(n_chains)) as pool:
        futures = [
            pool.submit(run_chain, lattice, data, hp, config, seed=child)
            for child in seeds
        ]
        return [future.result() for future in futures]


__all__ = ["initial_state", "run_chain", "run_chains"]
