"""Shared CLI dispatch: command runners and the exit-code mapping."""

from __future__ import annotations

from collections.abc import Callable
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
import typer
from pydantic import ValidationError

from compolattice import DEFAULT_CONFIG_FILENAME, schema
from compolattice.cli import helpers
from compolattice.errors import ChainFailure, CompolatticeError, ConfigError, DataError
from compolattice.ingest import emit
from compolattice.inference.regions import composition_map, region_records
from compolattice.sampler.chain import run_chains
from compolattice.sampler.trace import McmcTrace, parameter_summary
from compolattice.utils.console import configure_logging, console
from compolattice.utils.runtime import make_rng
from compolattice.validation.crossval import VARIANT_LABELS, cross_validate
from compolattice.validation.simulate import (
    simulate_dataset,
    synthetic_lattice,
    true_state,
)

TRACE_FILENAME = "trace.npz"
POSTMORTEM_FILENAME = "postmortem.json"


def execute(
    runner: Callable[..., None],
    *,
    config_path: Path | None,
    overrides: dict[str, Any],
    verbose: bool = False,
    **kwargs: Any,
) -> None:
    """Load the run configuration, run a command and map errors to exit codes.

    Config errors exit with 2, data errors with 3 and numerical failures with
    4; a failed chain also leaves a post-mortem file in the output directory.

    Args:
        runner: Command implementation taking ``(config, output_dir, **kwargs)``.
        config_path: Optional YAML configuration.
        overrides: Dotted-path CLI overrides.
        verbose: Enable debug logging.
        kwargs: Extra runner arguments.
    """
    configure_logging(verbose)
    output_dir: Path | None = None
    try:
        config = helpers.load_config(config_path, **overrides)
        output_dir = config.output.expanduser()
        output_dir.mkdir(parents=True, exist_ok=True)
        runner(config, output_dir, **kwargs)
    except ChainFailure as exc:
        if output_dir is not None:
            helpers.write_json(exc.postmortem(), output_dir / POSTMORTEM_FILENAME)
        console.print(f"[red]❌ {exc}[/red]")
        raise typer.Exit(exc.exit_code) from exc
    except CompolatticeError as exc:
        console.print(f"[red]❌ {exc}[/red]")
        raise typer.Exit(exc.exit_code) from exc
    except ValidationError as exc:
        console.print(f"[red]❌ Invalid configuration: {exc}[/red]")
        raise typer.Exit(ConfigError.exit_code) from exc


def run_validate(path: Path, *, show: bool = False) -> None:
    """Check a run configuration file."""
    config = helpers.load_config(path)
    if show:
        helpers.print_json_output(config.model_dump(mode="json"))
    console.print("[green]✅ Configuration is valid.[/green]")


def run_simulate(config: schema.RunConfig, output_dir: Path) -> None:
    """Draw a synthetic dataset and write inputs, truth and a ready-to-fit config."""
    settings = config.simulation
    rng = make_rng(config.sampler.seed)
    lattice = synthetic_lattice(
        settings.n_rows,
        settings.n_cols,
        settings.n_obs,
        rng,
        n_covariates=settings.n_covariates,
        spacing=config.data.spacing,
    )
    truth = true_state(lattice, settings, rng)
    config.hyper.check_dimension(truth.rho.shape[0])
    dataset = simulate_dataset(lattice, truth, rng, config.sampler.model_variant)

    provenance = helpers.meta(config)
    paths = emit(
        lattice,
        dataset.observations,
        output_dir,
        comment=helpers.comment_line(provenance),
    )
    state = dataset.state
    helpers.write_json(
        {
            "meta": provenance,
            "variant": config.sampler.model_variant,
            "alpha": state.alpha,
            "kappa": state.kappa,
            "rho": state.rho,
            "beta": state.beta,
            "X": state.X,
            "repaired": dataset.observations.repaired,
        },
        output_dir / "truth.json",
    )
    truth_frame = pd.DataFrame(
        dataset.z_all, columns=[f"z_{k + 1}" for k in range(dataset.z_all.shape[1])]
    )
    truth_frame.insert(0, "cell_id", lattice.ids)
    helpers.write_csv(truth_frame, output_dir / "truth_compositions.csv", provenance)

    emitted = {kind: path.resolve() for kind, path in paths.items()}
    fit_config = config.model_copy(
        update={
            "data": config.data.model_copy(
                update={
                    "grid": emitted["grid"],
                    "observations": emitted["observations"],
                    "covariates": emitted.get("covariates"),
                    "alr_covariates": [],
                }
            ),
            "output": output_dir.resolve(),
        }
    )
    fit_config.save(output_dir / DEFAULT_CONFIG_FILENAME)
    console.print(
        f"[green]✅ Simulated {settings.n_obs} observations on a "
        f"{settings.n_rows}x{settings.n_cols} lattice.[/green]"
    )


def run_fit(config: schema.RunConfig, output_dir: Path, chains: int = 1) -> None:
    """Run the sampler and write traces, scalar exports and the parameter summary."""
    lattice, data = helpers.load_inputs(config)
    provenance = helpers.meta(
        config, variant=config.sampler.model_variant, repaired=data.repaired
    )
    console.print(
        f"[cyan]Running {config.sampler.n_iter} iterations "
        f"({config.sampler.model_variant}, {chains} chain(s))...[/cyan]"
    )
    traces = run_chains(lattice, data, config.hyper, config.sampler, chains)
    for index, trace in enumerate(traces):
        trace.header.config_hash = provenance["config_hash"]
        suffix = "" if chains == 1 else f"_{index}"
        trace.save(output_dir / f"trace{suffix}.npz")
        helpers.write_csv(trace.scalars(), output_dir / f"scalars{suffix}.csv", provenance)
        summary = parameter_summary(trace)
        helpers.write_csv(summary, output_dir / f"parameters{suffix}.csv", provenance)
        helpers.write_json(
            {
                "meta": provenance,
                "parameters": summary.to_dict(orient="records"),
                "acceptance": {
                    "mala": trace.acceptance_rate("mala"),
                    "kappa": trace.acceptance_rate("kappa"),
                },
                "samples": trace.n_samples,
            },
            output_dir / f"parameters{suffix}.json",
        )
        helpers.print_table(summary, f"Posterior summary{suffix}")
        console.print(
            f"[green]✅ Chain {index}: {trace.iterations_per_second:.1f} iterations/second, "
            f"MALA acceptance {trace.acceptance_rate('mala'):.2f}.[/green]"
        )


def _load_trace(config: schema.RunConfig, trace_path: Path | None, output_dir: Path):
    path = trace_path or output_dir / TRACE_FILENAME
    if not path.is_file():
        raise DataError(f"Trace file not found: {path}. Run `compolattice fit` first.")
    lattice, data = helpers.load_inputs(config)
    trace = McmcTrace.load(path)
    header = trace.header
    if (header.N, header.p, header.d) != (lattice.N, lattice.p, data.d):
        raise DataError(
            f"Trace dimensions (N={header.N}, p={header.p}, d={header.d}) do not match "
            f"the inputs (N={lattice.N}, p={lattice.p}, d={data.d})."
        )
    return trace, lattice


def run_predict(
    config: schema.RunConfig, output_dir: Path, trace_path: Path | None = None
) -> None:
    """Write posterior point compositions at every node."""
    trace, lattice = _load_trace(config, trace_path, output_dir)
    summary = config.regions.summary
    compositions = composition_map(trace, lattice, summary)
    provenance = helpers.meta(config, point_summary=summary)
    frame = pd.DataFrame(
        compositions, columns=[f"z_{k + 1}" for k in range(compositions.shape[1])]
    )
    frame.insert(0, "col", lattice.coords[:, 1])
    frame.insert(0, "row", lattice.coords[:, 0])
    frame.insert(0, "cell_id", lattice.ids)
    helpers.write_csv(frame, output_dir / "compositions.csv", provenance)
    helpers.write_json(
        {"meta": provenance, "cells": frame.to_dict(orient="records")},
        output_dir / "compositions.json",
    )
    console.print(f"[green]✅ Predicted compositions at {lattice.N} cells.[/green]")


def run_regions(
    config: schema.RunConfig, output_dir: Path, trace_path: Path | None = None
) -> None:
    """Write confidence and prediction regions for the configured cells."""
    trace, lattice = _load_trace(config, trace_path, output_dir)
    settings = config.regions
    if settings.cells is None:
        nodes = np.arange(lattice.N)
    else:
        nodes = np.array([lattice.node_of(cell) for cell in settings.cells])
    records, table = region_records(
        trace,
        lattice,
        nodes,
        settings.level,
        make_rng(config.sampler.seed),
        summary=settings.summary,
        n_points=settings.boundary_points,
    )
    provenance = helpers.meta(config, level=settings.level, point_summary=settings.summary)
    helpers.write_json({"meta": provenance, "regions": records}, output_dir / "regions.json")
    helpers.write_csv(table, output_dir / "regions.csv", provenance)
    console.print(f"[green]✅ Regions written for {len(records)} cells.[/green]")


def run_cv(
    config: schema.RunConfig,
    output_dir: Path,
    variants: tuple[schema.Variant, ...] | None = None,
) -> None:
    """Run repeated k-fold cross-validation and write the report."""
    lattice, data = helpers.load_inputs(config)
    settings = config.cv
    chosen = variants or tuple(settings.variants)
    sampler = config.sampler.model_copy(
        update={
            "n_iter": settings.n_iter,
            "burn_in": settings.burn_in,
            "thin": settings.thin,
            "progress": False,
        }
    )
    console.print(
        f"[cyan]Cross-validating {', '.join(chosen)}: {settings.repeats} x "
        f"{settings.folds}-fold, {settings.n_iter} iterations per refit...[/cyan]"
    )
    report = cross_validate(
        lattice,
        data,
        config.hyper,
        sampler,
        k=settings.folds,
        repeats=settings.repeats,
        variants=chosen,
    )
    provenance = helpers.meta(config, variants=",".join(VARIANT_LABELS[v] for v in chosen))
    helpers.write_json({"meta": provenance, **report.to_dict()}, output_dir / "cv_report.json")
    table = report.table().reset_index()
    helpers.write_csv(table, output_dir / "cv_report.csv", provenance)
    helpers.write_csv(report.fold_table(), output_dir / "cv_folds.csv", provenance)
    helpers.print_table(table, "Average compositional error")
    console.print("[green]✅ Cross-validation finished.[/green]")
