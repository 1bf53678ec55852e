"""Command line entrypoints for compolattice."""

from __future__ import annotations

from pathlib import Path

import typer

from compolattice import DEFAULT_CONFIG_FILENAME
from compolattice.cli import dispatch, helpers
from compolattice.cli import init as cli_init
from compolattice.errors import CompolatticeError, ConfigError
from compolattice.utils.console import console


def callback(ctx: typer.Context) -> None:
    """Handle the top-level CLI callback.

    Args:
        ctx: Typer context for the current invocation.
    """
    if ctx.invoked_subcommand is None:
        console.print(ctx.get_help())
        raise typer.Exit(0)


cli: typer.Typer = typer.Typer(
    name="compolattice",
    help="Spatial compositional data on lattices",
    no_args_is_help=False,
    add_completion=True,
    pretty_exceptions_show_locals=False,
    pretty_exceptions_enable=True,
    pretty_exceptions_short=True,
    rich_markup_mode="rich",
    rich_help_panel="compolattice CLI",
    callback=callback,
    invoke_without_command=True,
)

ConfigOption = typer.Option(
    None,
    "--config",
    "-c",
    help=f"Run configuration; defaults to ./{DEFAULT_CONFIG_FILENAME} when present.",
    file_okay=True,
    dir_okay=False,
)
SeedOption = typer.Option(None, "--seed", help="Master random seed.")
OutOption = typer.Option(None, "--out", "-o", help="Output directory.")
VerboseOption = typer.Option(False, "--verbose", "-v", help="Enable verbose output.")
ItersOption = typer.Option(None, "--iters", help="Total MCMC iterations.")
BurnInOption = typer.Option(None, "--burn-in", help="Discarded leading iterations.")
ThinOption = typer.Option(None, "--thin", help="Keep every thin-th draw.")
TraceOption = typer.Option(
    None, "--trace", help="Trace file written by fit; defaults to <out>/trace.npz."
)


def _single_variant(flag: str | None) -> str | None:
    """Resolve a ``--variant`` flag that must name exactly one model."""
    if flag is None:
        return None
    try:
        chosen = helpers.variants_for(flag, ())
    except ConfigError as exc:
        console.print(f"[red]❌ {exc}[/red]")
        raise typer.Exit(exc.exit_code) from exc
    if len(chosen) != 1:
        console.print("[red]❌ --variant must be full or rm for this command.[/red]")
        raise typer.Exit(ConfigError.exit_code)
    return chosen[0]


@cli.command("init", help="Create a run configuration interactively.")
def initializer(
    output: Path = typer.Option(
        Path(DEFAULT_CONFIG_FILENAME),
        "--output",
        "-o",
        help="Output path for the configuration file.",
        file_okay=True,
        dir_okay=False,
        writable=True,
        resolve_path=True,
    ),
) -> None:
    """Collect and save a fully materialized run configuration."""
    cli_init.run_init(output)


@cli.command("validate", help="Check a run configuration.")
def validator(
    path: Path,
    show: bool = typer.Option(
        False, "--json", help="Print the resolved configuration as JSON."
    ),
) -> None:
    """Validate a configuration file against the schema.

    Args:
        path: Path to the configuration to validate.
        show: Print the resolved configuration.
    """
    try:
        dispatch.run_validate(path, show=show)
    except CompolatticeError as exc:
        console.print(f"[red]❌ {exc}[/red]")
        raise typer.Exit(exc.exit_code) from exc


@cli.command("simulate", help="Simulate a synthetic dataset from the model.")
def simulator(
    config: Path | None = ConfigOption,
    seed: int | None = SeedOption,
    variant: str | None = typer.Option(
        None, "--variant", help="Generating model: full or rm."
    ),
    out: Path | None = OutOption,
    verbose: bool = VerboseOption,
) -> None:
    """Write grid, observations, covariates, truth and a fit-ready config."""
    dispatch.execute(
        dispatch.run_simulate,
        config_path=config,
        overrides={
            "sampler.seed": seed,
            "sampler.model_variant": _single_variant(variant),
            "output": out,
        },
        verbose=verbose,
    )


@cli.command("fit", help="Run the MCMC sampler on the configured data.")
def fitter(
    config: Path | None = ConfigOption,
    seed: int | None = SeedOption,
    iters: int | None = ItersOption,
    burn_in: int | None = BurnInOption,
    thin: int | None = ThinOption,
    variant: str | None = typer.Option(
        None, "--variant", help="Model variant: full or rm."
    ),
    chains: int = typer.Option(1, "--chains", min=1, help="Independent chains."),
    progress: bool | None = typer.Option(
        None, "--progress/--no-progress", help="Show a progress bar."
    ),
    out: Path | None = OutOption,
    verbose: bool = VerboseOption,
) -> None:
    """Fit the model and write traces plus the parameter summary."""
    dispatch.execute(
        dispatch.run_fit,
        config_path=config,
        overrides={
            "sampler.seed": seed,
            "sampler.n_iter": iters,
            "sampler.burn_in": burn_in,
            "sampler.thin": thin,
            "sampler.model_variant": _single_variant(variant),
            "sampler.progress": progress,
            "output": out,
        },
        verbose=verbose,
        chains=chains,
    )


@cli.command("predict", help="Posterior point compositions at every cell.")
def predictor(
    config: Path | None = ConfigOption,
    trace: Path | None = TraceOption,
    summary: str | None = typer.Option(
        None, "--summary", help="Point summary: mean_z or inv_alr_mean_eta."
    ),
    out: Path | None = OutOption,
    verbose: bool = VerboseOption,
) -> None:
    """Write ``compositions.csv`` and ``compositions.json``."""
    dispatch.execute(
        dispatch.run_predict,
        config_path=config,
        overrides={"regions.summary": summary, "output": out},
        verbose=verbose,
        trace_path=trace,
    )


@cli.command("regions", help="Confidence and prediction regions at selected cells.")
def regioner(
    config: Path | None = ConfigOption,
    trace: Path | None = TraceOption,
    level: float | None = typer.Option(None, "--level", help="Region level in (0, 1]."),
    cells: list[int] | None = typer.Option(
        None, "--cell", help="Cell id to summarize; repeat for several."
    ),
    seed: int | None = SeedOption,
    out: Path | None = OutOption,
    verbose: bool = VerboseOption,
) -> None:
    """Write ``regions.json`` and ``regions.csv``."""
    dispatch.execute(
        dispatch.run_regions,
        config_path=config,
        overrides={
            "regions.level": level,
            "regions.cells": cells or None,
            "sampler.seed": seed,
            "output": out,
        },
        verbose=verbose,
        trace_path=trace,
    )


@cli.command("cv", help="Repeated k-fold cross-validation scored by ACD.")
def cross_validator(
    config: Path | None = ConfigOption,
    seed: int | None = SeedOption,
    folds: int | None = typer.Option(None, "--folds", help="Number of folds k."),
    repeats: int | None = typer.Option(None, "--repeats", help="Repetitions."),
    iters: int | None = ItersOption,
    burn_in: int | None = BurnInOption,
    thin: int | None = ThinOption,
    variant: str | None = typer.Option(
        None, "--variant", help="Models to compare: full, rm or both."
    ),
    out: Path | None = OutOption,
    verbose: bool = VerboseOption,
) -> None:
    """Write ``cv_report.json``, ``cv_report.csv`` and ``cv_folds.csv``."""
    try:
        variants = helpers.variants_for(variant, ()) or None
    except ConfigError as exc:
        console.print(f"[red]❌ {exc}[/red]")
        raise typer.Exit(exc.exit_code) from exc
    dispatch.execute(
        dispatch.run_cv,
        config_path=config,
        overrides={
            "sampler.seed": seed,
            "cv.folds": folds,
            "cv.repeats": repeats,
            "cv.n_iter": iters,
            "cv.burn_in": burn_in,
            "cv.thin": thin,
            "output": out,
        },
        verbose=verbose,
        variants=variants,
    )


def main() -> None:
    """Run the CLI entrypoint."""
    cli()


if __name__ == "__main__":
    main()
