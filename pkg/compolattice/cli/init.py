"""Interactive run configuration for the CLI."""

from __future__ import annotations

from pathlib import Path

from pydantic import BaseModel, ConfigDict
from richforms import FormConfig, fill
import typer

from compolattice import schema
from compolattice.utils.console import console


class InitForm(BaseModel):
    """Prompt-focused configuration fields collected by `compolattice init`."""

    data: schema.DataConfig
    sampler: schema.SamplerConfig

    model_config = ConfigDict(extra="forbid", validate_assignment=True)


def collect_init_form() -> InitForm:
    """Prompt for input files and sampler settings, starting from defaults."""
    return fill(
        InitForm,
        initial=InitForm(data=schema.DataConfig(), sampler=schema.SamplerConfig()),
        config=FormConfig(),
    )


def _confirm_overwrite(path: Path) -> bool:
    """Prompt user for overwrite confirmation."""
    return typer.confirm(
        f"Configuration already exists at {path}. Overwrite?",
        default=False,
    )


def run_init(output: Path) -> None:
    """Run interactive initialization and save the materialized configuration."""
    output_path = output.expanduser().resolve()

    if output_path.exists():
        if not output_path.is_file():
            console.print(f"[red]❌ Output path exists and is not a file: {output_path}[/red]")
            raise typer.Exit(code=2)
        if not _confirm_overwrite(output_path):
            console.print(
                f"[yellow]ℹ️ Configuration left unchanged: {output_path}[/yellow]"
            )
            return

    try:
        form = collect_init_form()
    except KeyboardInterrupt as exc:
        console.print("[yellow]⚠️ Init canceled.[/yellow]")
        raise typer.Exit(code=130) from exc

    model = schema.RunConfig(data=form.data, sampler=form.sampler)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    model.save(output_path)
    console.print(f"[green]✅ Wrote configuration: {output_path}[/green]")


__all__ = [
    "InitForm",
    "collect_init_form",
    "run_init",
]
