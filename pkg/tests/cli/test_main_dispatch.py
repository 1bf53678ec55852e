"""Tests for how CLI commands hand off to dispatch."""

from __future__ import annotations

from pathlib import Path

from typer.testing import CliRunner

from compolattice.cli.main import cli
import compolattice.cli.main as cli_main


def _recorder(calls: list[dict]):
    def fake_execute(runner, *, config_path, overrides, verbose=False, **kwargs):
        calls.append(
            {
                "runner": runner.__name__,
                "config_path": config_path,
                "overrides": overrides,
                "verbose": verbose,
                **kwargs,
            }
        )

    return fake_execute


def test_fit_calls_dispatch_with_overrides(monkeypatch, tmp_path: Path) -> None:
    """Fit forwards chain settings as dotted overrides."""
    calls: list[dict] = []
    monkeypatch.setattr(cli_main.dispatch, "execute", _recorder(calls))
    config = tmp_path / "run.yaml"
    config.write_text("version: 1\n", encoding="utf-8")

    result = CliRunner().invoke(
        cli,
        [
            "fit", "-c", str(config), "--iters", "200", "--burn-in", "50",
            "--variant", "rm", "--chains", "2", "--no-progress", "-v",
        ],
    )

    assert result.exit_code == 0
    (call,) = calls
    assert call["runner"] == "run_fit"
    assert call["config_path"] == config
    assert call["chains"] == 2
    assert call["verbose"] is True
    assert call["overrides"]["sampler.n_iter"] == 200
    assert call["overrides"]["sampler.burn_in"] == 50
    assert call["overrides"]["sampler.model_variant"] == "regression_only"
    assert call["overrides"]["sampler.progress"] is False
    assert call["overrides"]["sampler.seed"] is None


def test_fit_rejects_both_variants(monkeypatch) -> None:
    """A single fit cannot run two models."""
    calls: list[dict] = []
    monkeypatch.setattr(cli_main.dispatch, "execute", _recorder(calls))

    result = CliRunner().invoke(cli, ["fit", "--variant", "both"])

    assert result.exit_code == 2
    assert calls == []


def test_unknown_variant_is_config_error(monkeypatch) -> None:
    """Unknown variant names exit with the configuration error code."""
    calls: list[dict] = []
    monkeypatch.setattr(cli_main.dispatch, "execute", _recorder(calls))

    result = CliRunner().invoke(cli, ["cv", "--variant", "spatial"])

    assert result.exit_code == 2
    assert "Unknown variant" in result.output
    assert calls == []


def test_cv_maps_chain_options_to_refits(monkeypatch) -> None:
    """cv chain options configure the refits, not the main sampler."""
    calls: list[dict] = []
    monkeypatch.setattr(cli_main.dispatch, "execute", _recorder(calls))

    result = CliRunner().invoke(
        cli, ["cv", "--folds", "3", "--repeats", "2", "--iters", "100", "--variant", "both"]
    )

    assert result.exit_code == 0
    (call,) = calls
    assert call["runner"] == "run_cv"
    assert call["variants"] == ("full", "regression_only")
    assert call["overrides"]["cv.folds"] == 3
    assert call["overrides"]["cv.repeats"] == 2
    assert call["overrides"]["cv.n_iter"] == 100
    assert "sampler.n_iter" not in call["overrides"]


def test_regions_collects_repeated_cells(monkeypatch, tmp_path: Path) -> None:
    """Repeated --cell options become a list of cell ids."""
    calls: list[dict] = []
    monkeypatch.setattr(cli_main.dispatch, "execute", _recorder(calls))
    trace = tmp_path / "trace.npz"

    result = CliRunner().invoke(
        cli,
        ["regions", "--cell", "4", "--cell", "7", "--level", "0.9", "--trace", str(trace)],
    )

    assert result.exit_code == 0
    (call,) = calls
    assert call["runner"] == "run_regions"
    assert call["overrides"]["regions.cells"] == [4, 7]
    assert call["overrides"]["regions.level"] == 0.9
    assert call["trace_path"] == trace


def test_predict_and_simulate_dispatch(monkeypatch, tmp_path: Path) -> None:
    """predict forwards the point summary; simulate the generating variant."""
    calls: list[dict] = []
    monkeypatch.setattr(cli_main.dispatch, "execute", _recorder(calls))

    runner = CliRunner()
    assert runner.invoke(cli, ["predict", "--summary", "inv_alr_mean_eta"]).exit_code == 0
    assert (
        runner.invoke(
            cli, ["simulate", "--seed", "3", "--variant", "full", "-o", str(tmp_path)]
        ).exit_code
        == 0
    )

    predict, simulate = calls
    assert predict["runner"] == "run_predict"
    assert predict["overrides"]["regions.summary"] == "inv_alr_mean_eta"
    assert simulate["runner"] == "run_simulate"
    assert simulate["overrides"] == {
        "sampler.seed": 3,
        "sampler.model_variant": "full",
        "output": tmp_path,
    }


def test_no_subcommand_prints_help() -> None:
    """The bare command shows help and exits cleanly."""
    result = CliRunner().invoke(cli, [])

    assert result.exit_code == 0
    assert "simulate" in result.output
