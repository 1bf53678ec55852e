"""Input file parsers and parser registry."""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path

import pandas as pd

from compolattice.parsers import covariates, grid, observations


@dataclass(frozen=True, slots=True)
class ParserAdapter:
    """Adapter that bundles parse and report callables for an input kind."""

    parse: Callable[[Path], pd.DataFrame]
    report: Callable[[pd.DataFrame], int]


def registry() -> dict[str, ParserAdapter]:
    """Return built-in parser registry keyed by input kind."""
    return {
        "grid": ParserAdapter(parse=grid.parse, report=grid.report),
        "observations": ParserAdapter(
            parse=observations.parse, report=observations.report
        ),
        "covariates": ParserAdapter(parse=covariates.parse, report=covariates.report),
    }


def get(parser: str) -> ParserAdapter:
    """Resolve parser adapter by input kind."""
    adapter = registry().get(parser)
    if adapter is None:
        raise ValueError(f"Unknown parser: {parser}")
    return adapter


__all__ = ["grid", "observations", "covariates", "ParserAdapter", "registry", "get"]
