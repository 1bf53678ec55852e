"""Exception hierarchy shared by the library and the CLI exit-code mapping."""

from __future__ import annotations

from typing import Any


class CompolatticeError(Exception):
    """Base class for all package errors."""

    exit_code: int = 1


class ConfigError(CompolatticeError, ValueError):
    """Invalid or inconsistent run configuration."""

    exit_code = 2


class DataError(CompolatticeError, ValueError):
    """Input data that cannot be turned into a consistent model."""

    exit_code = 3


class CompositionError(DataError):
    """A vector that is not a point of the open simplex."""


class LatticeError(DataError):
    """Invalid lattice geometry or observation design."""


class NumericalError(CompolatticeError, ArithmeticError):
    """Numerical failure inside the model or the sampler."""

    exit_code = 4


class NotPositiveDefiniteError(NumericalError):
    """A matrix expected to be symmetric positive definite is not."""


class ChainFailure(NumericalError):
    """Unrecoverable failure of an MCMC chain.

    Attributes:
        iteration: Index of the iteration that failed.
        state: JSON-friendly summary of the last valid state.
    """

    def __init__(self, message: str, *, iteration: int, state: dict[str, Any]):
        super().__init__(f"{message} (iteration {iteration})")
        self.iteration = iteration
        self.state = state

    def postmortem(self) -> dict[str, Any]:
        """Return the payload written to the post-mortem file."""
        return {"error": str(self), "iteration": self.iteration, "state": self.state}


__all__ = [
    "CompolatticeError",
    "ConfigError",
    "DataError",
    "CompositionError",
    "LatticeError",
    "NumericalError",
    "NotPositiveDefiniteError",
    "ChainFailure",
]
