"""Spatial compositional data on lattices: Dirichlet observations of a latent GMRF."""

DEFAULT_CONFIG_FILENAME = "compolattice.yaml"
THREADS_ENV = "COMPOLATTICE_THREADS"
FACTOR_BACKEND_ENV = "COMPOLATTICE_FACTOR_BACKEND"
VARIANTS: tuple[str, ...] = ("full", "regression_only")

__all__ = [
    "DEFAULT_CONFIG_FILENAME",
    "THREADS_ENV",
    "FACTOR_BACKEND_ENV",
    "VARIANTS",
]
