"""Runtime helpers: worker caps, seed streams and config hashing."""

from __future__ import annotations

import hashlib
import json
import os
from typing import Any

import numpy as np

from compolattice import THREADS_ENV
from compolattice.errors import ConfigError


def worker_count(requested: int | None = None) -> int:
    """Return the number of worker threads allowed for concurrent jobs.

    Args:
        requested: Desired worker count; defaults to the CPU count.

    Returns:
        The requested count capped by ``COMPOLATTICE_THREADS`` when it is set.
    """
    count = requested if requested is not None else (os.cpu_count() or 1)
    cap = os.environ.get(THREADS_ENV)
    if cap:
        try:
            count = min(count, int(cap))
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {cap!r}") from None
    return max(1, count)


def spawn_seeds(seed: int, count: int) -> list[np.random.SeedSequence]:
    """Split a master seed into independent, counter-indexed child streams."""
    return np.random.SeedSequence(seed).spawn(count)


def make_rng(seed: int | np.random.SeedSequence) -> np.random.Generator:
    """Create the package's random stream from a seed or a seed sequence."""
    return np.random.Generator(np.random.PCG64(seed))


def digest(payload: Any) -> str:
    """Return the SHA-256 hex digest of a canonical JSON dump of ``payload``."""
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()
