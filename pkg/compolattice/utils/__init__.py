"""Utility helpers for the compolattice package."""

from __future__ import annotations

from compolattice.utils import console, runtime

__all__ = ["console", "runtime"]
