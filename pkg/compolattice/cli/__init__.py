"""CLI package exports."""

from __future__ import annotations

__all__ = [
    "dispatch",
    "helpers",
    "init",
    "main",
]
