"""Small input-checking helpers shared across modules."""

from __future__ import annotations

import numpy as np

from .exceptions import ConfigError, DomainError


def as_frequency_grid(grid, min_points: int = 1, name: str = "grid") -> np.ndarray:
    """Return ``grid`` as a 1-D float array; must be finite, positive and strictly ascending."""
    g = np.asarray(grid, dtype=float)
    if g.ndim == 0:
        g = g.reshape(1)
    if g.ndim != 1:
        raise ConfigError(f"{name} must be one-dimensional")
    if g.size < min_points:
        raise ConfigError(f"{name} needs at least {min_points} points, got {g.size}")
    if not np.all(np.isfinite(g)) or np.any(g <= 0):
        raise DomainError(f"{name} values must be finite and > 0")
    if g.size > 1 and np.any(np.diff(g) <= 0):
        raise ConfigError(f"{name} must be strictly ascending")
    return g


def log_grid(lo: float = 1e-8, hi: float = 1e2, n: int = 201) -> np.ndarray:
    """Log-uniform shifted-frequency grid; the default spans 10 decades with 201 points."""
    if not (0 < lo < hi) or n < 2:
        raise ConfigError(f"invalid grid spec lo={lo}, hi={hi}, n={n}")
    return np.logspace(np.log10(lo), np.log10(hi), int(n))


def check_positive_int(value, name: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or int(value) != value or value < minimum:
        raise ConfigError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)
