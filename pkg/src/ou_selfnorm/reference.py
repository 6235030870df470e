"""Exact samplers for the limit processes.

The stationary Ornstein-Uhlenbeck process ``dY = -Y/2 du + dB`` with
``Y(0) ~ N(0, 1)`` has covariance ``exp(-|t - s|/2)`` and the exact AR(1)
transition ``Y(t+d) = rho*Y(t) + sqrt(1 - rho**2)*Z`` with
``rho = exp(-d/2)``, so sampling on any grid carries no discretization error.
"""
from __future__ import annotations

import math

import numpy as np

from .core import GridPath
from .errors import DomainError
from .sampling import RngStream

OU_DRIFT = -0.5
OU_SIGMA = 1.0


def ou_cov(s: float, t: float) -> float:
    return math.exp(-abs(t - s) / 2.0)


def _grid(grid) -> np.ndarray:
    g = np.asarray(grid, dtype=np.float64)
    if g.ndim != 1 or len(g) == 0:
        raise DomainError("grid must be a nonempty 1-D sequence of times")
    if np.any(np.diff(g) <= 0):
        raise DomainError("grid times must be strictly increasing")
    return g


def uniform_grid(start: float, stop: float, step: float) -> np.ndarray:
    """Grid ``start, start+step, ..., stop``; ``stop`` is always included."""
    if step <= 0 or stop < start:
        raise DomainError(f"bad grid [{start}, {stop}] step {step}")
    k = max(1, round((stop - start) / step))
    return np.linspace(start, stop, k + 1)


def sample_ou_rows(grid, rng: RngStream, size: int) -> np.ndarray:
    """``size`` stationary OU paths on ``grid``, one per row."""
    g = _grid(grid)
    z = rng.generator.standard_normal((size, len(g)))
    rho = np.exp(-np.diff(g) / 2.0)
    noise = np.sqrt(-np.expm1(-np.diff(g)))  # sqrt(1 - rho**2), accurate for small gaps
    out = np.empty_like(z)
    out[:, 0] = z[:, 0]
    for k in range(len(g) - 1):
        out[:, k + 1] = rho[k] * out[:, k] + noise[k] * z[:, k + 1]
    return out


def sample_ou(grid, rng: RngStream) -> GridPath:
    g = _grid(grid)
    return GridPath(g, sample_ou_rows(g, rng, 1)[0])


def sample_bm_rows(grid, rng: RngStream, size: int) -> np.ndarray:
    """``size`` standard Brownian paths on a grid starting at 0."""
    g = _grid(grid)
    if g[0] != 0.0:
        raise DomainError(f"Brownian grid must start at 0, got {g[0]}")
    out = np.zeros((size, len(g)))
    if len(g) > 1:
        inc = rng.generator.standard_normal((size, len(g) - 1)) * np.sqrt(np.diff(g))
        np.cumsum(inc, axis=1, out=out[:, 1:])
    return out


def sample_bm(grid, rng: RngStream) -> GridPath:
    g = _grid(grid)
    return GridPath(g, sample_bm_rows(g, rng, 1)[0])
