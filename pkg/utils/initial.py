"""Named initial conditions.

Each builder returns analytic profiles on the grid, so the wall conditions
can be checked exactly rather than through finite differences.
"""

from __future__ import annotations

import inspect
from dataclasses import dataclass
from typing import Any, Callable, Dict, Mapping

import numpy as np

from utils.errors import ConfigError
from utils.grid import Grid


@dataclass(frozen=True, eq=False)
class ICProfile:
    """psi and its derivatives as (ny, nx) arrays, mean flow as (ny,) arrays."""

    psi: np.ndarray
    psi_x: np.ndarray
    psi_y: np.ndarray
    psi_xx: np.ndarray
    psi_yy: np.ndarray
    mean_u: np.ndarray
    mean_u_y: np.ndarray

    def scaled(self, c: float) -> "ICProfile":
        return ICProfile(*(c * a for a in (
            self.psi, self.psi_x, self.psi_y, self.psi_xx, self.psi_yy, self.mean_u, self.mean_u_y
        )))


def wall_profile(y: np.ndarray, top_power: int = 3):
    """f = y^2 (1-y)^n with f', f''; f(0)=f'(0)=0, f(1)=0 and f'(1)=f''(1)=0 for n >= 3."""
    n = top_power
    z = 1.0 - y
    f = y**2 * z**n
    f1 = 2 * y * z**n - n * y**2 * z ** (n - 1)
    f2 = 2 * z**n - 4 * n * y * z ** (n - 1) + n * (n - 1) * y**2 * z ** (n - 2)
    return f, f1, f2


def _mean_cubic(y: np.ndarray, B: float):
    # B (y^2/2 - y^3/3): zero at y=0, zero slope at y=1
    return B * (y**2 / 2 - y**3 / 3), B * (y - y**2)


def _modal(grid: Grid, terms, top_power: int, B: float) -> ICProfile:
    X, Y = np.meshgrid(grid.x_nodes, grid.y_nodes)
    f, f1, f2 = wall_profile(Y, top_power)
    psi = np.zeros_like(X)
    psi_x = np.zeros_like(X)
    psi_xx = np.zeros_like(X)
    for amp, m, phase in terms:
        s = np.sin(m * X + phase)
        c = np.cos(m * X + phase)
        psi += amp * s
        psi_x += amp * m * c
        psi_xx -= amp * m**2 * s
    mean_u, mean_u_y = _mean_cubic(grid.y_nodes, B)
    return ICProfile(
        psi=psi * f,
        psi_x=psi_x * f,
        psi_y=psi * f1,
        psi_xx=psi_xx * f,
        psi_yy=psi * f2,
        mean_u=mean_u,
        mean_u_y=mean_u_y,
    )


def taylor_profile(grid: Grid, A: float = 1.0, m: int = 1, B: float = 0.0, top_power: int = 3) -> ICProfile:
    """psi = A sin(m x) y^2 (1-y)^top_power, mean flow B (y^2/2 - y^3/3)."""
    return _modal(grid, [(A, int(m), 0.0)], int(top_power), B)


def random_taylor(grid: Grid, A: float = 1.0, modes: int = 4, B: float = 0.0, seed: int = 0) -> ICProfile:
    """Seeded sum of taylor modes m = 1..modes with amplitudes ~ A/m^2 and random phases."""
    rng = np.random.default_rng(seed)
    terms = [
        (A * rng.standard_normal() / m**2, m, rng.uniform(0.0, 2.0 * np.pi))
        for m in range(1, int(modes) + 1)
    ]
    return _modal(grid, terms, 3, B)


def mean_sine(grid: Grid, B: float = 1.0) -> ICProfile:
    """Pure mean flow B sin(pi y / 2); psi = 0."""
    z = np.zeros((grid.ny, grid.nx))
    y = grid.y_nodes
    return ICProfile(z, z, z, z, z, B * np.sin(np.pi * y / 2), B * np.pi / 2 * np.cos(np.pi * y / 2))


def zero(grid: Grid) -> ICProfile:
    z = np.zeros((grid.ny, grid.nx))
    return ICProfile(z, z, z, z, z, np.zeros(grid.ny), np.zeros(grid.ny))


IC_REGISTRY: Dict[str, Callable[..., ICProfile]] = {
    "taylor_profile": taylor_profile,
    "random_taylor": random_taylor,
    "mean_sine": mean_sine,
    "zero": zero,
}


def build_profile(name: str, grid: Grid, params: Mapping[str, Any], seed: int = 0) -> ICProfile:
    try:
        builder = IC_REGISTRY[name]
    except KeyError:
        raise ConfigError(f"unknown initial condition {name!r}; known: {', '.join(sorted(IC_REGISTRY))}") from None
    params = dict(params)
    if "seed" in inspect.signature(builder).parameters:
        params.setdefault("seed", seed)
    try:
        return builder(grid, **params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {name!r}: {exc}") from exc
