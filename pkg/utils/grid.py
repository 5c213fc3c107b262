"""Discretization of the periodic channel [-pi, pi) x [0, 1].

x is uniform and periodic (Fourier in x); y is a wall-refined node set with
second-order finite differences and trapezoidal quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from utils.errors import GridError


# ----------------------------
# Finite-difference weights
# ----------------------------

def fd_weights(z: float, x: np.ndarray, m: int) -> np.ndarray:
    """Finite-difference weights on arbitrary nodes (Fornberg's recursion).

    Returns an array ``c`` of shape (len(x), m+1) where ``c[:, d]`` are the
    weights approximating the d-th derivative at ``z``.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    c = np.zeros((n, m + 1))
    c1 = 1.0
    c4 = x[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c


def _derivative_matrix(y: np.ndarray, order: int) -> sp.csr_matrix:
    """Sparse y-derivative matrix: 3-point centered interior, one-sided at walls.

    The one-sided wall stencils use 3 nodes for the first derivative and 4
    nodes for the second so both stay second order.
    """
    n = y.size
    wall_width = 3 if order == 1 else 4
    rows, cols, vals = [], [], []

    def _put(i: int, idx: np.ndarray) -> None:
        w = fd_weights(y[i], y[idx], order)[:, order]
        rows.extend([i] * idx.size)
        cols.extend(idx.tolist())
        vals.extend(w.tolist())

    _put(0, np.arange(wall_width))
    for i in range(1, n - 1):
        _put(i, np.arange(i - 1, i + 2))
    _put(n - 1, np.arange(n - wall_width, n))
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def stretched_nodes(ny: int, stretch: float) -> np.ndarray:
    """y_j = (s + stretch*(s - sin(pi s)/pi)) / (1 + stretch), s = j/(ny-1)."""
    s = np.linspace(0.0, 1.0, ny)
    y = (s + stretch * (s - np.sin(np.pi * s) / np.pi)) / (1.0 + stretch)
    y[0], y[-1] = 0.0, 1.0
    return y


def trapezoid_weights(y: np.ndarray) -> np.ndarray:
    h = np.diff(y)
    w = np.zeros_like(y)
    w[:-1] += 0.5 * h
    w[1:] += 0.5 * h
    return w


# ----------------------------
# Grid
# ----------------------------

@dataclass(frozen=True, eq=False)
class Grid:
    """Immutable channel grid.

    Parameters
    ----------
    nx : int
        Number of x nodes (even).
    ny : int
        Number of y nodes including both walls.
    stretch : float
        Wall clustering toward y=0, in [0, 1).

    Notes
    -----
    ``wavenumbers``/``dealias_mask`` describe the full set {-nx/2+1, ..., nx/2};
    ``kx``/``kx_mask`` are the half-spectrum (k = 0..nx/2) views used with
    real-to-complex transforms.
    """

    nx: int
    ny: int
    stretch: float
    x_nodes: np.ndarray = field(init=False, repr=False)
    y_nodes: np.ndarray = field(init=False, repr=False)
    wavenumbers: np.ndarray = field(init=False, repr=False)
    y_weights: np.ndarray = field(init=False, repr=False)
    dealias_mask: np.ndarray = field(init=False, repr=False)
    kx: np.ndarray = field(init=False, repr=False)
    kx_mask: np.ndarray = field(init=False, repr=False)
    D1: sp.csr_matrix = field(init=False, repr=False)
    D2: sp.csr_matrix = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if int(self.nx) != self.nx or self.nx % 2 != 0:
            raise GridError(f"nx must be an even integer (real-to-complex symmetry), got {self.nx}")
        if self.nx < 8:
            raise GridError(f"nx must be >= 8, got {self.nx}")
        if int(self.ny) != self.ny or self.ny < 16:
            raise GridError(f"ny must be an integer >= 16, got {self.ny}")
        if not (0.0 <= float(self.stretch) < 1.0):
            raise GridError(f"stretch must lie in [0, 1), got {self.stretch}")

        nx, ny = int(self.nx), int(self.ny)
        x = -np.pi + 2.0 * np.pi * np.arange(nx) / nx
        y = stretched_nodes(ny, float(self.stretch))
        k_full = np.arange(-nx // 2 + 1, nx // 2 + 1)
        k_half = np.arange(nx // 2 + 1)
        kcut = nx // 3

        for name, value in (
            ("x_nodes", x),
            ("y_nodes", y),
            ("wavenumbers", k_full),
            ("y_weights", trapezoid_weights(y)),
            ("dealias_mask", np.abs(k_full) <= kcut),
            ("kx", k_half),
            ("kx_mask", k_half <= kcut),
            ("D1", _derivative_matrix(y, 1)),
            ("D2", _derivative_matrix(y, 2)),
        ):
            if isinstance(value, np.ndarray):
                value.setflags(write=False)
            object.__setattr__(self, name, value)

    # --- convenience ---

    @property
    def dx(self) -> float:
        return 2.0 * np.pi / self.nx

    @property
    def dy(self) -> np.ndarray:
        return np.diff(self.y_nodes)

    @property
    def nk(self) -> int:
        """Number of half-spectrum modes (nx/2 + 1)."""
        return self.nx // 2 + 1

    @property
    def retained_modes(self) -> np.ndarray:
        """Half-spectrum wavenumbers k >= 1 kept by the 2/3 rule."""
        return self.kx[self.kx_mask & (self.kx > 0)]

    def refine(self, factor: int = 2) -> "Grid":
        """Grid with nx and (ny - 1) multiplied by ``factor``."""
        return Grid(self.nx * factor, (self.ny - 1) * factor + 1, self.stretch)


def build_grid(nx: int, ny: int, stretch: float) -> Grid:
    """Build a channel grid; raises GridError on invalid parameters."""
    return Grid(nx, ny, stretch)


# ----------------------------
# y-derivatives
# ----------------------------

def _apply(matrix: sp.csr_matrix, grid: Grid, values: np.ndarray) -> np.ndarray:
    values = np.asarray(values)
    if values.shape[0] != grid.ny:
        raise ValueError(f"expected {grid.ny} y-values along axis 0, got shape {values.shape}")
    if np.iscomplexobj(values):
        return matrix @ values.real + 1j * (matrix @ values.imag)
    return matrix @ values


def ddy(grid: Grid, column: np.ndarray) -> np.ndarray:
    """Second-order first y-derivative (axis 0); accepts a column or an (ny, n) block."""
    return _apply(grid.D1, grid, column)


def d2y(grid: Grid, column: np.ndarray) -> np.ndarray:
    """Second-order second y-derivative (axis 0); accepts a column or an (ny, n) block."""
    return _apply(grid.D2, grid, column)


def integrate_y(grid: Grid, values: np.ndarray) -> np.ndarray:
    """Trapezoidal y-integral along axis 0."""
    return np.tensordot(grid.y_weights, np.asarray(values), axes=(0, 0))
