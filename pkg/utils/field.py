"""Scalar fields on the channel grid and the solver state.

Physical data is stored as (ny, nx) real arrays and x-spectral data as
(ny, nx//2 + 1) complex arrays holding the non-negative half of a
conjugate-symmetric spectrum. Spectral coefficients are the continuum Fourier
coefficients of f(x) = sum_k f^k e^{ikx} on x in [-pi, pi).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from utils.grid import Grid, ddy, integrate_y


class Rep(str, Enum):
    PHYSICAL = "physical"
    SPECTRAL = "x_spectral"


class BCTag(str, Enum):
    NONE = "none"
    DIRICHLET_BOTTOM = "dirichlet_bottom"
    NEUMANN_TOP = "neumann_top"
    BOTH_WALLS_ZERO = "both_walls_zero"


class Regime(str, Enum):
    VISCOUS = "viscous"
    LIMIT = "limit"


# ----------------------------
# ScalarField
# ----------------------------

@dataclass(frozen=True, eq=False)
class ScalarField:
    grid: Grid
    rep: Rep
    data: np.ndarray
    bc: BCTag = BCTag.NONE

    def __post_init__(self) -> None:
        g = self.grid
        if self.rep == Rep.PHYSICAL:
            expected = (g.ny, g.nx)
            if np.iscomplexobj(self.data):
                raise ValueError("physical data must be real-valued")
        else:
            expected = (g.ny, g.nk)
        if self.data.shape != expected:
            raise ValueError(f"{self.rep.value} data must have shape {expected}, got {self.data.shape}")

    @classmethod
    def zeros(cls, grid: Grid, rep: Rep = Rep.SPECTRAL, bc: BCTag = BCTag.NONE) -> "ScalarField":
        if rep == Rep.PHYSICAL:
            return cls(grid, rep, np.zeros((grid.ny, grid.nx)), bc)
        return cls(grid, rep, np.zeros((grid.ny, grid.nk), dtype=complex), bc)

    @classmethod
    def from_function(cls, grid: Grid, fn, bc: BCTag = BCTag.NONE) -> "ScalarField":
        """Sample ``fn(X, Y)`` on the grid (physical rep)."""
        X, Y = np.meshgrid(grid.x_nodes, grid.y_nodes)
        data = np.broadcast_to(np.asarray(fn(X, Y), dtype=float), X.shape).copy()
        return cls(grid, Rep.PHYSICAL, data, bc)

    def with_data(self, data: np.ndarray) -> "ScalarField":
        return replace(self, data=data)

    def __add__(self, other: "ScalarField") -> "ScalarField":
        b = _same_rep(self, other)
        return self.with_data(self.data + b.data)

    def __sub__(self, other: "ScalarField") -> "ScalarField":
        b = _same_rep(self, other)
        return self.with_data(self.data - b.data)

    def __mul__(self, scale: float) -> "ScalarField":
        return self.with_data(self.data * scale)

    __rmul__ = __mul__


def _same_rep(a: ScalarField, b: ScalarField) -> ScalarField:
    if b.rep == a.rep:
        return b
    return to_spectral(b) if a.rep == Rep.SPECTRAL else to_physical(b)


# ----------------------------
# Transforms
# ----------------------------

def _phase(grid: Grid) -> np.ndarray:
    # x_j = -pi + 2 pi j / nx  =>  coefficient phase (-1)^k
    return np.where(grid.kx % 2 == 0, 1.0, -1.0)


def to_spectral(f: ScalarField) -> ScalarField:
    """Forward x-transform; mode amplitudes equal continuum Fourier coefficients."""
    if f.rep == Rep.SPECTRAL:
        return f
    g = f.grid
    hat = np.fft.rfft(f.data, axis=-1) / g.nx
    hat *= _phase(g)
    # k = 0 and Nyquist columns of a real signal are real
    hat[:, 0] = hat[:, 0].real
    hat[:, -1] = hat[:, -1].real
    return ScalarField(g, Rep.SPECTRAL, hat, f.bc)


def to_physical(f: ScalarField) -> ScalarField:
    """Inverse x-transform of a half spectrum."""
    if f.rep == Rep.PHYSICAL:
        return f
    g = f.grid
    data = np.fft.irfft(f.data * (_phase(g) * g.nx), n=g.nx, axis=-1)
    return ScalarField(g, Rep.PHYSICAL, data, f.bc)


def dealias(f: ScalarField) -> ScalarField:
    """Zero every mode outside the 2/3 rule mask."""
    if f.rep != Rep.SPECTRAL:
        raise ValueError("dealias expects an x-spectral field")
    return f.with_data(np.where(f.grid.kx_mask, f.data, 0.0))


def ddx(f: ScalarField) -> ScalarField:
    """Spectral x-derivative, returned in the representation of ``f``."""
    hat = to_spectral(f)
    g = f.grid
    ik = 1j * g.kx.astype(float)
    ik[-1] = 0.0  # Nyquist
    out = hat.with_data(hat.data * ik)
    return out if f.rep == Rep.SPECTRAL else to_physical(out)


def dy(f: ScalarField) -> ScalarField:
    """Finite-difference y-derivative, same representation as ``f``."""
    return f.with_data(ddy(f.grid, f.data))


def product(a: ScalarField, b: ScalarField) -> ScalarField:
    """Dealiased product: factors truncated to the 2/3 band, product truncated again."""
    pa = to_physical(dealias(to_spectral(a)))
    pb = to_physical(dealias(to_spectral(b)))
    prod = ScalarField(a.grid, Rep.PHYSICAL, pa.data * pb.data)
    return dealias(to_spectral(prod))


# ----------------------------
# Norms
# ----------------------------

def norm_lp(f: ScalarField, p: float) -> float:
    """(sum_x sum_y w_y dx |f|^p)^(1/p)."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if np.isinf(p):
        return norm_linf(f)
    if f.rep != Rep.PHYSICAL:
        raise ValueError("norm_lp expects a physical field")
    g = f.grid
    col = np.sum(np.abs(f.data) ** p, axis=1) * g.dx
    return float(integrate_y(g, col) ** (1.0 / p))


def norm_linf(f: ScalarField) -> float:
    if f.rep != Rep.PHYSICAL:
        raise ValueError("norm_linf expects a physical field")
    return float(np.max(np.abs(f.data))) if f.data.size else 0.0


def spectral_l2_squared(f: ScalarField) -> float:
    """||f||_2^2 by Parseval: 2 pi sum_k int |f^k|^2 dy over the full spectrum."""
    hat = to_spectral(f)
    g = f.grid
    mult = np.full(g.nk, 2.0)
    mult[0] = 1.0
    mult[-1] = 1.0
    col = np.sum(np.abs(hat.data) ** 2 * mult, axis=1)
    return float(2.0 * np.pi * integrate_y(g, col))


def l2_sq(f: ScalarField) -> float:
    return norm_lp(to_physical(f), 2) ** 2


# ----------------------------
# FlowState
# ----------------------------

@dataclass(frozen=True, eq=False)
class FlowState:
    """Full solver state for either system.

    ``psi`` carries only k != 0 content; the k = 0 part of u lives in
    ``mean_u``. ``omega`` carries all modes, its k = 0 row being -d(mean_u)/dy.
    ``prev_*`` hold the Adams-Bashforth history (None before the first step).
    """

    psi: ScalarField
    omega: ScalarField
    mean_u: np.ndarray
    t: float
    nu1: float
    nu2: float
    regime: Regime
    prev_nonlinear: Optional[np.ndarray] = None
    prev_mean_forcing: Optional[np.ndarray] = None
    prev_dt: Optional[float] = None

    def __post_init__(self) -> None:
        if self.nu1 <= 0:
            raise ValueError(f"nu1 must be positive, got {self.nu1}")
        if self.regime == Regime.VISCOUS and not self.nu2 > 0:
            raise ValueError("viscous regime requires nu2 > 0")
        if self.regime == Regime.LIMIT and self.nu2 != 0:
            raise ValueError("limit regime requires nu2 = 0")
        if self.mean_u.shape != (self.grid.ny,):
            raise ValueError(f"mean_u must have shape ({self.grid.ny},)")

    @property
    def grid(self) -> Grid:
        return self.psi.grid

    @classmethod
    def zero(cls, grid: Grid, nu1: float, nu2: float, regime: Regime, t: float = 0.0) -> "FlowState":
        return cls(
            psi=ScalarField.zeros(grid, bc=BCTag.BOTH_WALLS_ZERO),
            omega=ScalarField.zeros(grid),
            mean_u=np.zeros(grid.ny),
            t=t,
            nu1=nu1,
            nu2=nu2,
            regime=Regime(regime),
        )


def velocity_from_state(s: FlowState) -> Tuple[ScalarField, ScalarField]:
    """u = d(psi)/dy + mean_u, v = -d(psi)/dx (physical).

    The x-derivative is spectral and the y-derivative a fixed matrix, so the
    discrete divergence u_x + v_y vanishes to round-off.
    """
    psi = to_spectral(s.psi)
    g = s.grid
    u_hat = ddy(g, psi.data)
    u_hat[:, 0] = s.mean_u
    v_hat = -ddx(psi).data
    v_hat[:, 0] = 0.0
    u = to_physical(ScalarField(g, Rep.SPECTRAL, u_hat))
    v = to_physical(ScalarField(g, Rep.SPECTRAL, v_hat))
    return u, v


def divergence(u: ScalarField, v: ScalarField) -> ScalarField:
    """Discrete u_x + v_y (physical)."""
    return to_physical(ddx(u)) + to_physical(dy(to_physical(v)))
