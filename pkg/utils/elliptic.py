"""Per-Fourier-mode elliptic solves in y.

Every problem here is f_yy - k^2 f = rhs on the stretched y grid with a
Dirichlet or Neumann condition at each wall. Interior rows use the 3-point
second-derivative stencil; a one-sided Neumann row is reduced to two entries
by eliminating its third entry with the neighbouring interior row, so every
system is tridiagonal and goes through ``scipy.linalg.solve_banded``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple, Union

import numpy as np
from scipy.linalg import solve_banded

from utils.field import BCTag, FlowState, Regime, Rep, ScalarField, ddx, dy, product, to_spectral, velocity_from_state
from utils.grid import Grid, d2y, ddy, integrate_y

logger = logging.getLogger(__name__)

COMPATIBILITY_TOL = 1e-8


# ----------------------------
# Boundary data
# ----------------------------

@dataclass(frozen=True)
class WallBC:
    kind: str  # "dirichlet" | "neumann"
    value: Union[float, complex] = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("dirichlet", "neumann"):
            raise ValueError(f"unknown wall condition {self.kind!r}")


@dataclass(frozen=True)
class ModeBC:
    """Boundary data of one mode problem: ``end0`` at y=0, ``end1`` at y=1."""

    end0: WallBC
    end1: WallBC

    @classmethod
    def dirichlet(cls, v0=0.0, v1=0.0) -> "ModeBC":
        return cls(WallBC("dirichlet", v0), WallBC("dirichlet", v1))

    @classmethod
    def neumann(cls, g0=0.0, g1=0.0) -> "ModeBC":
        return cls(WallBC("neumann", g0), WallBC("neumann", g1))

    @classmethod
    def mixed(cls, v0=0.0, g1=0.0) -> "ModeBC":
        """Dirichlet at y=0, Neumann at y=1 (the mean-flow wall conditions)."""
        return cls(WallBC("dirichlet", v0), WallBC("neumann", g1))

    @property
    def is_neumann_neumann(self) -> bool:
        return self.end0.kind == "neumann" and self.end1.kind == "neumann"

    def kinds(self) -> Tuple[str, str]:
        return self.end0.kind, self.end1.kind


@dataclass(frozen=True)
class ModeSolution:
    values: np.ndarray
    compatibility_residual: float = 0.0


@dataclass(frozen=True, eq=False)
class PressurePair:
    p: ScalarField
    q: ScalarField


# ----------------------------
# Banded operators
# ----------------------------

WALL_KINDS = ("dirichlet", "neumann", "flux")


@dataclass(frozen=True, eq=False)
class ModeOperator:
    """Tridiagonal system for ``d2coef * D2 + shift`` with wall rows.

    ``elim0``/``elim1`` record the interior-row multiples subtracted from a
    Neumann row; the same combination must be applied to the right-hand side.
    A ``"flux"`` wall row is the zero-flux half cell and keeps its rhs entry.
    """

    ab: np.ndarray
    kinds: Tuple[str, str]
    elim0: float
    elim1: float

    def solve(self, rhs: np.ndarray, v0=0.0, v1=0.0) -> np.ndarray:
        """Solve with interior rows from ``rhs`` and wall values ``v0``/``v1``.

        ``rhs`` is (ny,) or (ny, m); wall entries of ``rhs`` are ignored
        except on a flux row. Dirichlet wall values are returned exactly.
        """
        b = np.array(rhs, dtype=complex, copy=True)
        if self.kinds[0] != "flux":
            b[0] = v0 - self.elim0 * b[1]
        if self.kinds[1] != "flux":
            b[-1] = v1 - self.elim1 * b[-2]
        x = solve_banded((1, 1), self.ab, b, check_finite=False)
        if self.kinds[0] == "dirichlet":
            x[0] = v0
        if self.kinds[1] == "dirichlet":
            x[-1] = v1
        return x

    def dense(self) -> np.ndarray:
        A = np.diag(self.ab[1])
        A += np.diag(self.ab[0, 1:], 1)
        A += np.diag(self.ab[2, :-1], -1)
        return A


@lru_cache(maxsize=64)
def _d2_bands(grid: Grid) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sub-, main and super-diagonal of D2 (read-only)."""
    bands = tuple(np.array(grid.D2.diagonal(o)) for o in (-1, 0, 1))
    for b in bands:
        b.setflags(write=False)
    return bands


def mode_operator(grid: Grid, shift: float, d2coef: float, kinds: Tuple[str, str]) -> ModeOperator:
    """Banded operator for one mode problem.

    Only the D2 diagonals are cached; time-step dependent operators are
    rebuilt per call. Constant-coefficient ones go through ``poisson_operator``.
    """
    if kinds[0] not in WALL_KINDS or kinds[1] not in WALL_KINDS or kinds[0] == "flux":
        raise ValueError(f"unsupported wall rows {kinds!r}")
    sub, diag, sup = _d2_bands(grid)
    D1 = grid.D1
    lower = d2coef * sub
    main = d2coef * diag + shift
    upper = d2coef * sup
    elim0 = elim1 = 0.0
    n = grid.ny

    if kinds[0] == "dirichlet":
        main[0], upper[0] = 1.0, 0.0
    else:
        e0, e1, e2 = D1[0, 0], D1[0, 1], D1[0, 2]
        elim0 = e2 / upper[1]
        main[0] = e0 - elim0 * lower[0]
        upper[0] = e1 - elim0 * main[1]

    if kinds[1] == "dirichlet":
        main[-1], lower[-1] = 1.0, 0.0
    elif kinds[1] == "flux":
        # ghost reflection u_{N+1} = u_{N-1}
        w = 2.0 / grid.dy[-1] ** 2
        lower[-1] = d2coef * w
        main[-1] = shift - d2coef * w
    else:
        f0, f1, f2 = D1[n - 1, n - 3], D1[n - 1, n - 2], D1[n - 1, n - 1]
        elim1 = f0 / lower[n - 3]
        lower[-1] = f1 - elim1 * main[n - 2]
        main[-1] = f2 - elim1 * upper[n - 2]

    ab = np.zeros((3, n))
    ab[0, 1:] = upper
    ab[1, :] = main
    ab[2, :-1] = lower
    return ModeOperator(ab, tuple(kinds), float(elim0), float(elim1))


@lru_cache(maxsize=512)
def poisson_operator(grid: Grid, k: int, kinds: Tuple[str, str]) -> ModeOperator:
    """Cached operator of f_yy - k^2 f."""
    return mode_operator(grid, -float(k) ** 2, 1.0, kinds)


def flux_d2(grid: Grid, f: np.ndarray) -> np.ndarray:
    """D2 applied along y with the zero-flux half-cell row at y = 1."""
    out = d2y(grid, f)
    out[-1] = 2.0 * (f[-2] - f[-1]) / grid.dy[-1] ** 2
    return out


# ----------------------------
# Single-mode solve
# ----------------------------

def _solve_neumann_zero_mode(rhs: np.ndarray, bc: ModeBC, grid: Grid) -> ModeSolution:
    """k = 0 Neumann-Neumann Poisson problem, pinned to zero y-mean.

    The constant incompatibility of the rhs is projected out first; the
    bordered system then absorbs the discrete remainder in a multiplier.
    """
    g0, g1 = bc.end0.value, bc.end1.value
    residual = complex(integrate_y(grid, rhs) - (g1 - g0))
    scale = max(1.0, float(np.max(np.abs(rhs))) if rhs.size else 0.0, abs(g0), abs(g1))
    if abs(residual) > COMPATIBILITY_TOL * scale:
        logger.warning("k=0 Neumann compatibility residual %.3e projected out", abs(residual))
    rhs = np.asarray(rhs, dtype=complex) - residual

    op = poisson_operator(grid, 0, ("neumann", "neumann"))
    n = grid.ny
    A = np.zeros((n + 1, n + 1))
    A[:n, :n] = op.dense()
    A[1:n - 1, n] = 1.0
    A[n, :n] = grid.y_weights
    b = np.zeros(n + 1, dtype=complex)
    b[:n] = rhs
    b[0] = g0 - op.elim0 * rhs[1]
    b[n - 1] = g1 - op.elim1 * rhs[n - 2]
    sol = np.linalg.solve(A, b)
    return ModeSolution(sol[:n], float(abs(residual)))


def solve_mode(k: int, rhs: np.ndarray, bc: ModeBC, grid: Grid) -> ModeSolution:
    """Solve f_yy - k^2 f = rhs with the wall data in ``bc``.

    For k = 0 with Neumann data at both walls the solution has zero y-mean and
    the continuous compatibility residual (int rhs dy - flux difference) is
    returned alongside; it is reported, not fatal.
    """
    rhs = np.asarray(rhs)
    if rhs.shape[0] != grid.ny:
        raise ValueError(f"rhs must have {grid.ny} entries, got {rhs.shape[0]}")
    if k == 0 and bc.is_neumann_neumann:
        return _solve_neumann_zero_mode(rhs, bc, grid)
    op = poisson_operator(grid, int(k), bc.kinds())
    return ModeSolution(op.solve(rhs, bc.end0.value, bc.end1.value))


# ----------------------------
# Streamfunction
# ----------------------------

def streamfunction_from_vorticity(omega: ScalarField, grid: Grid) -> ScalarField:
    """Invert omega = -Lap(psi) mode by mode with psi = 0 at both walls.

    Both regimes impose psi(0) = psi(1) = 0 here; the viscous no-slip
    condition psi_y(0) = 0 is enforced by the wall-vorticity closure of the
    time stepper. The k = 0 row of psi is zero (the mean flow is separate).
    """
    hat = to_spectral(omega).data
    psi = np.zeros_like(hat, dtype=complex)
    for k in grid.retained_modes:
        op = poisson_operator(grid, int(k), ("dirichlet", "dirichlet"))
        psi[:, k] = op.solve(-hat[:, k])
    return ScalarField(grid, Rep.SPECTRAL, psi, BCTag.BOTH_WALLS_ZERO)


# ----------------------------
# Flow pressure p
# ----------------------------

def solve_pressure_poisson(rhs: ScalarField) -> Tuple[ScalarField, float]:
    """Lap(p) = rhs with p_y = 0 at both walls and zero mean.

    Returns the x-spectral pressure and the k = 0 compatibility residual.
    """
    grid = rhs.grid
    hat = to_spectral(rhs).data
    out = np.zeros_like(hat, dtype=complex)
    sol0 = solve_mode(0, hat[:, 0], ModeBC.neumann(), grid)
    out[:, 0] = sol0.values.real
    for k in grid.retained_modes:
        out[:, k] = solve_mode(int(k), hat[:, k], ModeBC.neumann(), grid).values
    return ScalarField(grid, Rep.SPECTRAL, out), sol0.compatibility_residual


def flow_pressure_rhs(u: ScalarField, v: ScalarField) -> ScalarField:
    """-2 (u u_x)_x - 2 (u v_x)_y with dealiased products (x-spectral)."""
    uux = product(u, ddx(u))
    uvx = product(u, ddx(v))
    return ddx(uux) * -2.0 + dy(uvx) * -2.0


def solve_flow_pressure(u: ScalarField, v: ScalarField, grid: Grid) -> ScalarField:
    """Flow pressure p of the Neumann Poisson problem driven by the nonlinearity."""
    p, residual = solve_pressure_poisson(flow_pressure_rhs(u, v))
    if residual > COMPATIBILITY_TOL:
        logger.debug("flow pressure k=0 compatibility residual %.3e", residual)
    return p


# ----------------------------
# Boundary-layer pressure q
# ----------------------------

def _cosh_ratio(k: np.ndarray, y: np.ndarray) -> np.ndarray:
    """cosh(k(1-y))/sinh(k) from exponentials with non-positive arguments; (ny, nk)."""
    k = k[None, :].astype(float)
    y = y[:, None]
    return (np.exp(-k * y) + np.exp(k * (y - 2.0))) / (1.0 - np.exp(-2.0 * k))


def _sinh_ratio(k: np.ndarray, y: np.ndarray) -> np.ndarray:
    """sinh(k(1-y))/sinh(k), same stable form."""
    k = k[None, :].astype(float)
    y = y[:, None]
    return (np.exp(-k * y) - np.exp(k * (y - 2.0))) / (1.0 - np.exp(-2.0 * k))


def _wall_data(uy_wall_hat: np.ndarray, grid: Grid) -> Tuple[np.ndarray, np.ndarray]:
    uy = np.asarray(uy_wall_hat, dtype=complex)
    if uy.shape != (grid.nk,):
        raise ValueError(f"uy_wall_hat must have {grid.nk} entries")
    active = (grid.kx > 0) & (grid.kx < grid.nx // 2)
    return uy, active


def boundary_layer_pressure_exact(uy_wall_hat: np.ndarray, nu2: float, grid: Grid) -> ScalarField:
    """Closed-form q^k(y) = i nu2 u^k_y(0) cosh(k(1-y))/sinh(k), k >= 1; k = 0 row is zero."""
    uy, active = _wall_data(uy_wall_hat, grid)
    k = np.where(active, grid.kx, 1)
    hat = 1j * nu2 * uy[None, :] * _cosh_ratio(k, grid.y_nodes)
    hat[:, ~active] = 0.0
    return ScalarField(grid, Rep.SPECTRAL, hat)


def boundary_layer_pressure_gradient(uy_wall_hat: np.ndarray, nu2: float, grid: Grid) -> Tuple[ScalarField, ScalarField]:
    """(q_x, q_y) of the closed form, differentiated analytically (x-spectral)."""
    q = boundary_layer_pressure_exact(uy_wall_hat, nu2, grid)
    uy, active = _wall_data(uy_wall_hat, grid)
    k = np.where(active, grid.kx, 1)
    qy = -1j * nu2 * uy[None, :] * k[None, :] * _sinh_ratio(k, grid.y_nodes)
    qy[:, ~active] = 0.0
    return ddx(q), ScalarField(grid, Rep.SPECTRAL, qy)


def boundary_layer_pressure_bvp(uy_wall_hat: np.ndarray, nu2: float, grid: Grid) -> ScalarField:
    """q from the Neumann BVP: q_y(0) = -i nu2 k u^k_y(0), q_y(1) = 0, per mode."""
    uy, active = _wall_data(uy_wall_hat, grid)
    hat = np.zeros((grid.ny, grid.nk), dtype=complex)
    zero = np.zeros(grid.ny)
    for k in grid.kx[active]:
        bc = ModeBC.neumann(-1j * nu2 * k * uy[k], 0.0)
        hat[:, k] = solve_mode(int(k), zero, bc, grid).values
    return ScalarField(grid, Rep.SPECTRAL, hat)


def wall_shear_hat(s: FlowState, source: str = "stencil") -> np.ndarray:
    """u^k_y(0) per half-spectrum mode.

    ``source="stencil"`` differentiates u = psi_y with the one-sided wall
    stencil; ``source="vorticity"`` uses u_y(0) = -omega(0), valid since
    v_x(x, 0) = 0.
    """
    g = s.grid
    if source == "stencil":
        psi = to_spectral(s.psi).data
        u_hat = ddy(g, psi)
        u_hat[:, 0] = s.mean_u
        return ddy(g, u_hat)[0].copy()
    if source == "vorticity":
        return -to_spectral(s.omega).data[0].copy()
    raise ValueError(f"unknown wall-shear source {source!r}")


def recover_pressures(s: FlowState) -> PressurePair:
    """Diagnostic (p, q) of a state; q is identically zero in the limit regime."""
    g = s.grid
    u, v = velocity_from_state(s)
    p = solve_flow_pressure(u, v, g)
    if s.regime == Regime.LIMIT:
        q = ScalarField.zeros(g)
    else:
        q = boundary_layer_pressure_exact(wall_shear_hat(s), s.nu2, g)
    return PressurePair(p=p, q=q)
