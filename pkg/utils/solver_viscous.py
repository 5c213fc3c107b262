"""Time integration of the anisotropic system in vorticity-streamfunction form.

Advection is Adams-Bashforth 2 (Euler on the first step), diffusion is
Crank-Nicolson, one tridiagonal solve per retained Fourier mode. The bottom
wall carries no-slip through Thom's wall-vorticity closure, imposed at the
new time level; the top wall is free-slip (omega = 0).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from utils.config import SolverConfig
from utils.elliptic import flux_d2, mode_operator, poisson_operator
from utils.errors import IncompatibleInitialCondition, NumericalFailure
from utils.field import (
    BCTag,
    FlowState,
    Regime,
    Rep,
    ScalarField,
    dealias,
    ddx,
    dy,
    product,
    to_spectral,
    velocity_from_state,
)
from utils.grid import Grid, d2y, ddy
from utils.initial import ICProfile, build_profile

logger = logging.getLogger(__name__)

WALL_TOL = 1e-10
COURANT_SLACK = 1e-9


# ----------------------------
# Initial state
# ----------------------------

def _check_walls(profile: ICProfile, regime: Regime) -> None:
    v_walls = max(np.max(np.abs(profile.psi_x[0])), np.max(np.abs(profile.psi_x[-1])))
    if v_walls > WALL_TOL:
        raise IncompatibleInitialCondition("v(x,0)=v(x,1)=0", v_walls)
    if regime == Regime.LIMIT:
        return
    u0 = np.max(np.abs(profile.psi_y[0] + profile.mean_u[0]))
    if u0 > WALL_TOL:
        raise IncompatibleInitialCondition("u(x,0)=0", u0)
    uy1 = np.max(np.abs(profile.psi_yy[-1] + profile.mean_u_y[-1]))
    if uy1 > WALL_TOL:
        raise IncompatibleInitialCondition("u_y(x,1)=0", uy1)


def _spectral(grid: Grid, data: np.ndarray) -> np.ndarray:
    return to_spectral(ScalarField(grid, Rep.PHYSICAL, data)).data


def state_from_profile(grid: Grid, profile: ICProfile, nu1: float, nu2: float, regime: Regime) -> FlowState:
    """Dealiased state projected onto the discrete system.

    psi is taken from the profile with psi = 0 on both walls, and omega is
    rebuilt from it with the y-stencils (k^2 psi - D2 psi). Viscous states also
    carry Thom's wall vorticity at y = 0 and omega = 0 at y = 1, so the first
    step starts on the discrete solution manifold. The mean row is
    -d(mean_u)/dy.
    """
    regime = Regime(regime)
    psi_hat = dealias(ScalarField(grid, Rep.SPECTRAL, _spectral(grid, profile.psi))).data
    mean_u = profile.mean_u + _spectral(grid, profile.psi_y)[:, 0].real
    psi_hat[:, 0] = 0.0
    psi_hat[0] = 0.0
    psi_hat[-1] = 0.0
    omega_hat = grid.kx.astype(float) ** 2 * psi_hat - d2y(grid, psi_hat)
    if regime == Regime.VISCOUS:
        omega_hat[0] = -2.0 * psi_hat[1] / grid.dy[0] ** 2
        omega_hat[-1] = 0.0
    omega_hat[:, 0] = -ddy(grid, mean_u)
    psi = ScalarField(grid, Rep.SPECTRAL, psi_hat, BCTag.BOTH_WALLS_ZERO)
    omega = dealias(ScalarField(grid, Rep.SPECTRAL, omega_hat))
    return FlowState(psi=psi, omega=omega, mean_u=mean_u, t=0.0, nu1=nu1, nu2=nu2, regime=regime)


def init_state(cfg: SolverConfig) -> FlowState:
    """Build the initial state of ``cfg`` after checking the wall conditions of its regime.

    Raises
    ------
    IncompatibleInitialCondition
        When a wall trace of the (scaled) initial data exceeds 1e-10.
    """
    grid = cfg.grid.build()
    regime = Regime(cfg.regime)
    profile = build_profile(cfg.ic_name, grid, cfg.ic_params, seed=cfg.seed).scaled(cfg.ic_scale)
    _check_walls(profile, regime)
    s = state_from_profile(grid, profile, cfg.nu1, cfg.nu2, regime)
    logger.debug("initial state %s (scale %g) on %dx%d grid", cfg.ic_name, cfg.ic_scale, grid.nx, grid.ny)
    return s


# ----------------------------
# Advection
# ----------------------------

@dataclass(frozen=True, eq=False)
class AdvectionTerms:
    """Explicit forcing of one step.

    ``vorticity`` is -(u omega_x + v omega_y), x-spectral and dealiased, with
    its k = 0 row zeroed; ``mean`` is -d/dy of the x-average of u v, the
    mean-flow forcing. ``umax``/``vmax`` are the velocity maxima it was
    built from.
    """

    vorticity: ScalarField
    mean: np.ndarray
    umax: float
    vmax: float


def advect(s: FlowState) -> AdvectionTerms:
    g = s.grid
    u, v = velocity_from_state(s)
    omega = to_spectral(s.omega)
    flux = product(u, ddx(omega)) + product(v, dy(omega))
    nonlinear = -flux.data
    nonlinear[:, 0] = 0.0
    uv_mean = product(u, v).data[:, 0].real
    return AdvectionTerms(
        vorticity=ScalarField(g, Rep.SPECTRAL, nonlinear),
        mean=-ddy(g, uv_mean),
        umax=float(np.max(np.abs(u.data))),
        vmax=float(np.max(np.abs(v.data))),
    )


# ----------------------------
# Time step selection
# ----------------------------

def _courant(grid: Grid, umax: float, vmax: float, dt: float) -> float:
    return dt * max(umax / grid.dx, vmax / float(np.min(grid.dy)))


def cfl_dt(s: FlowState, cfg: SolverConfig) -> float:
    """Advective step cfl * min(dx/max|u|, min dy/max|v|), capped by dt_max and t_end - t."""
    g = s.grid
    u, v = velocity_from_state(s)
    umax = float(np.max(np.abs(u.data)))
    vmax = float(np.max(np.abs(v.data)))
    limits = [np.inf]
    if umax > 0:
        limits.append(g.dx / umax)
    if vmax > 0:
        limits.append(float(np.min(g.dy)) / vmax)
    dt = cfg.cfl * min(limits)
    if cfg.dt_max is not None:
        dt = min(dt, cfg.dt_max)
    return float(max(min(dt, cfg.t_end - s.t), 0.0))


# ----------------------------
# Shared step pieces
# ----------------------------

def extrapolate(current: np.ndarray, previous: Optional[np.ndarray], dt: float, prev_dt: Optional[float]) -> np.ndarray:
    """Variable-step Adams-Bashforth 2; Euler when there is no history."""
    if previous is None or prev_dt is None:
        return current
    r = dt / prev_dt
    return (1.0 + 0.5 * r) * current - 0.5 * r * previous


def explicit_terms(s: FlowState, dt: float, nonlinear: bool) -> Tuple[AdvectionTerms, np.ndarray, np.ndarray]:
    """Advection at t and its AB extrapolation (vorticity, mean) for a step of ``dt``."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    terms = advect(s)
    courant = _courant(s.grid, terms.umax, terms.vmax, dt)
    if courant > 1.0 + COURANT_SLACK:
        raise NumericalFailure(f"CFL violation: Courant number {courant:.3f} > 1 at dt={dt:.3e}", t_last=s.t)
    if not nonlinear:
        zero = ScalarField.zeros(s.grid)
        terms = AdvectionTerms(zero, np.zeros(s.grid.ny), terms.umax, terms.vmax)
    n_star = extrapolate(terms.vorticity.data, s.prev_nonlinear, dt, s.prev_dt)
    f_star = extrapolate(terms.mean, s.prev_mean_forcing, dt, s.prev_dt)
    return terms, n_star, f_star


def check_finite(s: FlowState, t_last: float) -> FlowState:
    if not (np.all(np.isfinite(s.omega.data)) and np.all(np.isfinite(s.psi.data)) and np.all(np.isfinite(s.mean_u))):
        raise NumericalFailure("non-finite values in state", t_last=t_last)
    return s


# ----------------------------
# Viscous step
# ----------------------------

def _mean_flow_step(grid: Grid, mean_u: np.ndarray, nu2: float, dt: float, forcing: np.ndarray) -> np.ndarray:
    # CN for mean_u_t = F + nu2 mean_u_yy, mean_u(0) = 0, zero flux at y = 1
    c = 0.5 * dt * nu2
    op = mode_operator(grid, 1.0, -c, ("dirichlet", "flux"))
    rhs = mean_u + c * flux_d2(grid, mean_u) + dt * forcing
    return op.solve(rhs, 0.0).real


def _thom_mode(grid: Grid, k: int, rhs: np.ndarray, a: float, c: float) -> Tuple[np.ndarray, np.ndarray]:
    """Vorticity and streamfunction of mode k at the new level with Thom's wall value.

    Two columns are solved: a particular one with omega(0) = 0 and a
    homogeneous one with omega(0) = 1; the wall value w0 = -2 psi(y1)/h1^2 is
    then imposed on the superposition.
    """
    op = mode_operator(grid, 1.0 + a, -c, ("dirichlet", "dirichlet"))
    cols = np.zeros((grid.ny, 2), dtype=complex)
    cols[:, 0] = rhs
    omega_cols = op.solve(cols, np.array([0.0, 1.0]), 0.0)
    poisson = poisson_operator(grid, k, ("dirichlet", "dirichlet"))
    psi_cols = poisson.solve(-omega_cols)
    w = 2.0 / grid.dy[0] ** 2
    w0 = -w * psi_cols[1, 0] / (1.0 + w * psi_cols[1, 1])
    return omega_cols[:, 0] + w0 * omega_cols[:, 1], psi_cols[:, 0] + w0 * psi_cols[:, 1]


def step(s: FlowState, dt: float, nonlinear: bool = True) -> FlowState:
    """One IMEX step of the viscous system.

    ``nonlinear=False`` drops advection (linear decay checks).

    Raises
    ------
    NumericalFailure
        On a Courant number above 1 or a non-finite result.
    """
    if s.regime != Regime.VISCOUS:
        raise ValueError("step integrates the viscous regime; use step_limit for nu2 = 0")
    g = s.grid
    terms, n_star, f_star = explicit_terms(s, dt, nonlinear)

    omega = to_spectral(s.omega).data
    d2_omega = d2y(g, omega)
    c = 0.5 * dt * s.nu2
    new_omega = np.zeros_like(omega)
    new_psi = np.zeros_like(omega)
    for k in g.retained_modes:
        a = 0.5 * dt * s.nu1 * float(k) ** 2
        rhs = (1.0 - a) * omega[:, k] + c * d2_omega[:, k] + dt * n_star[:, k]
        new_omega[:, k], new_psi[:, k] = _thom_mode(g, int(k), rhs, a, c)

    mean_u = _mean_flow_step(g, s.mean_u, s.nu2, dt, f_star)
    new_omega[:, 0] = -ddy(g, mean_u)

    out = replace(
        s,
        psi=ScalarField(g, Rep.SPECTRAL, new_psi, BCTag.BOTH_WALLS_ZERO),
        omega=ScalarField(g, Rep.SPECTRAL, new_omega),
        mean_u=mean_u,
        t=s.t + dt,
        prev_nonlinear=terms.vorticity.data,
        prev_mean_forcing=terms.mean,
        prev_dt=dt,
    )
    return check_finite(out, s.t)
