"""Time integration of the horizontally viscous limit system (nu2 = 0).

Same advection and Adams-Bashforth machinery as the viscous stepper. With no
y-diffusion every mode row, wall rows included, is a scalar Crank-Nicolson
update in x, and psi only needs psi = 0 at both walls.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from utils.elliptic import streamfunction_from_vorticity
from utils.field import FlowState, Regime, Rep, ScalarField, to_spectral
from utils.grid import ddy
from utils.solver_viscous import check_finite, explicit_terms


def step_limit(s: FlowState, dt: float, nonlinear: bool = True) -> FlowState:
    """One IMEX step of the limit system; the mean flow is advanced by AB alone."""
    if s.regime != Regime.LIMIT:
        raise ValueError("step_limit integrates the limit regime (nu2 = 0)")
    g = s.grid
    terms, n_star, f_star = explicit_terms(s, dt, nonlinear)

    omega = to_spectral(s.omega).data
    new_omega = np.zeros_like(omega)
    ks = g.retained_modes
    a = 0.5 * dt * s.nu1 * ks.astype(float) ** 2
    new_omega[:, ks] = ((1.0 - a) * omega[:, ks] + dt * n_star[:, ks]) / (1.0 + a)

    mean_u = s.mean_u + dt * f_star
    new_omega[:, 0] = -ddy(g, mean_u)
    omega_field = ScalarField(g, Rep.SPECTRAL, new_omega)

    out = replace(
        s,
        psi=streamfunction_from_vorticity(omega_field, g),
        omega=omega_field,
        mean_u=mean_u,
        t=s.t + dt,
        prev_nonlinear=terms.vorticity.data,
        prev_mean_forcing=terms.mean,
        prev_dt=dt,
    )
    return check_finite(out, s.t)
