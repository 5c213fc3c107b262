from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest

from utils.config import GridConfig, SolverConfig
from utils.field import FlowState, Regime, Rep, ScalarField, to_spectral
from utils.grid import build_grid


@pytest.fixture
def uniform_grid():
    return build_grid(16, 33, 0.0)


@pytest.fixture
def stretched_grid():
    return build_grid(16, 33, 0.5)


@pytest.fixture
def small_cfg():
    """A taylor_profile run small enough for unit tests."""
    return SolverConfig(
        nu1=0.1,
        nu2=1e-2,
        grid=GridConfig(16, 33, 0.5),
        t_end=0.02,
        output_every=0.01,
        dt_max=2e-3,
        ic_params={"A": 1.0, "m": 1},
    )


def make_state(grid, omega_fn=None, mean_u=None, regime=Regime.VISCOUS, nu1=0.1, nu2=1e-2, t=0.0) -> FlowState:
    """State with vorticity sampled from ``omega_fn(X, Y)`` and an optional mean flow."""
    nu2 = 0.0 if Regime(regime) == Regime.LIMIT else nu2
    s = FlowState.zero(grid, nu1, nu2, Regime(regime), t=t)
    if omega_fn is not None:
        omega = to_spectral(ScalarField.from_function(grid, omega_fn))
        s = replace(s, omega=omega)
    if mean_u is not None:
        s = replace(s, mean_u=np.asarray(mean_u, dtype=float))
    return s


def mode_field(grid, k: int, column) -> ScalarField:
    """x-spectral field carrying ``column`` in mode k only."""
    data = np.zeros((grid.ny, grid.nk), dtype=complex)
    data[:, k] = column
    return ScalarField(grid, Rep.SPECTRAL, data)


@pytest.fixture
def state_factory():
    return make_state


@pytest.fixture
def mode_factory():
    return mode_field
