from dataclasses import replace

import numpy as np
import pytest

from utils.field import (
    FlowState,
    Regime,
    Rep,
    ScalarField,
    dealias,
    ddx,
    divergence,
    l2_sq,
    norm_linf,
    norm_lp,
    product,
    spectral_l2_squared,
    to_physical,
    to_spectral,
    velocity_from_state,
)
from utils.grid import build_grid


def test_spectral_coefficients_are_fourier_coefficients(uniform_grid):
    f = ScalarField.from_function(uniform_grid, lambda X, Y: np.cos(X) + 3 * np.sin(2 * X) * Y)
    hat = to_spectral(f).data
    np.testing.assert_allclose(hat[:, 1], 0.5, atol=1e-14)
    np.testing.assert_allclose(hat[:, 2], -1.5j * uniform_grid.y_nodes, atol=1e-14)
    np.testing.assert_allclose(hat[:, 0], 0.0, atol=1e-14)


def test_transform_round_trip(stretched_grid):
    rng = np.random.default_rng(1)
    f = ScalarField(stretched_grid, Rep.PHYSICAL, rng.standard_normal((stretched_grid.ny, stretched_grid.nx)))
    back = to_physical(to_spectral(f))
    np.testing.assert_allclose(back.data, f.data, atol=1e-13)
    assert to_spectral(to_spectral(f)).rep == Rep.SPECTRAL


def test_mean_and_nyquist_columns_are_real(stretched_grid):
    rng = np.random.default_rng(2)
    f = ScalarField(stretched_grid, Rep.PHYSICAL, rng.standard_normal((stretched_grid.ny, stretched_grid.nx)))
    hat = to_spectral(f).data
    assert np.all(hat[:, 0].imag == 0.0)
    assert np.all(hat[:, -1].imag == 0.0)
    assert np.any(hat[:, -1].real != 0.0)


def test_dealias_keeps_two_thirds_band(uniform_grid):
    ones = ScalarField(uniform_grid, Rep.SPECTRAL, np.ones((uniform_grid.ny, uniform_grid.nk), dtype=complex))
    kept = dealias(ones).data
    assert np.all(kept[:, : uniform_grid.nx // 3 + 1] == 1)
    assert np.all(kept[:, uniform_grid.nx // 3 + 1 :] == 0)
    with pytest.raises(ValueError):
        dealias(to_physical(ones))


def test_ddx_keeps_representation(uniform_grid):
    f = ScalarField.from_function(uniform_grid, lambda X, Y: np.sin(2 * X) * Y)
    fx = ddx(f)
    assert fx.rep == Rep.PHYSICAL
    X, Y = np.meshgrid(uniform_grid.x_nodes, uniform_grid.y_nodes)
    np.testing.assert_allclose(fx.data, 2 * np.cos(2 * X) * Y, atol=1e-12)


def test_product_is_dealiased(uniform_grid):
    c = ScalarField.from_function(uniform_grid, lambda X, Y: np.cos(X))
    p = product(c, c)
    assert p.rep == Rep.SPECTRAL
    np.testing.assert_allclose(p.data[:, 0], 0.5, atol=1e-14)
    np.testing.assert_allclose(p.data[:, 2], 0.25, atol=1e-14)
    assert np.all(p.data[:, ~uniform_grid.kx_mask] == 0)


def test_norms_of_constant_field(stretched_grid):
    c = ScalarField.from_function(stretched_grid, lambda X, Y: 2.0 + 0 * X)
    for p in (1, 2, 4, 6):
        assert norm_lp(c, p) == pytest.approx(2.0 * (2 * np.pi) ** (1.0 / p), rel=1e-13)
    assert norm_linf(c) == 2.0
    assert norm_lp(c, np.inf) == 2.0
    with pytest.raises(ValueError):
        norm_lp(c, 0.5)


def test_parseval_matches_quadrature(stretched_grid):
    f = ScalarField.from_function(stretched_grid, lambda X, Y: np.cos(X) * Y + np.sin(3 * X) * Y**2 + 0.5)
    assert spectral_l2_squared(f) == pytest.approx(l2_sq(f), rel=1e-12)


def test_scalar_field_validation(uniform_grid):
    with pytest.raises(ValueError):
        ScalarField(uniform_grid, Rep.PHYSICAL, np.zeros((3, 3)))
    with pytest.raises(ValueError):
        ScalarField(uniform_grid, Rep.PHYSICAL, np.zeros((uniform_grid.ny, uniform_grid.nx), dtype=complex))


def test_field_arithmetic_converts_representation(uniform_grid):
    a = ScalarField.from_function(uniform_grid, lambda X, Y: np.cos(X))
    b = to_spectral(a)
    np.testing.assert_allclose((a - b).data, 0.0, atol=1e-14)
    np.testing.assert_allclose((2 * a).data, 2 * a.data)


def test_flow_state_regime_validation(uniform_grid):
    with pytest.raises(ValueError):
        FlowState.zero(uniform_grid, 0.1, 1e-3, Regime.LIMIT)
    with pytest.raises(ValueError):
        FlowState.zero(uniform_grid, 0.1, 0.0, Regime.VISCOUS)
    with pytest.raises(ValueError):
        FlowState.zero(uniform_grid, 0.0, 1e-3, Regime.VISCOUS)


def test_velocity_is_discretely_divergence_free(state_factory):
    g = build_grid(16, 33, 0.7)
    s = state_factory(g, mean_u=g.y_nodes**2)
    psi = ScalarField.from_function(g, lambda X, Y: np.sin(X) * Y**2 * (1 - Y) ** 3 + np.cos(3 * X) * np.sin(np.pi * Y))
    s = replace(s, psi=to_spectral(psi))
    u, v = velocity_from_state(s)
    scale = max(norm_linf(u), norm_linf(v))
    assert norm_linf(divergence(u, v)) <= 1e-11 * scale
    # the mean flow enters u only
    np.testing.assert_allclose(to_spectral(u).data[:, 0], g.y_nodes**2, atol=1e-14)
    np.testing.assert_allclose(to_spectral(v).data[:, 0], 0.0, atol=1e-14)


def test_zero_state_has_zero_velocity(uniform_grid):
    s = FlowState.zero(uniform_grid, 0.1, 1e-3, Regime.VISCOUS)
    u, v = velocity_from_state(s)
    assert norm_linf(u) == 0.0 and norm_linf(v) == 0.0
