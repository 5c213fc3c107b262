import numpy as np
import pytest

from utils.errors import GridError
from utils.grid import build_grid, d2y, ddy, fd_weights, integrate_y


def test_uniform_grid_spacing_and_wavenumbers():
    g = build_grid(8, 16, 0.0)
    np.testing.assert_allclose(np.diff(g.y_nodes), 1.0 / 15, rtol=1e-12)
    assert g.wavenumbers.tolist() == list(range(-3, 5))
    assert g.y_nodes[0] == 0.0 and g.y_nodes[-1] == 1.0


def test_stretch_clusters_nodes_at_bottom_wall():
    g = build_grid(8, 16, 0.9)
    assert g.y_nodes[1] < 1.0 / 15
    assert np.all(np.diff(g.y_nodes) > 0)


@pytest.mark.parametrize("nx, ny, stretch", [(7, 16, 0.0), (6, 16, 0.0), (8, 15, 0.0), (8, 16, 1.0), (8, 16, -0.1)])
def test_invalid_parameters_rejected(nx, ny, stretch):
    with pytest.raises(GridError):
        build_grid(nx, ny, stretch)


@pytest.mark.parametrize("stretch", [0.0, 0.5, 0.9])
def test_quadrature_weights(stretch):
    g = build_grid(16, 40, stretch)
    assert abs(g.y_weights.sum() - 1.0) < 1e-14
    assert np.all(g.y_weights >= 0)
    assert integrate_y(g, 3 * g.y_nodes + 1) == pytest.approx(2.5, abs=1e-14)


def test_dealias_mask_two_thirds_rule():
    g = build_grid(12, 16, 0.0)
    kept = g.wavenumbers[g.dealias_mask]
    assert sorted(kept.tolist()) == list(range(-4, 5))
    assert g.kx[g.kx_mask].tolist() == [0, 1, 2, 3, 4]
    assert g.retained_modes.tolist() == [1, 2, 3, 4]


def test_fd_weights_centered_second_derivative():
    w = fd_weights(0.0, np.array([-1.0, 0.0, 1.0]), 2)
    np.testing.assert_allclose(w[:, 2], [1.0, -2.0, 1.0])
    np.testing.assert_allclose(w[:, 1], [-0.5, 0.0, 0.5])


def test_ddy_exact_on_linear_functions(stretched_grid):
    y = stretched_grid.y_nodes
    np.testing.assert_allclose(ddy(stretched_grid, y), 1.0, atol=1e-12)
    np.testing.assert_allclose(ddy(stretched_grid, np.full_like(y, 3.0)), 0.0, atol=1e-9)


def test_ddy_and_d2y_exact_on_quadratics_with_uniform_spacing(uniform_grid):
    y = uniform_grid.y_nodes
    np.testing.assert_allclose(ddy(uniform_grid, y**2), 2 * y, atol=1e-11)
    np.testing.assert_allclose(d2y(uniform_grid, y**2), 2.0, atol=1e-9)
    np.testing.assert_allclose(d2y(uniform_grid, np.ones_like(y)), 0.0, atol=1e-9)


def test_derivatives_accept_complex_blocks(stretched_grid):
    y = stretched_grid.y_nodes
    block = np.stack([y, 1j * y], axis=1)
    out = ddy(stretched_grid, block)
    np.testing.assert_allclose(out[:, 0], 1.0, atol=1e-12)
    np.testing.assert_allclose(out[:, 1], 1j, atol=1e-12)


def test_length_mismatch_raises(uniform_grid):
    with pytest.raises(ValueError):
        ddy(uniform_grid, np.zeros(uniform_grid.ny + 1))
    with pytest.raises(ValueError):
        d2y(uniform_grid, np.zeros(3))


def _max_error(ny, op, f, exact):
    g = build_grid(8, ny, 0.5)
    y = g.y_nodes
    return np.max(np.abs(op(g, f(y)) - exact(y)))


@pytest.mark.parametrize(
    "op, f, exact",
    [
        (ddy, lambda y: np.sin(np.pi * y), lambda y: np.pi * np.cos(np.pi * y)),
        (d2y, lambda y: np.sin(np.pi * y), lambda y: -np.pi**2 * np.sin(np.pi * y)),
        (d2y, lambda y: np.cosh(1 - y), lambda y: np.cosh(1 - y)),
    ],
)
def test_second_order_convergence(op, f, exact):
    e1 = _max_error(65, op, f, exact)
    e2 = _max_error(129, op, f, exact)
    order = np.log2(e1 / e2)
    assert abs(order - 2.0) < 0.2


def test_refine_doubles_intervals():
    g = build_grid(16, 33, 0.5).refine(2)
    assert (g.nx, g.ny, g.stretch) == (32, 65, 0.5)
