import numpy as np
import pytest

from utils.errors import ConfigError
from utils.grid import build_grid
from utils.initial import IC_REGISTRY, build_profile, wall_profile


@pytest.mark.parametrize("n", [2, 3, 4])
def test_wall_profile_derivatives(n):
    y = np.linspace(0.05, 0.95, 7)
    h = 1e-5
    f, f1, f2 = wall_profile(y, n)
    fp, _, _ = wall_profile(y + h, n)
    fm, _, _ = wall_profile(y - h, n)
    np.testing.assert_allclose(f1, (fp - fm) / (2 * h), rtol=1e-6, atol=1e-9)
    np.testing.assert_allclose(f2, (fp - 2 * f + fm) / h**2, rtol=1e-4, atol=1e-5)


def test_taylor_profile_satisfies_wall_structure():
    g = build_grid(16, 33, 0.5)
    p = build_profile("taylor_profile", g, {"A": 2.0, "m": 2, "B": 0.5})
    assert np.max(np.abs(p.psi[[0, -1]])) < 1e-15
    assert np.max(np.abs(p.psi_y[0] + p.mean_u[0])) < 1e-15
    assert np.max(np.abs(p.psi_yy[-1] + p.mean_u_y[-1])) < 1e-14
    np.testing.assert_allclose(p.psi_xx, -4 * p.psi, atol=1e-14)


def test_random_taylor_is_seeded():
    g = build_grid(16, 33, 0.0)
    a = build_profile("random_taylor", g, {"modes": 3}, seed=7)
    b = build_profile("random_taylor", g, {"modes": 3}, seed=7)
    c = build_profile("random_taylor", g, {"modes": 3}, seed=8)
    np.testing.assert_array_equal(a.psi, b.psi)
    assert not np.array_equal(a.psi, c.psi)


def test_scaled_profile():
    g = build_grid(16, 33, 0.0)
    p = build_profile("mean_sine", g, {"B": 1.0})
    np.testing.assert_allclose(p.scaled(3.0).mean_u, 3 * p.mean_u)


def test_unknown_name_and_bad_parameters():
    g = build_grid(16, 33, 0.0)
    with pytest.raises(ConfigError, match="unknown initial condition"):
        build_profile("vortex_sheet", g, {})
    with pytest.raises(ConfigError):
        build_profile("taylor_profile", g, {"A": 1.0, "amplitude": 2.0})


def test_registry_names():
    assert set(IC_REGISTRY) == {"taylor_profile", "random_taylor", "mean_sine", "zero"}
