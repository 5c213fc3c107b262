import json
from pathlib import Path

import numpy as np
import pytest

from utils.config import (
    GridConfig,
    SolverConfig,
    StudyConfig,
    load_solver_config,
    load_study_config,
    output_lattice,
)
from utils.errors import ConfigError, GridError

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


def test_output_lattice_appends_a_short_last_interval():
    np.testing.assert_allclose(output_lattice(1.0, 0.3), [0.0, 0.3, 0.6, 0.9, 1.0])
    np.testing.assert_allclose(output_lattice(1.0, 0.25), [0.0, 0.25, 0.5, 0.75, 1.0])
    np.testing.assert_allclose(output_lattice(0.0, 0.1), [0.0])


@pytest.mark.parametrize(
    "kw",
    [
        {"nu1": 0.0},
        {"nu2": 0.0},
        {"nu2": 0.2},
        {"regime": "limit", "nu2": 1e-3},
        {"regime": "inviscid"},
        {"cfl": 1.5},
        {"t_end": -1.0},
        {"output_every": 0.0},
        {"dt_max": 0.0},
    ],
)
def test_solver_config_validation(kw):
    with pytest.raises(ConfigError):
        SolverConfig(**kw)


def test_limit_override_zeroes_nu2():
    cfg = SolverConfig.from_dict({"nu1": 0.1, "nu2": 1e-3}, regime="limit")
    assert cfg.regime == "limit" and cfg.nu2 == 0.0


def test_unknown_keys_are_rejected():
    with pytest.raises(ConfigError, match="nu3"):
        SolverConfig.from_dict({"nu3": 1.0})
    with pytest.raises(ConfigError, match="grid"):
        SolverConfig.from_dict({"grid": {"nx": 16, "nz": 3}})


def test_bad_grid_is_a_grid_error():
    with pytest.raises(GridError):
        GridConfig(15, 33, 0.5).build()


@pytest.mark.parametrize(
    "kw",
    [
        {"nu2_list": ()},
        {"nu2_list": (1e-3, 1e-2)},
        {"nu2_list": (0.5, 1e-2)},
        {"r_list": (3,)},
        {"threads": 0},
        {"limit_ic_scale": 0.0},
        {"cfl": 0.0},
    ],
)
def test_study_config_validation(kw):
    with pytest.raises(ConfigError):
        StudyConfig(**kw)


def test_study_member_configs():
    study = StudyConfig(limit_ic_scale=2.0)
    limit = study.solver_config(1e-3, "limit")
    visc = study.solver_config(1e-3, "viscous")
    assert limit.nu2 == 0.0 and limit.ic_scale == 2.0
    assert visc.nu2 == 1e-3 and visc.ic_scale == 1.0
    assert visc.grid == GridConfig(128, 384, 0.9)
    assert study.with_resolution(256, 767).grid == GridConfig(256, 767, 0.9)
    assert study.refined().grid == GridConfig(256, 767, 0.9)


def test_study_config_dict_round_trip():
    study = StudyConfig(nu2_list=[1e-2, 1e-3], r_list=[2, 4])
    again = StudyConfig.from_dict(json.loads(json.dumps(study.to_dict())))
    assert again == study


@pytest.mark.parametrize("name", ["run_default.json", "limit_default.json"])
def test_shipped_run_configs_load(name):
    cfg = load_solver_config(CONFIG_DIR / name)
    assert cfg.grid == GridConfig()


@pytest.mark.parametrize("name", ["study_default.json", "study_smoke.json"])
def test_shipped_study_configs_load(name):
    assert load_study_config(CONFIG_DIR / name).nu2_list[0] == 1e-2


def test_missing_and_invalid_files(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_solver_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{", encoding="utf-8")
    with pytest.raises(ConfigError, match="invalid JSON"):
        load_solver_config(bad)
    arr = tmp_path / "list.json"
    arr.write_text("[]", encoding="utf-8")
    with pytest.raises(ConfigError, match="top level"):
        load_study_config(arr)
