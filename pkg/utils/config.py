"""Run and study configuration.

Configs are frozen dataclasses validated on construction; on disk they are a
single JSON document (see ``configs/`` for every default spelled out).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

import numpy as np

from utils.errors import ConfigError
from utils.grid import Grid, build_grid


def _reject_unknown(cls, data: Mapping[str, Any], where: str) -> None:
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")


@dataclass(frozen=True)
class GridConfig:
    nx: int = 64
    ny: int = 129
    stretch: float = 0.85

    def build(self) -> Grid:
        return build_grid(self.nx, self.ny, self.stretch)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "GridConfig":
        _reject_unknown(cls, data, "grid")
        return cls(**data)


def output_lattice(t_end: float, output_every: float) -> np.ndarray:
    """{0, h, 2h, ..., t_end}; the last interval may be shorter."""
    n = int(np.floor(t_end / output_every + 1e-9))
    times = [i * output_every for i in range(n + 1)]
    if t_end - times[-1] > 1e-12 * max(1.0, t_end):
        times.append(t_end)
    return np.asarray(times, dtype=float)


@dataclass(frozen=True)
class SolverConfig:
    """One run of either system.

    ``regime="viscous"`` integrates the anisotropic system with 0 < nu2 < nu1;
    ``regime="limit"`` integrates the horizontally viscous system (nu2 = 0).
    ``ic_scale`` multiplies the named initial data.
    """

    nu1: float = 0.1
    nu2: float = 1e-3
    regime: str = "viscous"
    cfl: float = 0.4
    t_end: float = 1.0
    output_every: float = 0.01
    dt_max: Optional[float] = None
    grid: GridConfig = field(default_factory=GridConfig)
    ic_name: str = "taylor_profile"
    ic_params: Dict[str, Any] = field(default_factory=dict)
    ic_scale: float = 1.0
    nonlinear: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        if self.regime not in ("viscous", "limit"):
            raise ConfigError(f"regime must be 'viscous' or 'limit', got {self.regime!r}")
        if not self.nu1 > 0:
            raise ConfigError(f"nu1 must be positive, got {self.nu1}")
        if self.regime == "viscous" and not (0 < self.nu2 < self.nu1):
            raise ConfigError(f"viscous runs need 0 < nu2 < nu1, got nu2={self.nu2}, nu1={self.nu1}")
        if self.regime == "limit" and self.nu2 != 0:
            raise ConfigError(f"limit runs need nu2 = 0, got {self.nu2}")
        if not (0 < self.cfl <= 1):
            raise ConfigError(f"cfl must lie in (0, 1], got {self.cfl}")
        if self.t_end < 0:
            raise ConfigError(f"t_end must be >= 0, got {self.t_end}")
        if not self.output_every > 0:
            raise ConfigError(f"output_every must be positive, got {self.output_every}")
        if self.dt_max is not None and not self.dt_max > 0:
            raise ConfigError(f"dt_max must be positive, got {self.dt_max}")

    @property
    def output_times(self) -> np.ndarray:
        return output_lattice(self.t_end, self.output_every)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], regime: Optional[str] = None) -> "SolverConfig":
        data = dict(data)
        _reject_unknown(cls, data, "run config")
        if "grid" in data:
            data["grid"] = GridConfig.from_dict(data["grid"])
        if regime is not None:
            data["regime"] = regime
            if regime == "limit":
                data["nu2"] = 0.0
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


@dataclass(frozen=True)
class StudyConfig:
    """Vanishing-viscosity study: one limit run plus one viscous run per nu2."""

    nu1: float = 0.1
    nu2_list: Tuple[float, ...] = (1e-2, 1e-3, 1e-4, 1e-5)
    r_list: Tuple[int, ...] = (2, 4, 6)
    t_end: float = 1.0
    cfl: float = 0.4
    output_every: float = 0.01
    dt_max: Optional[float] = None
    grid: GridConfig = field(default_factory=lambda: GridConfig(128, 384, 0.9))
    ic_name: str = "taylor_profile"
    ic_params: Dict[str, Any] = field(default_factory=lambda: {"A": 1.0, "m": 1})
    limit_ic_scale: float = 1.0
    threads: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "nu2_list", tuple(float(v) for v in self.nu2_list))
        object.__setattr__(self, "r_list", tuple(int(r) for r in self.r_list))
        if not self.nu2_list:
            raise ConfigError("nu2_list must not be empty")
        if any(v <= 0 for v in self.nu2_list):
            raise ConfigError("nu2_list entries must be positive")
        if any(b >= a for a, b in zip(self.nu2_list, self.nu2_list[1:])):
            raise ConfigError("nu2_list must be strictly decreasing")
        if not max(self.nu2_list) < self.nu1:
            raise ConfigError("max(nu2_list) must be below nu1")
        if not self.r_list or any(r not in (2, 4, 6, 8) for r in self.r_list):
            raise ConfigError(f"r_list must be a subset of {{2, 4, 6, 8}}, got {self.r_list}")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if not self.limit_ic_scale > 0:
            raise ConfigError("limit_ic_scale must be positive")
        # validates cfl / t_end / output_every / dt_max once
        self.solver_config(self.nu2_list[0], "viscous")

    @property
    def snapshot_times(self) -> np.ndarray:
        return output_lattice(self.t_end, self.output_every)

    def solver_config(self, nu2: float, regime: str) -> SolverConfig:
        return SolverConfig(
            nu1=self.nu1,
            nu2=0.0 if regime == "limit" else nu2,
            regime=regime,
            cfl=self.cfl,
            t_end=self.t_end,
            output_every=self.output_every,
            dt_max=self.dt_max,
            grid=self.grid,
            ic_name=self.ic_name,
            ic_params=dict(self.ic_params),
            ic_scale=self.limit_ic_scale if regime == "limit" else 1.0,
            seed=self.seed,
        )

    def with_resolution(self, nx: int, ny: int) -> "StudyConfig":
        return replace(self, grid=GridConfig(nx, ny, self.grid.stretch))

    def refined(self) -> "StudyConfig":
        """Same study with nx and (ny - 1) doubled."""
        g = self.grid
        return self.with_resolution(2 * g.nx, 2 * (g.ny - 1) + 1)

    def to_dict(self) -> Dict[str, Any]:
        d = asdict(self)
        d["nu2_list"] = list(self.nu2_list)
        d["r_list"] = list(self.r_list)
        return d

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "StudyConfig":
        data = dict(data)
        _reject_unknown(cls, data, "study config")
        if "grid" in data:
            data["grid"] = GridConfig.from_dict(data["grid"])
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


# ----------------------------
# Loading
# ----------------------------

def read_config_file(path: str | Path) -> Dict[str, Any]:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return data


def load_solver_config(path: str | Path, regime: Optional[str] = None) -> SolverConfig:
    return SolverConfig.from_dict(read_config_file(path), regime=regime)


def load_study_config(path: str | Path) -> StudyConfig:
    return StudyConfig.from_dict(read_config_file(path))
