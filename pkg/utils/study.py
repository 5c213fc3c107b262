"""Vanishing-viscosity study driver.

One limit run and one viscous run per nu2, all from the same initial data and
on the same output-time lattice; the viscous solutions are compared with the
limit solution at every output time.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid

from utils.config import SolverConfig, StudyConfig
from utils.diagnostics import DiagnosticsRecord, energy_terms, record, with_budget
from utils.errors import HarnessError, TimeGridMismatch
from utils.field import FlowState, Regime, norm_lp, velocity_from_state
from utils.solver_limit import step_limit
from utils.solver_viscous import cfl_dt, init_state, step

logger = logging.getLogger(__name__)

STEPPERS = {Regime.VISCOUS: step, Regime.LIMIT: step_limit}
MIN_FIT_POINTS = 3


# ----------------------------
# Single run
# ----------------------------

@dataclass(frozen=True, eq=False)
class SimulationResult:
    config: SolverConfig
    snapshots: List[FlowState]
    series: List[DiagnosticsRecord]
    steps: int = 0

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])


def _advance_to(s: FlowState, target: float, cfg: SolverConfig, stepper) -> Tuple[FlowState, int, float]:
    """Integrate to ``target`` with equal sub-steps no larger than the CFL step.

    Also returns the dissipation 2 nu1 diss_h + 2 nu2 diss_v integrated over
    the interval, trapezoidal per step.
    """
    tol = 1e-12 * max(1.0, abs(target))
    n = 0
    spent = 0.0
    rate = energy_terms(s).dissipation_rate(s.nu1, s.nu2)
    while target - s.t > tol:
        remaining = target - s.t
        dt_cfl = min(cfl_dt(s, cfg), remaining)
        if dt_cfl <= 0:
            break
        dt = remaining / math.ceil(remaining / dt_cfl - 1e-9)
        s = stepper(s, dt, nonlinear=cfg.nonlinear)
        n += 1
        new_rate = energy_terms(s).dissipation_rate(s.nu1, s.nu2)
        spent += 0.5 * dt * (rate + new_rate)
        rate = new_rate
        if abs(target - s.t) <= tol:
            s = replace(s, t=float(target))
    return s, n, spent


def run_simulation(cfg: SolverConfig) -> SimulationResult:
    """Integrate ``cfg`` to t_end, keeping a snapshot and a record at every output time.

    Raises
    ------
    NumericalFailure
        From the stepper, carrying the last valid time.
    """
    s = init_state(cfg)
    stepper = STEPPERS[s.regime]
    times = cfg.output_times
    snapshots = [s]
    series = [replace(record(s), dissipated=0.0)]
    steps = 0
    dissipated = 0.0
    for target in times[1:]:
        s, n, spent = _advance_to(s, float(target), cfg, stepper)
        steps += n
        dissipated += spent
        snapshots.append(replace(s, prev_nonlinear=None, prev_mean_forcing=None, prev_dt=None))
        series.append(replace(record(s), dissipated=dissipated))
        logger.debug("%s t=%.4f steps=%d energy=%.6e", cfg.regime, s.t, steps, series[-1].energy)
    logger.info("%s run (nu2=%g) reached t=%g in %d steps", cfg.regime, cfg.nu2, s.t, steps)
    return SimulationResult(cfg, snapshots, with_budget(series, cfg.nu1, cfg.nu2), steps)


# ----------------------------
# Comparison and fits
# ----------------------------

def difference_series(visc_snaps: Sequence[FlowState], limit_snaps: Sequence[FlowState], r_list: Sequence[float]) -> pd.DataFrame:
    """||u - U||_r + ||v - V||_r at every shared output time (one column per r)."""
    t_v = np.array([s.t for s in visc_snaps])
    t_l = np.array([s.t for s in limit_snaps])
    if t_v.shape != t_l.shape or not np.array_equal(t_v, t_l):
        raise TimeGridMismatch(f"snapshot times differ ({t_v.size} vs {t_l.size} outputs)")
    rows = []
    for a, b in zip(visc_snaps, limit_snaps):
        if (a.grid.nx, a.grid.ny, a.grid.stretch) != (b.grid.nx, b.grid.ny, b.grid.stretch):
            raise ValueError("snapshots live on different grids")
        u, v = velocity_from_state(a)
        U, V = velocity_from_state(b)
        du, dv = u - U, v - V
        rows.append({"t": a.t, **{r: norm_lp(du, r) + norm_lp(dv, r) for r in r_list}})
    return pd.DataFrame(rows, columns=["t", *r_list])


def difference_norms(visc_snaps: Sequence[FlowState], limit_snaps: Sequence[FlowState], r_list: Sequence[float]) -> Dict[float, float]:
    """sup over output times of ||u - U||_r + ||v - V||_r, per r."""
    frame = difference_series(visc_snaps, limit_snaps, r_list)
    return {r: float(frame[r].max()) for r in r_list}


@dataclass(frozen=True)
class RateFit:
    alpha: float
    residual: float  # RMS of the log-space residuals


def fit_rate(points: Sequence[Tuple[float, float]]) -> RateFit:
    """Least-squares slope of log(err) against log(nu2)."""
    if len(points) < MIN_FIT_POINTS:
        raise ValueError(f"fit_rate needs at least {MIN_FIT_POINTS} points, got {len(points)}")
    nu, err = np.asarray(points, dtype=float).T
    if np.any(nu <= 0) or np.any(err <= 0):
        raise ValueError("fit_rate needs positive nu2 and error values")
    x, y = np.log(nu), np.log(err)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return RateFit(float(slope), float(np.sqrt(np.mean(resid**2))))


def _try_fit(nu2: Sequence[float], values: Sequence[float]) -> Optional[RateFit]:
    pts = [(a, b) for a, b in zip(nu2, values) if b > 0]
    return fit_rate(pts) if len(pts) >= MIN_FIT_POINTS else None


def _spread(values: Sequence[float]) -> Optional[float]:
    vals = [v for v in values if v > 0]
    return max(vals) / min(vals) if vals else None


def log_growth(nu2: float) -> float:
    """(e + |log nu2|) log(e + |log nu2|)."""
    a = math.e + abs(math.log(nu2))
    return a * math.log(a)


# ----------------------------
# Study
# ----------------------------

@dataclass
class MemberSummary:
    nu2: float
    errors: Dict[int, float]
    lp_sup: Dict[int, float]  # sup_t ||u||_r + ||v||_r
    initial_difference: float
    gradq_ratio_max: float
    gradq_integral: float
    gradp_integral: float
    vx_sup: float
    linf_sup: float
    linf_constant: float
    uyy_weighted_integral: float  # nu2^2 int ||u_yy||^2 dt
    pq1_max: float
    pq2_max: float
    budget_residual: float
    u_wall_max: float
    steps: int


@dataclass
class StudyResult:
    config: StudyConfig
    members: List[MemberSummary] = field(default_factory=list)
    limit_budget_residual: Optional[float] = None
    series: Dict[str, List[DiagnosticsRecord]] = field(default_factory=dict)
    failed: Dict[str, str] = field(default_factory=dict)
    runtime_s: float = 0.0

    @property
    def partial(self) -> bool:
        return bool(self.failed)

    @property
    def nu2_values(self) -> List[float]:
        return [m.nu2 for m in self.members]

    def alphas(self) -> Dict[int, Optional[RateFit]]:
        return {r: _try_fit(self.nu2_values, [m.errors[r] for m in self.members]) for r in self.config.r_list}

    def gradq_slope(self) -> Optional[RateFit]:
        return _try_fit(self.nu2_values, [m.gradq_integral for m in self.members])

    def linf_constant(self) -> Optional[float]:
        vals = [m.linf_constant for m in self.members]
        return max(vals) if vals else None

    def member_table(self) -> pd.DataFrame:
        rows = []
        for m in self.members:
            row = {"nu2": m.nu2}
            row.update({f"err_r{r}": m.errors[r] for r in self.config.r_list})
            row.update({f"lp_sup_r{r}": m.lp_sup[r] for r in self.config.r_list})
            row.update(
                initial_difference=m.initial_difference,
                gradq_ratio_max=m.gradq_ratio_max,
                gradq_integral=m.gradq_integral,
                gradp_integral=m.gradp_integral,
                vx_sup=m.vx_sup,
                linf_sup=m.linf_sup,
                linf_constant=m.linf_constant,
                uyy_weighted_integral=m.uyy_weighted_integral,
                pq1_max=m.pq1_max,
                pq2_max=m.pq2_max,
                budget_residual=m.budget_residual,
                u_wall_max=m.u_wall_max,
                steps=m.steps,
            )
            rows.append(row)
        return pd.DataFrame(rows)

    def to_summary(self) -> Dict[str, Any]:
        """JSON-ready summary: config echo, member table, fits and audit spreads."""
        def _fit(f: Optional[RateFit]) -> Optional[Dict[str, float]]:
            return None if f is None else {"alpha": f.alpha, "residual": f.residual}

        members = self.members
        return {
            "config": self.config.to_dict(),
            "partial": self.partial,
            "failed": dict(self.failed),
            "runtime_s": self.runtime_s,
            "members": self.member_table().to_dict(orient="records"),
            "limit_budget_residual": self.limit_budget_residual,
            "fits": {
                "alpha": {str(r): _fit(f) for r, f in self.alphas().items()},
                "gradq_integral_slope": _fit(self.gradq_slope()),
            },
            "audits": {
                "gradq_ratio_spread": _spread([m.gradq_ratio_max for m in members]),
                "gradp_integral_spread": _spread([m.gradp_integral for m in members]),
                "vx_sup_spread": _spread([m.vx_sup for m in members]),
                "uyy_weighted_spread": _spread([m.uyy_weighted_integral for m in members]),
                "lp_sup_spread": {str(r): _spread([m.lp_sup[r] for m in members]) for r in self.config.r_list},
                "linf_constant": self.linf_constant(),
                "linf_constant_spread": _spread([m.linf_constant for m in members]),
            },
        }


def _run_member(cfg: SolverConfig) -> SimulationResult:
    return run_simulation(cfg)


def _summarize(nu2: float, run: SimulationResult, limit: SimulationResult, r_list: Sequence[int]) -> MemberSummary:
    diffs = difference_series(run.snapshots, limit.snapshots, r_list)
    t = run.times
    s = run.series
    gradq_sq = np.array([r.gradq_l2**2 for r in s])
    gradp_sq = np.array([r.gradp_l2**2 for r in s])
    uyy_sq = np.array([r.uyy_l2**2 for r in s])
    integrate = (lambda y: float(trapezoid(y, t))) if len(t) > 1 else (lambda y: 0.0)
    linf_sup = max(r.linf_u for r in s)
    return MemberSummary(
        nu2=nu2,
        errors={r: float(diffs[r].max()) for r in r_list},
        lp_sup={r: max(sum(rec.lp_norms[r]) for rec in s) for r in r_list},
        initial_difference=float(difference_series(run.snapshots[:1], limit.snapshots[:1], [2])[2].iloc[0]),
        gradq_ratio_max=max(r.gradq_ratio for r in s),
        gradq_integral=integrate(gradq_sq),
        gradp_integral=integrate(gradp_sq),
        vx_sup=max(r.vx_l2 for r in s),
        linf_sup=linf_sup,
        linf_constant=linf_sup**2 / log_growth(nu2),
        uyy_weighted_integral=nu2**2 * integrate(uyy_sq),
        pq1_max=max(r.pq1_ratio for r in s),
        pq2_max=max(r.pq2_ratio for r in s),
        budget_residual=s[-1].budget_residual,
        u_wall_max=max(r.u_wall_max for r in s),
        steps=run.steps,
    )


def run_study(cfg: StudyConfig) -> StudyResult:
    """Run the limit system once and the viscous system per nu2, then assemble the result.

    A failing member does not abort the study: it is listed in ``failed``
    and the result is marked partial. Without a limit solution nothing can
    be compared and every member is reported as failed.
    """
    started = time.perf_counter()
    result = StudyResult(config=cfg)
    configs = {"limit": cfg.solver_config(0.0, "limit")}
    configs.update({repr(nu2): cfg.solver_config(nu2, "viscous") for nu2 in cfg.nu2_list})

    runs: Dict[str, SimulationResult] = {}
    if cfg.threads > 1:
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            futures = {key: pool.submit(_run_member, c) for key, c in configs.items()}
            for key, fut in futures.items():
                try:
                    runs[key] = fut.result()
                except HarnessError as exc:
                    result.failed[key] = str(exc)
    else:
        for key, c in configs.items():
            try:
                runs[key] = _run_member(c)
            except HarnessError as exc:
                result.failed[key] = str(exc)
    for key, msg in result.failed.items():
        logger.warning("study member %s failed: %s", key, msg)

    limit = runs.get("limit")
    if limit is None:
        for nu2 in cfg.nu2_list:
            result.failed.setdefault(repr(nu2), "no limit solution to compare with")
    else:
        result.series["limit"] = limit.series
        result.limit_budget_residual = limit.series[-1].budget_residual
        for nu2 in cfg.nu2_list:
            run = runs.get(repr(nu2))
            if run is None:
                continue
            result.series[repr(nu2)] = run.series
            result.members.append(_summarize(nu2, run, limit, cfg.r_list))

    result.runtime_s = time.perf_counter() - started
    logger.info("study finished in %.1fs (%d members, %d failed)", result.runtime_s, len(result.members), len(result.failed))
    return result


def resolution_shift(base: StudyResult, fine: StudyResult, r: int = 2) -> Optional[float]:
    """|alpha_r(fine) - alpha_r(base)|; None when either family has too few members to fit."""
    a, b = base.alphas().get(r), fine.alphas().get(r)
    if a is None or b is None:
        return None
    return abs(b.alpha - a.alpha)
