"""Norm time series, energy budgets and numerical audits of solver snapshots.

Every audit returns a plain ratio with the unknown constant omitted; the zero
field gives 0, never NaN.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.fft import dct, idct
from scipy.integrate import cumulative_trapezoid

from utils.elliptic import (
    boundary_layer_pressure_gradient,
    solve_flow_pressure,
    wall_shear_hat,
)
from utils.field import (
    FlowState,
    Regime,
    Rep,
    ScalarField,
    ddx,
    dy,
    norm_linf,
    norm_lp,
    product,
    spectral_l2_squared,
    to_physical,
    to_spectral,
    velocity_from_state,
)
from utils.grid import Grid, d2y

LP_ORDERS = (2, 4, 6, 8)

# Column order of the per-run CSV series.
CSV_COLUMNS = (
    "t",
    "energy",
    "diss_h",
    "diss_v",
    "u_l2",
    "v_l2",
    "u_l4",
    "v_l4",
    "u_l6",
    "v_l6",
    "u_linf",
    "vx_l2",
    "gradp_l2",
    "gradq_l2",
    "uyy_l2",
    "uyx_l2",
    "budget_residual",
)


def _ratio(num: float, den: float) -> float:
    """num/den with the 0/0 -> 0 convention."""
    if num == 0.0:
        return 0.0
    if den == 0.0:
        raise ValueError("audit denominator vanishes for a nonzero numerator")
    return float(num / den)


def _l2(f: ScalarField) -> float:
    return norm_lp(to_physical(f), 2)


# ----------------------------
# Records
# ----------------------------

@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    energy: float
    diss_h: float
    diss_v: float
    lp_norms: Dict[int, Tuple[float, float]]
    linf_u: float
    vx_l2: float
    gradp_l2: float
    gradq_l2: float
    uyy_l2: float
    uyx_l2: float
    budget_residual: float = 0.0
    gradq_ratio: float = 0.0
    pq1_ratio: float = 0.0
    pq2_ratio: float = 0.0
    u_wall_max: float = 0.0
    dissipated: Optional[float] = None  # 2 nu1 int diss_h + 2 nu2 int diss_v, accumulated per step

    def to_row(self) -> Dict[str, float]:
        """The fixed CSV columns, in order."""
        row = {
            "t": self.t,
            "energy": self.energy,
            "diss_h": self.diss_h,
            "diss_v": self.diss_v,
        }
        for p in (2, 4, 6):
            row[f"u_l{p}"], row[f"v_l{p}"] = self.lp_norms[p]
        row.update(
            u_linf=self.linf_u,
            vx_l2=self.vx_l2,
            gradp_l2=self.gradp_l2,
            gradq_l2=self.gradq_l2,
            uyy_l2=self.uyy_l2,
            uyx_l2=self.uyx_l2,
            budget_residual=self.budget_residual,
        )
        return {c: float(row[c]) for c in CSV_COLUMNS}


@dataclass(frozen=True, eq=False)
class _Derivatives:
    u: ScalarField
    v: ScalarField
    ux: ScalarField
    vx: ScalarField
    uy: ScalarField
    uyy: ScalarField
    uyx: ScalarField


def _derivatives(s: FlowState) -> _Derivatives:
    u, v = velocity_from_state(s)
    uy = dy(u)
    return _Derivatives(
        u=u,
        v=v,
        ux=ddx(u),
        vx=ddx(v),
        uy=uy,
        uyy=u.with_data(d2y(s.grid, u.data)),
        uyx=ddx(uy),
    )


def _grad_l2_sq(p: ScalarField) -> float:
    p = to_spectral(p)
    return spectral_l2_squared(ddx(p)) + _l2(dy(to_physical(p))) ** 2


def _grad_q_sq(s: FlowState, nu2: float) -> float:
    if s.regime == Regime.LIMIT and nu2 == 0:
        return 0.0
    qx, qy = boundary_layer_pressure_gradient(wall_shear_hat(s), nu2, s.grid)
    return spectral_l2_squared(qx) + spectral_l2_squared(qy)


@dataclass(frozen=True)
class EnergyTerms:
    energy: float
    diss_h: float
    diss_v: float

    def dissipation_rate(self, nu1: float, nu2: float) -> float:
        return 2.0 * nu1 * self.diss_h + 2.0 * nu2 * self.diss_v


def energy_terms(s: FlowState) -> EnergyTerms:
    """Energy, ||(u,v)_x||^2 and ||(u,v)_y||^2 in the summation-by-parts forms of the scheme.

    Per retained mode the energy is sum_cells |d psi|^2 / h + k^2 sum_j w_j |psi_j|^2,
    which equals <psi, omega> under the discrete Poisson relation, and u_y is
    k^2 psi - omega at every node. The mean flow uses the trapezoidal sum and
    cell differences. For the linear semi-discrete system these forms satisfy
    dE/dt = -2 nu1 diss_h - 2 nu2 diss_v exactly.
    """
    g = s.grid
    ks = g.retained_modes
    k2 = ks.astype(float) ** 2
    h = g.dy[:, None]
    w = g.y_weights[:, None]
    psi = to_spectral(s.psi).data[:, ks]
    omega = to_spectral(s.omega).data[:, ks]
    edge = np.sum(np.abs(np.diff(psi, axis=0)) ** 2 / h, axis=0)
    mode_energy = edge + k2 * np.sum(w * np.abs(psi) ** 2, axis=0)
    uy = k2 * psi - omega
    mode_diss_v = np.sum(w * np.abs(uy) ** 2, axis=0) + k2 * edge
    mean_energy = float(np.sum(g.y_weights * s.mean_u**2))
    mean_diss = float(np.sum(np.diff(s.mean_u) ** 2 / g.dy))
    # modes 1..kcut appear twice in the full spectrum
    return EnergyTerms(
        energy=2.0 * np.pi * float(2.0 * np.sum(mode_energy) + mean_energy),
        diss_h=2.0 * np.pi * float(2.0 * np.sum(k2 * mode_energy)),
        diss_v=2.0 * np.pi * float(2.0 * np.sum(mode_diss_v) + mean_diss),
    )


def record(s: FlowState) -> DiagnosticsRecord:
    """All diagnostics of one state (budget_residual is filled in over a series)."""
    d = _derivatives(s)
    p = solve_flow_pressure(d.u, d.v, s.grid)
    gradp_sq = _grad_l2_sq(p)
    gradq_sq = _grad_q_sq(s, s.nu2)
    uyy_l2 = _l2(d.uyy)
    uyx_l2 = _l2(d.uyx)
    terms = energy_terms(s)
    return DiagnosticsRecord(
        t=float(s.t),
        energy=terms.energy,
        diss_h=terms.diss_h,
        diss_v=terms.diss_v,
        lp_norms={p_: (norm_lp(d.u, p_), norm_lp(d.v, p_)) for p_ in LP_ORDERS},
        linf_u=norm_linf(d.u),
        vx_l2=_l2(d.vx),
        gradp_l2=float(np.sqrt(gradp_sq)),
        gradq_l2=float(np.sqrt(gradq_sq)),
        uyy_l2=uyy_l2,
        uyx_l2=uyx_l2,
        gradq_ratio=_ratio(gradq_sq, s.nu2**2 * uyy_l2 * uyx_l2),
        pq1_ratio=_pq1(p, d),
        pq2_ratio=_pq2(gradp_sq, d),
        u_wall_max=float(np.max(np.abs(d.u.data[0]))),
    )


# ----------------------------
# Energy budget
# ----------------------------

def budget_residuals(series: Sequence[DiagnosticsRecord], nu1: float, nu2: float) -> np.ndarray:
    """Relative energy-identity residual at every record.

    The dissipation integral is the per-step accumulation carried by the
    records when every record has one, else the trapezoid over record times.
    """
    if not series:
        raise ValueError("energy budget needs a non-empty series")
    t = np.array([r.t for r in series])
    energy = np.array([r.energy for r in series])
    if len(series) == 1:
        return np.zeros(1)
    if all(r.dissipated is not None for r in series):
        spent = np.array([r.dissipated for r in series]) - series[0].dissipated
    else:
        dissipation = 2.0 * nu1 * np.array([r.diss_h for r in series]) + 2.0 * nu2 * np.array([r.diss_v for r in series])
        spent = cumulative_trapezoid(dissipation, t, initial=0.0)
    e0 = energy[0]
    if e0 == 0.0:
        return np.zeros(len(series)) if np.all(energy + spent == 0.0) else np.full(len(series), np.inf)
    return np.abs(energy + spent - e0) / e0


def energy_budget(series: Sequence[DiagnosticsRecord], nu1: float, nu2: float) -> float:
    """|E(T) + 2 nu1 int diss_h + 2 nu2 int diss_v - E(0)| / E(0) over the whole series."""
    return float(budget_residuals(series, nu1, nu2)[-1])


def with_budget(series: Sequence[DiagnosticsRecord], nu1: float, nu2: float) -> List[DiagnosticsRecord]:
    res = budget_residuals(series, nu1, nu2)
    return [replace(r, budget_residual=float(x)) for r, x in zip(series, res)]


def series_frame(series: Iterable[DiagnosticsRecord]) -> pd.DataFrame:
    return pd.DataFrame([r.to_row() for r in series], columns=list(CSV_COLUMNS))


# ----------------------------
# Audits
# ----------------------------

def audit_triple_product(f: ScalarField, g: ScalarField, h: ScalarField, m: float) -> float:
    """int |f g h| over the RHS of the anisotropic triple-product estimate (constant omitted).

    RHS = ||f|| ||g||^{m/(m+1)} (||g|| + ||g_y||)^{1/(m+1)}
          ||h||_{2m}^{m/(m+1)} (||h|| + ||h_x||)^{1/(m+1)}
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    f, g, h = to_physical(f), to_physical(g), to_physical(h)
    grid = f.grid
    if g.grid is not grid or h.grid is not grid:
        raise ValueError("audit fields must share one grid")
    triple = ScalarField(grid, Rep.PHYSICAL, np.abs(f.data * g.data * h.data))
    lhs = norm_lp(triple, 1)
    e = m / (m + 1.0)
    g2, h2 = _l2(g), _l2(h)
    rhs = (
        _l2(f)
        * g2**e
        * (g2 + _l2(dy(g))) ** (1.0 - e)
        * norm_lp(h, 2 * m) ** e
        * (h2 + _l2(ddx(h))) ** (1.0 - e)
    )
    return _ratio(lhs, rhs)


def random_band_limited(grid: Grid, rng: np.random.Generator, kmax: int = 6, nmax: int = 6) -> ScalarField:
    """Smooth random field: sum of c cos(kx + phi) cos(n pi y) with c ~ N(0,1)/(1 + k^2 + n^2)."""
    X, Y = np.meshgrid(grid.x_nodes, grid.y_nodes)
    out = np.zeros_like(X)
    for k in range(kmax + 1):
        for n in range(nmax + 1):
            c = rng.standard_normal() / (1.0 + k * k + n * n)
            out += c * np.cos(k * X + rng.uniform(0, 2 * np.pi)) * np.cos(n * np.pi * Y)
    return ScalarField(grid, Rep.PHYSICAL, out)


def audit_random_triples(grid: Grid, count: int, ms: Sequence[float] = (1, 2, 4), seed: int = 0) -> pd.DataFrame:
    """Triple-product ratios over ``count`` seeded random triples for each m."""
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(count):
        f, g, h = (random_band_limited(grid, rng) for _ in range(3))
        for m in ms:
            rows.append({"sample": i, "m": m, "ratio": audit_triple_product(f, g, h, m)})
    return pd.DataFrame(rows, columns=["sample", "m", "ratio"])


def audit_grad_q(s: FlowState, nu2: Optional[float] = None) -> float:
    """||grad q||^2 / (nu2^2 ||u_yy|| ||u_yx||); ``nu2`` overrides the state's value in both places."""
    nu2 = s.nu2 if nu2 is None else nu2
    gq = _grad_q_sq(s, nu2)
    if gq == 0.0:
        return 0.0
    d = _derivatives(s)
    return _ratio(gq, nu2**2 * _l2(d.uyy) * _l2(d.uyx))


def _pq1(p: ScalarField, d: _Derivatives) -> float:
    ke = ScalarField(d.u.grid, Rep.PHYSICAL, d.u.data**2 + d.v.data**2)
    return _ratio(_l2(p), _l2(ke))


def _pq2(gradp_sq: float, d: _Derivatives) -> float:
    return _ratio(float(np.sqrt(gradp_sq)), _l2(product(d.u, d.ux)) + _l2(product(d.u, d.vx)))


@dataclass(frozen=True)
class PressureAudit:
    gradient_ratio: float  # ||grad p|| / (||u u_x|| + ||u v_x||)
    magnitude_ratio: float  # ||p|| / ||u^2 + v^2||


def audit_pressure_gradient(s: FlowState) -> PressureAudit:
    d = _derivatives(s)
    p = solve_flow_pressure(d.u, d.v, s.grid)
    return PressureAudit(_pq2(_grad_l2_sq(p), d), _pq1(p, d))


# ----------------------------
# Frequency split
# ----------------------------

@dataclass(frozen=True, eq=False)
class FrequencySplit:
    p_low: ScalarField
    p_high: ScalarField
    low_ratio: float  # ||p_low||_inf^2 / (log R ||grad p||^2)
    high_ratio: float  # R ||p_high|| / ||grad p||


def _dct_y(a: np.ndarray, inverse: bool = False) -> np.ndarray:
    fn = idct if inverse else dct
    return fn(a.real, type=1, axis=0) + 1j * fn(a.imag, type=1, axis=0)


def pressure_frequency_split(p: ScalarField, R: float) -> FrequencySplit:
    """Split p into modes with sqrt(k^2 + (n pi)^2) <= R and the rest.

    The y expansion is in cos(n pi s) of the computational coordinate s
    (uniform nodes, DCT-I), which is Neumann-compatible at both walls.
    """
    if not R > 1:
        raise ValueError(f"R must exceed 1, got {R}")
    grid = p.grid
    hat = to_spectral(p).data
    coeffs = _dct_y(hat)
    n = np.arange(grid.ny)[:, None]
    radius = np.sqrt(grid.kx[None, :].astype(float) ** 2 + (np.pi * n) ** 2)
    low_hat = _dct_y(np.where(radius <= R, coeffs, 0.0), inverse=True)
    low_hat[:, 0] = low_hat[:, 0].real
    p_low = to_physical(ScalarField(grid, Rep.SPECTRAL, low_hat))
    p_phys = to_physical(p)
    p_high = p_phys - p_low
    grad_sq = _grad_l2_sq(p)
    return FrequencySplit(
        p_low=p_low,
        p_high=p_high,
        low_ratio=_ratio(norm_linf(p_low) ** 2, np.log(R) * grad_sq),
        high_ratio=_ratio(R * _l2(p_high), float(np.sqrt(grad_sq))),
    )


# ----------------------------
# Wall traces
# ----------------------------

@dataclass(frozen=True)
class WallTraces:
    u_bottom: float
    uy_bottom: float
    u_top: float
    uy_top: float
    top_ratio: float  # int u(x,1)^2 dx / (2 ||u|| ||u_y||)
    bottom_ratio: float  # int u_y(x,0)^2 dx / (2 ||u_y|| ||u_yy||)


def wall_traces(s: FlowState) -> WallTraces:
    d = _derivatives(s)
    dx = s.grid.dx

    def trace(row: np.ndarray) -> float:
        return float(np.sqrt(np.sum(row**2) * dx))

    u_b, u_t = trace(d.u.data[0]), trace(d.u.data[-1])
    uy_b, uy_t = trace(d.uy.data[0]), trace(d.uy.data[-1])
    u2, uy2, uyy2 = _l2(d.u), _l2(d.uy), _l2(d.uyy)
    return WallTraces(
        u_bottom=u_b,
        uy_bottom=uy_b,
        u_top=u_t,
        uy_top=uy_t,
        top_ratio=_ratio(u_t**2, 2.0 * u2 * uy2),
        bottom_ratio=_ratio(uy_b**2, 2.0 * uy2 * uyy2),
    )
