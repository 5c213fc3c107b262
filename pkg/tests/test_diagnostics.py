from dataclasses import replace

import numpy as np
import pytest

from utils.config import GridConfig, SolverConfig
from utils.diagnostics import (
    CSV_COLUMNS,
    DiagnosticsRecord,
    audit_grad_q,
    audit_pressure_gradient,
    audit_random_triples,
    audit_triple_product,
    budget_residuals,
    energy_budget,
    energy_terms,
    pressure_frequency_split,
    record,
    series_frame,
    wall_traces,
    with_budget,
)
from utils.field import Rep, ScalarField, to_spectral
from utils.grid import build_grid
from utils.solver_viscous import init_state


def _taylor(ny=33, **kw):
    base = dict(nu1=0.1, nu2=1e-2, grid=GridConfig(16, ny, 0.5), ic_params={"A": 1.0, "m": 1})
    base.update(kw)
    return init_state(SolverConfig(**base))


def _synthetic(t, energy, diss_h, diss_v=None):
    diss_v = np.zeros_like(t) if diss_v is None else diss_v
    zero2 = (0.0, 0.0)
    return [
        DiagnosticsRecord(
            t=float(ti), energy=float(e), diss_h=float(h), diss_v=float(v),
            lp_norms={p: zero2 for p in (2, 4, 6, 8)}, linf_u=0.0, vx_l2=0.0,
            gradp_l2=0.0, gradq_l2=0.0, uyy_l2=0.0, uyx_l2=0.0,
        )
        for ti, e, h, v in zip(t, energy, diss_h, diss_v)
    ]


# ---- records ----

def test_taylor_energy_at_t0():
    r = record(_taylor(ny=129))
    assert r.energy == pytest.approx(47 * np.pi / 6930, rel=1e-3)
    assert r.t == 0.0


def test_zero_state_records_zeros(state_factory):
    r = record(state_factory(build_grid(16, 33, 0.5)))
    row = r.to_row()
    assert list(row) == list(CSV_COLUMNS)
    assert all(v == 0.0 for v in row.values())
    assert r.gradq_ratio == r.pq1_ratio == r.pq2_ratio == 0.0


def test_series_frame_has_fixed_columns():
    recs = _synthetic(np.array([0.0, 0.1]), np.ones(2), np.zeros(2))
    df = series_frame(recs)
    assert list(df.columns) == list(CSV_COLUMNS)
    assert len(df) == 2


def test_record_reports_the_grad_q_audit():
    s = _taylor()
    assert record(s).gradq_ratio == pytest.approx(audit_grad_q(s), rel=1e-12)


def test_energy_is_the_discrete_psi_omega_pairing():
    s = _taylor()
    g = s.grid
    ks = g.retained_modes
    psi = to_spectral(s.psi).data[1:-1, ks]
    omega = to_spectral(s.omega).data[1:-1, ks]
    pairing = np.sum(g.y_weights[1:-1, None] * np.conj(psi) * omega).real
    assert energy_terms(s).energy == pytest.approx(4 * np.pi * pairing, rel=1e-12)


def test_vertical_dissipation_is_the_summation_by_parts_form():
    s = _taylor()
    g = s.grid
    ks = g.retained_modes
    dpsi = np.diff(to_spectral(s.psi).data[:, ks], axis=0)
    domega = np.diff(to_spectral(s.omega).data[:, ks], axis=0)
    form = np.sum(np.conj(dpsi) * domega / g.dy[:, None]).real
    assert energy_terms(s).diss_v == pytest.approx(4 * np.pi * form, rel=1e-12)
    assert energy_terms(s).diss_v > 0.0


def test_horizontal_dissipation_of_a_single_mode():
    s = _taylor()
    terms = energy_terms(s)
    assert terms.diss_h == pytest.approx(terms.energy, rel=1e-12)  # k = 1 only
    assert terms.dissipation_rate(0.1, 1e-2) == pytest.approx(0.2 * terms.diss_h + 0.02 * terms.diss_v)


# ---- energy budget ----

def test_budget_closes_for_exact_decay():
    def residual(n):
        t = np.linspace(0.0, 1.0, n + 1)
        return energy_budget(_synthetic(t, np.exp(-2 * t), np.exp(-2 * t)), nu1=1.0, nu2=0.0)

    coarse, fine = residual(20), residual(40)
    assert coarse < 2e-3
    assert 3.5 < coarse / fine < 4.5


def test_budget_residual_series_starts_at_zero():
    t = np.linspace(0.0, 1.0, 11)
    recs = with_budget(_synthetic(t, np.exp(-2 * t), np.exp(-2 * t)), 1.0, 0.0)
    assert recs[0].budget_residual == 0.0
    assert recs[-1].budget_residual == pytest.approx(energy_budget(recs, 1.0, 0.0))


def test_budget_of_zero_energy_series():
    t = np.linspace(0.0, 1.0, 3)
    assert np.all(budget_residuals(_synthetic(t, np.zeros(3), np.zeros(3)), 1.0, 0.0) == 0.0)
    with pytest.raises(ValueError):
        energy_budget([], 1.0, 0.0)


def test_budget_prefers_per_step_dissipation():
    t = np.linspace(0.0, 1.0, 3)
    recs = _synthetic(t, np.array([1.0, 0.7, 0.5]), np.full(3, 100.0))
    recs = [replace(r, dissipated=d) for r, d in zip(recs, (0.0, 0.3, 0.5))]
    np.testing.assert_allclose(budget_residuals(recs, 1.0, 0.0), 0.0, atol=1e-15)
    # one record without it: fall back to the trapezoid of the rates
    mixed = recs[:2] + [replace(recs[2], dissipated=None)]
    assert budget_residuals(mixed, 1.0, 0.0)[-1] > 1.0


# ---- triple product ----

@pytest.mark.parametrize("m", [1, 2, 4])
def test_triple_product_of_constants(m):
    g = build_grid(16, 33, 0.5)
    one = ScalarField(g, Rep.PHYSICAL, np.ones((g.ny, g.nx)))
    assert audit_triple_product(one, one, one, m) == pytest.approx((2 * np.pi) ** (-1.0 / (m + 1)), rel=1e-6)


def test_triple_product_is_scale_free():
    g = build_grid(32, 65, 0.3)
    X, Y = np.meshgrid(g.x_nodes, g.y_nodes)
    f = ScalarField(g, Rep.PHYSICAL, np.sin(X) * np.cos(np.pi * Y))
    h = ScalarField(g, Rep.PHYSICAL, 1.0 + np.cos(2 * X) * Y)
    base = audit_triple_product(f, f, h, 2)
    assert audit_triple_product(2.0 * f, 3.0 * f, 0.5 * h, 2) == pytest.approx(base, rel=1e-10)


def test_random_triples_are_resolution_independent():
    g = build_grid(32, 65, 0.3)
    coarse = audit_random_triples(g, 20, ms=(2,), seed=1)
    fine = audit_random_triples(g.refine(), 20, ms=(2,), seed=1)
    assert list(coarse.columns) == ["sample", "m", "ratio"]
    np.testing.assert_allclose(coarse["ratio"], fine["ratio"], rtol=0.1)
    assert coarse["ratio"].max() < 10.0


def test_triple_product_rejects_small_m():
    g = build_grid(16, 33, 0.5)
    one = ScalarField(g, Rep.PHYSICAL, np.ones((g.ny, g.nx)))
    with pytest.raises(ValueError):
        audit_triple_product(one, one, one, 0.5)


# ---- pressure audits ----

def test_grad_q_audit_is_invariant_under_scaling():
    assert audit_grad_q(_taylor(ic_scale=2.0)) == pytest.approx(audit_grad_q(_taylor()), rel=1e-9)


def test_grad_q_audit_does_not_depend_on_nu2():
    s = _taylor()
    assert audit_grad_q(s, nu2=2e-2) == pytest.approx(audit_grad_q(s, nu2=1e-2), rel=1e-12)


def test_grad_q_audit_on_limit_state():
    s = _taylor(regime="limit", nu2=0.0)
    assert audit_grad_q(s) == 0.0
    assert audit_grad_q(s, nu2=1e-2) > 0.0


def test_pressure_audit_of_zero_state(state_factory):
    audit = audit_pressure_gradient(state_factory(build_grid(16, 33, 0.5)))
    assert audit.gradient_ratio == 0.0 and audit.magnitude_ratio == 0.0


def test_pressure_audit_ratios_are_finite():
    audit = audit_pressure_gradient(_taylor())
    assert 0.0 < audit.gradient_ratio < np.inf
    assert 0.0 < audit.magnitude_ratio < np.inf


# ---- frequency split ----

def _field(fn):
    g = build_grid(16, 33, 0.0)
    return ScalarField.from_function(g, fn)


def test_low_mode_falls_in_the_low_band():
    split = pressure_frequency_split(_field(lambda X, Y: np.cos(X) * np.cos(np.pi * Y)), R=5.0)
    np.testing.assert_allclose(split.p_high.data, 0.0, atol=1e-12)
    assert split.low_ratio > 0.0 and split.high_ratio < 1e-10


def test_high_mode_falls_in_the_high_band():
    split = pressure_frequency_split(_field(lambda X, Y: np.cos(6 * X) * np.cos(np.pi * Y)), R=5.0)
    np.testing.assert_allclose(split.p_low.data, 0.0, atol=1e-12)


def test_large_radius_keeps_everything_low():
    split = pressure_frequency_split(_field(lambda X, Y: np.sin(3 * X) * Y**2), R=1e3)
    np.testing.assert_allclose(split.p_high.data, 0.0, atol=1e-12)


def test_frequency_split_rejects_small_radius():
    with pytest.raises(ValueError):
        pressure_frequency_split(_field(lambda X, Y: np.cos(X)), R=1.0)


# ---- wall traces ----

def test_wall_traces_of_zero_state(state_factory):
    w = wall_traces(state_factory(build_grid(16, 33, 0.5)))
    assert (w.u_bottom, w.uy_bottom, w.u_top, w.uy_top, w.top_ratio, w.bottom_ratio) == (0.0,) * 6


def test_wall_trace_inequalities_hold_for_taylor_data():
    w = wall_traces(_taylor(ny=65))
    assert w.u_bottom < 1e-2
    assert w.top_ratio <= 1.0 + 1e-3
    assert w.bottom_ratio <= 1.0 + 1e-3
