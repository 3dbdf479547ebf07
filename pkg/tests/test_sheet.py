import math

import pytest
from hypothesis import given, strategies as st

from oracles import grid_argmax, tanh_potential
from thermoecon.sheet import (
    DomainError, RecyclingPolicyViolation, SheetParams, SheetState, diagnostics,
    forced_recycling_flows, max_production, natural_recycling, potential,
    production_flows, production_max_intensity, recycling_max_intensity, stock_derivatives,
)

unit = st.floats(0.0, 1.0)
pos = st.floats(1e-6, 10.0)


def test_full_well_has_unit_potential():
    p = SheetParams()
    assert potential(p.X_T, p) == pytest.approx(1.0, abs=1e-15)
    assert potential(0.0, p) == 0.0


def test_raw_potential_when_not_normalized():
    p = SheetParams(normalized_potentials=False)
    assert potential(p.X_T, p) == pytest.approx(math.tanh(1.0))


@given(st.floats(0.0, 1.0), st.floats(0.05, 1.0))
def test_potential_matches_tanh(frac, alpha):
    p = SheetParams(alpha=alpha)
    assert potential(frac * p.X_T, p) == pytest.approx(tanh_potential(frac * p.X_T, p.X_T, alpha), rel=1e-14)


def test_potential_outside_domain():
    p = SheetParams()
    with pytest.raises(DomainError):
        potential(-1.0, p)
    with pytest.raises(DomainError):
        potential(1001.0, p)


@pytest.mark.parametrize("field,value", [("X_T", 0.0), ("R_P", -1.0), ("alpha", 1.5), ("s", 1.2), ("tau", -1.0)])
def test_invalid_params(field, value):
    with pytest.raises(ValueError, match=field):
        SheetParams(**{field: value})


def test_pristine_state():
    s = SheetState.pristine(SheetParams(X_T=100.0))
    assert (s.X_H, s.X_L, s.X_S, s.J_P) == (100.0, 0.0, 0.0, 0.0)
    assert s.total() == 100.0


def test_production_at_maximum():
    F_HP, F_LP, G = production_flows(1.0, 0.0, 1e-3, 500.0)
    assert (F_HP, F_LP, G) == (500.0, 250.0, 250.0)
    assert production_max_intensity(1.0, 1e-3) == 500.0
    assert max_production(1.0, 1e-3) == 250.0


def test_production_short_circuit_goes_negative():
    # past J = Δμ / R_P the friction loss exceeds the driving term
    assert production_flows(1.0, 0.5, 1e-3, 600.0)[2] < 0


def test_recycling_vertex_by_grid_search():
    mu_H, mu_L, R_R = 0.9, 0.4, 1e-3
    J_best, F_best, step = grid_argmax(lambda J: forced_recycling_flows(mu_H, mu_L, R_R, J)[1], 0, 400, 40000)
    assert abs(J_best - recycling_max_intensity(mu_L, R_R)) <= step
    assert F_best == pytest.approx(mu_L ** 2 / (4 * R_R), rel=1e-9)


@given(unit, unit, pos, st.floats(0.0, 1.0))
def test_recycling_flows_non_negative_in_range(mu_H, mu_L, R_R, frac):
    mu_H = max(mu_H, mu_L)
    J_R = frac * recycling_max_intensity(mu_L, R_R)
    F_HR, F_LR, F_RIn = forced_recycling_flows(mu_H, mu_L, R_R, J_R)
    assert F_HR >= 0 and F_LR >= -1e-12 and F_RIn >= -1e-12


def test_recycling_beyond_range_rejected():
    J = 3 * recycling_max_intensity(0.3, 1e-3)
    with pytest.raises(RecyclingPolicyViolation):
        forced_recycling_flows(0.9, 0.3, 1e-3, J)
    assert forced_recycling_flows(0.9, 0.3, 1e-3, J, strict=False)[1] < 0


def test_natural_recycling_allee_sign():
    p = SheetParams()
    assert natural_recycling(0.1 * p.X_T, p) < 0
    assert natural_recycling(0.2 * p.X_T, p) == 0.0
    assert natural_recycling(0.5 * p.X_T, p) > 0
    assert natural_recycling(p.X_T, p) == 0.0
    assert natural_recycling(0.0, p) == 0.0


def test_natural_recycling_logistic_fallback():
    p = SheetParams(s=0.0)
    assert natural_recycling(500.0, p) == pytest.approx(0.025 * 500 * 0.5)


@given(unit, unit, pos, st.floats(0, 1e4), unit, pos, st.floats(-50, 50), st.floats(0, 100))
def test_stock_rates_sum_to_zero(mu_H, mu_L, R_P, J_P, mu2, R_R, F_NR, consumption):
    F_HP, F_LP, G = production_flows(mu_H, mu_L, R_P, J_P)
    F_HR, F_LR, F_RIn = forced_recycling_flows(mu_H, mu_L, R_R, mu2 * 100, strict=False)
    rates = stock_derivatives(F_HP, F_LP, G, F_HR, F_LR, F_RIn, F_NR, consumption)
    scale = max(1.0, *(abs(v) for v in (F_HP, F_LP, F_HR, F_LR, F_NR, consumption)))
    assert abs(sum(rates)) <= 1e-12 * scale


def test_diagnostics_at_maximal_power():
    d = diagnostics(1.0, 0.0, 1e-3, 500.0)
    assert d.epsilon == 0.5
    assert d.eta == 0.5
    assert d.S_dot is None  # empty sink: no gauge
    assert d.E_HP_dot == 500.0 and d.S_HP_dot == 500.0


def test_entropy_production_with_waste():
    d = diagnostics(0.9, 0.3, 1e-3, 100.0)
    assert d.S_dot == pytest.approx(1e-3 * 100 ** 2 / 0.3)
    assert d.S_LP_dot == pytest.approx(100 + d.S_dot)


@given(unit, unit, pos, st.floats(0, 1e4))
def test_efficiency_bounds(mu_H, mu_L, R_P, J_P):
    d = diagnostics(mu_H, mu_L, R_P, J_P)
    if d.eta is not None and mu_H > 0:
        bound = 1 - mu_L / mu_H
        assert d.eta <= bound + 1e-12 * max(1.0, abs(bound))
    if d.S_dot is not None:
        assert d.S_dot >= 0
