import math
from dataclasses import replace

import pytest

from thermoecon.economy import EconParams, goodwin_rates
from thermoecon.integrator import (
    TOL_CLAMP, Model, StepRejected, columns_for, integrate, rk4_step, run, step,
)
from thermoecon.intensity import IntensityPolicy
from thermoecon.scenario import PRESETS, ScenarioSpec, SheetSpec
from thermoecon.sheet import SheetParams, SheetState


def sheet_spec(params=SheetParams(), policy=IntensityPolicy(), initial=None, **kw):
    return ScenarioSpec(name="t", sheets=(SheetSpec(params, policy, initial),), **kw)


def test_rk4_zero_field():
    y = [1.0, -2.0, 3.5]
    assert rk4_step(lambda v: [0.0] * len(v), y, 0.1) == y


def test_rk4_order_on_exponential_lag():
    # dJ/dt = (J_D - J) / tau with J_D held: error against the closed form is O(h^4)
    J_D, tau, T = 30.0, 0.7, 2.0
    exact = J_D + (10.0 - J_D) * math.exp(-T / tau)
    f = lambda y: [(J_D - y[0]) / tau]
    errs = [abs(integrate(f, [10.0], T, h)[0] - exact) for h in (0.1, 0.05, 0.025)]
    for a, b in zip(errs, errs[1:]):
        assert 13 <= a / b <= 19


def test_integrate_adjusts_step_to_horizon():
    # 0.3 / 0.07 is not an integer; the step is shrunk so t_end is hit exactly
    y = integrate(lambda v: [1.0], [0.0], 0.3, 0.07)
    assert y[0] == pytest.approx(0.3)


def test_resting_sheet_stays_put():
    spec = sheet_spec(demand=0.0)
    model = Model(spec)
    state = model.initial_state()
    nxt = step(state, model, 0.01)
    assert nxt.sheets[0] == SheetState(1000.0, 0.0, 0.0, 0.0)
    assert nxt.t == pytest.approx(0.01)


def test_step_matches_run():
    spec = replace(PRESETS["case2-optimal"], horizon=0.05, stride=0.05, dt=0.01)
    model = Model(spec)
    state = model.initial_state()
    for _ in range(5):
        state = step(state, model, 0.01)
    rec = run(spec)
    assert rec["X_H"][-1] == pytest.approx(state.sheets[0].X_H, rel=1e-14)
    assert rec["cum_G"][-1] == pytest.approx(state.cum_G[0], rel=1e-14)


def test_conservation_in_derivatives():
    model = Model(PRESETS["case1-max"])
    y = model.pack(model.initial_state())
    y[0], y[1], y[2] = 600.0, 300.0, 100.0
    d = model.derivatives(y)
    assert abs(d[0] + d[1] + d[2]) < 1e-12 * max(map(abs, d[:3]))


def test_clamp_moves_deficit_to_pair():
    model = Model(sheet_spec())
    y = model.pack(model.initial_state())
    y[0], y[1], y[2] = 1000.0 + 1e-5, 0.0, -1e-5
    y = model.enforce(y, 0.0)
    assert y[2] == 0.0
    assert y[0] + y[1] + y[2] == pytest.approx(1000.0, abs=1e-12)


def test_large_deficit_rejects_step():
    model = Model(sheet_spec())
    y = model.pack(model.initial_state())
    y[0] = -2 * TOL_CLAMP * 1000.0
    with pytest.raises(StepRejected):
        model.enforce(y, 1.0)


def test_oversized_step_is_rejected():
    spec = sheet_spec(SheetParams(X_T=1.0, R_P=1e-5), IntensityPolicy("max"), dt=0.5, stride=0.5, horizon=5)
    with pytest.raises(StepRejected) as info:
        run(spec)
    assert info.value.t == 0.5


def test_intensity_lag_follows_target():
    spec = sheet_spec(SheetParams(tau=2.0), horizon=10.0, dt=1e-2, stride=1.0)
    rec = run(spec)
    J = rec["J_P"]
    assert J[0] == 0.0
    # a lagged sheet approaches the demand-matching intensity from below
    assert 0 < J[1] < J[3] < 31.5
    # ... and keeps trailing it while the gap narrows and the target rises
    assert 25.0 < rec["G"][-1] < 30.0


def test_dead_sheet_collapses_after_grace():
    spec = sheet_spec(initial=SheetState(X_H=0.0, X_L=1000.0), horizon=10.0, grace=1.0)
    rec = run(spec)
    assert rec.status == "collapsed"
    assert 1.0 <= rec.t_end < 1.2


def test_two_sheets_share_the_global_intensity():
    lead = SheetSpec(SheetParams())
    follower = SheetSpec(SheetParams(n_P=0.5, X_T=500.0))
    spec = ScenarioSpec(name="pair", sheets=(lead, follower), horizon=2.0, stride=0.5)
    rec = run(spec)
    assert "s1_X_H" in rec.columns
    for J0, J1 in zip(rec["J_P"], rec["s1_J_P"]):
        assert J1 == pytest.approx(0.5 * J0)
    for h, l, s in zip(rec["s1_X_H"], rec["s1_X_L"], rec["s1_X_S"]):
        assert h + l + s == pytest.approx(500.0, rel=1e-12)


def test_goodwin_mode_matches_plain_rk4():
    spec = replace(PRESETS["goodwin"], horizon=5.0, stride=5.0, dt=1e-2)
    rec = run(spec)
    p = EconParams()
    model = Model(spec)
    y0 = model.pack(model.initial_state())
    y = integrate(lambda v: list(goodwin_rates(*v, p)), y0, 5.0, 1e-2)
    assert rec["omega"][-1] == pytest.approx(y[0], rel=1e-13)
    assert rec["Y"][-1] == pytest.approx(y[4], rel=1e-13)


def test_record_layout():
    spec = replace(PRESETS["case3-weak"], horizon=3.0, stride=0.25)
    rec = run(spec)
    assert rec.columns == columns_for(spec)
    t = rec.t
    assert len(t) == 13
    assert all(b - a == pytest.approx(0.25) for a, b in zip(t, t[1:]))
    assert rec.t_end == pytest.approx(3.0)


def test_empty_horizon():
    rec = run(replace(PRESETS["case1-max"], horizon=0.0))
    assert len(rec) == 1 and rec.t == [0.0]


def test_runs_are_deterministic():
    spec = replace(PRESETS["macro-2"], horizon=3.0)
    assert run(spec).rows == run(spec).rows


def test_progress_callback():
    seen = []
    run(replace(PRESETS["case1-max"], horizon=1.0, stride=0.5), progress=seen.append)
    assert seen == pytest.approx([0.5, 1.0])


def _reference_rates(model, y):
    """Sheet rates rebuilt from the public sheet/intensity/coupling functions."""
    from thermoecon.coupling import demand_from_economy, friction_from_capital, recycling_intensity
    from thermoecon.intensity import consumption_rate, policy_intensity
    from thermoecon.sheet import forced_recycling_flows, natural_recycling, potential, production_flows, stock_derivatives

    (p,), (pol,) = model.params, model.policies
    X_H, X_L, X_S = y[0], y[1], y[2]
    if model.coupled:
        e = model.econ_offset
        G_D = demand_from_economy(y[e + 4], model.kappa)
        R_P = friction_from_capital(y[e + 5], model.K0, p.R_P)
    else:
        G_D, R_P = model.spec.demand, p.R_P
    mu_H, mu_L = potential(X_H, p), potential(X_L, p)
    J_P = policy_intensity(pol, mu_H - mu_L, R_P, G_D)
    F_HP, F_LP, G = production_flows(mu_H, mu_L, R_P, J_P)
    J_R = recycling_intensity(pol, p, mu_L, J_P)
    F_HR, F_LR, F_RIn = forced_recycling_flows(mu_H, mu_L, p.R_R, J_R)
    consumed = consumption_rate(G, G_D, X_S, model.dt)
    rates = stock_derivatives(F_HP, F_LP, G, F_HR, F_LR, F_RIn, natural_recycling(X_H, p), consumed)
    return [*rates, F_HP, G]


@pytest.mark.parametrize("name", ["case1-max", "case2-optimal", "case3-weak", "macro-2", "macro-3"])
def test_inlined_rates_match_module_functions(runs, name):
    rec = runs(name)
    model = Model(PRESETS[name])
    cols = rec.columns
    for k in range(0, len(rec.t), 50):
        row = {c: rec[c][k] for c in cols}
        y = [row["X_H"], row["X_L"], row["X_S"], row["J_P"], row["cum_F_HP"], row["cum_G"]]
        if model.coupled:
            y += [row[c] for c in ("omega", "lam", "N", "w", "Y", "K", "a")]
        got = model.derivatives(y)
        want = _reference_rates(model, y)
        for slot, w in zip((0, 1, 2, 4, 5), (want[0], want[1], want[2], want[3], want[4])):
            assert got[slot] == pytest.approx(w, rel=1e-12, abs=1e-12 * PRESETS[name].sheets[0].params.X_T)
