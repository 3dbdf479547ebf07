import pytest

from thermoecon.coupling import (
    FRICTION_FLOOR, CapitalExhausted, CouplingParams, calibrate_kappa, deliver_to_economy,
    demand_from_economy, fan_out_intensity, friction_from_capital, recycling_intensity,
)
from thermoecon.intensity import IntensityPolicy
from thermoecon.sheet import SheetParams, max_production


def test_friction_law():
    assert friction_from_capital(2.0, 2.0, 1e-3) == pytest.approx(1e-3 + FRICTION_FLOOR)
    # doubling capital halves the capital-dependent part
    assert friction_from_capital(4.0, 2.0, 1e-3) == pytest.approx(0.5e-3 + FRICTION_FLOOR)
    # infinite capital leaves only the floor
    assert friction_from_capital(1e300, 1.0, 1e-3) == pytest.approx(FRICTION_FLOOR)


def test_friction_needs_capital():
    with pytest.raises(CapitalExhausted):
        friction_from_capital(0.0, 1.0, 1e-3)


def test_demand_and_delivery_are_inverse():
    kappa = 2.5e-9
    G_D = demand_from_economy(64.45e9, kappa)
    assert deliver_to_economy(G_D, kappa) == pytest.approx(64.45e9)


def test_kappa_calibration():
    kappa = calibrate_kappa(64.45e9, 1.0, 1e-3, 0.12)
    assert demand_from_economy(64.45e9, kappa) == pytest.approx(0.12 * max_production(1.0, 1e-3))


def test_invalid_coupling():
    with pytest.raises(ValueError):
        CouplingParams(kappa=0.0)
    with pytest.raises(ValueError):
        CouplingParams(demand_fraction=-1.0)


def test_fan_out():
    sheets = [SheetParams(n_P=1.0), SheetParams(n_P=0.5), SheetParams(n_P=0.0)]
    assert fan_out_intensity(40.0, sheets) == [40.0, 20.0, 0.0]
    with pytest.raises(ValueError):
        fan_out_intensity(-1.0, sheets)


def test_recycling_modes():
    p = SheetParams(R_R=1e-3, n_R=0.5)
    at_max = IntensityPolicy(recycling_mode="at_max")
    prop = IntensityPolicy(recycling_mode="proportional")
    assert recycling_intensity(at_max, p, 0.4, 10.0) == pytest.approx(200.0)
    assert recycling_intensity(prop, p, 0.4, 10.0) == pytest.approx(5.0)
    # proportional demand is clamped to the physical maximum
    assert recycling_intensity(prop, p, 0.4, 1e6) == pytest.approx(200.0)
    assert recycling_intensity(prop, SheetParams(n_R=0.0), 0.4, 10.0) == 0.0
    assert recycling_intensity(at_max, p, 0.0, 10.0) == 0.0
