import pytest

from thermoecon.checks import check_record
from thermoecon.scenario import PRESETS


@pytest.mark.parametrize("name", list(PRESETS))
def test_preset_runs_to_horizon_and_passes_checks(runs, name):
    rec = runs(name)
    spec = PRESETS[name]
    assert rec.status == "completed"
    assert rec.t_end == pytest.approx(spec.horizon)
    failed = [c for c in check_record(rec, spec) if not c.ok]
    assert not failed, failed
