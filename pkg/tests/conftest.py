import functools

import pytest

from thermoecon.integrator import run
from thermoecon.scenario import PRESETS


@functools.lru_cache(maxsize=None)
def preset_run(name):
    return run(PRESETS[name])


@pytest.fixture(scope="session")
def runs():
    """Lazily computed preset runs shared across the session."""
    return preset_run


# criterion number -> (ok, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    prev = ACCEPTANCE.get(number)
    if prev is not None:
        ok, detail = prev[0] and ok, f"{prev[1]}; {detail}"
    ACCEPTANCE[number] = (ok, detail)
    print(f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
