"""Scalar signatures extracted from a :class:`~thermoecon.integrator.RunRecord`.

Used by the sweep summary and by the qualitative checks on the presets.
"""

from __future__ import annotations

from typing import Optional, Sequence

from .integrator import RunRecord, sheet_prefix

#: Relative slack when deciding that the intensity sits at its maximum.
SATURATION_RTOL = 1e-9


def pinch_time(record: RunRecord, sheet: int = 0) -> Optional[float]:
    """First sample where demand is out of reach and the sheet runs at ``J_P^max``.

    ``None`` when the intensity never saturates over the record.
    """
    pre = sheet_prefix(sheet)
    for t, J, J_max in zip(record.t, record[pre + "J_P"], record[pre + "J_P_max"]):
        if J_max > 0 and J >= J_max * (1.0 - SATURATION_RTOL):
            return t
    return None


def production_drop_time(record: RunRecord, sheet: int = 0, fraction: float = 0.5) -> Optional[float]:
    """First sample where useful work falls below ``fraction`` of its running maximum."""
    pre = sheet_prefix(sheet)
    peak = float("-inf")
    for t, G in zip(record.t, record[pre + "G"]):
        peak = max(peak, G)
        if peak > 0 and G < fraction * peak:
            return t
    return None


def sample_before(record: RunRecord, column: str, t: float) -> Optional[float]:
    """Value of ``column`` at the last sample strictly before ``t``."""
    value = None
    for ti, v in zip(record.t, record[column]):
        if ti >= t:
            break
        value = v
    return value


def sign_changes(values: Sequence[float], atol: float = 1e-12) -> int:
    """Sign changes of the first difference, skipping flat steps."""
    diffs = [b - a for a, b in zip(values, values[1:])]
    signs = [d > 0 for d in diffs if abs(d) > atol]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def after(record: RunRecord, column: str, t0: float) -> list[float]:
    return [v for t, v in zip(record.t, record[column]) if t >= t0]


def summary(record: RunRecord, sheet: int = 0) -> dict[str, Optional[float]]:
    """Headline numbers of a run, one row of the sweep table."""
    pre = sheet_prefix(sheet)
    out: dict[str, Optional[float]] = {
        "t_end": record.t_end,
        "pinch_time": None,
        "drop_time": None,
        "cum_G": None,
        "final_delta_mu": None,
    }
    if pre + "G" in record.columns:
        out["pinch_time"] = pinch_time(record, sheet)
        out["drop_time"] = production_drop_time(record, sheet)
        out["cum_G"] = record[pre + "cum_G"][-1]
        out["final_delta_mu"] = record[pre + "delta_mu"][-1]
    return out
