"""Invariant checks over a finished run."""

from __future__ import annotations

from dataclasses import dataclass

from .integrator import RunRecord, sheet_prefix
from .scenario import ScenarioSpec

CONSERVATION_RTOL = 1e-6
# slack on inequalities that are exact in real arithmetic
INEQ_TOL = 1e-9


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str = ""


def check_record(record: RunRecord, spec: ScenarioSpec) -> list[CheckResult]:
    results = []
    t = record.t
    results.append(CheckResult(
        "time strictly increasing", all(b > a for a, b in zip(t, t[1:])),
    ))
    for i, sheet in enumerate(spec.sheets):
        pre = sheet_prefix(i)
        X_T = sheet.params.X_T
        X_H, X_L, X_S = record[pre + "X_H"], record[pre + "X_L"], record[pre + "X_S"]
        worst = max(abs(h + l + s - X_T) / X_T for h, l, s in zip(X_H, X_L, X_S))
        results.append(CheckResult(
            f"sheet {i}: conservation", worst < CONSERVATION_RTOL, f"max relative drift {worst:.3g}",
        ))
        low = min(min(X_H), min(X_L), min(X_S))
        results.append(CheckResult(f"sheet {i}: stocks non-negative", low >= 0, f"min stock {low:.3g}"))
        S_dot = [v for v in record[pre + "S_dot"] if v is not None]
        results.append(CheckResult(
            f"sheet {i}: entropy production >= 0", all(v >= 0 for v in S_dot),
        ))
        bad_eta = 0
        for eta, mu_H, mu_L in zip(record[pre + "eta"], record[pre + "mu_H"], record[pre + "mu_L"]):
            if eta is not None and mu_H > 0 and eta > 1.0 - mu_L / mu_H + INEQ_TOL:
                bad_eta += 1
        results.append(CheckResult(
            f"sheet {i}: efficiency below Carnot-like bound", bad_eta == 0, f"{bad_eta} violations",
        ))
        worst_eps = 0.0
        for eps, G, E in zip(record[pre + "epsilon"], record[pre + "G"], record[pre + "E_HP_dot"]):
            if eps is not None and E > 0:
                worst_eps = max(worst_eps, abs(eps - G / E))
        results.append(CheckResult(
            f"sheet {i}: exergy efficiency identity", worst_eps < 1e-9, f"max deviation {worst_eps:.3g}",
        ))
    return results
