"""Bridge between the Goodwin economy and the resource sheets.

Output becomes physical demand through a scale ``kappa`` (resource units
per currency unit), delivered goods flow back as output, and capital lowers
production friction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .intensity import IntensityPolicy
from .sheet import SheetParams, max_production, recycling_max_intensity

#: Friction left once capital is arbitrarily large.
FRICTION_FLOOR = 4.0e-5


class CapitalExhausted(ArithmeticError):
    pass


@dataclass(frozen=True)
class CouplingParams:
    """Coupling knobs.

    ``kappa`` is the units bridge; when ``None`` it is calibrated at t = 0 so
    the initial demand equals ``demand_fraction`` of the lead sheet's
    initial maximal production. Each sheet's own ``R_P`` acts as the
    reference friction of the capital law.
    """

    kappa: Optional[float] = None
    demand_fraction: float = 0.12
    friction_law: bool = True

    def __post_init__(self):
        if self.kappa is not None and not self.kappa > 0:
            raise ValueError("kappa must be > 0")
        if not self.demand_fraction > 0:
            raise ValueError("demand_fraction must be > 0")


def friction_from_capital(K: float, K0: float, R_P0: float) -> float:
    if not K > 0:
        raise CapitalExhausted(f"capital exhausted: K={K!r}")
    return R_P0 * K0 / K + FRICTION_FLOOR


def demand_from_economy(Y: float, kappa: float) -> float:
    return kappa * Y


def deliver_to_economy(G_D_satisfied: float, kappa: float) -> float:
    return G_D_satisfied / kappa


def calibrate_kappa(Y0: float, delta_mu0: float, R_P0: float, demand_fraction: float) -> float:
    """Scale putting the initial demand at ``demand_fraction`` of maximal production."""
    return demand_fraction * max_production(delta_mu0, R_P0) / Y0


def fan_out_intensity(J_global: float, sheets: Sequence[SheetParams]) -> list[float]:
    """Per-sheet demanded production intensity ``n_P * J``."""
    if J_global < 0:
        raise ValueError("J_global must be >= 0")
    return [sp.n_P * J_global for sp in sheets]


def recycling_intensity(
    policy: IntensityPolicy, params: SheetParams, mu_L: float, J_global: float
) -> float:
    """Forced-recycling intensity, clamped to the physical range ``[0, J_R^max]``."""
    j_max = max(recycling_max_intensity(mu_L, params.R_R), 0.0)
    if policy.recycling_mode == "at_max":
        return j_max
    return min(params.n_R * J_global, j_max)
