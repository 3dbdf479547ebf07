"""Choosing the operating intensity of a sheet.

The demand-matching intensity solves ``-R_P J^2 + Δμ J - G_D = 0``; the
policies below pick a root, fall back to the maximal-power intensity when
demand cannot be met, and the rationing rule decides how much of the demand
is actually delivered.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

#: Relative tolerance on the discriminant for declaring a double root.
TANGENT_RTOL = 1e-12


@dataclass(frozen=True)
class TwoRoots:
    lo: float
    hi: float


@dataclass(frozen=True)
class Tangent:
    J: float


@dataclass(frozen=True)
class Infeasible:
    discriminant: float


RootSet = Union[TwoRoots, Tangent, Infeasible]

MODES = ("max", "optimal", "fraction")
RECYCLING_MODES = ("at_max", "proportional")


@dataclass(frozen=True)
class IntensityPolicy:
    """How a sheet picks its production and recycling intensities.

    ``mode`` is ``"max"`` (maximal power), ``"optimal"`` (lower demand root,
    capped at maximal power) or ``"fraction"`` (``fraction`` times the
    optimal intensity). ``recycling_mode`` is ``"at_max"`` or
    ``"proportional"``, the latter using the sheet's ``n_R``.
    """

    mode: str = "optimal"
    fraction: float = 1.0
    recycling_mode: str = "at_max"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode={self.mode!r} not one of {MODES}")
        if self.recycling_mode not in RECYCLING_MODES:
            raise ValueError(f"recycling_mode={self.recycling_mode!r} not one of {RECYCLING_MODES}")
        if not 0 < self.fraction <= 1:
            raise ValueError(f"fraction={self.fraction!r} must lie in (0, 1]")


def solve_demand_intensity(delta_mu: float, R_P: float, G_D: float) -> RootSet:
    """Real roots of ``-R_P J^2 + Δμ J - G_D = 0`` in ascending order.

    The larger-magnitude root is computed first and the other one from the
    product of roots ``G_D / R_P``, which keeps the small root accurate when
    ``G_D`` is tiny compared to the maximal production.
    """
    if R_P <= 0:
        raise ValueError("R_P must be > 0")
    if G_D < 0:
        raise ValueError("G_D must be >= 0")
    disc = delta_mu * delta_mu - 4.0 * R_P * G_D
    scale = max(delta_mu * delta_mu, 4.0 * R_P * G_D)
    if abs(disc) <= TANGENT_RTOL * scale:
        return Tangent(delta_mu / (2.0 * R_P))
    if disc < 0:
        return Infeasible(disc)
    # R_P J^2 - Δμ J + G_D = 0, so J = (Δμ ± sqrt(disc)) / (2 R_P)
    sq = math.sqrt(disc)
    q = 0.5 * (delta_mu + math.copysign(sq, delta_mu))
    if q == 0.0:
        return TwoRoots(0.0, 0.0)
    big = q / R_P
    small = G_D / q
    return TwoRoots(min(big, small), max(big, small))


def optimal_intensity(delta_mu: float, R_P: float, G_D: float) -> float:
    """Lower demand root, never above the maximal-power intensity.

    When no root exists the sheet runs flat out at ``Δμ / (2 R_P)``.
    Non-positive driving force yields zero. Same arithmetic as
    :func:`solve_demand_intensity`, without building the root set.
    """
    if R_P <= 0:
        raise ValueError("R_P must be > 0")
    if delta_mu <= 0:
        return 0.0
    j_max = delta_mu / (2.0 * R_P)
    disc = delta_mu * delta_mu - 4.0 * R_P * G_D
    if disc <= TANGENT_RTOL * max(delta_mu * delta_mu, 4.0 * R_P * G_D):
        return j_max
    # with Δμ > 0 the small root is G_D / q and the large one q / R_P >= j_max
    lo = G_D / (0.5 * (delta_mu + math.sqrt(disc)))
    return lo if lo < j_max else j_max


def policy_intensity(policy: IntensityPolicy, delta_mu: float, R_P: float, G_D: float) -> float:
    if delta_mu <= 0:
        return 0.0
    if policy.mode == "max":
        return delta_mu / (2.0 * R_P)
    j = optimal_intensity(delta_mu, R_P, G_D)
    if policy.mode == "fraction":
        j *= policy.fraction
    return j


def lag_intensity(J_P_current: float, J_P_demanded: float, tau: float, dt: float) -> float:
    """Exact one-step update of ``dJ/dt = (J_D - J) / tau`` with ``J_D`` held."""
    if dt <= 0:
        raise ValueError("dt must be > 0")
    if tau < 0:
        raise ValueError("tau must be >= 0")
    if tau == 0:
        return J_P_demanded
    return J_P_demanded + (J_P_current - J_P_demanded) * math.exp(-dt / tau)


def satisfied_demand(G: float, G_D: float, X_S: float) -> float:
    """Rationing rule: full demand if production or the buffer covers it."""
    if G - G_D > 0 or X_S > 0:
        return G_D
    return G


def consumption_rate(G: float, G_D: float, X_S: float, dt: float) -> float:
    """Goods drawn from production plus buffer during one step of length ``dt``.

    Same branches as :func:`satisfied_demand`, except the buffer draw
    ``G_D - G`` is capped at ``X_S / dt`` so the buffer cannot be overdrawn
    within a step. Negative production is never consumed.
    """
    if G >= G_D:
        return G_D
    G = max(G, 0.0)
    if X_S > 0:
        return G + min(G_D - G, X_S / dt)
    return G
