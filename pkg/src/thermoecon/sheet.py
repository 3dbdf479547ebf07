"""Algebraic relations of a single resource sheet.

Everything here is a pure function of its arguments: potentials, production
and recycling flows, natural regeneration and the entropy/exergy
diagnostics. Time integration lives in :mod:`thermoecon.integrator`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

#: Below this sink potential the entropy production has no gauge.
EPS_DIV = 1e-9
#: Slack allowed on stock bounds before ``potential`` raises.
STOCK_TOL = 1e-9


class DomainError(ValueError):
    """Argument outside the physical domain of a sheet relation."""


class RecyclingPolicyViolation(ValueError):
    """Recycling intensity beyond the range where the waste intake stays positive."""


@dataclass(frozen=True)
class SheetParams:
    X_T: float = 1000.0
    alpha: float = 1.0
    r: float = 0.025
    s: float = 0.2
    R_P: float = 1e-3
    R_R: float = 1e-3
    n_P: float = 1.0
    n_R: float = 0.0
    tau: float = 0.0
    # divide potentials by tanh(alpha) so that a full well sits at 1
    normalized_potentials: bool = True

    def __post_init__(self):
        checks = [
            ("X_T", self.X_T > 0, "must be > 0"),
            ("R_P", self.R_P > 0, "must be > 0"),
            ("R_R", self.R_R > 0, "must be > 0"),
            ("alpha", 0 < self.alpha <= 1, "must lie in (0, 1]"),
            ("s", 0 <= self.s <= 1, "must lie in [0, 1]"),
            ("r", self.r >= 0, "must be >= 0"),
            ("tau", self.tau >= 0, "must be >= 0"),
            ("n_P", self.n_P >= 0, "must be >= 0"),
            ("n_R", self.n_R >= 0, "must be >= 0"),
        ]
        for name, ok, why in checks:
            if not ok:
                raise ValueError(f"{name}={getattr(self, name)!r} {why}")

    @property
    def mu_scale(self) -> float:
        return math.tanh(self.alpha) if self.normalized_potentials else 1.0


@dataclass(frozen=True)
class SheetState:
    X_H: float
    X_L: float = 0.0
    X_S: float = 0.0
    J_P: float = 0.0

    @classmethod
    def pristine(cls, params: SheetParams) -> "SheetState":
        """Full resource well, empty sink and buffer."""
        return cls(X_H=params.X_T, X_L=0.0, X_S=0.0, J_P=0.0)

    def total(self) -> float:
        return self.X_H + self.X_L + self.X_S


@dataclass(frozen=True)
class FlowReport:
    """Instantaneous fluxes and diagnostics of one sheet.

    Diagnostics that involve a guarded division (``eta``, ``epsilon``,
    ``S_dot``) are ``None`` where undefined.
    """

    mu_H: float
    mu_L: float
    J_P: float
    J_P_max: float
    J_R: float
    R_P: float
    F_HP: float
    F_LP: float
    G: float
    F_HR: float
    F_LR: float
    F_RIn: float
    F_NR: float
    G_D: float
    G_D_satisfied: float
    eta: Optional[float]
    epsilon: Optional[float]
    S_dot: Optional[float]
    E_HP_dot: float

    @property
    def delta_mu(self) -> float:
        return self.mu_H - self.mu_L


@dataclass(frozen=True)
class Diagnostics:
    eta: Optional[float]
    epsilon: Optional[float]
    S_dot: Optional[float]
    E_HP_dot: float
    S_HP_dot: float
    S_LP_dot: Optional[float]


def potential(stock: float, params: SheetParams) -> float:
    """Potential of a stock: ``tanh(alpha * stock / X_T)``.

    With ``params.normalized_potentials`` the value is divided by
    ``tanh(alpha)`` so a full well has potential 1.
    """
    X_T = params.X_T
    if stock < -STOCK_TOL * X_T or stock > X_T * (1 + STOCK_TOL):
        raise DomainError(f"stock {stock!r} outside [0, X_T={X_T!r}]")
    return math.tanh(params.alpha * stock / X_T) / params.mu_scale


def production_flows(mu_H: float, mu_L: float, R_P: float, J_P: float) -> tuple[float, float, float]:
    """Return ``(F_HP, F_LP, G)`` for production intensity ``J_P``.

    ``G`` may be negative past the short-circuit intensity ``Δμ/R_P``;
    callers decide what to do with that.
    """
    F_HP = mu_H * J_P
    F_LP = mu_L * J_P + R_P * J_P * J_P
    return F_HP, F_LP, F_HP - F_LP


def forced_recycling_flows(
    mu_H: float, mu_L: float, R_R: float, J_R: float, *, strict: bool = True
) -> tuple[float, float, float]:
    """Return ``(F_HR, F_LR, F_RIn)`` for recycling intensity ``J_R``."""
    F_HR = mu_H * J_R
    F_LR = mu_L * J_R - R_R * J_R * J_R
    if strict and F_LR < 0:
        raise RecyclingPolicyViolation(
            f"J_R={J_R!r} drives the waste intake negative (F_LR={F_LR!r})"
        )
    return F_HR, F_LR, F_HR - F_LR


def recycling_max_intensity(mu_L: float, R_R: float) -> float:
    return mu_L / (2.0 * R_R)


def production_max_intensity(delta_mu: float, R_P: float) -> float:
    """Intensity of maximal useful work, ``Δμ / (2 R_P)``."""
    return delta_mu / (2.0 * R_P)


def max_production(delta_mu: float, R_P: float) -> float:
    return delta_mu * delta_mu / (4.0 * R_P)


def natural_recycling(X_H: float, params: SheetParams) -> float:
    """Logistic regeneration with an Allee threshold.

    Negative below the threshold fraction ``s`` (the stock shrinks further).
    ``s == 0`` falls back to plain Verhulst growth.
    """
    X_T = params.X_T
    if X_H < -STOCK_TOL * X_T or X_H > X_T * (1 + STOCK_TOL):
        raise DomainError(f"X_H {X_H!r} outside [0, X_T={X_T!r}]")
    T_H = X_H / X_T
    logistic = params.r * X_H * (1.0 - T_H)
    if params.s == 0:
        return logistic
    return logistic * (T_H / params.s - 1.0)


def diagnostics(mu_H: float, mu_L: float, R_P: float, J_P: float) -> Diagnostics:
    F_HP, F_LP, G = production_flows(mu_H, mu_L, R_P, J_P)
    delta_mu = mu_H - mu_L
    E_HP_dot = delta_mu * J_P
    eta = G / F_HP if F_HP > 0 else None
    # G / E_HP written in closed form so the J_P -> 0 limit is exact
    epsilon = 1.0 - R_P * J_P / delta_mu if delta_mu > 0 else None
    if mu_L > EPS_DIV:
        S_dot = R_P * J_P * J_P / mu_L
        S_LP_dot = J_P + S_dot
    else:
        S_dot = S_LP_dot = None
    return Diagnostics(
        eta=eta,
        epsilon=epsilon,
        S_dot=S_dot,
        E_HP_dot=E_HP_dot,
        S_HP_dot=J_P,
        S_LP_dot=S_LP_dot,
    )


def stock_derivatives(
    F_HP: float,
    F_LP: float,
    G: float,
    F_HR: float,
    F_LR: float,
    F_RIn: float,
    F_NR: float,
    consumption: float,
) -> tuple[float, float, float]:
    """Balance equations for ``(X_H, X_L, X_S)``.

    ``consumption`` is the goods flow leaving the buffer/production towards
    the sink (the satisfied demand). The three rates sum to zero whenever
    ``G = F_HP - F_LP`` and ``F_RIn = F_HR - F_LR``.
    """
    dX_H = F_NR - F_HP + F_HR - F_RIn
    dX_L = -F_NR + F_LP - F_LR + consumption
    dX_S = G - consumption
    return dX_H, dX_L, dX_S
