"""Goodwin growth cycle with population, capital, prices and profits."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional

log = logging.getLogger(__name__)


class EconomyCollapsed(ArithmeticError):
    pass


@dataclass(frozen=True)
class EconParams:
    nu: float = 2.89
    alpha_g: float = 2.26e-2
    q: float = 2.7e-2
    P_N: float = 7.059e9
    delta: float = 6.25e-2
    phi0: float = -0.73
    phi1: float = 1.08
    m: float = 0.2

    def __post_init__(self):
        if self.nu <= 0:
            raise ValueError("nu must be > 0")
        if self.delta < 0:
            raise ValueError("delta must be >= 0")
        if self.phi1 <= 0:
            raise ValueError("phi1 must be > 0")
        if self.m <= -1:
            raise ValueError("m must be > -1")
        if self.P_N <= 0:
            raise ValueError("P_N must be > 0")


@dataclass(frozen=True)
class EconState:
    omega: float
    lam: float
    N: float
    w: float
    Y: float
    K: float
    a: float
    p: float

    @classmethod
    def initial(
        cls,
        params: EconParams,
        omega: float = 0.58,
        lam: float = 0.69,
        N: float = 4.55e9,
        w: float = 11.98,
        Y: float = 64.45e9,
    ) -> "EconState":
        """State built from the five observed initial values.

        Productivity follows from ``a = Y / (lam N)`` and capital from
        ``K = nu Y``.
        """
        L = lam * N
        a = Y / L
        return cls(
            omega=omega, lam=lam, N=N, w=w, Y=Y, K=params.nu * Y, a=a,
            p=price(w, L, Y, params.m),
        )

    @property
    def L(self) -> float:
        return self.lam * self.N


@dataclass(frozen=True)
class EconDerivative:
    omega: float
    lam: float
    N: float
    w: float
    Y: float
    K: float
    a: float


def phillips(lam: float, params: EconParams) -> float:
    return params.phi0 + params.phi1 * lam


def population_growth(N: float, params: EconParams) -> float:
    return params.q * (1.0 - N / params.P_N)


def price(w: float, L: float, Y: float, m: float) -> float:
    """Markup price ``(1 + m) w L / Y`` on unit labour cost."""
    if not Y > 0:
        raise EconomyCollapsed(f"economy collapsed: output Y={Y!r}")
    return (1.0 + m) * w * L / Y


def investment(Y: float, omega: float) -> float:
    return Y * (1.0 - omega)


def profit_and_investment(state: EconState, params: EconParams) -> tuple[float, float]:
    """Nominal profits ``pY - wL`` and real investment ``Y (1 - omega)``."""
    Pi = state.p * state.Y - state.w * state.L
    return Pi, investment(state.Y, state.omega)


def goodwin_rates(
    omega: float,
    lam: float,
    N: float,
    w: float,
    Y: float,
    K: float,
    a: float,
    params: EconParams,
    n: Optional[float] = None,
) -> tuple[float, float, float, float, float, float, float]:
    """Rates of ``(omega, lam, N, w, Y, K, a)`` on plain floats."""
    if n is None:
        n = params.q * (1.0 - N / params.P_N)
    phi = params.phi0 + params.phi1 * lam
    profit_rate = (1.0 - omega) / params.nu
    return (
        omega * (phi - params.alpha_g),
        lam * (profit_rate - params.alpha_g - n - params.delta),
        n * N,
        w * phi,
        Y * (profit_rate - params.delta),
        Y * (1.0 - omega) - params.delta * K,
        params.alpha_g * a,
    )


def econ_derivatives(
    state: EconState,
    params: EconParams,
    delivered_output: Optional[float] = None,
    n_override: Optional[float] = None,
) -> EconDerivative:
    """Time derivatives of the Goodwin block.

    ``delivered_output`` replaces ``Y`` before any output-driven rate is
    formed (the coupled, possibly rationed case). ``n_override`` freezes the
    labour-force growth rate, which is only useful for fixed-point checks.
    """
    Y = state.Y if delivered_output is None else delivered_output
    rates = goodwin_rates(
        state.omega, state.lam, state.N, state.w, Y, state.K, state.a, params, n_override
    )
    return EconDerivative(*rates)


def equilibrium(params: EconParams, n: float) -> tuple[float, float]:
    """Interior fixed point ``(omega*, lambda*)`` at constant labour growth ``n``."""
    omega = 1.0 - params.nu * (params.alpha_g + n + params.delta)
    lam = (params.alpha_g - params.phi0) / params.phi1
    return omega, lam


def first_integral(omega: float, lam: float, params: EconParams, n: float) -> float:
    """Conserved quantity of the (omega, lambda) cycle at constant ``n``."""
    a1 = params.alpha_g - params.phi0
    b = 1.0 / params.nu - params.alpha_g - n - params.delta
    return params.phi1 * lam - a1 * math.log(lam) + omega / params.nu - b * math.log(omega)


def transaction_matrix(state: EconState) -> dict[str, tuple[float, float, float]]:
    """Rows of the two-sector transaction matrix.

    Columns are (households, firms current, firms capital). Consumption is
    the output that is not invested, ``pC = pY - pI``.
    """
    pI = state.p * investment(state.Y, state.omega)
    pC = state.p * state.Y - pI
    wL = state.w * state.L
    return {
        "consumption": (-pC, pC, 0.0),
        "investment": (0.0, pI, -pI),
        "wages": (wL, -wL, 0.0),
    }


def financial_balances(state: EconState) -> tuple[float, float, float]:
    """Column sums ``(S_h, Pi, -pI)`` of :func:`transaction_matrix`."""
    rows = transaction_matrix(state).values()
    S_h, Pi, capital = (sum(col) for col in zip(*rows))
    return S_h, Pi, capital


def check_soft_bounds(state: EconState, params: EconParams) -> list[str]:
    """Plausibility warnings; the cycle may legitimately overshoot these."""
    issues = []
    if not 0 < state.omega < 1.5:
        issues.append(f"wage share {state.omega:.4g} outside (0, 1.5)")
    if not 0 < state.lam <= 1:
        issues.append(f"employment rate {state.lam:.4g} outside (0, 1]")
    if state.N > params.P_N:
        issues.append(f"workforce {state.N:.4g} above ceiling {params.P_N:.4g}")
    if state.K <= 0:
        issues.append(f"capital {state.K:.4g} not positive")
    for msg in issues:
        log.warning(msg)
    return issues


def with_price(state: EconState, params: EconParams) -> EconState:
    return replace(state, p=price(state.w, state.L, state.Y, params.m))
