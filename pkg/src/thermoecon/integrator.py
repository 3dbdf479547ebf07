"""Fixed-step RK4 integration of sheets and economy, with recording.

The joint state is flattened into a list of floats. Each sheet owns six
slots ``(X_H, X_L, X_S, J_P, cum_F_HP, cum_G)``; the last two are running
integrals used by summaries. The economy, when present, owns
``(omega, lam, N, w, Y, K, a)``. Intensities are re-resolved from the
current potentials at every derivative evaluation.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .coupling import FRICTION_FLOOR, calibrate_kappa
from .economy import EconomyCollapsed, EconState, goodwin_rates, price
from .intensity import optimal_intensity
from .scenario import ScenarioSpec
from .sheet import EPS_DIV, FlowReport, SheetState

log = logging.getLogger(__name__)

#: Negative stock (relative to X_T) tolerated and clamped after a step.
TOL_CLAMP = 1e-6
SHEET_SLOTS = 6
ECON_SLOTS = 7


class StepRejected(ArithmeticError):
    def __init__(self, t: float, message: str):
        super().__init__(f"step rejected at t={t:.6g}: {message}")
        self.t = t


def rk4_step(f: Callable[[Sequence[float]], list[float]], y: Sequence[float], h: float) -> list[float]:
    """Classical fourth-order Runge-Kutta step for an autonomous system."""
    n = len(y)
    k1 = f(y)
    y2 = [y[i] + 0.5 * h * k1[i] for i in range(n)]
    k2 = f(y2)
    y3 = [y[i] + 0.5 * h * k2[i] for i in range(n)]
    k3 = f(y3)
    y4 = [y[i] + h * k3[i] for i in range(n)]
    k4 = f(y4)
    h6 = h / 6.0
    return [y[i] + h6 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]) for i in range(n)]


def integrate(f, y0: Sequence[float], t_end: float, h: float) -> list[float]:
    """Integrate ``y' = f(y)`` from 0 to ``t_end`` in equal RK4 steps of about ``h``."""
    nsteps = max(1, round(t_end / h))
    h = t_end / nsteps
    y = list(y0)
    for _ in range(nsteps):
        y = rk4_step(f, y, h)
    return y


@dataclass
class SimState:
    t: float
    sheets: list[SheetState]
    econ: Optional[EconState] = None
    reports: list[FlowReport] = field(default_factory=list)
    cum_F_HP: list[float] = field(default_factory=list)
    cum_G: list[float] = field(default_factory=list)


class Model:
    """Right-hand side of the joint system for one scenario."""

    def __init__(self, spec: ScenarioSpec):
        self.spec = spec
        self.dt = spec.dt
        self.sheets = list(spec.sheets)
        self.params = [s.params for s in self.sheets]
        self.policies = [s.policy for s in self.sheets]
        self.n_sheets = len(self.sheets)
        self.has_econ = spec.mode in ("goodwin", "coupled")
        self.coupled = spec.mode == "coupled"
        self.econ_offset = SHEET_SLOTS * self.n_sheets
        self.econ_params = spec.econ
        self._econ0 = EconState.initial(spec.econ, **vars(spec.econ_initial)) if self.has_econ else None
        self.K0 = self._econ0.K if self.has_econ else None
        self.friction_law = self.coupled and spec.coupling.friction_law
        # per-sheet constants for the hot loop
        self._consts = [
            (p.alpha / p.X_T, 1.0 / p.mu_scale, p.X_T, p.R_P, p.R_R, p.n_P, p.n_R, p.tau, p.r, p.s,
             pol.mode, pol.fraction, pol.recycling_mode == "at_max")
            for p, pol in zip(self.params, self.policies)
        ]
        self.kappa = None
        if self.coupled:
            self.kappa = spec.coupling.kappa
            if self.kappa is None:
                lead = self.sheets[0]
                st = lead.initial_state()
                dmu0 = self._mu(0, st.X_H) - self._mu(0, st.X_L)
                self.kappa = calibrate_kappa(
                    self._econ0.Y, dmu0, lead.params.R_P + FRICTION_FLOOR, spec.coupling.demand_fraction
                )

    # -- helpers -----------------------------------------------------------

    def _mu(self, i: int, x: float) -> float:
        p = self.params[i]
        # clip tiny negative stocks left inside RK stages
        x = min(max(x, 0.0), p.X_T)
        return math.tanh(p.alpha * x / p.X_T) / p.mu_scale

    def friction(self, i: int, K: Optional[float]) -> float:
        R_P = self.params[i].R_P
        if self.friction_law:
            if not K > 0:
                raise EconomyCollapsed(f"capital exhausted: K={K!r}")
            return R_P * self.K0 / K + FRICTION_FLOOR
        return R_P

    # -- packing -------------------------------------------------------------

    def initial_state(self) -> SimState:
        return SimState(
            t=0.0,
            sheets=[s.initial_state() for s in self.sheets],
            econ=self._econ0,
            cum_F_HP=[0.0] * self.n_sheets,
            cum_G=[0.0] * self.n_sheets,
        )

    def pack(self, state: SimState) -> list[float]:
        y: list[float] = []
        for i, s in enumerate(state.sheets):
            y += [s.X_H, s.X_L, s.X_S, s.J_P, state.cum_F_HP[i], state.cum_G[i]]
        if self.has_econ:
            e = state.econ
            y += [e.omega, e.lam, e.N, e.w, e.Y, e.K, e.a]
        return y

    def unpack(self, y: Sequence[float], t: float) -> SimState:
        reports, delivered = self.evaluate(y)
        sheets = []
        for i in range(self.n_sheets):
            o = SHEET_SLOTS * i
            sheets.append(SheetState(X_H=y[o], X_L=y[o + 1], X_S=y[o + 2], J_P=reports[i].J_P))
        econ = None
        if self.has_econ:
            omega, lam, N, w, Y, K, a = y[self.econ_offset:self.econ_offset + ECON_SLOTS]
            econ = EconState(omega=omega, lam=lam, N=N, w=w, Y=Y, K=K, a=a,
                             p=price(w, lam * N, Y, self.econ_params.m))
        return SimState(
            t=t, sheets=sheets, econ=econ, reports=reports,
            cum_F_HP=[y[SHEET_SLOTS * i + 4] for i in range(self.n_sheets)],
            cum_G=[y[SHEET_SLOTS * i + 5] for i in range(self.n_sheets)],
        )

    # -- the vector field ------------------------------------------------------

    def _resolve(self, y: Sequence[float], out: Optional[list[float]] = None):
        """Per-sheet flows at state ``y``.

        Returns ``(rows, frac, G_D)`` where each row holds the quantities
        needed for the reports, ``frac`` is the smallest satisfied fraction
        of demand over active sheets and ``G_D`` the aggregate demand
        addressed by the kernel. When ``out`` is given the sheet rates are
        written into it instead and ``rows`` stays empty.

        The relations are those of :mod:`thermoecon.sheet`,
        :mod:`thermoecon.intensity` and :mod:`thermoecon.coupling`, inlined
        because this runs four times per step.
        """
        K_ratio = 1.0
        if self.coupled:
            Y = y[self.econ_offset + 4]
            K = y[self.econ_offset + 5]
            G_D = self.kappa * Y if Y > 0 else 0.0
            if self.friction_law:
                if not K > 0:
                    raise EconomyCollapsed(f"capital exhausted: K={K!r}")
                K_ratio = self.K0 / K
        else:
            G_D = self.spec.demand
        tanh = math.tanh
        dt = self.dt
        rows = []
        J_global = 0.0
        frac = 1.0
        o = 0
        for i, (k_mu, inv_scale, X_T, R_P0, R_R, n_P, n_R, tau, r, s, mode, fraction, at_max) in enumerate(self._consts):
            X_H, X_L, X_S, J_lag = y[o], y[o + 1], y[o + 2], y[o + 3]
            o += SHEET_SLOTS
            # clip tiny negative stocks left inside RK stages
            X_H = 0.0 if X_H < 0.0 else (X_T if X_H > X_T else X_H)
            X_L = 0.0 if X_L < 0.0 else (X_T if X_L > X_T else X_L)
            mu_H = tanh(k_mu * X_H) * inv_scale
            mu_L = tanh(k_mu * X_L) * inv_scale
            dmu = mu_H - mu_L
            R_P = R_P0 * K_ratio + FRICTION_FLOOR if self.friction_law else R_P0
            demand_i = n_P * G_D
            if i == 0:
                # the lead sheet paces the global intensity
                if mode == "max":
                    J_lead = dmu / (2.0 * R_P) if dmu > 0 else 0.0
                else:
                    J_lead = optimal_intensity(dmu, R_P, demand_i)
                    if mode == "fraction":
                        J_lead *= fraction
                J_global = J_lead / n_P if n_P > 0 else 0.0
            J_D = n_P * J_global
            J_P = J_lag if tau > 0 else J_D
            F_HP = mu_H * J_P
            F_LP = mu_L * J_P + R_P * J_P * J_P
            G = F_HP - F_LP
            J_R = mu_L / (2.0 * R_R) if mu_L > 0 else 0.0
            if not at_max and n_R * J_global < J_R:
                J_R = n_R * J_global
            F_HR = mu_H * J_R
            F_LR = mu_L * J_R - R_R * J_R * J_R
            F_RIn = F_HR - F_LR
            T_H = X_H / X_T
            F_NR = r * X_H * (1.0 - T_H)
            if s > 0:
                F_NR *= T_H / s - 1.0
            # consumption with the buffer draw capped at what one step can take
            if G >= demand_i:
                consumed = demand_i
            else:
                Gp = G if G > 0.0 else 0.0
                consumed = Gp + min(demand_i - Gp, X_S / dt) if X_S > 0 else Gp
            if demand_i > 0 and n_P > 0:
                f = consumed / demand_i
                if f < frac:
                    frac = f
            if out is None:
                rows.append((mu_H, mu_L, R_P, J_D, J_P, J_R, F_HP, F_LP, G, F_HR, F_LR, F_RIn, F_NR,
                             demand_i, consumed))
            else:
                b = o - SHEET_SLOTS
                out[b] = F_NR - F_HP + F_HR - F_RIn
                out[b + 1] = -F_NR + F_LP - F_LR + consumed
                out[b + 2] = G - consumed
                out[b + 3] = (J_D - J_P) / tau if tau > 0 else 0.0
                out[b + 4] = F_HP
                out[b + 5] = G
        return rows, frac, G_D

    def derivatives(self, y: Sequence[float]) -> list[float]:
        out = [0.0] * len(y)
        _, frac, _ = self._resolve(y, out)
        if self.has_econ:
            e = self.econ_offset
            omega, lam, N, w, Y, K, a = y[e:e + ECON_SLOTS]
            if self.coupled:
                Y *= frac
            out[e:e + ECON_SLOTS] = goodwin_rates(omega, lam, N, w, Y, K, a, self.econ_params)
        return out

    def evaluate(self, y: Sequence[float]) -> tuple[list[FlowReport], Optional[float]]:
        """Flow reports per sheet and the delivered output (coupled mode)."""
        rows, frac, G_D = self._resolve(y)
        reports = []
        for row in rows:
            (mu_H, mu_L, R_P, _, J_P, J_R, F_HP, F_LP, G, F_HR, F_LR, F_RIn, F_NR, demand_i, consumed) = row
            dmu = mu_H - mu_L
            reports.append(FlowReport(
                mu_H=mu_H, mu_L=mu_L, J_P=J_P,
                J_P_max=max(dmu, 0.0) / (2.0 * R_P), J_R=J_R, R_P=R_P,
                F_HP=F_HP, F_LP=F_LP, G=G, F_HR=F_HR, F_LR=F_LR, F_RIn=F_RIn, F_NR=F_NR,
                G_D=demand_i,
                # rationing as seen by the economy, independent of the step size
                G_D_satisfied=demand_i if consumed >= demand_i else consumed,
                eta=G / F_HP if F_HP > 0 else None,
                epsilon=1.0 - R_P * J_P / dmu if dmu > 0 else None,
                S_dot=R_P * J_P * J_P / mu_L if mu_L > EPS_DIV else None,
                E_HP_dot=dmu * J_P,
            ))
        delivered = None
        if self.coupled:
            delivered = y[self.econ_offset + 4] * frac
        return reports, delivered

    # -- post-step guards --------------------------------------------------

    def enforce(self, y: list[float], t: float) -> list[float]:
        """Clamp small negative stocks, rationed output, and lagged state.

        A clamped deficit is taken from the paired stock so that the sheet
        total is unchanged. Deficits larger than ``TOL_CLAMP * X_T`` mean the
        step was too large.
        """
        for i in range(self.n_sheets):
            o = SHEET_SLOTS * i
            X_T = self.params[i].X_T
            for slot, pair in ((0, 1), (1, 0), (2, 1)):
                x = y[o + slot]
                if x < 0:
                    if x < -TOL_CLAMP * X_T:
                        raise StepRejected(t, f"sheet {i} stock slot {slot} went to {x:.6g}")
                    log.debug("clamping sheet %d slot %d deficit %.3g at t=%.6g", i, slot, x, t)
                    y[o + pair] += x
                    y[o + slot] = 0.0
        if self.coupled:
            rows, frac, _ = self._resolve(y)
            e = self.econ_offset
            if frac < 1.0:
                y[e + 4] *= frac
            if not y[e + 4] > 0:
                raise EconomyCollapsed(f"economy collapsed: output Y={y[e + 4]!r}")
        return y


def step(state: SimState, model: Model, dt: float) -> SimState:
    """Advance ``state`` by one RK4 step of length ``dt``."""
    model.dt = dt
    y = rk4_step(model.derivatives, model.pack(state), dt)
    t = state.t + dt
    y = model.enforce(y, t)
    return model.unpack(y, t)


SHEET_COLUMNS = (
    "X_H", "X_L", "X_S", "J_P", "J_P_max", "J_R", "R_P",
    "mu_H", "mu_L", "delta_mu",
    "F_HP", "F_LP", "G", "G_D", "G_D_satisfied",
    "F_HR", "F_LR", "F_RIn", "F_NR", "F_HR_norm", "F_NR_norm",
    "eta", "epsilon", "S_dot", "E_HP_dot",
    "cum_F_HP", "cum_G",
)
ECON_COLUMNS = ("omega", "lam", "N", "w", "Y", "K", "a", "p", "Pi", "I", "Y_delivered", "capital_ratio")


def sheet_prefix(i: int) -> str:
    return "" if i == 0 else f"s{i}_"


def columns_for(spec: ScenarioSpec) -> list[str]:
    cols = ["t"]
    for i in range(len(spec.sheets)):
        cols += [sheet_prefix(i) + c for c in SHEET_COLUMNS]
    if spec.mode in ("goodwin", "coupled"):
        cols += list(ECON_COLUMNS)
    return cols


@dataclass
class RunRecord:
    """Sampled time series of one run, stored row-wise."""

    name: str
    columns: list[str]
    rows: list[list[Optional[float]]] = field(default_factory=list)
    status: str = "completed"
    t_end: float = 0.0

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> list[Optional[float]]:
        j = self.columns.index(name)
        return [row[j] for row in self.rows]

    def __getitem__(self, name: str) -> list[Optional[float]]:
        return self.column(name)

    @property
    def t(self) -> list[float]:
        return self.column("t")

    def samples(self) -> list[dict[str, Optional[float]]]:
        return [dict(zip(self.columns, row)) for row in self.rows]


def _sample_row(model: Model, y: Sequence[float], t: float) -> list[Optional[float]]:
    state = model.unpack(y, t)
    row: list[Optional[float]] = [t]
    for i, (s, r) in enumerate(zip(state.sheets, state.reports)):
        row += [
            s.X_H, s.X_L, s.X_S, r.J_P, r.J_P_max, r.J_R, r.R_P,
            r.mu_H, r.mu_L, r.delta_mu,
            r.F_HP, r.F_LP, r.G, r.G_D, r.G_D_satisfied,
            r.F_HR, r.F_LR, r.F_RIn, r.F_NR,
            r.F_HR / s.X_L if s.X_L > 0 else None,
            r.F_NR / s.X_L if s.X_L > 0 else None,
            r.eta, r.epsilon, r.S_dot, r.E_HP_dot,
            state.cum_F_HP[i], state.cum_G[i],
        ]
    if state.econ is not None:
        e = state.econ
        _, delivered = model.evaluate(y)
        Pi = e.p * e.Y - e.w * e.L
        row += [
            e.omega, e.lam, e.N, e.w, e.Y, e.K, e.a, e.p, Pi, e.Y * (1.0 - e.omega),
            delivered if delivered is not None else e.Y,
            e.K / (model.econ_params.nu * e.Y),
        ]
    return row


def run(spec: ScenarioSpec, progress: Optional[Callable[[float], None]] = None) -> RunRecord:
    """Integrate ``spec`` from t = 0 to its horizon.

    Samples are taken every ``spec.stride`` time units. The run stops early
    with status ``"collapsed"`` when output vanishes, or when every sheet's
    production stays non-positive for ``spec.grace`` time units.
    :class:`StepRejected` propagates with the offending time.
    """
    model = Model(spec)
    dt = spec.dt
    nsteps = int(round(spec.horizon / dt))
    every = max(1, int(round(spec.stride / dt)))
    record = RunRecord(name=spec.name, columns=columns_for(spec))
    y = model.pack(model.initial_state())
    record.rows.append(_sample_row(model, y, 0.0))
    f = model.derivatives
    dead_since: Optional[float] = None
    for k in range(1, nsteps + 1):
        t = k * dt
        try:
            y = model.enforce(rk4_step(f, y, dt), t)
            if k % every and k != nsteps:
                continue
            record.rows.append(_sample_row(model, y, t))
        except EconomyCollapsed as exc:
            log.info("%s: %s at t=%.6g", spec.name, exc, t)
            record.status = "collapsed"
            break
        record.t_end = t
        if progress is not None:
            progress(t)
        if model.n_sheets:
            producing = any(model.evaluate(y)[0][i].G > 0 for i in range(model.n_sheets))
            if producing:
                dead_since = None
            elif dead_since is None:
                dead_since = t
            elif t - dead_since >= spec.grace:
                record.status = "collapsed"
                break
    return record
