"""Scenario descriptions, built-in presets and YAML scenario files."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import re
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Optional, Union

import yaml

from .coupling import CouplingParams
from .economy import EconParams
from .intensity import IntensityPolicy
from .sheet import SheetParams, SheetState

MODES = ("sheet", "goodwin", "coupled")


class _Loader(yaml.SafeLoader):
    """Safe loader that also reads ``1e-3`` (no dot) as a float."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"^[-+]?(?:[0-9][0-9_]*)(?:\.[0-9_]*)?[eE][-+]?[0-9]+$"),
    list("-+0123456789"),
)


class ScenarioError(ValueError):
    """Invalid scenario; ``path`` names the offending key."""

    def __init__(self, path: str, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason


@dataclass(frozen=True)
class SheetSpec:
    params: SheetParams = field(default_factory=SheetParams)
    policy: IntensityPolicy = field(default_factory=IntensityPolicy)
    # None means a full well with empty sink and buffer
    initial: Optional[SheetState] = None

    def initial_state(self) -> SheetState:
        return self.initial if self.initial is not None else SheetState.pristine(self.params)


@dataclass(frozen=True)
class EconInitial:
    omega: float = 0.58
    lam: float = 0.69
    N: float = 4.55e9
    w: float = 11.98
    Y: float = 64.45e9


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    mode: str = "sheet"
    sheets: tuple[SheetSpec, ...] = ()
    demand: float = 30.0
    econ: EconParams = field(default_factory=EconParams)
    econ_initial: EconInitial = field(default_factory=EconInitial)
    coupling: CouplingParams = field(default_factory=CouplingParams)
    horizon: float = 100.0
    dt: float = 1e-3
    stride: float = 0.1
    grace: float = 1.0
    description: str = ""

    def __post_init__(self):
        if self.mode not in MODES:
            raise ScenarioError("mode", f"{self.mode!r} not one of {MODES}")
        if self.mode in ("sheet", "coupled") and not self.sheets:
            raise ScenarioError("sheets", f"mode {self.mode!r} needs at least one sheet")
        if self.mode == "goodwin" and self.sheets:
            raise ScenarioError("sheets", "goodwin mode takes no sheets")
        if not (self.horizon >= 0 and math.isfinite(self.horizon)):
            raise ScenarioError("horizon", "must be a finite number >= 0")
        if not self.dt > 0:
            raise ScenarioError("dt", "must be > 0")
        if not self.stride >= self.dt:
            raise ScenarioError("stride", "must be >= dt")
        if not self.demand >= 0:
            raise ScenarioError("demand", "must be >= 0")
        if not self.grace >= 0:
            raise ScenarioError("grace", "must be >= 0")

    def with_overrides(self, **kw) -> "ScenarioSpec":
        return replace(self, **kw)

    def digest(self) -> str:
        """Stable hash of the scenario content, used to key sweep results."""
        blob = json.dumps(spec_to_dict(self), sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


# ----------------------------------------------------------------------
# Presets

_TABLE1 = SheetParams(X_T=1000.0, r=0.025, s=0.2, R_P=1e-3, R_R=1e-3)
_CASE_HORIZON = 100.0
_MACRO_HORIZON = 100.0


def _sheet_preset(name: str, description: str, params: SheetParams = _TABLE1, **policy) -> ScenarioSpec:
    return ScenarioSpec(
        name=name,
        mode="sheet",
        sheets=(SheetSpec(params=params, policy=IntensityPolicy(**policy)),),
        demand=30.0,
        horizon=_CASE_HORIZON,
        description=description,
    )


def _macro_preset(name: str, description: str, params: SheetParams, recycling_mode: str = "at_max") -> ScenarioSpec:
    return ScenarioSpec(
        name=name,
        mode="coupled",
        sheets=(SheetSpec(params=params, policy=IntensityPolicy("optimal", recycling_mode=recycling_mode)),),
        coupling=CouplingParams(kappa=MACRO_KAPPA),
        horizon=_MACRO_HORIZON,
        description=description,
    )


# Units bridge shared by the macro presets. The initial demand is 95 % of
# the initial maximal production of the R_P0 = 0.1 sheet (Δμ = 1), so 0.1 is
# about the largest friction that can still serve the starting economy.
MACRO_KAPPA = 0.95 * (1.0 / (4.0 * (0.1 + 4e-5))) / EconInitial().Y


def _build_presets() -> dict[str, ScenarioSpec]:
    presets = [
        _sheet_preset("case1-max", "Single sheet at maximal-power intensity", mode="max"),
        _sheet_preset("case2-optimal", "Single sheet at the optimal (lower-root) intensity", mode="optimal"),
        _sheet_preset("case3-weak", "Single sheet at 20 % of the optimal intensity", mode="fraction", fraction=0.2),
        _sheet_preset("recycling-s20", "Optimal intensity, Allee threshold at 20 %", mode="optimal"),
        _sheet_preset(
            "recycling-s10", "Optimal intensity, Allee threshold at 10 %",
            params=replace(_TABLE1, s=0.1), mode="optimal",
        ),
        _sheet_preset(
            "friction-low", "Optimal intensity, very low production friction",
            params=replace(_TABLE1, R_P=4e-5), mode="optimal",
        ),
        _sheet_preset(
            "friction-high", "Optimal intensity, high production friction",
            params=replace(_TABLE1, R_P=0.1), mode="optimal",
        ),
        ScenarioSpec(name="goodwin", mode="goodwin", horizon=_MACRO_HORIZON, description="Pure Goodwin pathway"),
        _macro_preset("macro-1", "Coupled economy, effectively infinite resource", replace(_TABLE1, X_T=1e8)),
        _macro_preset("macro-2", "Coupled economy, finite resource", replace(_TABLE1, X_T=100.0)),
        _macro_preset(
            "macro-3", "Coupled economy, finite resource, no forced recycling",
            replace(_TABLE1, X_T=100.0, n_R=0.0), recycling_mode="proportional",
        ),
        _macro_preset("macro-4", "Coupled economy, finite resource, high friction", replace(_TABLE1, X_T=100.0, R_P=0.1)),
    ]
    return {p.name: p for p in presets}


PRESETS: dict[str, ScenarioSpec] = _build_presets()


def list_presets() -> list[str]:
    return list(PRESETS)


# ----------------------------------------------------------------------
# Dict / YAML conversion


def spec_to_dict(spec: ScenarioSpec) -> dict[str, Any]:
    d = dataclasses.asdict(spec)
    d["sheets"] = [
        {k: v for k, v in sheet.items() if not (k == "initial" and v is None)} for sheet in d["sheets"]
    ]
    return d


def _build(cls, data: Any, path: str, nested: dict[str, Any] | None = None):
    """Strictly construct dataclass ``cls`` from a mapping."""
    if not isinstance(data, dict):
        raise ScenarioError(path or "<root>", f"expected a mapping, got {type(data).__name__}")
    known = {f.name: f for f in fields(cls)}
    for key in data:
        if key not in known:
            raise ScenarioError(f"{path}.{key}" if path else str(key), "unknown key")
    kwargs = {}
    for key, value in data.items():
        sub = f"{path}.{key}" if path else key
        if nested and key in nested:
            value = nested[key](value, sub)
        else:
            value = _scalar(value, known[key], sub)
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except ScenarioError:
        raise
    except (TypeError, ValueError) as exc:
        raise ScenarioError(path or "<root>", str(exc)) from None


def _scalar(value: Any, f: dataclasses.Field, path: str):
    kind = f.type if isinstance(f.type, str) else getattr(f.type, "__name__", str(f.type))
    if kind == "float" or kind == "Optional[float]":
        if value is None and kind.startswith("Optional"):
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ScenarioError(path, f"expected a number, got {value!r}")
        return float(value)
    if kind == "bool":
        if not isinstance(value, bool):
            raise ScenarioError(path, f"expected true/false, got {value!r}")
        return value
    if kind == "str":
        if not isinstance(value, str):
            raise ScenarioError(path, f"expected a string, got {value!r}")
        return value
    return value


def _sheet_from(data: Any, path: str) -> SheetSpec:
    return _build(
        SheetSpec, data, path,
        nested={
            "params": lambda v, p: _build(SheetParams, v, p),
            "policy": lambda v, p: _build(IntensityPolicy, v, p),
            "initial": lambda v, p: None if v is None else _build(SheetState, v, p),
        },
    )


def _sheets_from(data: Any, path: str) -> tuple[SheetSpec, ...]:
    if not isinstance(data, list):
        raise ScenarioError(path, "expected a list of sheets")
    return tuple(_sheet_from(item, f"{path}[{i}]") for i, item in enumerate(data))


def spec_from_dict(data: dict[str, Any]) -> ScenarioSpec:
    """Build a validated :class:`ScenarioSpec`; unknown keys are errors.

    A top-level ``preset`` key starts from that preset and overlays the rest.
    """
    if not isinstance(data, dict):
        raise ScenarioError("<root>", "scenario must be a mapping")
    data = dict(data)
    base = data.pop("preset", None)
    if base is not None:
        if base not in PRESETS:
            raise ScenarioError("preset", f"unknown preset {base!r}")
        merged = spec_to_dict(PRESETS[base])
        _deep_update(merged, data)
        data = merged
    if "name" not in data:
        raise ScenarioError("name", "missing")
    return _build(
        ScenarioSpec, data, "",
        nested={
            "sheets": _sheets_from,
            "econ": lambda v, p: _build(EconParams, v, p),
            "econ_initial": lambda v, p: _build(EconInitial, v, p),
            "coupling": lambda v, p: _build(CouplingParams, v, p),
        },
    )


def _deep_update(base: dict, over: dict) -> None:
    for key, value in over.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            _deep_update(base[key], value)
        else:
            base[key] = value


def dump_scenario(spec: ScenarioSpec, path: Union[str, Path, None] = None) -> str:
    text = yaml.safe_dump(spec_to_dict(spec), sort_keys=False)
    if path is not None:
        Path(path).write_text(text)
    return text


def load_yaml(text: str) -> Any:
    return yaml.load(text, Loader=_Loader)


def load_scenario(source: Union[str, Path]) -> ScenarioSpec:
    """Load a preset by name or a YAML scenario file."""
    if isinstance(source, str) and source in PRESETS:
        return PRESETS[source]
    path = Path(source)
    if not path.exists():
        raise ScenarioError("<source>", f"no preset or file named {str(source)!r}")
    try:
        data = load_yaml(path.read_text())
    except yaml.YAMLError as exc:
        raise ScenarioError("<file>", f"invalid YAML: {exc}") from None
    return spec_from_dict(data)
