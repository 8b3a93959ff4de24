"""Run configuration: YAML text to validated, fully-defaulted dataclasses.

Sections are nested mappings.  Environment overrides use the prefix
``FRONTPULSE_`` and ``__`` between path components, e.g.
``FRONTPULSE_PARAMS__TAU=0.175``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields
from typing import Any, Literal, Mapping

import numpy as np
import yaml

from frontpulse.classify import ClassifyConfig, ScatterConfig
from frontpulse.errors import PulseError
from frontpulse.hybrid import HybridConfig
from frontpulse.model import (
    Constant,
    Heterogeneity,
    ModelParams,
    SharpBump,
    SmoothBump,
    SquareWell,
    Tabulated,
    stationary_width,
)
from frontpulse.pde import PdeConfig
from frontpulse.reduced_ode import IntegratorConfig

TIERS = ("pde", "hybrid", "ode-full", "ode-truncated", "ode-legacy")
ENV_PREFIX = "FRONTPULSE_"

_HET_KINDS = {
    "constant": Constant,
    "sharp_bump": SharpBump,
    "smooth_bump": SmoothBump,
    "square_well": SquareWell,
    "tabulated": Tabulated,
}


@dataclass(frozen=True)
class InitialConfig:
    """Starting state.

    ``mode="auto"`` picks the homogeneous start (perturbed standing or
    traveling pulse) without heterogeneity and an incoming traveling pulse
    otherwise.  ``explicit`` uses ``center``, ``h``, ``r2``, ``r1`` (and
    ``speed`` for the field tiers).  ``kick=None`` widens the standing
    pulse by 0.01, or by 0.5 on the PDE tier, whose breathing instability
    needs a finite push.
    """

    mode: Literal["auto", "homogeneous", "incoming", "explicit"] = "auto"
    center: float | None = None
    h: float | None = None
    r2: float = 0.0
    r1: float = 0.0
    speed: float = 0.0
    kick: float | None = None
    distance: float | None = None
    direction: int = 1


@dataclass(frozen=True)
class SweepConfig:
    d0: tuple[float, ...] = ()
    eps0: tuple[float, ...] = ()
    refine: bool = False
    tol: float = 1e-5


@dataclass(frozen=True)
class ResidenceConfig:
    eps0: tuple[float, ...] = ()
    horizon: float = 5000.0


@dataclass(frozen=True)
class AnalyzeConfig:
    hopf_sweep: bool = False
    tau_lo: float = 0.17
    tau_hi: float = 0.22
    samples: int = 101


@dataclass(frozen=True)
class RunConfig:
    tier: str
    params: ModelParams
    heterogeneity: Heterogeneity = Constant()
    integrator: Any = None
    initial: InitialConfig = InitialConfig()
    classify: ClassifyConfig = ClassifyConfig()
    scatter: ScatterConfig = ScatterConfig()
    sweep: SweepConfig = SweepConfig()
    residence: ResidenceConfig = ResidenceConfig()
    analyze: AnalyzeConfig = AnalyzeConfig()
    output: str = "out"


def _integrator_class(tier: str):
    if tier == "hybrid":
        return HybridConfig
    if tier == "pde":
        return PdeConfig
    return IntegratorConfig


def _coerce(value, ftype: str, loc: str):
    # PyYAML reads "1e-9" as a string; accept it where a float is expected
    if isinstance(value, str) and "float" in ftype:
        try:
            return float(value)
        except ValueError:
            raise PulseError("invalid-config", f"{loc}: expected a number, got {value!r}") from None
    if isinstance(value, int) and not isinstance(value, bool) and ftype.startswith("float"):
        return float(value)
    if isinstance(value, Mapping) and "tuple" in ftype and {"start", "stop", "num"} <= set(value):
        extra = set(value) - {"start", "stop", "num"}
        if extra:
            raise PulseError("unknown-key", f"{loc}.{sorted(extra)[0]}")
        return tuple(float(v) for v in np.linspace(float(value["start"]), float(value["stop"]), int(value["num"])))
    if isinstance(value, list):
        return tuple(float(v) if "float" in ftype else v for v in value)
    return value


def _build(cls, data, loc: str, skip: tuple[str, ...] = ()):
    if data is None:
        data = {}
    if not isinstance(data, Mapping):
        raise PulseError("invalid-config", f"{loc}: expected a mapping")
    names = {f.name: f for f in fields(cls) if f.name not in skip}
    for key in data:
        if key not in names:
            raise PulseError("unknown-key", f"{loc}.{key}")
    kwargs = {k: _coerce(v, str(names[k].type), f"{loc}.{k}") for k, v in data.items()}
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise PulseError("missing-parameter", f"{loc}: {exc}") from None


def _heterogeneity(data, loc: str = "heterogeneity") -> Heterogeneity:
    if data is None:
        return Constant()
    if not isinstance(data, Mapping) or "kind" not in data:
        raise PulseError("missing-parameter", f"{loc}.kind")
    kind = data["kind"]
    if kind not in _HET_KINDS:
        raise PulseError("invalid-config", f"{loc}.kind: unknown heterogeneity {kind!r}")
    rest = {k: v for k, v in data.items() if k != "kind"}
    if kind == "tabulated" and "csv" in rest:
        if set(rest) != {"csv"}:
            raise PulseError("unknown-key", f"{loc}.{sorted(set(rest) - {'csv'})[0]}")
        return Tabulated.from_csv(rest["csv"])
    return _build(_HET_KINDS[kind], rest, loc, skip=("kind",))


def initial_kick(cfg: RunConfig) -> float:
    if cfg.initial.kick is not None:
        return cfg.initial.kick
    return 0.5 if cfg.tier == "pde" else 0.01


def _initial_width(cfg: RunConfig) -> float:
    if cfg.initial.h is not None:
        return cfg.initial.h
    return stationary_width(cfg.params.D, cfg.params.delta0)


def from_mapping(data: Mapping) -> RunConfig:
    if not isinstance(data, Mapping):
        raise PulseError("invalid-config", "top level must be a mapping")
    known = {f.name for f in fields(RunConfig)}
    for key in data:
        if key not in known:
            raise PulseError("unknown-key", key)
    tier = data.get("tier")
    if tier is None:
        raise PulseError("missing-parameter", "tier")
    if tier not in TIERS:
        raise PulseError("invalid-config", f"tier must be one of {', '.join(TIERS)}; got {tier!r}")
    params = data.get("params") or {}
    for req in ("tau", "D"):
        if req not in params:
            raise PulseError("missing-parameter", req)
    cfg = RunConfig(
        tier=tier,
        params=_build(ModelParams, params, "params"),
        heterogeneity=_heterogeneity(data.get("heterogeneity")),
        integrator=_build(_integrator_class(tier), data.get("integrator"), "integrator"),
        initial=_build(InitialConfig, data.get("initial"), "initial"),
        classify=_build(ClassifyConfig, data.get("classify"), "classify"),
        scatter=_build(ScatterConfig, data.get("scatter"), "scatter"),
        sweep=_build(SweepConfig, data.get("sweep"), "sweep"),
        residence=_build(ResidenceConfig, data.get("residence"), "residence"),
        analyze=_build(AnalyzeConfig, data.get("analyze"), "analyze"),
        output=str(data.get("output", "out")),
    )
    hb = getattr(cfg.integrator, "h_blowup", None)
    if hb is not None and hb <= _initial_width(cfg):
        raise PulseError("inconsistent-config", f"integrator.h_blowup={hb} does not exceed the initial width")
    return cfg


def apply_env(data: dict, env: Mapping[str, str]) -> dict:
    """Overlay ``FRONTPULSE_SECTION__KEY=value`` entries (values parsed as YAML scalars)."""
    out = dict(data)
    for name in sorted(env):
        if not name.startswith(ENV_PREFIX):
            continue
        path = [p.lower() if p.lower() != "d" else "D" for p in name[len(ENV_PREFIX):].split("__")]
        node = out
        for part in path[:-1]:
            nxt = node.get(part)
            nxt = dict(nxt) if isinstance(nxt, Mapping) else {}
            node[part] = nxt
            node = nxt
        node[path[-1]] = yaml.safe_load(env[name])
    return out


def parse_config(text: str, env: Mapping[str, str] | None = None) -> RunConfig:
    """Validate YAML text (plus optional environment overrides) into a :class:`RunConfig`."""
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise PulseError("invalid-config", f"YAML: {exc}") from None
    data = data or {}
    if env:
        data = apply_env(data, env)
    return from_mapping(data)


def _plain(obj):
    if dataclasses.is_dataclass(obj):
        return {f.name: _plain(getattr(obj, f.name)) for f in fields(obj)}
    if isinstance(obj, (tuple, list)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def to_mapping(cfg: RunConfig) -> dict:
    """Fully-resolved plain mapping; :func:`from_mapping` inverts it exactly."""
    return _plain(cfg)


def dump_config(cfg: RunConfig) -> str:
    return yaml.safe_dump(to_mapping(cfg), sort_keys=False)
