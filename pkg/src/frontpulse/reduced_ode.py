"""Reduced interface equations and their time integration.

State layout for the pulse variants is ``(l2, l1, r2, r1)``: right and left
interface positions followed by their velocities.  The homogeneous 3D variant
uses ``(h, r2, r1)`` and the single-front variants ``(l, r)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Sequence, Union

import numpy as np

from frontpulse import _kernels as K
from frontpulse.errors import PulseError
from frontpulse.model import (
    Constant,
    DerivedCoefficients,
    Heterogeneity,
    ModelParams,
    ResponseProfile,
    edges,
    response_analytic,
    response_for,
    support,
)


@dataclass(frozen=True)
class InterfaceState:
    """Positions and velocities of the two interfaces of a pulse."""

    l2: float
    l1: float
    r2: float
    r1: float

    @property
    def h(self) -> float:
        return self.l2 - self.l1

    def as_array(self) -> np.ndarray:
        return np.array([self.l2, self.l1, self.r2, self.r1], dtype=float)

    @classmethod
    def from_array(cls, y: Sequence[float]) -> "InterfaceState":
        return cls(float(y[0]), float(y[1]), float(y[2]), float(y[3]))

    @classmethod
    def centered(cls, center: float, h: float, r2: float = 0.0, r1: float = 0.0) -> "InterfaceState":
        return cls(center + h / 2, center - h / 2, r2, r1)


# --------------------------------------------------------------------------- variants


@dataclass(frozen=True)
class FullRenormalized:
    name: Literal["ode-full"] = "ode-full"


@dataclass(frozen=True)
class Truncated:
    name: Literal["ode-truncated"] = "ode-truncated"


@dataclass(frozen=True)
class Homogeneous3D:
    name: Literal["ode-homogeneous3d"] = "ode-homogeneous3d"


@dataclass(frozen=True)
class SingleFrontLeft:
    name: Literal["single-left"] = "single-left"


@dataclass(frozen=True)
class SingleFrontRight:
    name: Literal["single-right"] = "single-right"


@dataclass(frozen=True)
class LegacyWeakInteraction:
    """Constant-coefficient weak-interaction model with drift corrections.

    Coefficients left as ``None`` take their lowest-order values for the
    given ``D`` (see :meth:`resolved`).
    """

    M0: float | None = None
    M0_tilde: float | None = None
    beta1: float | None = None
    beta2: float | None = None
    M1: float | None = None
    M2: float | None = None
    name: Literal["ode-legacy"] = "ode-legacy"

    def resolved(self, D: float) -> "LegacyWeakInteraction":
        sD = math.sqrt(D)
        dflt = dict(
            M0=8 * sD / 3,
            M0_tilde=20 * sD / 9,
            beta1=8 * sD / 9,
            beta2=16 * sD / 3,
            M1=1 / (6 * D),
            M2=16 * math.sqrt(2 * D) / 3,
        )
        vals = {k: (getattr(self, k) if getattr(self, k) is not None else v) for k, v in dflt.items()}
        return LegacyWeakInteraction(**vals)


OdeVariant = Union[FullRenormalized, Truncated, Homogeneous3D, SingleFrontLeft, SingleFrontRight, LegacyWeakInteraction]

_CODES = {
    FullRenormalized: K.FULL,
    Truncated: K.TRUNCATED,
    LegacyWeakInteraction: K.LEGACY,
    SingleFrontLeft: K.SINGLE_LEFT,
    SingleFrontRight: K.SINGLE_RIGHT,
    Homogeneous3D: K.HOMOGENEOUS3D,
}

_COLUMNS = {
    K.FULL: ("l2", "l1", "r2", "r1"),
    K.TRUNCATED: ("l2", "l1", "r2", "r1"),
    K.LEGACY: ("l2", "l1", "r2", "r1"),
    K.SINGLE_LEFT: ("l", "r"),
    K.SINGLE_RIGHT: ("l", "r"),
    K.HOMOGENEOUS3D: ("h", "r2", "r1"),
}


def variant_from_name(name: str) -> OdeVariant:
    for cls in _CODES:
        if cls().name == name:
            return cls()
    raise PulseError("unknown-variant", f"no reduced model called {name!r}")


def _param_vector(p: ModelParams, variant: OdeVariant) -> np.ndarray:
    if isinstance(variant, LegacyWeakInteraction):
        v = variant.resolved(p.D)
        extra = [v.M0, v.M0_tilde, v.beta1, v.beta2, v.M1, v.M2]
    else:
        extra = [0.0] * 6
    return np.array([p.tau, p.D, p.delta0, *extra], dtype=float)


def _resp(p: ModelParams, resp: ResponseProfile | None) -> ResponseProfile:
    return resp if resp is not None else response_analytic(Constant(), p)


def _as_vec(s) -> np.ndarray:
    if isinstance(s, InterfaceState):
        return s.as_array()
    return np.asarray(s, dtype=float).copy()


def _eval(code: int, y: np.ndarray, p: ModelParams, variant: OdeVariant, resp) -> tuple[np.ndarray, float]:
    dy = np.empty_like(y)
    det = K.rhs(code, y, dy, _param_vector(p, variant), *_resp(p, resp).packed())
    return dy, det


# --------------------------------------------------------------------------- right-hand sides


def rhs_full(s, p: ModelParams, c: DerivedCoefficients | None = None, resp: ResponseProfile | None = None) -> np.ndarray:
    """Time derivative of the mass-matrix coupled interface equations.

    The velocity derivatives solve a 2x2 linear system by Cramer's rule.
    Raises ``PulseError("mass-matrix-singular")`` when the determinant is
    at or below ``1e-12``.
    """
    y = _as_vec(s)
    if y[0] - y[1] <= 0:
        raise PulseError("interfaces-unordered", "rhs_full needs l2 > l1")
    dy, det = _eval(K.FULL, y, p, FullRenormalized(), resp)
    if det <= K.SINGULAR_DET:
        raise PulseError("mass-matrix-singular", f"determinant {det:.3e}")
    return dy


def mass_determinant(s, p: ModelParams) -> float:
    """Determinant ``m(r2) m(r1) - M(r1,h) M(r2,h) E1 E2`` of the full model."""
    y = _as_vec(s)
    _, det = _eval(K.FULL, y, p, FullRenormalized(), None)
    return det


def rhs_truncated(s, p: ModelParams, c: DerivedCoefficients | None = None, resp: ResponseProfile | None = None) -> np.ndarray:
    """Time derivative of the truncated interface equations."""
    y = _as_vec(s)
    if y[0] - y[1] <= 0:
        raise PulseError("interfaces-unordered", "rhs_truncated needs l2 > l1")
    return _eval(K.TRUNCATED, y, p, Truncated(), resp)[0]


def rhs_homogeneous3d(s3, p: ModelParams, c: DerivedCoefficients | None = None) -> np.ndarray:
    """Derivative of ``(h, r2, r1)`` for a constant heterogeneity."""
    y = np.asarray(s3, dtype=float).copy()
    if y[0] <= 0:
        raise PulseError("interfaces-unordered", "width must be positive")
    return _eval(K.HOMOGENEOUS3D, y, p, Homogeneous3D(), None)[0]


def rhs_single_front(
    side: Literal["left", "right"],
    s1,
    p: ModelParams,
    c: DerivedCoefficients | None = None,
    resp: ResponseProfile | None = None,
) -> np.ndarray:
    """Isolated front ``(l, r)``; the response enters with ``+`` on the left and ``-`` on the right."""
    code = {"left": K.SINGLE_LEFT, "right": K.SINGLE_RIGHT}[side]
    y = np.asarray(s1, dtype=float).copy()
    return _eval(code, y, p, SingleFrontLeft(), resp)[0]


def rhs_legacy(s, p: ModelParams, variant: LegacyWeakInteraction | None = None) -> np.ndarray:
    """Constant-coefficient weak-interaction equations."""
    y = _as_vec(s)
    if y[0] - y[1] <= 0:
        raise PulseError("interfaces-unordered", "rhs_legacy needs l2 > l1")
    return _eval(K.LEGACY, y, p, variant or LegacyWeakInteraction(), None)[0]


# --------------------------------------------------------------------------- integration


@dataclass(frozen=True)
class IntegratorConfig:
    """Time-stepping controls.

    ``h_blowup=None`` means ``50 sqrt(D)``.  ``exit_bounds`` optionally ends a
    run once the whole pulse lies left of the first or right of the second
    value, which is how scattering runs stop after the outcome is settled.
    """

    dt: float = 0.01
    t_end: float = 4000.0
    method: Literal["rk4_fixed", "rk45_adaptive"] = "rk4_fixed"
    atol: float = 1e-9
    rtol: float = 1e-9
    h_blowup: float | None = None
    record_stride: int = 10
    exit_bounds: tuple[float, float] | None = None
    max_events: int = 100000

    def __post_init__(self):
        if not self.dt > 0:
            raise PulseError("invalid-config", "dt must be > 0")
        if not self.t_end > 0:
            raise PulseError("invalid-config", "t_end must be > 0")
        if self.record_stride < 1:
            raise PulseError("invalid-config", "record_stride must be >= 1")
        if self.method not in ("rk4_fixed", "rk45_adaptive"):
            raise PulseError("invalid-config", f"unknown method {self.method!r}")

    def blowup_width(self, D: float) -> float:
        return self.h_blowup if self.h_blowup is not None else 50.0 * math.sqrt(D)


_EDGE_KINDS = ("l1_right", "l1_left", "l2_right", "l2_left")
_STATUS = {
    K.STATUS_DONE: "completed",
    K.STATUS_BLOWUP: "decomposed",
    K.STATUS_SINGULAR: "mass-matrix-singular",
    K.STATUS_NONFINITE: "nonfinite-state",
    K.STATUS_EXIT_RIGHT: "exit-right",
    K.STATUS_EXIT_LEFT: "exit-left",
    K.STATUS_COLLAPSED: "interfaces-merged",
    K.STATUS_STIFF: "stiffness-failure",
}


@dataclass
class Trajectory:
    """Recorded time series of an interface simulation.

    ``states`` has one row per entry of ``times`` and one column per name in
    ``columns``.  ``events`` holds ``(time, kind, position)`` tuples: edge
    crossings such as ``"l1_right"`` (left interface moving rightward over an
    edge) and terminal markers such as ``"decomposed"``.
    """

    times: np.ndarray
    states: np.ndarray
    columns: tuple[str, ...]
    events: list[tuple[float, str, float]] = field(default_factory=list)
    status: str = "completed"
    tier: str = "ode-truncated"

    def __post_init__(self):
        if self.states.shape[0] != self.times.shape[0]:
            raise PulseError("invalid-trajectory", "states and times differ in length")
        if self.times.shape[0] > 1 and np.any(np.diff(self.times) <= 0):
            raise PulseError("invalid-trajectory", "times must be strictly increasing")

    def col(self, name: str) -> np.ndarray:
        if name in self.columns:
            return self.states[:, self.columns.index(name)]
        if name == "h" and "l2" in self.columns:
            return self.col("l2") - self.col("l1")
        raise KeyError(name)

    @property
    def l1(self) -> np.ndarray:
        return self.col("l1")

    @property
    def l2(self) -> np.ndarray:
        return self.col("l2")

    @property
    def r1(self) -> np.ndarray:
        return self.col("r1")

    @property
    def r2(self) -> np.ndarray:
        return self.col("r2")

    @property
    def h(self) -> np.ndarray:
        return self.col("h")

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.col("l1") + self.col("l2"))

    @property
    def latched(self) -> str | None:
        """Name of the terminal event, if the run stopped early."""
        return None if self.status == "completed" else self.status

    def extend(self, more: "Trajectory", keep_status: bool = False) -> "Trajectory":
        """Append a continuation run that starts at this trajectory's last state.

        With ``keep_status`` the terminal status of ``self`` is retained
        (used when the continuation merely ran out its time budget).
        """
        events = [e for e in self.events if e[1] not in _STATUS.values()] + list(more.events)
        status = self.status if keep_status else more.status
        if keep_status:
            events += [e for e in self.events if e[1] == self.status]
        return Trajectory(
            times=np.concatenate([self.times, more.times[1:]]),
            states=np.vstack([self.states, more.states[1:]]),
            columns=self.columns,
            events=sorted(events, key=lambda e: e[0]),
            status=status,
            tier=self.tier,
        )

    def final_state(self) -> InterfaceState:
        return InterfaceState(*(float(self.col(k)[-1]) for k in ("l2", "l1", "r2", "r1")))

    def write_csv(self, path: str | Path, events_path: str | Path | None = None) -> None:
        """Write one row per record, plus ``t,kind,position`` events if requested.

        Pulse trajectories use the columns ``t,l1,l2,r1,r2,h``; other
        variants write ``t`` followed by their own state columns.
        """
        names = ("l1", "l2", "r1", "r2", "h") if "l2" in self.columns else self.columns
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", *names])
            cols = [self.col(k) for k in names]
            for i, t in enumerate(self.times):
                w.writerow([repr(float(t))] + [repr(float(c[i])) for c in cols])
        if events_path is not None:
            with open(events_path, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["t", "kind", "position"])
                for t, kind, pos in self.events:
                    w.writerow([repr(float(t)), kind, repr(float(pos))])


def integrate(
    variant: OdeVariant,
    s0,
    p: ModelParams,
    c: DerivedCoefficients | None = None,
    resp: ResponseProfile | None = None,
    cfg: IntegratorConfig | None = None,
    het: Heterogeneity | None = None,
    t0: float = 0.0,
) -> Trajectory:
    """Integrate one of the reduced models.

    ``het`` is only used for edge-crossing events (and to build ``resp`` when
    that is not given).  The run stops early when the width exceeds the
    blow-up threshold (event ``"decomposed"``), the mass matrix becomes
    singular, the interfaces merge, or the pulse leaves ``cfg.exit_bounds``.
    """
    cfg = cfg or IntegratorConfig()
    code = _CODES[type(variant)]
    y0 = _as_vec(s0)
    if y0.shape[0] != len(_COLUMNS[code]):
        raise PulseError("invalid-state", f"{variant.name} expects {len(_COLUMNS[code])} components")
    if not np.all(np.isfinite(y0)):
        raise PulseError("invalid-state", "initial state is not finite")
    if het is not None and resp is None:
        resp = response_for(het, p)
    resp = _resp(p, resp)
    hb = cfg.blowup_width(p.D)
    width0 = K._width(code, y0)
    if code not in (K.SINGLE_LEFT, K.SINGLE_RIGHT):
        if width0 <= 0:
            raise PulseError("interfaces-unordered", "initial state needs l2 > l1")
        if hb <= width0:
            raise PulseError("inconsistent-config", f"h_blowup {hb} <= initial width {width0}")
    edge_arr = np.array(edges(het) if het is not None else (), dtype=float)
    lo, hi = cfg.exit_bounds if cfg.exit_bounds is not None else (-np.inf, np.inf)
    prm = _param_vector(p, variant)
    common = (code, y0, float(t0), float(t0 + cfg.t_end))
    tail = (prm, *resp.packed(), hb, edge_arr, float(lo), float(hi), int(cfg.record_stride), int(cfg.max_events))
    if cfg.method == "rk4_fixed":
        ts, ys, et, ek, ep, status, t_stop = K.rk4_run(*common, cfg.dt, *tail)
    else:
        ts, ys, et, ek, ep, status, t_stop = K.dp45_run(
            *common, cfg.dt, *tail, cfg.atol, cfg.rtol, max(cfg.dt * 100, 1.0)
        )
    if status == K.STATUS_STIFF:
        raise PulseError("stiffness-failure", f"step size underflow at t={t_stop:.6g}")
    if status == K.STATUS_NONFINITE:
        raise PulseError("nonfinite-state", f"state became non-finite at t={t_stop:.6g}")
    events = [(float(t), _EDGE_KINDS[int(k)], float(x)) for t, k, x in zip(et, ek, ep)]
    name = _STATUS[int(status)]
    if status != K.STATUS_DONE:
        pos = float(ys[-1, 0])
        events.append((float(t_stop), name, pos))
    return Trajectory(
        times=np.array(ts),
        states=np.array(ys),
        columns=_COLUMNS[code],
        events=events,
        status=name,
        tier=variant.name,
    )


def single_front_normal_form(side: Literal["left", "right"], l0: float, r0: float, p: ModelParams,
                             cfg: IntegratorConfig, resp: ResponseProfile | None = None) -> Trajectory:
    """Convenience wrapper integrating one isolated front."""
    v = SingleFrontLeft() if side == "left" else SingleFrontRight()
    return integrate(v, np.array([l0, r0]), p, resp=resp, cfg=cfg)


def incoming_pulse(p: ModelParams, het: Heterogeneity, distance: float | None = None,
                   direction: int = 1) -> InterfaceState:
    """Traveling pulse placed ``distance`` (default ``30 sqrt(D)``) left of the heterogeneity.

    Uses the exact traveling-pulse fixed point of the truncated equations.
    With ``direction=-1`` the mirror pulse is placed right of the heterogeneity.
    """
    from frontpulse.analysis import tp_exact

    tp = tp_exact(p, p.tau)
    dist = 30.0 * p.sqrtD if distance is None else distance
    sup = support(het)
    lo, hi = sup if sup is not None else (0.0, 0.0)
    if direction >= 0:
        return InterfaceState.centered(lo - dist - tp.h_star / 2, tp.h_star, tp.r_star, tp.r_star)
    return InterfaceState.centered(hi + dist + tp.h_star / 2, tp.h_star, -tp.r_star, -tp.r_star)
