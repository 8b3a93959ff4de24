"""Behavior labels for trajectories, phase-diagram sweeps and residence times."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Literal, Sequence

import numpy as np

from frontpulse.analysis import bifurcation_points, front_scale, front_velocities, tp_exact
from frontpulse.errors import PulseError
from frontpulse.model import (
    Constant,
    DerivedCoefficients,
    Heterogeneity,
    ModelParams,
    SharpBump,
    SquareWell,
    derive_coefficients,
    edges,
    response_for,
    stationary_width,
    support,
)
from frontpulse.reduced_ode import (
    IntegratorConfig,
    InterfaceState,
    OdeVariant,
    Trajectory,
    Truncated,
    incoming_pulse,
    integrate,
)

BehaviorClass = Literal["SP", "SB", "TB", "TPplus", "TPminus", "Unresolved"]
ScatterLabel = Literal["PEN", "REB", "DEC1", "DEC2", "Unresolved"]


@dataclass(frozen=True)
class ClassifyConfig:
    """Thresholds for the homogeneous classifier.

    ``v_tol=None`` means 5% of the traveling-pulse speed (or, above the drift
    threshold, of the bare front speed); ``a_tol=None`` means 2% of ``h*``.
    """

    transient_skip: float = 2500.0
    window: float = 1000.0
    v_tol: float | None = None
    a_tol: float | None = None


@dataclass(frozen=True)
class WindowStats:
    drift: float
    amplitude: float
    mean_width: float


def velocity_scale(p: ModelParams, c: DerivedCoefficients | None = None) -> float:
    """Characteristic speed used to normalise the drift tolerance."""
    c = c or derive_coefficients(p)
    if p.tau < bifurcation_points(p, c).tau_d:
        try:
            return tp_exact(p, p.tau, c).r_star
        except PulseError:
            pass
    return front_scale(p, c)


def window_stats(t: np.ndarray, center: np.ndarray, width: np.ndarray) -> WindowStats:
    """Least-squares drift of the center and half peak-to-peak of the width."""
    slope = np.polyfit(t - t[0], center, 1)[0] if t.shape[0] > 1 else 0.0
    amp = 0.5 * float(np.max(width) - np.min(width))
    return WindowStats(float(slope), amp, float(np.mean(width)))


def _label(stats: WindowStats, v_tol: float, a_tol: float) -> BehaviorClass:
    moving = abs(stats.drift) >= v_tol
    breathing = stats.amplitude >= a_tol
    if not moving:
        return "SB" if breathing else "SP"
    if breathing:
        return "TB"
    return "TPplus" if stats.drift > 0 else "TPminus"


def classify_homogeneous(
    traj: Trajectory,
    p: ModelParams,
    c: DerivedCoefficients | None = None,
    cfg: ClassifyConfig | None = None,
) -> BehaviorClass:
    """Label a homogeneous run as SP, SB, TB or TP+/-.

    The last ``window`` time units after ``transient_skip`` are analysed as a
    whole and in two halves; if the halves disagree the label is
    ``"Unresolved"``.  Runs that stopped early (decomposition, collapse) are
    also unresolved.
    """
    cfg = cfg or ClassifyConfig()
    c = c or derive_coefficients(p)
    t = traj.times
    if t[-1] - t[0] < cfg.transient_skip + cfg.window:
        if traj.latched is not None:
            return "Unresolved"
        raise PulseError("horizon-too-short", f"need {cfg.transient_skip + cfg.window} time units")
    if traj.latched is not None:
        return "Unresolved"
    v_tol = cfg.v_tol if cfg.v_tol is not None else 0.05 * velocity_scale(p, c)
    a_tol = cfg.a_tol if cfg.a_tol is not None else 0.02 * stationary_width(p.D, p.delta0)
    start = max(t[0] + cfg.transient_skip, t[-1] - cfg.window)
    sel = t >= start
    tw, cw, hw = t[sel], traj.center[sel], traj.h[sel]
    full = _label(window_stats(tw, cw, hw), v_tol, a_tol)
    mid = 0.5 * (tw[0] + tw[-1])
    a, b = tw <= mid, tw >= mid
    halves = [_label(window_stats(tw[m], cw[m], hw[m]), v_tol, a_tol) for m in (a, b)]
    if halves[0] != halves[1] or halves[0] != full:
        return "Unresolved"
    return full


def homogeneous_initial_state(p: ModelParams, c: DerivedCoefficients | None = None,
                              kick: float = 1e-2) -> InterfaceState:
    """Slightly perturbed SP above the drift threshold, perturbed TP+ below it.

    Below the drift threshold the standing pulse lies on the decomposing side
    of the breathing instability, so seeding there would not reach the
    coexisting traveling attractor.
    """
    c = c or derive_coefficients(p)
    if p.tau >= bifurcation_points(p, c).tau_d:
        return InterfaceState.centered(0.0, c.h0 + kick)
    tp = tp_exact(p, p.tau, c)
    return InterfaceState.centered(0.0, tp.h_star + kick, tp.r_star, tp.r_star)


def run_homogeneous(p: ModelParams, t_end: float = 4000.0, variant: OdeVariant | None = None,
                    cfg: IntegratorConfig | None = None, kick: float = 1e-2) -> Trajectory:
    """Integrate the homogeneous pulse from :func:`homogeneous_initial_state`."""
    cfg = cfg or IntegratorConfig(t_end=t_end, record_stride=10)
    s0 = homogeneous_initial_state(p, kick=kick)
    return integrate(variant or Truncated(), s0, p, cfg=cfg, het=Constant())


def _homogeneous_job(args) -> str:
    p, t_end, ccfg = args
    return classify_homogeneous(run_homogeneous(p, t_end=t_end), p, cfg=ccfg)


def behavior_map(taus: Sequence[float], p: ModelParams, t_end: float = 4000.0,
                 cfg: ClassifyConfig | None = None, jobs: int | None = 1) -> list[str]:
    """Homogeneous behavior label at each ``tau`` (truncated ODE)."""
    items = [(replace(p, tau=float(t)), t_end, cfg) for t in taus]
    return _map(_homogeneous_job, items, jobs)


def first_transition(taus: Sequence[float], labels: Sequence[str], target: str) -> float | None:
    """First ``tau`` in scan order whose label is ``target``."""
    for t, lab in zip(taus, labels):
        if lab == target:
            return float(t)
    return None


# --------------------------------------------------------------------------- scattering


@dataclass(frozen=True)
class ScatterOutcome:
    label: ScatterLabel
    turning_point: float | None = None
    t_final: float = 0.0
    status: str = ""


@dataclass(frozen=True)
class ScatterConfig:
    """Controls for a single scattering run.

    ``h_blowup=None`` means the heterogeneity's support width plus
    ``50 sqrt(D)``, so a pulse breathing across a wide bump is not mistaken
    for a decomposed one.
    """

    dt: float = 0.01
    t_end: float = 20000.0
    start_distance: float | None = None
    h_blowup: float | None = None
    exit_margin: float = 60.0
    velocity_rtol: float = 0.1
    dec_rule: Literal["forcing", "margin"] = "forcing"
    dec_margin: float = 0.5
    record_stride: int = 10
    variant: str = "ode-truncated"


def scatter_integrator_config(p: ModelParams, het: Heterogeneity, cfg: ScatterConfig) -> IntegratorConfig:
    sD = p.sqrtD
    lo, hi = support(het) or (0.0, 0.0)
    dist = cfg.start_distance if cfg.start_distance is not None else 30.0 * sD
    hb = cfg.h_blowup if cfg.h_blowup is not None else (hi - lo) + 50.0 * sD
    bounds = (lo - dist - cfg.exit_margin * sD, hi + cfg.exit_margin * sD)
    return IntegratorConfig(dt=cfg.dt, t_end=cfg.t_end, h_blowup=hb, record_stride=cfg.record_stride,
                            exit_bounds=bounds)


def run_scattering(p: ModelParams, het: Heterogeneity, cfg: ScatterConfig | None = None) -> Trajectory:
    """Send the traveling pulse from the left into ``het``."""
    from frontpulse.reduced_ode import variant_from_name

    cfg = cfg or ScatterConfig()
    variant = variant_from_name(cfg.variant)
    resp = response_for(het, p)
    icfg = scatter_integrator_config(p, het, cfg)
    traj = integrate(variant, incoming_pulse(p, het, cfg.start_distance), p, resp=resp, cfg=icfg, het=het)
    # A pulse leaving the heterogeneity may still be re-forming after a wide
    # excursion; keep integrating (far from the support, so effectively
    # homogeneous) until it settles onto a traveling pulse or decomposes.
    tp = tp_exact(p, p.tau)
    chunk = replace(icfg, exit_bounds=None, t_end=500.0)
    while traj.status in ("exit-left", "exit-right") and not _settled(traj, tp, cfg.velocity_rtol):
        remaining = cfg.t_end - traj.times[-1]
        if remaining <= 0:
            break
        more = integrate(variant, traj.final_state(), p, resp=resp,
                         cfg=replace(chunk, t_end=min(chunk.t_end, remaining)), het=het, t0=traj.times[-1])
        traj = traj.extend(more, keep_status=more.status == "completed")
    # Near a rebound boundary one front can still be lingering at a bump edge
    # when the width latches; the fronts no longer interact, so follow them
    # until both run at their isolated speeds.
    if traj.status == "decomposed":
        right = front_velocities("right", p).r_plus
        left = front_velocities("left", p).r_minus
        free = replace(icfg, exit_bounds=None, h_blowup=math.inf, t_end=200.0)
        while True:
            s = traj.final_state()
            remaining = cfg.t_end - traj.times[-1]
            if remaining <= 0 or (_near(s.r2, right, 0.5 * cfg.velocity_rtol)
                                  and _near(s.r1, left, 0.5 * cfg.velocity_rtol)):
                break
            more = integrate(variant, s, p, resp=resp, cfg=replace(free, t_end=min(free.t_end, remaining)),
                             het=het, t0=traj.times[-1])
            traj = traj.extend(more, keep_status=True)
    return traj


def _settled(traj: Trajectory, tp, rtol: float) -> bool:
    s = traj.final_state()
    sgn = 1.0 if s.r2 > 0 else -1.0
    return (_near(s.r1, sgn * tp.r_star, rtol) and _near(s.r2, sgn * tp.r_star, rtol)
            and _near(s.h, tp.h_star, rtol))


def _near(x: float, target: float, rtol: float) -> bool:
    return abs(x - target) <= rtol * abs(target)


def classify_scattering(
    traj: Trajectory,
    het: Heterogeneity,
    p: ModelParams,
    c: DerivedCoefficients | None = None,
    velocity_rtol: float = 0.1,
    dec_rule: Literal["forcing", "margin"] = "forcing",
    dec_margin: float = 0.5,
) -> ScatterOutcome:
    """Label a scattering run as PEN, REB, DEC1, DEC2 or Unresolved.

    PEN and REB require both interface velocities within ``velocity_rtol``
    of the traveling-pulse speed on the far side of the heterogeneity.  DEC
    requires the run to have latched decomposition with the right front at
    ``r2+`` and the left at ``r1-``.

    The left interface's rightmost position is the turning point.  With
    ``dec_rule="forcing"`` the split follows what stopped it: DEC1 if the
    response there exceeds ``delta0`` (pushed back by a raised region), DEC2
    if it is below (held back by a lowered one).  ``dec_rule="margin"``
    instead calls DEC1 any turning point within ``dec_margin sqrt(D)`` of the
    left edge.
    """
    c = c or derive_coefficients(p)
    lo, hi = support(het) or (0.0, 0.0)
    s = traj.final_state()
    center = 0.5 * (s.l1 + s.l2)
    t_final = float(traj.times[-1])
    if traj.status == "decomposed":
        right = front_velocities("right", p, c)
        left = front_velocities("left", p, c)
        if _near(s.r2, right.r_plus, velocity_rtol) and _near(s.r1, left.r_minus, velocity_rtol):
            turn = float(np.max(traj.l1))
            if dec_rule == "margin":
                label = "DEC1" if turn <= lo + dec_margin * p.sqrtD else "DEC2"
            else:
                label = "DEC1" if response_for(het, p)(turn) >= p.delta0 else "DEC2"
            return ScatterOutcome(label, turn, t_final, traj.status)
        return ScatterOutcome("Unresolved", None, t_final, traj.status)
    try:
        r_star = tp_exact(p, p.tau, c).r_star
    except PulseError:
        return ScatterOutcome("Unresolved", None, t_final, traj.status)
    if center > hi and _near(s.r1, r_star, velocity_rtol) and _near(s.r2, r_star, velocity_rtol):
        return ScatterOutcome("PEN", None, t_final, traj.status)
    if center < lo and _near(s.r1, -r_star, velocity_rtol) and _near(s.r2, -r_star, velocity_rtol):
        return ScatterOutcome("REB", None, t_final, traj.status)
    return ScatterOutcome("Unresolved", None, t_final, traj.status)


def scatter_label(p: ModelParams, het: Heterogeneity, cfg: ScatterConfig | None = None) -> ScatterOutcome:
    """Run and classify one scattering experiment."""
    cfg = cfg or ScatterConfig()
    traj = run_scattering(p, het, cfg)
    return classify_scattering(traj, het, p, velocity_rtol=cfg.velocity_rtol, dec_rule=cfg.dec_rule,
                               dec_margin=cfg.dec_margin)


# --------------------------------------------------------------------------- phase diagrams


@dataclass
class PhaseDiagram:
    """Grid of scattering outcomes over bump width and height."""

    d0: np.ndarray
    eps0: np.ndarray
    labels: np.ndarray
    boundaries: list[tuple[float, float, str]] = field(default_factory=list)

    def __post_init__(self):
        if self.labels.shape != (self.d0.shape[0], self.eps0.shape[0]):
            raise PulseError("invalid-diagram", "label grid does not match the axes")

    def rows(self):
        for i, d in enumerate(self.d0):
            for j, e in enumerate(self.eps0):
                yield float(d), float(e), str(self.labels[i, j])


def _cell(args) -> str:
    p, d0, eps0, cfg = args
    return scatter_label(p, SharpBump(eps0, d0), cfg).label


def _map(fn, items: list, jobs: int | None):
    jobs = jobs or os.cpu_count() or 1
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))


def bisect_boundary(
    p: ModelParams,
    d0: float,
    eps_lo: float,
    eps_hi: float,
    label_lo: str | None = None,
    label_hi: str | None = None,
    tol: float = 1e-5,
    cfg: ScatterConfig | None = None,
) -> tuple[float, float, str, str]:
    """Shrink ``[eps_lo, eps_hi]`` around a label change.

    Each step keeps the two end labels different.  When the midpoint is
    ``Unresolved`` (typically a run that lingers near the boundary past the
    horizon) the quarter points are tried instead; refinement stops when
    neither of them resolves.  Returns ``(eps_lo, eps_hi, label_lo, label_hi)``.
    """
    cfg = cfg or ScatterConfig()
    label_lo = label_lo or scatter_label(p, SharpBump(eps_lo, d0), cfg).label
    label_hi = label_hi or scatter_label(p, SharpBump(eps_hi, d0), cfg).label
    if label_lo == label_hi:
        raise PulseError("no-boundary", f"both ends labelled {label_lo}")
    while eps_hi - eps_lo > tol:
        mid = 0.5 * (eps_lo + eps_hi)
        lab = scatter_label(p, SharpBump(mid, d0), cfg).label
        if lab == "Unresolved":
            moved = False
            q1 = 0.5 * (eps_lo + mid)
            if scatter_label(p, SharpBump(q1, d0), cfg).label == label_lo:
                eps_lo, moved = q1, True
            q3 = 0.5 * (mid + eps_hi)
            if scatter_label(p, SharpBump(q3, d0), cfg).label == label_hi:
                eps_hi, moved = q3, True
            if not moved:
                break
            continue
        if lab == label_lo:
            eps_lo = mid
        elif lab == label_hi:
            eps_hi = mid
        else:
            # a third region sits inside the bracket; keep the lower change
            eps_hi, label_hi = mid, lab
    return eps_lo, eps_hi, label_lo, label_hi


def _bisect_job(args):
    p, d0, a, b, la, lb, tol, cfg = args
    lo, hi, la, lb = bisect_boundary(p, d0, a, b, la, lb, tol, cfg)
    return d0, 0.5 * (lo + hi), f"{la}-{lb}"


def sweep_phase_diagram(
    axis1: Sequence[float],
    axis2: Sequence[float],
    p: ModelParams,
    c: DerivedCoefficients | None = None,
    cfg: ScatterConfig | None = None,
    jobs: int | None = None,
    refine: bool = False,
    tol: float = 1e-5,
) -> PhaseDiagram:
    """Classify every ``(d0, eps0)`` cell; optionally bisect boundaries in ``eps0``.

    Results are gathered by cell index, so the output does not depend on
    worker scheduling.
    """
    d0s = np.asarray(axis1, dtype=float)
    eps = np.asarray(axis2, dtype=float)
    if np.any(np.diff(d0s) <= 0) or np.any(np.diff(eps) <= 0):
        raise PulseError("invalid-axes", "axes must be strictly increasing")
    cfg = cfg or ScatterConfig()
    items = [(p, float(d), float(e), cfg) for d in d0s for e in eps]
    flat = _map(_cell, items, jobs)
    labels = np.array(flat, dtype=object).reshape(d0s.shape[0], eps.shape[0])
    diag = PhaseDiagram(d0s, eps, labels)
    if refine:
        jobs_b = []
        for i, d in enumerate(d0s):
            for j in range(eps.shape[0] - 1):
                a, b = labels[i, j], labels[i, j + 1]
                if a != b and "Unresolved" not in (a, b):
                    jobs_b.append((p, float(d), float(eps[j]), float(eps[j + 1]), a, b, tol, cfg))
        diag.boundaries = _map(_bisect_job, jobs_b, jobs)
    return diag


# --------------------------------------------------------------------------- residence and trapping


def _inside_intervals(traj: Trajectory, lo: float, hi: float) -> tuple[float, float] | None:
    """First interval during which both interfaces lie in ``[lo, hi]``.

    Boundary instants come from the recorded edge-crossing events where
    available, and from the sampled series otherwise.
    """
    inside = (traj.l1 >= lo) & (traj.l2 <= hi)
    idx = np.flatnonzero(inside)
    if idx.size == 0:
        return None
    i0 = int(idx[0])
    t_in = float(traj.times[i0])
    if i0 > 0:
        cands = [t for t, k, x in traj.events if k == "l1_right" and x == lo and t <= t_in]
        if cands:
            t_in = max(cands)
    after = np.flatnonzero(~inside[i0:])
    if after.size == 0:
        return t_in, math.inf
    j = i0 + int(after[0])
    t_out = float(traj.times[j])
    cands = [t for t, k, x in traj.events
             if ((k == "l2_right" and x == hi) or (k == "l1_left" and x == lo)) and t_in <= t <= t_out]
    if cands:
        t_out = min(cands)
    return t_in, t_out


def residence_time(traj: Trajectory, het: Heterogeneity) -> float:
    """Time both interfaces spend inside the heterogeneity support on first entry.

    Raises ``"no-entry"`` if the pulse never fits inside the support and
    ``"no-exit"`` if it is still inside when the run ends.
    """
    sup = support(het)
    if sup is None:
        raise PulseError("no-entry", "constant heterogeneity has no support")
    iv = _inside_intervals(traj, *sup)
    if iv is None:
        raise PulseError("no-entry", "pulse never lies entirely inside the heterogeneity")
    if math.isinf(iv[1]):
        raise PulseError("no-exit", "pulse still inside at the end of the run")
    return iv[1] - iv[0]


@dataclass(frozen=True)
class TrapResult:
    trapped: bool
    side: Literal["left", "right"] | None = None
    t_exit: float | None = None


def trap_check(traj: Trajectory, het: SquareWell, horizon: float) -> TrapResult:
    """Whether the pulse stays within the outer edges of the well for ``horizon`` time units after entry."""
    lo, hi = support(het)
    inside = (traj.l1 >= lo) & (traj.l2 <= hi)
    idx = np.flatnonzero(inside)
    if idx.size == 0:
        side = "left" if traj.l2[-1] < lo else "right"
        return TrapResult(False, side, None)
    t_in = float(traj.times[idx[0]])
    sel = traj.times <= t_in + horizon
    sel[: idx[0]] = False
    out = np.flatnonzero(~inside & sel)
    if out.size:
        k = int(out[0])
        side = "right" if traj.l2[k] > hi else "left"
        return TrapResult(False, side, float(traj.times[k]))
    if traj.times[-1] < t_in + horizon and traj.latched is not None:
        # stopped early without leaving (e.g. collapse); not a trap over the horizon
        return TrapResult(False, None, float(traj.times[-1]))
    return TrapResult(True)


def run_trap(p: ModelParams, het: SquareWell, horizon: float = 5000.0, dt: float = 0.01,
             start: float | None = None) -> tuple[Trajectory, TrapResult]:
    """Launch the traveling pulse at ``start`` (default the well center) and check trapping."""
    tp = tp_exact(p, p.tau)
    x0 = het.xc if start is None else start
    s0 = InterfaceState.centered(x0, tp.h_star, tp.r_star, tp.r_star)
    lo, hi = support(het)
    cfg = IntegratorConfig(dt=dt, t_end=horizon, h_blowup=(hi - lo) + 50 * p.sqrtD, record_stride=10,
                           exit_bounds=(lo - 10 * p.sqrtD, hi + 10 * p.sqrtD))
    traj = integrate(Truncated(), s0, p, resp=response_for(het, p), cfg=cfg, het=het)
    return traj, trap_check(traj, het, horizon)
