"""Interface ODEs coupled to a diffusing field (the sharp-interface limit).

The fast component is replaced by a piecewise-constant profile, ``+1/2``
between the interfaces and ``-1/2`` elsewhere.  The slow field obeys

    v_t = D v_xx + u(x; l2, l1) - v + delta(x)

and the interfaces move with ``l2' = -v(l2) / (sqrt2 tau)`` and
``l1' = v(l1) / (sqrt2 tau)``.  The jump of ``u`` is handled analytically
(see the kernel notes), diffusion and decay are Crank-Nicolson and the
interfaces follow Heun's rule, so the scheme is second order in ``dx`` and
``dt``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Literal

import numpy as np
from numba import njit
from scipy.optimize import fsolve

from frontpulse._tridiag import cn_setup, cn_solve, laplacian_at
from frontpulse.errors import PulseError
from frontpulse.model import Constant, Heterogeneity, ModelParams, delta_profile, response_for
from frontpulse.reduced_ode import Trajectory


def u_indicator(x, l2: float, l1: float):
    """``+1/2`` on ``(l1, l2]`` and ``-1/2`` elsewhere."""
    x = np.asarray(x, dtype=float)
    return np.where((x > l1) & (x <= l2), 0.5, -0.5)


@dataclass(frozen=True)
class HybridConfig:
    """Discretisation of the hybrid tier.

    ``h_blowup=None`` means 80% of the domain length: beyond that a periodic
    pulse would start interacting with its own image.
    """

    dx: float = 0.05
    dt: float = 0.0025
    boundary: Literal["periodic", "no-flux"] = "periodic"
    t_end: float = 1500.0
    record_stride: int = 400
    x_lo: float = 0.0
    x_hi: float = 120.0
    h_blowup: float | None = None

    def __post_init__(self):
        if not (self.dx > 0 and self.dt > 0 and self.t_end > 0):
            raise PulseError("invalid-config", "dx, dt and t_end must be > 0")
        if self.boundary not in ("periodic", "no-flux"):
            raise PulseError("invalid-config", f"unknown boundary {self.boundary!r}")
        if self.x_hi - self.x_lo < 10 * self.dx:
            raise PulseError("invalid-config", "domain must span at least 10 cells")
        if self.record_stride < 1:
            raise PulseError("invalid-config", "record_stride must be >= 1")

    @property
    def n(self) -> int:
        return int(round((self.x_hi - self.x_lo) / self.dx))

    def grid(self) -> np.ndarray:
        # periodic: n nodes, the last one identified with x_lo; no-flux: n + 1 nodes on the closed interval
        m = self.n if self.boundary == "periodic" else self.n + 1
        return self.x_lo + self.dx * np.arange(m)

    def blowup(self) -> float:
        return self.h_blowup if self.h_blowup is not None else 0.8 * (self.x_hi - self.x_lo)


@dataclass
class FieldState:
    x: np.ndarray
    v: np.ndarray
    l2: float
    l1: float
    t: float = 0.0

    def __post_init__(self):
        if self.x.shape != self.v.shape:
            raise PulseError("invalid-state", "grid and field differ in length")
        if not self.l2 > self.l1:
            raise PulseError("interfaces-unordered", "need l2 > l1")
        if not np.all(np.isfinite(self.v)):
            raise PulseError("invalid-state", "field is not finite")


def stationary_field(x, l2: float, l1: float, p: ModelParams, het: Heterogeneity | None = None) -> np.ndarray:
    """Exact steady field for frozen interfaces: ``-1/2 + box response + Delta0``."""
    s = p.sqrtD
    x = np.asarray(x, dtype=float)
    box = np.where(
        x <= l1,
        0.5 * (np.exp((x - l1) / s) - np.exp((x - l2) / s)),
        np.where(
            x <= l2,
            1.0 - 0.5 * np.exp(-(x - l1) / s) - 0.5 * np.exp(-(l2 - x) / s),
            0.5 * (np.exp(-(x - l2) / s) - np.exp(-(x - l1) / s)),
        ),
    )
    resp = response_for(het or Constant(), p)
    return -0.5 + box + resp(x)


def traveling_field(xi, h: float, c: float, p: ModelParams) -> np.ndarray:
    """Co-moving steady field of a pulse on ``[0, h]`` moving at speed ``c`` (homogeneous)."""
    D = p.D
    root = math.sqrt(c * c + 4 * D)
    mp = (-c + root) / (2 * D)
    mm = (-c - root) / (2 * D)
    k = 1.0 / root
    xi = np.asarray(xi, dtype=float)
    left = (k / mp) * (np.exp(mp * xi) - np.exp(mp * (xi - h)))
    inside = (k / -mm) * (1 - np.exp(mm * xi)) + (k / mp) * (1 - np.exp(mp * (xi - h)))
    right = (k / -mm) * (np.exp(mm * (xi - h)) - np.exp(mm * xi))
    box = np.where(xi <= 0, left, np.where(xi <= h, inside, right))
    return -0.5 + p.delta0 + box


def _tw_residual(h, c, p: ModelParams):
    v = traveling_field(np.array([0.0, h]), h, c, p)
    s = math.sqrt(2.0) * p.tau
    return np.array([s * c - v[0], s * c + v[1]])


def traveling_pulse(p: ModelParams, guess: tuple[float, float] | None = None) -> tuple[float, float]:
    """Exact ``(h, c)`` of the hybrid traveling pulse (``c > 0``).

    Raises ``"no-traveling-pulse"`` if only the standing solution is found.
    """
    if guess is None:
        from frontpulse.analysis import tp_exact

        tp = tp_exact(p)
        guess = (tp.h_star, tp.r_star)
    sol, info, ier, _ = fsolve(lambda y: _tw_residual(y[0], y[1], p), guess, full_output=True, xtol=1e-13)
    if ier != 1 or sol[1] <= 1e-8 or np.max(np.abs(_tw_residual(sol[0], sol[1], p))) > 1e-10:
        raise PulseError("no-traveling-pulse", f"hybrid traveling pulse not found at tau={p.tau}")
    return float(sol[0]), float(sol[1])


def drift_threshold(p: ModelParams) -> float:
    """``tau`` below which the hybrid standing pulse starts to drift.

    The field does not depend on ``tau``, and ``v(0) - v(h)`` is odd in the
    speed, so the traveling branch leaves ``c = 0`` where
    ``2 sqrt2 tau = d(v(0) - v(h))/dc`` at the standing width.
    """
    from frontpulse.model import stationary_width

    h0 = stationary_width(p.D, p.delta0)
    eps = 1e-6 * math.sqrt(p.D)

    def split(c):
        v = traveling_field(np.array([0.0, h0]), h0, c, p)
        return v[0] - v[1]

    return (split(eps) - split(-eps)) / (2 * eps) / (2 * math.sqrt(2.0))


# --------------------------------------------------------------------------- kernel
#
# The field is split as v = w + B, where B is the exact steady response to
# the current indicator (with periodic or mirror images).  B carries the jump
# in v'' at the interfaces analytically, so the grid only resolves the
# smoother remainder w and a frozen standing pulse is an exact discrete
# steady state.


@njit(cache=True)
def _step_response(y, s):
    # steady response of (1 - s^2 d^2) to a unit step H(y)
    z = y / s
    if z >= 0.0:
        return 1.0 if z > 40.0 else 1.0 - 0.5 * math.exp(-z)
    return 0.0 if z < -40.0 else 0.5 * math.exp(z)


@njit(cache=True)
def _images(l1, l2, periodic, x0, xn, L):
    # interval copies whose response reaches the grid
    out = np.empty((3, 2))
    if periodic:
        shift = math.floor((l1 - x0) / L) * L
        a = l1 - shift
        b = l2 - shift
        out[0, 0], out[0, 1] = a, b
        out[1, 0], out[1, 1] = a - L, b - L
        out[2, 0], out[2, 1] = a + L, b + L
    else:
        out[0, 0], out[0, 1] = l1, l2
        out[1, 0], out[1, 1] = 2.0 * x0 - l2, 2.0 * x0 - l1
        out[2, 0], out[2, 1] = 2.0 * xn - l2, 2.0 * xn - l1
    return out


@njit(cache=True)
def _box_at(x, img, s):
    acc = -0.5
    for k in range(img.shape[0]):
        acc += _step_response(x - img[k, 0], s) - _step_response(x - img[k, 1], s)
    return acc


@njit(cache=True)
def _box_fill(out, l1, l2, s, periodic, x0, dx, L):
    n = out.shape[0]
    img = _images(l1, l2, periodic, x0, x0 + (n - 1) * dx, L)
    for i in range(n):
        out[i] = _box_at(x0 + i * dx, img, s)


@njit(cache=True)
def _sample(v, pos, x0, dx, periodic):
    n = v.shape[0]
    s = (pos - x0) / dx
    i = int(math.floor(s))
    w = s - i
    if periodic:
        return (1.0 - w) * v[i % n] + w * v[(i + 1) % n]
    if i < 0:
        return v[0]
    if i >= n - 1:
        return v[n - 1]
    return (1.0 - w) * v[i] + w * v[i + 1]


@njit(cache=True)
def _field_at(w, pos, l1, l2, s, periodic, x0, dx, L):
    n = w.shape[0]
    img = _images(l1, l2, periodic, x0, x0 + (n - 1) * dx, L)
    if periodic:
        pos = x0 + (pos - x0) % L
    return _sample(w, pos, x0, dx, periodic) + _box_at(pos, img, s)


@njit(cache=True)
def hybrid_kernel(v, l2, l1, tau, D, delta, x0, dx, dt, nsteps, stride, periodic, h_blowup, t0):
    """Advance ``nsteps``; returns records ``(t, l2, l1, r2, r1)``, field, status, positions.

    Interfaces use Heun's rule; the remainder ``w`` uses Crank-Nicolson with
    the change of ``B`` over the step as a source, which keeps ``w + B`` exact
    for whatever end positions the interfaces reach.
    """
    n = v.shape[0]
    L = n * dx
    s = math.sqrt(D)
    lam = D * dt / (2.0 * dx * dx)
    a, cp, den, q, gamma = cn_setup(n, lam, 0.5 * dt, periodic)
    inv = 1.0 / (math.sqrt(2.0) * tau)
    nrec = nsteps // stride + 2
    rec = np.empty((nrec, 5))
    rhs = np.empty(n)
    b_now = np.empty(n)
    b_new = np.empty(n)
    _box_fill(b_now, l1, l2, s, periodic, x0, dx, L)
    w = v - b_now
    wp = np.empty(n)
    status = 0
    r2 = -_field_at(w, l2, l1, l2, s, periodic, x0, dx, L) * inv
    r1 = _field_at(w, l1, l1, l2, s, periodic, x0, dx, L) * inv
    rec[0, 0] = t0
    rec[0, 1] = l2
    rec[0, 2] = l1
    rec[0, 3] = r2
    rec[0, 4] = r1
    k = 1
    for it in range(nsteps):
        l2p = l2 + dt * r2
        l1p = l1 + dt * r1
        if l2p - l1p < dx:
            l2p, l1p = l2, l1
        _box_fill(b_new, l1p, l2p, s, periodic, x0, dx, L)
        for i in range(n):
            rhs[i] = (1.0 - 0.5 * dt) * w[i] + lam * laplacian_at(w, i, periodic) + dt * delta[i] \
                - (b_new[i] - b_now[i])
        cn_solve(a, cp, den, q, gamma, lam, periodic, rhs, wp)
        r2p = -_field_at(wp, l2p, l1p, l2p, s, periodic, x0, dx, L) * inv
        r1p = _field_at(wp, l1p, l1p, l2p, s, periodic, x0, dx, L) * inv
        l2 = l2 + 0.5 * dt * (r2 + r2p)
        l1 = l1 + 0.5 * dt * (r1 + r1p)
        t = t0 + (it + 1) * dt
        if not (math.isfinite(l1) and math.isfinite(l2)):
            status = 3
            break
        # move the remainder onto the corrected positions; v itself is unchanged
        _box_fill(b_now, l1, l2, s, periodic, x0, dx, L)
        for i in range(n):
            w[i] = wp[i] + b_new[i] - b_now[i]
        r2 = -_field_at(w, l2, l1, l2, s, periodic, x0, dx, L) * inv
        r1 = _field_at(w, l1, l1, l2, s, periodic, x0, dx, L) * inv
        if l2 - l1 < dx:
            status = 6
        elif l2 - l1 > h_blowup:
            status = 1
        elif not periodic and l1 < x0:
            status = 5
        elif not periodic and l2 > x0 + (n - 1) * dx:
            status = 4
        if (it + 1) % stride == 0 or status != 0 or it + 1 == nsteps:
            rec[k, 0] = t
            rec[k, 1] = l2
            rec[k, 2] = l1
            rec[k, 3] = r2
            rec[k, 4] = r1
            k += 1
        if status != 0:
            break
    if status == 3:
        return rec[:k], v.copy(), status, l2, l1
    return rec[:k], w + b_now, status, l2, l1


_STATUS = {0: "completed", 1: "decomposed", 3: "nonfinite-state", 4: "domain-exit", 5: "domain-exit",
           6: "interfaces-merged"}


def _run(s: FieldState, p: ModelParams, het: Heterogeneity | None, cfg: HybridConfig, nsteps: int):
    delta = delta_profile(het or Constant(), p, s.x)
    x0 = float(s.x[0])
    rec, v, status, l2, l1 = hybrid_kernel(
        s.v.astype(float), float(s.l2), float(s.l1), p.tau, p.D, delta, x0, cfg.dx, cfg.dt,
        int(nsteps), int(cfg.record_stride), cfg.boundary == "periodic", cfg.blowup(), float(s.t),
    )
    return rec, v, int(status), float(l2), float(l1)


def initial_state(p: ModelParams, cfg: HybridConfig, center: float | None = None, h: float | None = None,
                  het: Heterogeneity | None = None, speed: float = 0.0) -> FieldState:
    """Pulse of width ``h`` (default ``h*``) at ``center`` with its steady field.

    With ``speed > 0`` the co-moving traveling field is used instead, so the
    pulse starts on (or near) the traveling branch.
    """
    from frontpulse.model import stationary_width

    x = cfg.grid()
    center = 0.5 * (cfg.x_lo + cfg.x_hi) if center is None else center
    h = stationary_width(p.D, p.delta0) if h is None else h
    l1, l2 = center - h / 2, center + h / 2
    if speed > 0:
        L = cfg.x_hi - cfg.x_lo
        xi = x - l1
        if cfg.boundary == "periodic":
            xi = (xi + L / 2 - h / 2) % L - (L / 2 - h / 2)
        v = traveling_field(xi, h, speed, p)
    else:
        v = stationary_field(x, l2, l1, p, het)
    return FieldState(x, v, l2, l1, 0.0)


def homogeneous_state(p: ModelParams, cfg: HybridConfig, kick: float = 0.01) -> FieldState:
    """Perturbed standing pulse above the drift threshold, perturbed traveling pulse below it."""
    if p.tau >= drift_threshold(p):
        from frontpulse.model import stationary_width

        return initial_state(p, cfg, h=stationary_width(p.D, p.delta0) + kick)
    h, c = traveling_pulse(p)
    return initial_state(p, cfg, h=h + kick, speed=c)


def step_hybrid(s: FieldState, p: ModelParams, het: Heterogeneity | None, cfg: HybridConfig) -> FieldState:
    """One semi-implicit time step."""
    _, v, status, l2, l1 = _run(s, p, het, cfg, 1)
    if status in (4, 5):
        side = "right" if status == 4 else "left"
        raise PulseError("domain-exit", f"interface left the domain on the {side}")
    if status == 6:
        raise PulseError("interfaces-merged", "pulse width fell below one cell")
    if status == 3:
        raise PulseError("nonfinite-state", "interface position became non-finite")
    return FieldState(s.x, v, l2, l1, s.t + cfg.dt)


def run_hybrid(s0: FieldState, p: ModelParams, het: Heterogeneity | None = None,
               cfg: HybridConfig | None = None, return_state: bool = False):
    """Integrate to ``cfg.t_end`` (or an early stop) and return the interface trajectory.

    Interface velocities are recorded as ``-v(l2)/(sqrt2 tau)`` and
    ``v(l1)/(sqrt2 tau)``.  Early stops become terminal events:
    ``"decomposed"``, ``"interfaces-merged"`` or ``"domain-exit"`` (the
    event position records the exit side as ``-1`` or ``+1``).
    """
    cfg = cfg or HybridConfig()
    nsteps = int(round(cfg.t_end / cfg.dt))
    rec, v, status, l2, l1 = _run(s0, p, het, cfg, nsteps)
    if status == 3:
        raise PulseError("nonfinite-state", "interface position became non-finite")
    name = _STATUS[status]
    events = []
    if status != 0:
        pos = {4: 1.0, 5: -1.0}.get(status, float(rec[-1, 1]))
        events.append((float(rec[-1, 0]), name, pos))
    traj = Trajectory(
        times=rec[:, 0].copy(),
        states=rec[:, 1:].copy(),
        columns=("l2", "l1", "r2", "r1"),
        events=events,
        status=name,
        tier="hybrid",
    )
    if return_state:
        return traj, FieldState(s0.x, v, l2, l1, float(rec[-1, 0]))
    return traj
