"""Finite-difference simulator of the full two-component system.

    tau eps u_t = eps^2 u_xx + f(u, v),    f = (u + 1/2)(1/2 - u)(u - v/2)
            v_t = D v_xx + g(u, v),        g = u - v + delta(x)

Both diffusions are Crank-Nicolson on a periodic grid, the reactions are
explicit.  Interfaces are the zero crossings of ``u``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from frontpulse._tridiag import cn_setup, cn_solve, laplacian_at
from frontpulse.errors import PulseError
from frontpulse.hybrid import stationary_field, traveling_field
from frontpulse.model import (
    Constant,
    Heterogeneity,
    ModelParams,
    delta_profile,
    derive_coefficients,
    stationary_width,
)
from frontpulse.reduced_ode import Trajectory


def reaction_f(u, v):
    return (u + 0.5) * (0.5 - u) * (u - 0.5 * v)


def reaction_g(u, v, delta):
    return u - v + delta


@dataclass(frozen=True)
class PdeConfig:
    """Grid and run length.  ``h_blowup=None`` means 80% of the domain."""

    dx: float = 0.025
    dt: float = 0.0025
    t_end: float = 1000.0
    record_stride: int = 400
    x_lo: float = 0.0
    x_hi: float = 120.0
    h_blowup: float | None = None

    def __post_init__(self):
        if not (self.dx > 0 and self.dt > 0 and self.t_end > 0):
            raise PulseError("invalid-config", "dx, dt and t_end must be > 0")
        if self.record_stride < 1:
            raise PulseError("invalid-config", "record_stride must be >= 1")
        if self.x_hi - self.x_lo < 10 * self.dx:
            raise PulseError("invalid-config", "domain must span at least 10 cells")

    @property
    def length(self) -> float:
        return self.x_hi - self.x_lo

    def grid(self) -> np.ndarray:
        n = int(round(self.length / self.dx))
        return self.x_lo + self.dx * np.arange(n)

    def blowup(self) -> float:
        return self.h_blowup if self.h_blowup is not None else 0.8 * self.length


@dataclass
class PdeState:
    x: np.ndarray
    u: np.ndarray
    v: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        if not (self.x.shape == self.u.shape == self.v.shape):
            raise PulseError("invalid-state", "grid, u and v differ in length")
        if not (np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.v))):
            raise PulseError("invalid-state", "u or v is not finite")


def pulse_state(p: ModelParams, cfg: PdeConfig, center: float | None = None, h: float | None = None,
                het: Heterogeneity | None = None, speed: float = 0.0) -> PdeState:
    """Tanh pulse on ``[l1, l2]`` with the sharp-interface field for ``v``.

    ``speed > 0`` seeds ``v`` with the co-moving field of a rightward pulse,
    which launches the run towards a traveling state.
    """
    x = cfg.grid()
    center = 0.5 * (cfg.x_lo + cfg.x_hi) if center is None else center
    h = stationary_width(p.D, p.delta0) if h is None else h
    l1, l2 = center - h / 2, center + h / 2
    w = 2.0 * math.sqrt(2.0) * p.epsilon
    u = 0.5 * (np.tanh((x - l1) / w) - np.tanh((x - l2) / w)) - 0.5
    if speed > 0:
        L = cfg.length
        xi = (x - l1 + L / 2 - h / 2) % L - (L / 2 - h / 2)
        v = traveling_field(xi, h, speed, p)
    else:
        v = stationary_field(x, l2, l1, p, het)
    return PdeState(x, u, v, 0.0)


def homogeneous_pulse_state(p: ModelParams, cfg: PdeConfig, kick: float = 0.5) -> PdeState:
    """Start for a homogeneous run.

    Below the critical ``tau`` isolated fronts travel, so the pulse is
    launched rightward at the bare front speed and left to select its own
    state; above it the standing pulse is widened by ``kick``.
    """
    from frontpulse.analysis import front_scale

    c = derive_coefficients(p)
    if p.tau < c.tau_c:
        return pulse_state(p, cfg, h=c.h0, speed=front_scale(p, c))
    return pulse_state(p, cfg, h=c.h0 + kick)


def extract_interfaces(s: PdeState, length: float | None = None) -> tuple[float, float] | None:
    """``(l1, l2)`` from the zero crossings of ``u``, or ``None`` unless there are exactly two.

    ``l1`` is the upward crossing.  On a periodic grid (``length`` given) a
    pulse straddling the seam gets ``l2 > x_hi``.
    """
    u, x = s.u, s.x
    if length is not None:
        un = np.append(u, u[0])
        xn = np.append(x, x[0] + length)
    else:
        un, xn = u, x
    sgn = un > 0
    idx = np.nonzero(sgn[1:] != sgn[:-1])[0]
    if idx.shape[0] != 2:
        return None
    pos, up = [], []
    for i in idx:
        w = un[i] / (un[i] - un[i + 1])
        pos.append(xn[i] + w * (xn[i + 1] - xn[i]))
        up.append(un[i + 1] > un[i])
    if up[0] == up[1]:
        return None
    l1, l2 = (pos[0], pos[1]) if up[0] else (pos[1], pos[0])
    if l2 < l1:
        if length is None:
            return None
        l2 += length
    return float(l1), float(l2)


@njit(cache=True)
def pde_kernel(u, v, tau, eps, D, delta, dx, dt, nsteps):
    """Advance ``nsteps`` on a periodic grid; status 1 if ``|u|`` exceeds 1.5."""
    n = u.shape[0]
    lu = (eps / tau) * dt / (2.0 * dx * dx)
    lv = D * dt / (2.0 * dx * dx)
    au, cpu, denu, qu, gu = cn_setup(n, lu, 0.0, True)
    av, cpv, denv, qv, gv = cn_setup(n, lv, 0.0, True)
    rate = 1.0 / (tau * eps)
    ru = np.empty(n)
    rv = np.empty(n)
    for it in range(nsteps):
        for i in range(n):
            ui = u[i]
            vi = v[i]
            ru[i] = ui + lu * laplacian_at(u, i, True) + dt * rate * (ui + 0.5) * (0.5 - ui) * (ui - 0.5 * vi)
            rv[i] = vi + lv * laplacian_at(v, i, True) + dt * (ui - vi + delta[i])
        cn_solve(au, cpu, denu, qu, gu, lu, True, ru, u)
        cn_solve(av, cpv, denv, qv, gv, lv, True, rv, v)
        for i in range(n):
            if not abs(u[i]) < 1.5:
                return 1, it + 1
    return 0, nsteps


def step_pde(s: PdeState, p: ModelParams, het: Heterogeneity | None, cfg: PdeConfig) -> PdeState:
    u, v = s.u.copy(), s.v.copy()
    delta = delta_profile(het or Constant(), p, s.x)
    status, _ = pde_kernel(u, v, p.tau, p.epsilon, p.D, delta, cfg.dx, cfg.dt, 1)
    if status:
        raise PulseError("blowup", "|u| exceeded 1.5")
    return PdeState(s.x, u, v, s.t + cfg.dt)


def run_pde(s0: PdeState, p: ModelParams, het: Heterogeneity | None = None, cfg: PdeConfig | None = None,
            return_state: bool = False):
    """Integrate and record interface positions every ``record_stride`` steps.

    Positions are unwrapped across the periodic seam; velocities are
    centered differences of the recorded positions.  The run stops with
    status ``"interfaces-merged"`` or ``"nucleation"`` when the crossing
    count changes and ``"decomposed"`` when the width exceeds ``h_blowup``.
    """
    cfg = cfg or PdeConfig()
    L = cfg.length
    delta = delta_profile(het or Constant(), p, s0.x)
    u, v = s0.u.copy(), s0.v.copy()
    first = extract_interfaces(s0, L)
    if first is None:
        raise PulseError("invalid-state", "initial data must contain exactly two interfaces")
    t = s0.t
    times, rows = [t], [first]
    status = "completed"
    n_chunks = int(round(cfg.t_end / (cfg.dt * cfg.record_stride)))
    for _ in range(n_chunks):
        code, done = pde_kernel(u, v, p.tau, p.epsilon, p.D, delta, cfg.dx, cfg.dt, cfg.record_stride)
        t += done * cfg.dt
        if code:
            raise PulseError("blowup", f"|u| exceeded 1.5 at t={t:.6g}")
        now = extract_interfaces(PdeState(s0.x, u, v, t), L)
        if now is None:
            crossings = int(np.count_nonzero(np.diff(np.append(u, u[0]) > 0)))
            status = "interfaces-merged" if crossings < 2 else "nucleation"
            break
        l1, l2 = now
        prev_c = 0.5 * (rows[-1][0] + rows[-1][1])
        shift = L * round((prev_c - 0.5 * (l1 + l2)) / L)
        l1, l2 = l1 + shift, l2 + shift
        times.append(t)
        rows.append((l1, l2))
        if l2 - l1 > cfg.blowup():
            status = "decomposed"
            break
    times = np.asarray(times)
    pos = np.asarray(rows)
    if times.shape[0] > 1:
        r1 = np.gradient(pos[:, 0], times)
        r2 = np.gradient(pos[:, 1], times)
    else:
        r1 = r2 = np.zeros(1)
    events = [] if status == "completed" else [(float(times[-1]), status, float(pos[-1, 1]))]
    traj = Trajectory(times, np.column_stack([pos[:, 1], pos[:, 0], r2, r1]), ("l2", "l1", "r2", "r1"),
                      events, status, "pde")
    if return_state:
        return traj, PdeState(s0.x, u, v, t)
    return traj
