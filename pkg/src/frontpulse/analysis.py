"""Closed-form and root-finding analysis of the reduced interface equations."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from typing import Literal

import numpy as np
from scipy.optimize import brentq

from frontpulse.errors import PulseError
from frontpulse.model import (
    DerivedCoefficients,
    ModelParams,
    SharpBump,
    base_coefficients,
    derive_coefficients,
    response_analytic,
    stationary_width,
)
from frontpulse.reduced_ode import LegacyWeakInteraction, rhs_homogeneous3d, rhs_truncated


@dataclass(frozen=True)
class StationaryPulse:
    """A pulse of constant width moving at constant velocity (zero for SP)."""

    h_star: float
    r_star: float
    kind: Literal["SP", "TPplus", "TPminus"]
    center: float = 0.0


@dataclass(frozen=True)
class BifurcationPoints:
    tau_d: float
    tau_H: float
    k_H: float
    P: float
    R: float


@dataclass(frozen=True)
class FrontVelocities:
    """Three constant velocities of an isolated front, plus their small-``delta0`` expansions."""

    side: Literal["left", "right"]
    r_plus: float
    r_minus: float
    r_zero: float
    approx_plus: float
    approx_minus: float
    approx_zero: float

    def as_tuple(self) -> tuple[float, float, float]:
        return self.r_plus, self.r_minus, self.r_zero


@dataclass(frozen=True)
class StationaryFront:
    """Stationary left front where the heterogeneity response vanishes.

    ``l_star`` is the root on the right half of the bump (``l_star >= xc``);
    ``eigenvalues`` come from the linearization there.  ``branch`` is
    ``"interior"`` if the root lies inside the bump and ``"exterior"``
    otherwise.
    """

    l_star: float
    branch: Literal["interior", "exterior"]
    z0: float
    z_star: float
    p0: float
    trace: float
    det: float
    eigenvalues: tuple[complex, complex]
    stability: Literal["unstable", "stable"]


# --------------------------------------------------------------------------- cubic roots


def cubic_roots(a: float, b: float, c: float, d: float) -> np.ndarray:
    """All three roots of ``a x^3 + b x^2 + c x + d`` by Cardano's formula.

    Each root is polished with two Newton steps on the original polynomial.
    Returned as a complex array sorted by real part.
    """
    if a == 0:
        raise PulseError("degenerate-cubic", "leading coefficient is zero")
    b, c, d = b / a, c / a, d / a
    shift = b / 3.0
    p = c - b * b / 3.0
    q = 2.0 * b**3 / 27.0 - b * c / 3.0 + d
    disc = cmath.sqrt(q * q / 4.0 + p**3 / 27.0)
    # choose the branch that avoids cancellation
    w = -q / 2.0 + disc if abs(-q / 2.0 + disc) >= abs(-q / 2.0 - disc) else -q / 2.0 - disc
    if abs(w) == 0.0:
        ts = [0.0, 0.0, 0.0]
    else:
        C = w ** (1.0 / 3.0)
        omega = complex(-0.5, math.sqrt(3.0) / 2.0)
        ts = []
        for k in range(3):
            Ck = C * omega**k
            ts.append(Ck - p / (3.0 * Ck))
    roots = []
    for t in ts:
        x = complex(t) - shift
        for _ in range(2):
            f = ((x + b) * x + c) * x + d
            fp = (3.0 * x + 2.0 * b) * x + c
            if fp != 0:
                x -= f / fp
        roots.append(x)
    return np.array(sorted(roots, key=lambda z: (z.real, z.imag)), dtype=complex)


# --------------------------------------------------------------------------- homogeneous pulse


def sp_homogeneous(p: ModelParams, c: DerivedCoefficients | None = None) -> StationaryPulse:
    """Homogeneous standing pulse ``(h*, 0, 0)``."""
    return StationaryPulse(stationary_width(p.D, p.delta0), 0.0, "SP")


def stability_constants(p: ModelParams, c: DerivedCoefficients, tau: float | None = None) -> tuple[float, float, float]:
    """``(P, Q, R)`` entering the linearization about the standing pulse."""
    tau = p.tau if tau is None else tau
    P = 2.0 * c.G0 * c.phi0 * p.delta0 / c.m0
    Q = math.sqrt(2.0) * (c.tau_c - tau) / c.m0
    R = 2.0 * (c.G1 + c.G0 * c.phi1 * c.h0) * p.delta0 / c.m0
    return P, Q, R


def sp_jacobian(p: ModelParams, c: DerivedCoefficients, tau: float | None = None) -> np.ndarray:
    """Jacobian of the ``(h, r2, r1)`` system at the standing pulse."""
    P, Q, R = stability_constants(p, c, tau)
    return np.array([[0.0, 1.0, -1.0], [-P, Q, -R], [P, -R, Q]])


def bifurcation_points(p: ModelParams, c: DerivedCoefficients | None = None) -> BifurcationPoints:
    """Drift (pitchfork) and Hopf thresholds of the standing pulse."""
    c = c or derive_coefficients(p)
    gap = math.sqrt(2.0) * (c.G1 + c.G0 * c.phi1 * c.h0) * p.delta0
    P, _, R = stability_constants(p, c, c.tau_c)
    return BifurcationPoints(c.tau_c - gap, c.tau_c + gap, math.sqrt(2.0 * P), P, R)


def sp_eigenvalues(p: ModelParams, c: DerivedCoefficients | None = None, tau: float | None = None) -> np.ndarray:
    """Eigenvalues of the standing pulse from its characteristic cubic.

    The cubic ``lam (lam - Q)^2 + 2P (lam - Q) - R^2 lam + 2PR`` expands to
    ``lam^3 - 2Q lam^2 + (Q^2 + 2P - R^2) lam + 2P(R - Q)``.
    """
    c = c or derive_coefficients(p)
    P, Q, R = stability_constants(p, c, tau)
    return cubic_roots(1.0, -2.0 * Q, Q * Q + 2.0 * P - R * R, 2.0 * P * (R - Q))


# --------------------------------------------------------------------------- traveling pulse


def tp_perturbative(p: ModelParams, c: DerivedCoefficients | None = None, tau: float | None = None) -> StationaryPulse:
    """Leading-order traveling pulse just below the drift threshold.

    ``r* = sqrt(sqrt2 / (g3 - g3_tilde)) sqrt(tau_d - tau)`` and
    ``h* = h0 + h2 (tau_d - tau)``.
    """
    c = c or derive_coefficients(p)
    tau = p.tau if tau is None else tau
    bp = bifurcation_points(p, c)
    dist = bp.tau_d - tau
    if dist < 0:
        raise PulseError("above-drift-threshold", f"tau={tau} exceeds tau_d={bp.tau_d}")
    denom = c.g3 - c.g3_tilde
    if denom <= 0:
        raise PulseError("subcritical-regime", f"g3 - g3_tilde = {denom:.3e} <= 0")
    r1 = math.sqrt(math.sqrt(2.0) / denom)
    return StationaryPulse(c.h0 + tp_width_slope(c) * dist, r1 * math.sqrt(dist), "TPplus")


def tp_width_slope(c: DerivedCoefficients) -> float:
    """Second-order width coefficient ``h2`` of the traveling-pulse expansion."""
    x = c.phi1 * c.h0
    num = -c.phi2 * c.h0 + 0.5 * x * x + (c.G1 / c.G0) * x
    return math.sqrt(2.0) * num / (c.phi0 * (c.g3 - c.g3_tilde))


def _tp_residual(y, tau, p: ModelParams):
    h, r = y
    return rhs_homogeneous3d([h, r, r], replace(p, tau=tau))[1:]


def _newton(fun, y0, tol=1e-13, max_iter=200):
    # Newton with backtracking (step halved until the residual decreases)
    y = np.array(y0, dtype=float)
    f = fun(y)
    for _ in range(max_iter):
        nf = np.linalg.norm(f)
        if nf < tol:
            return y, True
        J = np.empty((len(y), len(y)))
        for j in range(len(y)):
            e = np.zeros(len(y))
            step = 1e-7 * max(1.0, abs(y[j]))
            e[j] = step
            J[:, j] = (fun(y + e) - fun(y - e)) / (2 * step)
        try:
            dy = np.linalg.solve(J, -f)
        except np.linalg.LinAlgError:
            return y, False
        lam = 1.0
        while lam > 1e-6:
            yn = y + lam * dy
            fn = fun(yn)
            if np.all(np.isfinite(fn)) and np.linalg.norm(fn) < nf:
                break
            lam *= 0.5
        else:
            return y, nf < 1e-10
        y, f = yn, fn
    return y, np.linalg.norm(f) < 1e-10


def tp_exact(p: ModelParams, tau: float | None = None, c: DerivedCoefficients | None = None) -> StationaryPulse:
    """Traveling-pulse fixed point of the truncated homogeneous equations.

    Newton's method, continued in ``tau`` from just below the drift
    threshold where the perturbative formula is an accurate seed.
    """
    c = c or derive_coefficients(p)
    tau = p.tau if tau is None else tau
    td = bifurcation_points(p, c).tau_d
    if tau >= td:
        raise PulseError("no-traveling-pulse", f"tau={tau} is not below tau_d={td}")
    # r grows like sqrt(tau_d - tau): step geometrically in the distance and
    # rescale the seed velocity so Newton does not fall back onto the SP branch
    target = td - tau
    first = min(target, 1e-4)
    n = max(1, int(math.ceil(math.log(target / first) / math.log(1.25))))
    dists = np.geomspace(first, target, n + 1) if target > first else np.array([first])
    guess = tp_perturbative(p, c, td - first)
    y = np.array([guess.h_star, guess.r_star])
    prev = first
    for dist in dists:
        seed = np.array([y[0], y[1] * math.sqrt(dist / prev)])
        y, ok = _newton(lambda v: _tp_residual(v, td - dist, p), seed)
        if not ok or y[1] < 0.5 * seed[1]:
            raise PulseError("newton-failed", f"traveling pulse not found at tau={td - dist}")
        prev = dist
    return StationaryPulse(float(y[0]), float(y[1]), "TPplus")


def front_scale(p: ModelParams, c: DerivedCoefficients | None = None, tau: float | None = None) -> float:
    """Velocity of a traveling front without baseline forcing, ``sqrt(sqrt2 |tau_c - tau| / g3)``."""
    c = c or derive_coefficients(p)
    tau = p.tau if tau is None else tau
    return math.sqrt(math.sqrt(2.0) * abs(c.tau_c - tau) / c.g3)


# --------------------------------------------------------------------------- fronts


def front_velocities(
    side: Literal["left", "right"],
    p: ModelParams,
    c: DerivedCoefficients | None = None,
    level: float | None = None,
) -> FrontVelocities:
    """Real roots of ``sqrt2 (tau_c - tau) r - g3 r^3 +/- level = 0``.

    ``level`` defaults to ``delta0``; the sign is ``+`` on the left side.
    """
    m0, tau_c, g3, _, _ = base_coefficients(p.D)
    lvl = p.delta0 if level is None else level
    s = lvl if side == "left" else -lvl
    a = math.sqrt(2.0) * (tau_c - p.tau)
    roots = cubic_roots(-g3, 0.0, a, s)
    scale = max(1.0, float(np.max(np.abs(roots))))
    if np.any(np.abs(roots.imag) > 1e-9 * scale):
        raise PulseError("fold-collision", "front cubic has fewer than three real roots")
    rr = np.sort(roots.real)
    if a <= 0:
        raise PulseError("fold-collision", "tau >= tau_c: no counter-propagating fronts")
    # the zero-velocity branch is the one nearest the origin
    iz = int(np.argmin(np.abs(rr)))
    others = [rr[i] for i in range(3) if i != iz]
    r0 = float(rr[iz])
    r_minus, r_plus = float(min(others)), float(max(others))
    # small-forcing series: moving branches through second order, zero branch
    # through first order (its next term is third order)
    base = math.sqrt(a / g3)
    corr = s / (2.0 * a)
    second = 3.0 * g3 * base * s * s / (8.0 * a**3)
    return FrontVelocities(side, r_plus, r_minus, r0, base + corr - second, -base + corr + second, -s / a)


def _bump_z0(p: ModelParams, het: SharpBump) -> float:
    return math.exp(-het.d0 / (2.0 * p.sqrtD))


def stationary_front(p: ModelParams, het: SharpBump, c: DerivedCoefficients | None = None) -> StationaryFront:
    """Stationary left front on a dipped bump, ``Delta0(l*) = 0`` with ``l* >= xc``."""
    if not p.delta0 > 0:
        raise PulseError("degenerate-baseline", "stationary front needs delta0 > 0")
    eps, d = het.eps0, p.delta0
    z0 = _bump_z0(p, het)
    if not eps <= -d / (1.0 - z0):
        raise PulseError("no-stationary-front", f"eps0={eps} above -delta0/(1-z0)={-d / (1 - z0):.6g}")
    boundary = -2.0 * d / (1.0 - z0 * z0)
    if eps >= boundary:
        a = (d + eps) / (eps * z0)
        z = a - math.sqrt(max(a * a - 1.0, 0.0))
        branch = "interior"
    else:
        z = -2.0 * d * z0 / (eps * (1.0 - z0 * z0))
        branch = "exterior"
    x = -p.sqrtD * math.log(z)
    l_star = het.xc + x
    resp = response_analytic(het, p)
    m0, tau_c, *_ = base_coefficients(p.D)
    p0 = resp.derivative(l_star) / m0
    tr = math.sqrt(2.0) * (tau_c - p.tau) / m0
    det = -p0
    disc = cmath.sqrt(tr * tr - 4.0 * det)
    ev = ((tr - disc) / 2.0, (tr + disc) / 2.0)
    stab = "unstable" if max(e.real for e in ev) > 0 else "stable"
    return StationaryFront(l_star, branch, z0, z, p0, tr, det, ev, stab)


def eps0_for_front(p: ModelParams, d0: float, offset: float) -> float:
    """Bump height for which the stationary front sits ``offset`` right of the bump center."""
    z0 = math.exp(-d0 / (2.0 * p.sqrtD))
    z = math.exp(-offset / p.sqrtD)
    if z <= z0:
        return -2.0 * p.delta0 * z0 / (z * (1.0 - z0 * z0))
    # interior: delta0 + eps (1 - z0 (z + 1/z)/2) = 0
    return -p.delta0 / (1.0 - 0.5 * z0 * (z + 1.0 / z))


# --------------------------------------------------------------------------- heterogeneous pulse


def het_sp_balance(z: float, p: ModelParams, het: SharpBump) -> float:
    """Bump height for which a centered pulse with ``z = exp(-h / (2 sqrt D))`` is stationary."""
    G0 = 0.5
    z0 = _bump_z0(p, het)
    num = G0 * z * z - p.delta0
    if z >= z0:
        return num / (1.0 - 0.5 * z0 * (z + 1.0 / z))
    return num / (0.5 * z * (1.0 / z0 - z0))


def het_sp(p: ModelParams, c: DerivedCoefficients | None, het: SharpBump, tol: float = 1e-12) -> StationaryPulse:
    """Stationary pulse centered on a sharp bump, found by bisection in ``z``."""
    G0 = 0.5
    z0 = _bump_z0(p, het)
    thresh = (G0 - p.delta0) / (1.0 - z0)
    if het.eps0 >= thresh:
        raise PulseError("no-stationary-pulse", f"eps0={het.eps0} >= {thresh:.6g}")
    lo, hi = 1e-300, 1.0
    flo, fhi = het_sp_balance(lo, p, het), het_sp_balance(hi, p, het)
    if not flo < het.eps0 < fhi:
        raise PulseError("no-stationary-pulse", "root not bracketed")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if het_sp_balance(mid, p, het) < het.eps0:
            lo = mid
        else:
            hi = mid
    z = 0.5 * (lo + hi)
    return StationaryPulse(-2.0 * p.sqrtD * math.log(z), 0.0, "SP", het.xc)


def fd_jacobian(fun, y: np.ndarray, step: float = 1e-6) -> np.ndarray:
    """Central finite-difference Jacobian."""
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    f0 = np.asarray(fun(y))
    J = np.empty((f0.shape[0], n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = step
        J[:, j] = (np.asarray(fun(y + e)) - np.asarray(fun(y - e))) / (2.0 * step)
    return J


def leading_complex_real_part(eigs: np.ndarray, im_tol: float = 1e-8) -> float | None:
    """Largest real part among eigenvalues with ``|Im| > im_tol``; None if all real."""
    cx = [e.real for e in eigs if abs(e.imag) > im_tol]
    return max(cx) if cx else None


def het_jacobian(p: ModelParams, het: SharpBump, tau: float, step: float = 1e-6) -> np.ndarray:
    """Finite-difference Jacobian of the truncated equations at the centered stationary pulse."""
    sp = het_sp(p, None, het)
    pt = replace(p, tau=tau)
    resp = response_analytic(het, pt)
    y0 = np.array([het.xc + sp.h_star / 2, het.xc - sp.h_star / 2, 0.0, 0.0])
    return fd_jacobian(lambda y: rhs_truncated(y, pt, None, resp), y0, step)


def het_hopf_sweep(
    p: ModelParams,
    c: DerivedCoefficients | None,
    het: SharpBump,
    tau_range: tuple[float, float] = (0.17, 0.22),
    samples: int = 101,
    tol: float = 1e-10,
) -> float:
    """Hopf point of the heterogeneity-induced standing pulse.

    Scans ``tau_range`` for a sign change in the real part of the leading
    complex eigenvalue pair, then bisects.
    """
    def lead(tau):
        return leading_complex_real_part(np.linalg.eigvals(het_jacobian(p, het, tau)))

    taus = np.linspace(tau_range[0], tau_range[1], samples)
    vals = [lead(t) for t in taus]
    for i in range(samples - 1):
        a, b = vals[i], vals[i + 1]
        if a is None or b is None or a * b > 0:
            continue
        lo, hi, flo = taus[i], taus[i + 1], a
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            fm = lead(mid)
            if fm is None:
                break
            if (fm > 0) == (flo > 0):
                lo, flo = mid, fm
            else:
                hi = mid
        return 0.5 * (lo + hi)
    raise PulseError("no-hopf-found", f"no complex-pair crossing in tau range {tau_range}")


# --------------------------------------------------------------------------- legacy model


@dataclass(frozen=True)
class LegacyStationary:
    h: float
    r2: float
    r1: float


def legacy_stationary(p: ModelParams, variant: LegacyWeakInteraction | None = None,
                      tau: float | None = None) -> LegacyStationary:
    """Symmetric stationary-width state of the legacy model.

    The drift terms make the interfaces move in their own frame, so the
    velocities are ``r2 = -r1 = -(M0_tilde E + delta0 beta1)`` rather than 0.
    """
    v = (variant or LegacyWeakInteraction()).resolved(p.D)
    tau = p.tau if tau is None else tau
    tau_c = 1.0 / (4.0 * math.sqrt(2.0 * p.D))
    sD = p.sqrtD

    def r_of(E):
        return -(v.M0_tilde * E + p.delta0 * v.beta1)

    def balance(E):
        r = r_of(E)
        return -v.M1 * r**3 + v.M2 * (tau_c - tau) * r + v.M0 * E - p.delta0 * v.beta2

    E = brentq(balance, 1e-300, 1.0, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    r = r_of(E)
    return LegacyStationary(-sD * math.log(E), r, -r)


def legacy_jacobian(p: ModelParams, variant: LegacyWeakInteraction | None = None,
                    tau: float | None = None) -> np.ndarray:
    """Jacobian of the legacy ``(h, r2, r1)`` system at its stationary-width state."""
    v = (variant or LegacyWeakInteraction()).resolved(p.D)
    tau = p.tau if tau is None else tau
    st = legacy_stationary(p, v, tau)
    tau_c = 1.0 / (4.0 * math.sqrt(2.0 * p.D))
    E = math.exp(-st.h / p.sqrtD)
    a = v.M0 * E / p.sqrtD
    b = 2.0 * v.M0_tilde * E / p.sqrtD
    q2 = v.M2 * (tau_c - tau) - 3.0 * v.M1 * st.r2**2
    q1 = v.M2 * (tau_c - tau) - 3.0 * v.M1 * st.r1**2
    return np.array([[-b, 1.0, -1.0], [-a, q2, 0.0], [a, 0.0, q1]])


def legacy_bifurcation_points(p: ModelParams, variant: LegacyWeakInteraction | None = None,
                              bracket: tuple[float, float] | None = None) -> tuple[float, float]:
    """``(tau_pitchfork, tau_hopf)`` of the legacy model's stationary-width state.

    Found by bisecting the real eigenvalue and the complex pair's real part
    of :func:`legacy_jacobian` through zero.
    """
    v = (variant or LegacyWeakInteraction()).resolved(p.D)
    tau_c = 1.0 / (4.0 * math.sqrt(2.0 * p.D))
    lo, hi = bracket or (0.5 * tau_c, 1.5 * tau_c)

    def real_ev(tau):
        J = legacy_jacobian(p, v, tau)
        # symmetric mode (0, 1, 1) decouples; its eigenvalue is the diagonal entry
        return J[1, 1]

    def cplx(tau):
        J = legacy_jacobian(p, v, tau)
        # antisymmetric block acting on (h, r2 - r1)
        return J[0, 0] + J[1, 1]

    tp = brentq(real_ev, lo, hi, xtol=1e-14)
    th = brentq(cplx, lo, hi, xtol=1e-14)
    return tp, th
