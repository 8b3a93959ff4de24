"""Compiled inner loops shared by the reduced-ODE tier.

Everything here is written against plain arrays so numba can compile it.  The
public wrappers in ``model`` and ``reduced_ode`` convert dataclasses into the
packed argument lists used below.

Response profiles are passed as eight positional arguments::

    sqrtD, baseline, box_a, box_b, box_h, tab_x0, tab_dx, tab_v

If ``tab_v`` is non-empty the profile is a uniformly sampled table, otherwise
it is ``baseline`` plus a sum of analytic box responses.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

FULL = 0
TRUNCATED = 1
LEGACY = 2
SINGLE_LEFT = 3
SINGLE_RIGHT = 4
HOMOGENEOUS3D = 5

STATUS_DONE = 0
STATUS_BLOWUP = 1
STATUS_SINGULAR = 2
STATUS_NONFINITE = 3
STATUS_EXIT_RIGHT = 4
STATUS_EXIT_LEFT = 5
STATUS_COLLAPSED = 6
STATUS_STIFF = 7

SINGULAR_DET = 1e-12
SQRT2 = math.sqrt(2.0)


# --------------------------------------------------------------------------- response


@njit(cache=True)
def _box(x, a, b, s):
    if x <= a:
        return 0.5 * (math.exp((x - a) / s) - math.exp((x - b) / s))
    if x <= b:
        return 1.0 - 0.5 * math.exp(-(x - a) / s) - 0.5 * math.exp(-(b - x) / s)
    return 0.5 * (math.exp(-(x - b) / s) - math.exp(-(x - a) / s))


@njit(cache=True)
def _box_deriv(x, a, b, s):
    if x <= a:
        return 0.5 / s * (math.exp((x - a) / s) - math.exp((x - b) / s))
    if x <= b:
        return 0.5 / s * (math.exp(-(x - a) / s) - math.exp(-(b - x) / s))
    return 0.5 / s * (math.exp(-(x - a) / s) - math.exp(-(x - b) / s))


@njit(cache=True)
def response(x, sD, base, ba, bb, bh, tx0, tdx, tv):
    n = tv.shape[0]
    if n > 0:
        f = (x - tx0) / tdx
        if f <= 0.0 or f >= n - 1:
            return base
        i = int(f)
        w = f - i
        return (1.0 - w) * tv[i] + w * tv[i + 1]
    out = base
    for k in range(ba.shape[0]):
        out += bh[k] * _box(x, ba[k], bb[k], sD)
    return out


@njit(cache=True)
def response_deriv(x, sD, base, ba, bb, bh, tx0, tdx, tv):
    n = tv.shape[0]
    if n > 0:
        f = (x - tx0) / tdx
        if f <= 0.0 or f >= n - 1:
            return 0.0
        i = int(f)
        w = f - i
        # central difference of the table, interpolated; keeps the slope continuous
        il = max(i - 1, 0)
        ir = min(i + 1, n - 1)
        d0 = (tv[ir] - tv[il]) / ((ir - il) * tdx)
        jl = max(i, 0)
        jr = min(i + 2, n - 1)
        d1 = (tv[jr] - tv[jl]) / ((jr - jl) * tdx)
        return (1.0 - w) * d0 + w * d1
    out = 0.0
    for k in range(ba.shape[0]):
        out += bh[k] * _box_deriv(x, ba[k], bb[k], sD)
    return out


@njit(cache=True)
def response_array(xs, sD, base, ba, bb, bh, tx0, tdx, tv):
    out = np.empty(xs.shape[0])
    for i in range(xs.shape[0]):
        out[i] = response(xs[i], sD, base, ba, bb, bh, tx0, tdx, tv)
    return out


@njit(cache=True)
def response_deriv_array(xs, sD, base, ba, bb, bh, tx0, tdx, tv):
    out = np.empty(xs.shape[0])
    for i in range(xs.shape[0]):
        out[i] = response_deriv(xs[i], sD, base, ba, bb, bh, tx0, tdx, tv)
    return out


# --------------------------------------------------------------------------- right-hand sides
#
# prm = [tau, D, delta0, M0, M0_tilde, beta1, beta2, M1, M2]


@njit(cache=True)
def rhs(variant, y, dy, prm, sD, base, ba, bb, bh, tx0, tdx, tv):
    """Fill ``dy`` and return the mass-matrix determinant (1.0 if not applicable)."""
    tau = prm[0]
    D = prm[1]
    sqD = math.sqrt(D)
    tau_c = 1.0 / (4.0 * math.sqrt(2.0 * D))
    lin = SQRT2 * (tau_c - tau)

    if variant == FULL:
        l2, l1, r2, r1 = y[0], y[1], y[2], y[3]
        h = l2 - l1
        p1 = math.sqrt(r1 * r1 + 4.0 * D)
        p2 = math.sqrt(r2 * r2 + 4.0 * D)
        m1 = 6.0 * D * D / p1**5
        m2 = 6.0 * D * D / p2**5
        M1 = m1 + 3.0 * D * h / p1**4 + h * h / (2.0 * p1**3)
        M2 = m2 + 3.0 * D * h / p2**4 + h * h / (2.0 * p2**3)
        g1 = -SQRT2 * tau * r1 + r1 / (2.0 * p1)
        g2 = -SQRT2 * tau * r2 + r2 / (2.0 * p2)
        # G(-r1) uses phi(-r1) = phi(r1)
        Gm1 = (-r1 + p1) / (2.0 * p1)
        G2 = (r2 + p2) / (2.0 * p2)
        E1 = math.exp(-(r1 + p1) * h / (2.0 * D))
        E2 = math.exp(-(-r2 + p2) * h / (2.0 * D))
        b0 = g2 + Gm1 * E1 - response(l2, sD, base, ba, bb, bh, tx0, tdx, tv)
        b1 = g1 - G2 * E2 + response(l1, sD, base, ba, bb, bh, tx0, tdx, tv)
        a01 = M1 * E1
        a10 = M2 * E2
        det = m2 * m1 - a01 * a10
        dy[0] = r2
        dy[1] = r1
        if det <= SINGULAR_DET:
            dy[2] = 0.0
            dy[3] = 0.0
            return det
        dy[2] = (b0 * m1 + a01 * b1) / det
        dy[3] = (m2 * b1 + a10 * b0) / det
        return det

    m0 = 3.0 / (16.0 * sqD)
    g3 = 1.0 / (32.0 * D * sqD)
    G0 = 0.5
    G1 = 1.0 / (4.0 * sqD)

    if variant == TRUNCATED:
        l2, l1, r2, r1 = y[0], y[1], y[2], y[3]
        h = l2 - l1
        E1 = math.exp(-(r1 + math.sqrt(r1 * r1 + 4.0 * D)) * h / (2.0 * D))
        E2 = math.exp(-(-r2 + math.sqrt(r2 * r2 + 4.0 * D)) * h / (2.0 * D))
        dy[0] = r2
        dy[1] = r1
        dy[2] = (lin * r2 - g3 * r2**3 + (G0 - G1 * r1) * E1
                 - response(l2, sD, base, ba, bb, bh, tx0, tdx, tv)) / m0
        dy[3] = (lin * r1 - g3 * r1**3 - (G0 + G1 * r2) * E2
                 + response(l1, sD, base, ba, bb, bh, tx0, tdx, tv)) / m0
        return 1.0

    if variant == HOMOGENEOUS3D:
        h, r2, r1 = y[0], y[1], y[2]
        d0 = prm[2]
        E1 = math.exp(-(r1 + math.sqrt(r1 * r1 + 4.0 * D)) * h / (2.0 * D))
        E2 = math.exp(-(-r2 + math.sqrt(r2 * r2 + 4.0 * D)) * h / (2.0 * D))
        dy[0] = r2 - r1
        dy[1] = (lin * r2 - g3 * r2**3 + (G0 - G1 * r1) * E1 - d0) / m0
        dy[2] = (lin * r1 - g3 * r1**3 - (G0 + G1 * r2) * E2 + d0) / m0
        return 1.0

    if variant == SINGLE_LEFT or variant == SINGLE_RIGHT:
        l, r = y[0], y[1]
        sgn = 1.0 if variant == SINGLE_LEFT else -1.0
        dy[0] = r
        dy[1] = (lin * r - g3 * r**3 + sgn * response(l, sD, base, ba, bb, bh, tx0, tdx, tv)) / m0
        return 1.0

    # legacy weak-interaction model with constant coefficients
    l2, l1, r2, r1 = y[0], y[1], y[2], y[3]
    d0 = prm[2]
    M0, M0t, be1, be2, c1, c2 = prm[3], prm[4], prm[5], prm[6], prm[7], prm[8]
    E = math.exp(-(l2 - l1) / sqD)
    dy[0] = r2 + M0t * E + d0 * be1
    dy[1] = r1 - M0t * E - d0 * be1
    dy[2] = -c1 * r2**3 + c2 * (tau_c - tau) * r2 + M0 * E - d0 * be2
    dy[3] = -c1 * r1**3 + c2 * (tau_c - tau) * r1 - M0 * E + d0 * be2
    return 1.0


# --------------------------------------------------------------------------- integrators


@njit(cache=True)
def _width(variant, y):
    if variant == HOMOGENEOUS3D:
        return y[0]
    if variant == SINGLE_LEFT or variant == SINGLE_RIGHT:
        return 1.0
    return y[0] - y[1]


@njit(cache=True)
def _check(variant, y, det, h_blowup, stop_lo, stop_hi):
    for i in range(y.shape[0]):
        if not math.isfinite(y[i]):
            return STATUS_NONFINITE
    if det <= SINGULAR_DET:
        return STATUS_SINGULAR
    if variant == HOMOGENEOUS3D:
        if y[0] > h_blowup:
            return STATUS_BLOWUP
        if y[0] <= 0.0:
            return STATUS_COLLAPSED
        return STATUS_DONE
    if variant == SINGLE_LEFT or variant == SINGLE_RIGHT:
        if y[0] > stop_hi:
            return STATUS_EXIT_RIGHT
        if y[0] < stop_lo:
            return STATUS_EXIT_LEFT
        return STATUS_DONE
    h = y[0] - y[1]
    if h > h_blowup:
        return STATUS_BLOWUP
    if h <= 0.0:
        return STATUS_COLLAPSED
    if y[1] > stop_hi:
        return STATUS_EXIT_RIGHT
    if y[0] < stop_lo:
        return STATUS_EXIT_LEFT
    return STATUS_DONE


@njit(cache=True)
def _events(variant, t0, y0, t1, y1, edges, ev_t, ev_k, ev_p, n_ev):
    # kinds: 0/1 left interface crossing an edge rightward/leftward, 2/3 right interface
    if variant == HOMOGENEOUS3D:
        return n_ev
    if variant == SINGLE_LEFT or variant == SINGLE_RIGHT:
        slots = 1
    else:
        slots = 2
    cap = ev_t.shape[0]
    for s in range(slots):
        # state index 1 is l1, index 0 is l2 for the pulse variants
        if slots == 2:
            idx = 1 if s == 0 else 0
            base_kind = 0 if s == 0 else 2
        else:
            idx = 0
            base_kind = 0 if variant == SINGLE_LEFT else 2
        a = y0[idx]
        b = y1[idx]
        for e in range(edges.shape[0]):
            x = edges[e]
            if (a - x) * (b - x) < 0.0 or (b == x and a != x):
                if n_ev < cap:
                    w = (x - a) / (b - a)
                    ev_t[n_ev] = t0 + w * (t1 - t0)
                    ev_k[n_ev] = base_kind if b > a else base_kind + 1
                    ev_p[n_ev] = x
                n_ev += 1
    return n_ev


@njit(cache=True)
def rk4_run(variant, y0, t0, t_end, dt, prm, sD, base, ba, bb, bh, tx0, tdx, tv,
            h_blowup, edges, stop_lo, stop_hi, stride, max_events):
    n = y0.shape[0]
    nsteps = int(math.ceil((t_end - t0) / dt - 1e-9))
    nrec = nsteps // stride + 2
    ts = np.empty(nrec)
    ys = np.empty((nrec, n))
    ev_t = np.empty(max_events)
    ev_k = np.empty(max_events, dtype=np.int64)
    ev_p = np.empty(max_events)
    n_ev = 0
    y = y0.copy()
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    tmp = np.empty(n)
    ts[0] = t0
    ys[0] = y
    rec = 1
    t = t0
    det = rhs(variant, y, k1, prm, sD, base, ba, bb, bh, tx0, tdx, tv)
    status = _check(variant, y, det, h_blowup, stop_lo, stop_hi)
    if status != STATUS_DONE:
        return ts[:rec], ys[:rec], ev_t[:0], ev_k[:0], ev_p[:0], status, t
    for step in range(nsteps):
        h = dt
        if t + h > t_end:
            h = t_end - t
        rhs(variant, y, k1, prm, sD, base, ba, bb, bh, tx0, tdx, tv)
        for i in range(n):
            tmp[i] = y[i] + 0.5 * h * k1[i]
        rhs(variant, tmp, k2, prm, sD, base, ba, bb, bh, tx0, tdx, tv)
        for i in range(n):
            tmp[i] = y[i] + 0.5 * h * k2[i]
        rhs(variant, tmp, k3, prm, sD, base, ba, bb, bh, tx0, tdx, tv)
        for i in range(n):
            tmp[i] = y[i] + h * k3[i]
        rhs(variant, tmp, k4, prm, sD, base, ba, bb, bh, tx0, tdx, tv)
        for i in range(n):
            tmp[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        n_ev = _events(variant, t, y, t + h, tmp, edges, ev_t, ev_k, ev_p, n_ev)
        t = t0 + (step + 1) * dt if step + 1 < nsteps else t_end
        for i in range(n):
            y[i] = tmp[i]
        det = rhs(variant, y, k1, prm, sD, base, ba, bb, bh, tx0, tdx, tv)
        status = _check(variant, y, det, h_blowup, stop_lo, stop_hi)
        if (step + 1) % stride == 0 or status != STATUS_DONE or step + 1 == nsteps:
            ts[rec] = t
            ys[rec] = y
            rec += 1
        if status != STATUS_DONE:
            break
    m = min(n_ev, max_events)
    return ts[:rec], ys[:rec], ev_t[:m], ev_k[:m], ev_p[:m], status, t


# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.array([
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1 / 5, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3 / 40, 9 / 40, 0.0, 0.0, 0.0, 0.0],
    [44 / 45, -56 / 15, 32 / 9, 0.0, 0.0, 0.0],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0.0, 0.0],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0.0],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
])
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])


@njit(cache=True)
def dp45_run(variant, y0, t0, t_end, dt0, prm, sD, base, ba, bb, bh, tx0, tdx, tv,
             h_blowup, edges, stop_lo, stop_hi, stride, max_events, atol, rtol, dt_max):
    n = y0.shape[0]
    cap = 1024
    ts = np.empty(cap)
    ys = np.empty((cap, n))
    ev_t = np.empty(max_events)
    ev_k = np.empty(max_events, dtype=np.int64)
    ev_p = np.empty(max_events)
    n_ev = 0
    K = np.empty((7, n))
    y = y0.copy()
    tmp = np.empty(n)
    y5 = np.empty(n)
    ts[0] = t0
    ys[0] = y
    rec = 1
    t = t0
    h = dt0
    accepted = 0
    det = rhs(variant, y, K[0], prm, sD, base, ba, bb, bh, tx0, tdx, tv)
    status = _check(variant, y, det, h_blowup, stop_lo, stop_hi)
    if status != STATUS_DONE:
        return ts[:rec], ys[:rec], ev_t[:0], ev_k[:0], ev_p[:0], status, t
    while t < t_end:
        if t + h > t_end:
            h = t_end - t
        for s in range(1, 7):
            for i in range(n):
                acc = y[i]
                for j in range(s):
                    acc += h * _A[s, j] * K[j, i]
                tmp[i] = acc
            rhs(variant, tmp, K[s], prm, sD, base, ba, bb, bh, tx0, tdx, tv)
        err = 0.0
        for i in range(n):
            s5 = y[i]
            s4 = y[i]
            for j in range(7):
                s5 += h * _B5[j] * K[j, i]
                s4 += h * _B4[j] * K[j, i]
            y5[i] = s5
            sc = atol + rtol * max(abs(y[i]), abs(s5))
            e = (s5 - s4) / sc
            err += e * e
        err = math.sqrt(err / n)
        if not math.isfinite(err):
            err = 1e10
        if err <= 1.0:
            n_ev = _events(variant, t, y, t + h, y5, edges, ev_t, ev_k, ev_p, n_ev)
            t = t + h
            for i in range(n):
                y[i] = y5[i]
            # FSAL: the last stage is the derivative at the new point
            for i in range(n):
                K[0, i] = K[6, i]
            det = rhs(variant, y, tmp, prm, sD, base, ba, bb, bh, tx0, tdx, tv)
            status = _check(variant, y, det, h_blowup, stop_lo, stop_hi)
            accepted += 1
            if accepted % stride == 0 or status != STATUS_DONE or t >= t_end:
                if rec == cap:
                    cap *= 2
                    ts2 = np.empty(cap)
                    ys2 = np.empty((cap, n))
                    ts2[:rec] = ts[:rec]
                    ys2[:rec] = ys[:rec]
                    ts = ts2
                    ys = ys2
                ts[rec] = t
                ys[rec] = y
                rec += 1
            if status != STATUS_DONE:
                break
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
        else:
            fac = max(0.2, 0.9 * err ** -0.25)
        h = min(h * fac, dt_max)
        if h < 1e-12 * max(1.0, abs(t)):
            status = STATUS_STIFF
            break
    m = min(n_ev, max_events)
    return ts[:rec], ys[:rec], ev_t[:m], ev_k[:m], ev_p[:m], status, t
