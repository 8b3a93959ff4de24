"""Tridiagonal solves for Crank-Nicolson diffusion on a uniform grid."""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _factor(a, diag, c):
    n = diag.shape[0]
    cp = np.empty(n)
    den = np.empty(n)
    den[0] = diag[0]
    cp[0] = c[0] / diag[0]
    for i in range(1, n):
        den[i] = diag[i] - a[i] * cp[i - 1]
        cp[i] = c[i] / den[i]
    return cp, den


@njit(cache=True)
def _solve(a, cp, den, rhs, out):
    n = rhs.shape[0]
    out[0] = rhs[0] / den[0]
    for i in range(1, n):
        out[i] = (rhs[i] - a[i] * out[i - 1]) / den[i]
    for i in range(n - 2, -1, -1):
        out[i] -= cp[i] * out[i + 1]


@njit(cache=True)
def cn_setup(n, lam, extra, periodic):
    """Factor ``(1 + extra) I - lam * Laplacian``.

    Periodic matrices are handled with Sherman-Morrison; the returned ``q``
    and ``gamma`` feed :func:`cn_solve`.  Otherwise zero-flux rows (mirrored
    ghost nodes) are used.
    """
    a = np.full(n, -lam)
    c = np.full(n, -lam)
    diag = np.full(n, 1.0 + 2.0 * lam + extra)
    gamma = 1.0
    if periodic:
        gamma = -diag[0]
        diag[0] -= gamma
        diag[n - 1] -= lam * lam / gamma
    else:
        c[0] = -2.0 * lam
        a[n - 1] = -2.0 * lam
    cp, den = _factor(a, diag, c)
    q = np.zeros(n)
    if periodic:
        w = np.zeros(n)
        w[0] = gamma
        w[n - 1] = -lam
        _solve(a, cp, den, w, q)
    return a, cp, den, q, gamma


@njit(cache=True)
def cn_solve(a, cp, den, q, gamma, lam, periodic, rhs, out):
    _solve(a, cp, den, rhs, out)
    if periodic:
        n = rhs.shape[0]
        fac = (out[0] - lam * out[n - 1] / gamma) / (1.0 + q[0] - lam * q[n - 1] / gamma)
        for i in range(n):
            out[i] -= fac * q[i]


@njit(cache=True)
def laplacian_at(v, i, periodic):
    """Second difference (unscaled) with periodic or mirrored ends."""
    n = v.shape[0]
    if periodic:
        return v[(i - 1) % n] - 2.0 * v[i] + v[(i + 1) % n]
    if i == 0:
        return 2.0 * (v[1] - v[0])
    if i == n - 1:
        return 2.0 * (v[n - 2] - v[n - 1])
    return v[i - 1] - 2.0 * v[i] + v[i + 1]
