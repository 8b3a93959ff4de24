"""Parameters, reduction constants, heterogeneity profiles and their diffusive response.

The response ``Delta0`` of a heterogeneity ``delta(x)`` solves the screened
Poisson problem ``D Delta0'' - Delta0 + delta = 0`` on the real line.  Every
piecewise-constant heterogeneity is represented internally as a baseline plus
a sum of weighted unit boxes, whose response is known in closed form; smooth
and tabulated profiles go through a finite-difference solve instead.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Union

import numpy as np
from scipy.linalg import solve_banded

from frontpulse import _kernels
from frontpulse.errors import PulseError


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of the bistable reaction-diffusion model.

    ``epsilon`` only enters the full PDE tier.
    """

    tau: float
    D: float = 1.0
    delta0: float = 0.001
    epsilon: float = 0.05

    def __post_init__(self):
        if not self.tau > 0:
            raise PulseError("invalid-parameter", f"tau must be > 0, got {self.tau}")
        if not self.D > 0:
            raise PulseError("invalid-parameter", f"D must be > 0, got {self.D}")
        if not self.epsilon > 0:
            raise PulseError("invalid-parameter", f"epsilon must be > 0, got {self.epsilon}")
        if not 0 <= self.delta0 < 0.5:
            raise PulseError("invalid-parameter", f"delta0 must lie in [0, 1/2), got {self.delta0}")

    @property
    def sqrtD(self) -> float:
        return math.sqrt(self.D)


@dataclass(frozen=True)
class DerivedCoefficients:
    """Closed-form constants of the truncated interface equations."""

    m0: float
    tau_c: float
    g3: float
    G0: float
    G1: float
    phi0: float
    phi1: float
    phi2: float
    h0: float
    g3_tilde: float


def stationary_width(D: float, delta0: float) -> float:
    """Width of the homogeneous standing pulse, ``-sqrt(D) log(2 delta0)``."""
    if delta0 <= 0:
        raise PulseError("degenerate-baseline", "delta0 = 0 gives an infinitely wide standing pulse")
    if delta0 >= 0.5:
        raise PulseError("no-stationary-pulse", f"delta0 = {delta0} >= 1/2")
    return -math.sqrt(D) * math.log(2.0 * delta0)


def _g3_tilde(D, delta0, G0, G1, phi0, phi1, phi2, h0):
    # Third-order balance of the symmetric traveling-pulse conditions; see
    # analysis.tp_perturbative for the expansion this closes.
    x = phi1 * h0
    k = G1 / G0
    bracket = (
        x**3 / 3.0
        + k * x * x
        + k * k * x
        + (phi2 / phi1) * (phi1 / phi0) * x
        - (phi2 / phi1) * x * x
        - k * (phi1 / phi0) * x
    )
    return delta0 * bracket


def g3_tilde_as_published(D: float, delta0: float) -> float:
    """The cubic correction constant exactly as typeset in the source derivation.

    Kept for comparison only: it does not reproduce the traveling-pulse
    branch of the truncated equations (see ``tests/test_analysis.py``).
    """
    G0, G1 = 0.5, 1.0 / (4.0 * math.sqrt(D))
    phi1, phi2 = 1.0 / (2.0 * D), 1.0 / (8.0 * D * math.sqrt(D))
    x = phi1 * stationary_width(D, delta0)
    k = G1 / G0
    return delta0 * ((1 + k * k - k * phi1 / phi2) * x + (k - 0.5 * phi1 / phi2) * x * x + x**3 / 3.0)


def derive_coefficients(p: ModelParams) -> DerivedCoefficients:
    """Evaluate every reduction constant for the given parameters.

    Raises ``PulseError("degenerate-baseline")`` when ``delta0 == 0`` because
    the standing-pulse width, and with it ``g3_tilde``, diverges.
    """
    D = p.D
    sD = math.sqrt(D)
    m0 = 3.0 / (16.0 * sD)
    tau_c = 1.0 / (4.0 * math.sqrt(2.0 * D))
    g3 = 1.0 / (32.0 * D * sD)
    G0 = 0.5
    G1 = 1.0 / (4.0 * sD)
    phi0 = 1.0 / sD
    phi1 = 1.0 / (2.0 * D)
    phi2 = 1.0 / (8.0 * D * sD)
    h0 = stationary_width(D, p.delta0)
    g3t = _g3_tilde(D, p.delta0, G0, G1, phi0, phi1, phi2, h0)
    return DerivedCoefficients(m0, tau_c, g3, G0, G1, phi0, phi1, phi2, h0, g3t)


def base_coefficients(D: float) -> tuple[float, float, float, float, float]:
    """``(m0, tau_c, g3, G0, G1)``; valid also when ``delta0 == 0``."""
    sD = math.sqrt(D)
    return 3.0 / (16.0 * sD), 1.0 / (4.0 * math.sqrt(2.0 * D)), 1.0 / (32.0 * D * sD), 0.5, 1.0 / (4.0 * sD)


def kinematic_phi(r, D):
    """``phi(r) = sqrt(r^2 + 4D)``."""
    return np.sqrt(np.asarray(r, dtype=float) ** 2 + 4.0 * D)


def kinematic_Phi(r, D):
    """Decay rate of the interaction exponent, ``(r + phi(r)) / (2D)``."""
    r = np.asarray(r, dtype=float)
    return (r + kinematic_phi(r, D)) / (2.0 * D)


def prefactors(r, h, D, tau):
    """Prefactor functions ``(m, M, g, G)`` of the full interface equations."""
    r = np.asarray(r, dtype=float)
    ph = kinematic_phi(r, D)
    m = 6.0 * D * D / ph**5
    M = m + 3.0 * D * h / ph**4 + h * h / (2.0 * ph**3)
    g = -math.sqrt(2.0) * tau * r + r / (2.0 * ph)
    G = (r + ph) / (2.0 * ph)
    return m, M, g, G


# --------------------------------------------------------------------------- heterogeneities


@dataclass(frozen=True)
class Constant:
    kind: Literal["constant"] = "constant"


@dataclass(frozen=True)
class SharpBump:
    eps0: float
    d0: float
    xc: float = 0.0
    kind: Literal["sharp_bump"] = "sharp_bump"

    def __post_init__(self):
        if not self.d0 > 0:
            raise PulseError("invalid-heterogeneity", "bump width d0 must be > 0")


@dataclass(frozen=True)
class SmoothBump:
    eps0: float
    d0: float
    gamma: float
    xc: float = 0.0
    kind: Literal["smooth_bump"] = "smooth_bump"

    def __post_init__(self):
        if not self.d0 > 0:
            raise PulseError("invalid-heterogeneity", "bump width d0 must be > 0")
        if not self.gamma > 0:
            raise PulseError("invalid-heterogeneity", "steepness gamma must be > 0")


@dataclass(frozen=True)
class SquareWell:
    eps1: float
    eps2: float
    d0: float
    d1: float
    xc: float = 0.0
    kind: Literal["square_well"] = "square_well"

    def __post_init__(self):
        if not (self.d0 > 0 and self.d1 > 0):
            raise PulseError("invalid-heterogeneity", "well widths d0, d1 must be > 0")


@dataclass(frozen=True)
class Tabulated:
    """Samples of ``delta(x) - delta0``; zero outside the sampled range."""

    x: tuple[float, ...]
    values: tuple[float, ...]
    kind: Literal["tabulated"] = "tabulated"

    def __post_init__(self):
        if len(self.x) != len(self.values) or len(self.x) < 2:
            raise PulseError("invalid-heterogeneity", "tabulated profile needs >= 2 matching samples")
        if np.any(np.diff(self.x) <= 0):
            raise PulseError("invalid-heterogeneity", "tabulated x must be strictly increasing")

    @classmethod
    def from_csv(cls, path: str | Path) -> "Tabulated":
        xs, vs = [], []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].strip().startswith("#"):
                    continue
                try:
                    xs.append(float(row[0]))
                    vs.append(float(row[1]))
                except ValueError:
                    continue  # header line
        return cls(tuple(xs), tuple(vs))


Heterogeneity = Union[Constant, SharpBump, SmoothBump, SquareWell, Tabulated]


def support(het: Heterogeneity) -> tuple[float, float] | None:
    """Interval outside of which ``delta == delta0`` (None for the constant case)."""
    if isinstance(het, (SharpBump, SmoothBump)):
        return het.xc - het.d0 / 2, het.xc + het.d0 / 2
    if isinstance(het, SquareWell):
        return het.xc - het.d0 / 2 - het.d1, het.xc + het.d0 / 2 + het.d1
    if isinstance(het, Tabulated):
        return het.x[0], het.x[-1]
    return None


def edges(het: Heterogeneity) -> tuple[float, ...]:
    """Positions where ``delta`` jumps (or the nominal edges of a smooth bump)."""
    if isinstance(het, (SharpBump, SmoothBump)):
        return (het.xc - het.d0 / 2, het.xc + het.d0 / 2)
    if isinstance(het, SquareWell):
        a = het.xc - het.d0 / 2
        b = het.xc + het.d0 / 2
        return (a - het.d1, a, b, b + het.d1)
    return ()


def _boxes(het: Heterogeneity) -> list[tuple[float, float, float]]:
    if isinstance(het, Constant):
        return []
    if isinstance(het, SharpBump):
        a, b = edges(het)
        return [(a, b, het.eps0)]
    if isinstance(het, SquareWell):
        e0, e1, e2, e3 = edges(het)
        return [(e0, e1, het.eps1), (e1, e2, het.eps2), (e2, e3, het.eps1)]
    raise PulseError("use response_numeric", f"no closed-form response for {type(het).__name__}")


def delta_profile(het: Heterogeneity, p: ModelParams, x) -> np.ndarray:
    """The heterogeneity ``delta(x)`` itself."""
    x = np.asarray(x, dtype=float)
    out = np.full_like(x, p.delta0)
    if isinstance(het, SmoothBump):
        g = het.gamma
        out += het.eps0 * _logistic(g * (x - het.xc + het.d0 / 2))
        out -= het.eps0 * _logistic(g * (x - het.xc - het.d0 / 2))
        return out
    if isinstance(het, Tabulated):
        tx = np.asarray(het.x)
        return out + np.interp(x, tx, np.asarray(het.values), left=0.0, right=0.0)
    for a, b, hgt in _boxes(het):
        # closed on the left so that the left interface sees the bump at its edge
        out += np.where((x >= a) & (x <= b), hgt, 0.0)
    return out


def _cell_average(het: Heterogeneity, p: ModelParams, x: np.ndarray, dx: float) -> np.ndarray:
    """Mean of ``delta`` over ``[x - dx/2, x + dx/2]``.

    Exact for piecewise-constant profiles, which keeps the finite-difference
    response second order even when a jump falls between nodes.
    """
    if isinstance(het, (SmoothBump, Tabulated)):
        return delta_profile(het, p, x)
    out = np.full_like(x, p.delta0)
    lo, hi = x - 0.5 * dx, x + 0.5 * dx
    for a, b, hgt in _boxes(het):
        out += hgt * np.clip(np.minimum(hi, b) - np.maximum(lo, a), 0.0, None) / dx
    return out


def _logistic(z):
    # 1 / (1 + exp(-z)) without overflow for large |z|
    return 0.5 * (1.0 + np.tanh(0.5 * z))


# --------------------------------------------------------------------------- response profiles


@dataclass(frozen=True, eq=False)
class ResponseProfile:
    """Evaluator for ``Delta0(x)``.

    Internally either a sum of analytic box responses on top of ``baseline``
    or a uniformly sampled table (linear interpolation, ``baseline`` outside).
    The packed arrays are consumed directly by the compiled integrators.
    """

    provenance: Literal["analytic", "numeric"]
    sqrtD: float
    baseline: float
    box_a: np.ndarray = field(default_factory=lambda: np.zeros(0))
    box_b: np.ndarray = field(default_factory=lambda: np.zeros(0))
    box_h: np.ndarray = field(default_factory=lambda: np.zeros(0))
    tab_x0: float = 0.0
    tab_dx: float = 1.0
    tab_v: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def packed(self):
        return (
            self.sqrtD,
            self.baseline,
            self.box_a,
            self.box_b,
            self.box_h,
            self.tab_x0,
            self.tab_dx,
            self.tab_v,
        )

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        flat = np.ravel(x)
        out = _kernels.response_array(flat, *self.packed())
        return out.reshape(x.shape) if x.ndim else float(out[0])

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        flat = np.ravel(x)
        out = _kernels.response_deriv_array(flat, *self.packed())
        return out.reshape(x.shape) if x.ndim else float(out[0])


def box_response(x, a: float, b: float, D: float):
    """Response of a unit-height box on ``[a, b]``."""
    x = np.asarray(x, dtype=float)
    return _kernels.response_array(
        np.ravel(x), math.sqrt(D), 0.0, np.array([a]), np.array([b]), np.array([1.0]), 0.0, 1.0, np.zeros(0)
    ).reshape(x.shape)


def response_analytic(het: Heterogeneity, p: ModelParams) -> ResponseProfile:
    """Closed-form ``Delta0`` for constant, sharp-bump and square-well profiles."""
    if isinstance(het, (SmoothBump, Tabulated)):
        raise PulseError("use response_numeric", f"{type(het).__name__} has no closed-form response")
    boxes = _boxes(het)
    return ResponseProfile(
        provenance="analytic",
        sqrtD=p.sqrtD,
        baseline=p.delta0,
        box_a=np.array([b[0] for b in boxes], dtype=float),
        box_b=np.array([b[1] for b in boxes], dtype=float),
        box_h=np.array([b[2] for b in boxes], dtype=float),
    )


def response_numeric(
    het: Heterogeneity,
    p: ModelParams,
    domain: tuple[float, float] | None = None,
    grid_n: int = 4096,
) -> ResponseProfile:
    """Finite-difference solve of ``D Delta0'' - Delta0 + delta = 0``.

    Second-order central differences with Dirichlet value ``delta0`` at both
    ends of ``domain``.  The default domain pads the heterogeneity support by
    ``20 sqrt(D)`` on each side.
    """
    if grid_n < 16:
        raise PulseError("invalid-grid", "grid_n must be >= 16")
    sD = p.sqrtD
    sup = support(het)
    if domain is None:
        lo, hi = sup if sup is not None else (-1.0, 1.0)
        domain = (lo - 20.0 * sD, hi + 20.0 * sD)
    x0, x1 = map(float, domain)
    if sup is not None and (sup[0] - x0 < 10.0 * sD or x1 - sup[1] < 10.0 * sD):
        raise PulseError("far-field-violation", "domain must pad the heterogeneity by >= 10 sqrt(D)")
    x = np.linspace(x0, x1, grid_n)
    dx = x[1] - x[0]
    rhs = -_cell_average(het, p, x[1:-1], dx)
    n = grid_n - 2
    c = p.D / dx**2
    ab = np.zeros((3, n))
    ab[0, 1:] = c
    ab[1, :] = -2.0 * c - 1.0
    ab[2, :-1] = c
    rhs[0] -= c * p.delta0
    rhs[-1] -= c * p.delta0
    interior = solve_banded((1, 1), ab, rhs)
    vals = np.concatenate(([p.delta0], interior, [p.delta0]))
    # one-sided check: the first interior value must already sit on the far field
    if abs(vals[1] - p.delta0) > 1e-6 or abs(vals[-2] - p.delta0) > 1e-6:
        raise PulseError("far-field-violation", "response has not decayed to delta0 at the domain boundary")
    return ResponseProfile(
        provenance="numeric",
        sqrtD=sD,
        baseline=p.delta0,
        tab_x0=x0,
        tab_dx=dx,
        tab_v=vals,
    )


def response_for(het: Heterogeneity, p: ModelParams, grid_n: int = 8192) -> ResponseProfile:
    """Analytic response where available, numeric otherwise."""
    if isinstance(het, (SmoothBump, Tabulated)):
        return response_numeric(het, p, grid_n=grid_n)
    return response_analytic(het, p)
