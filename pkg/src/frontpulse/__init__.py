"""Simulation and bifurcation analysis of two-front pulses in a bistable reaction-diffusion system.

Three model tiers share one parameter set: the full PDE (:mod:`frontpulse.pde`),
the sharp-interface hybrid (:mod:`frontpulse.hybrid`) and reduced interface
ODEs (:mod:`frontpulse.reduced_ode`).  Closed-form results live in
:mod:`frontpulse.analysis` and behavior labelling in :mod:`frontpulse.classify`.
"""

from frontpulse.errors import PulseError
from frontpulse.model import (
    Constant,
    ModelParams,
    SharpBump,
    SmoothBump,
    SquareWell,
    Tabulated,
    derive_coefficients,
)

__all__ = [
    "Constant",
    "ModelParams",
    "PulseError",
    "SharpBump",
    "SmoothBump",
    "SquareWell",
    "Tabulated",
    "derive_coefficients",
]
