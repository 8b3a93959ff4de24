import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from frontpulse.errors import PulseError
from frontpulse.hybrid import u_indicator
from frontpulse.model import ModelParams, derive_coefficients
from frontpulse.pde import (
    PdeConfig,
    PdeState,
    extract_interfaces,
    homogeneous_pulse_state,
    pulse_state,
    reaction_f,
    reaction_g,
    run_pde,
    step_pde,
)

finite = st.floats(-5.0, 5.0)


@given(finite)
def test_outer_roots_of_cubic(v):
    assert reaction_f(0.5, v) == 0.0
    assert reaction_f(-0.5, v) == 0.0


@given(finite)
def test_middle_root_of_cubic(v):
    assert reaction_f(0.5 * v, v) == 0.0


@pytest.mark.parametrize("sign", [1.0, -1.0])
def test_uniform_equilibria(sign):
    d0 = 0.001
    u, v = 0.5 * sign, 0.5 * sign + d0
    assert reaction_f(u, v) == 0.0
    assert reaction_g(u, v, d0) == pytest.approx(0.0, abs=1e-15)


def _tanh_pulse(x, l1, l2, w=0.1):
    return 0.5 * (np.tanh((x - l1) / w) - np.tanh((x - l2) / w)) - 0.5


def test_interfaces_of_tanh_pulse():
    cfg = PdeConfig(x_hi=60.0)
    x = cfg.grid()
    s = PdeState(x, _tanh_pulse(x, 30.0, 36.0), np.zeros_like(x))
    l1, l2 = extract_interfaces(s)
    assert abs(l1 - 30.0) < cfg.dx
    assert abs(l2 - 36.0) < cfg.dx


def test_uniform_state_has_no_interfaces():
    x = PdeConfig().grid()
    assert extract_interfaces(PdeState(x, np.full_like(x, -0.5), np.zeros_like(x))) is None


def test_extra_crossings_are_rejected():
    x = PdeConfig(x_hi=60.0).grid()
    u = _tanh_pulse(x, 10.0, 16.0) + _tanh_pulse(x, 30.0, 36.0) + 0.5
    assert extract_interfaces(PdeState(x, u, np.zeros_like(x))) is None


def test_pulse_across_periodic_seam():
    cfg = PdeConfig(x_hi=60.0)
    x = cfg.grid()
    u = np.maximum(_tanh_pulse(x, 57.0, 63.0), _tanh_pulse(x, -3.0, 3.0))
    l1, l2 = extract_interfaces(PdeState(x, u, np.zeros_like(x)), cfg.length)
    assert l1 == pytest.approx(57.0, abs=cfg.dx)
    assert l2 == pytest.approx(63.0, abs=cfg.dx)


def test_sharp_indicator_limit():
    cfg = PdeConfig(x_hi=60.0)
    x = cfg.grid()
    l1, l2 = 30.01, 36.2
    sharp = u_indicator(x, l2, l1)
    # (1, 2, 1)/4 stencil: the crossing lands midway between the bracketing nodes
    smooth = 0.25 * np.roll(sharp, 1) + 0.5 * sharp + 0.25 * np.roll(sharp, -1)
    f1, f2 = extract_interfaces(PdeState(x, smooth, np.zeros_like(x)))
    assert abs(f1 - l1) <= cfg.dx / 2 + 1e-12
    assert abs(f2 - l2) <= cfg.dx / 2 + 1e-12


def test_lower_uniform_state_is_fixed():
    p = ModelParams(tau=0.18)
    cfg = PdeConfig(x_hi=10.0)
    x = cfg.grid()
    s = PdeState(x, np.full_like(x, -0.5), np.full_like(x, -0.5 + p.delta0))
    for _ in range(100):
        s = step_pde(s, p, None, cfg)
    assert np.max(np.abs(s.u + 0.5)) < 1e-13
    assert np.max(np.abs(s.v + 0.5 - p.delta0)) < 1e-13


def test_standing_pulse_settles():
    p = ModelParams(tau=0.185)
    cfg = PdeConfig(x_hi=40.0, t_end=200.0)
    traj = run_pde(pulse_state(p, cfg), p, cfg=cfg)
    assert traj.status == "completed"
    late = traj.times > 150
    assert np.max(np.abs(traj.states[late, 2:])) < 1e-3
    assert abs(traj.center[-1] - 20.0) < 1e-3
    assert abs(traj.h[-1] - derive_coefficients(p).h0) < 0.5


def test_blowup_guard():
    p = ModelParams(tau=0.18)
    cfg = PdeConfig(x_hi=10.0)
    x = cfg.grid()
    u = np.full_like(x, -0.5)
    u[10] = 3.0
    with pytest.raises(PulseError) as exc:
        step_pde(PdeState(x, u, np.zeros_like(x)), p, None, cfg)
    assert exc.value.kind == "blowup"


def test_run_needs_a_pulse():
    p = ModelParams(tau=0.18)
    cfg = PdeConfig(x_hi=10.0)
    x = cfg.grid()
    with pytest.raises(PulseError) as exc:
        run_pde(PdeState(x, np.full_like(x, -0.5), np.zeros_like(x)), p, cfg=cfg)
    assert exc.value.kind == "invalid-state"


def test_homogeneous_start_depends_on_regime():
    cfg = PdeConfig(x_hi=60.0)
    above = ModelParams(tau=0.185)
    s = homogeneous_pulse_state(above, cfg, kick=0.5)
    l1, l2 = extract_interfaces(s, cfg.length)
    assert l2 - l1 == pytest.approx(derive_coefficients(above).h0 + 0.5, abs=cfg.dx)
    below = ModelParams(tau=0.17)
    s = homogeneous_pulse_state(below, cfg)
    l1, l2 = extract_interfaces(s, cfg.length)
    # positive field at the rear and negative at the front push both interfaces right
    i1, i2 = int(round(l1 / cfg.dx)), int(round(l2 / cfg.dx))
    assert s.v[i1] > 0 > s.v[i2]


def test_invalid_config_and_state():
    with pytest.raises(PulseError):
        PdeConfig(dt=0.0)
    x = PdeConfig().grid()
    with pytest.raises(PulseError):
        PdeState(x, np.zeros(3), np.zeros_like(x))
    with pytest.raises(PulseError):
        PdeState(x, np.full_like(x, math.nan), np.zeros_like(x))
