import math

import numpy as np
import pytest

from frontpulse.analysis import bifurcation_points
from frontpulse.errors import PulseError
from frontpulse.hybrid import (
    FieldState,
    HybridConfig,
    drift_threshold,
    homogeneous_state,
    initial_state,
    run_hybrid,
    stationary_field,
    step_hybrid,
    traveling_field,
    traveling_pulse,
    u_indicator,
)
from frontpulse.model import ModelParams, SharpBump

H_STAR = -math.log(0.002)


def test_indicator_values():
    assert u_indicator(5.0, 8.0, 2.0) == 0.5
    assert u_indicator(1.0, 8.0, 2.0) == -0.5
    assert u_indicator(8.0, 8.0, 2.0) == 0.5
    assert u_indicator(2.0, 8.0, 2.0) == -0.5


def test_indicator_integral_is_width():
    dx = 0.01
    x = np.arange(0.0, 40.0, dx)
    u = u_indicator(x, 23.2146, 17.0)
    assert abs(np.sum(u + 0.5) * dx - 6.2146) < dx


def test_stationary_field_vanishes_at_interfaces():
    p = ModelParams(tau=0.185)
    l1, l2 = 60.0 - H_STAR / 2, 60.0 + H_STAR / 2
    v = stationary_field(np.array([l1, l2]), l2, l1, p)
    assert np.max(np.abs(v)) < 1e-12


def test_traveling_field_satisfies_speed_conditions():
    p = ModelParams(tau=0.17)
    h, c = traveling_pulse(p)
    v = traveling_field(np.array([0.0, h]), h, c, p)
    assert v[0] == pytest.approx(math.sqrt(2) * p.tau * c, abs=1e-12)
    assert v[1] == pytest.approx(-math.sqrt(2) * p.tau * c, abs=1e-12)


def test_drift_threshold_matches_reduced_equations():
    p = ModelParams(tau=0.18)
    assert drift_threshold(p) == pytest.approx(bifurcation_points(p).tau_d, abs=1e-10)


def test_no_traveling_pulse_above_threshold():
    with pytest.raises(PulseError) as exc:
        traveling_pulse(ModelParams(tau=0.18))
    assert exc.value.kind == "no-traveling-pulse"


def test_standing_pulse_does_not_drift():
    p = ModelParams(tau=0.185)
    cfg = HybridConfig(t_end=100.0)
    traj = run_hybrid(initial_state(p, cfg), p, cfg=cfg)
    assert np.max(np.abs(traj.l1 - traj.l1[0])) < 1e-4
    assert np.max(np.abs(traj.l2 - traj.l2[0])) < 1e-4


def test_symmetric_data_stays_symmetric():
    p = ModelParams(tau=0.176)
    cfg = HybridConfig(t_end=1.0)
    het = SharpBump(0.002, 10.0, xc=60.0)
    s = initial_state(p, cfg, center=60.0, h=H_STAR + 0.5, het=het)
    for _ in range(200):
        s = step_hybrid(s, p, het, cfg)
        assert abs(s.l1 + s.l2 - 120.0) < 1e-9


def test_traveling_pulse_moves_at_constant_speed():
    p = ModelParams(tau=0.17)
    cfg = HybridConfig(t_end=300.0, record_stride=40)
    h, c = traveling_pulse(p)
    traj = run_hybrid(initial_state(p, cfg, h=h, speed=c), p, cfg=cfg)
    late = traj.times > 150
    speeds = np.gradient(traj.center[late], traj.times[late])
    assert np.std(speeds) / np.mean(speeds) < 0.01
    assert np.mean(speeds) == pytest.approx(c, rel=2e-3)


def test_standing_width_close_to_reduced_value():
    p = ModelParams(tau=0.182)
    cfg = HybridConfig(t_end=300.0, x_hi=60.0)
    traj = run_hybrid(homogeneous_state(p, cfg), p, cfg=cfg)
    assert abs(traj.h[-1] - H_STAR) / H_STAR < 0.05


def test_small_kick_grows_into_breathing():
    p = ModelParams(tau=0.176)
    cfg = HybridConfig(t_end=800.0, x_hi=60.0, record_stride=100)
    traj = run_hybrid(homogeneous_state(p, cfg, kick=0.01), p, cfg=cfg)
    late = traj.times > 600
    assert np.ptp(traj.h[late]) > 1.0
    assert np.ptp(traj.center[late]) < 1e-6


def test_small_kick_decays_above_hopf():
    p = ModelParams(tau=0.182)
    cfg = HybridConfig(t_end=800.0, x_hi=60.0, record_stride=100)
    traj = run_hybrid(homogeneous_state(p, cfg, kick=0.01), p, cfg=cfg)
    late = traj.times > 600
    assert np.ptp(traj.h[late]) < 1e-3


def test_spatial_mean_relaxes_at_unit_rate():
    # a huge tau freezes the interfaces, isolating the field relaxation
    p = ModelParams(tau=1e8)
    cfg = HybridConfig(t_end=5.0)
    s0 = initial_state(p, cfg)
    s0 = FieldState(s0.x, s0.v + 0.1, s0.l2, s0.l1, 0.0)
    target = (s0.l2 - s0.l1) / (cfg.x_hi - cfg.x_lo) - 0.5 + p.delta0
    _, s = run_hybrid(s0, p, cfg=cfg, return_state=True)
    assert abs(np.mean(s.v) - target - 0.1 * math.exp(-5.0)) < 1e-6
    _, s = run_hybrid(s, p, cfg=HybridConfig(t_end=20.0), return_state=True)
    assert abs(np.mean(s.v) - target) < 1e-6
    assert np.max(np.abs(s.v)) < 2.0


def test_grid_refinement_is_second_order():
    p = ModelParams(tau=0.17)
    h, c = traveling_pulse(p)
    errs = []
    for dx in (0.1, 0.05, 0.025):
        cfg = HybridConfig(dx=dx, t_end=200.0, x_hi=60.0)
        traj = run_hybrid(initial_state(p, cfg, h=h, speed=c), p, cfg=cfg)
        late = traj.times > 100
        errs.append(abs(np.polyfit(traj.times[late], traj.center[late], 1)[0] - c))
    assert 3.5 < errs[0] / errs[1] < 4.5
    assert 3.5 < errs[1] / errs[2] < 4.5


def test_merged_interfaces_terminate():
    p = ModelParams(tau=0.17)
    cfg = HybridConfig(t_end=10.0)
    x = cfg.grid()
    s = FieldState(x, np.full_like(x, -0.499), 60.02, 60.0, 0.0)
    traj = run_hybrid(s, p, cfg=cfg)
    assert traj.status == "interfaces-merged"
    assert traj.events[-1][1] == "interfaces-merged"


def test_domain_exit_on_no_flux_boundary():
    p = ModelParams(tau=0.17)
    cfg = HybridConfig(boundary="no-flux", x_hi=30.0, t_end=100.0)
    x = cfg.grid()
    # a depleted field pushes both interfaces outwards; l2 starts next to the wall
    s = FieldState(x, np.full_like(x, -0.49), 29.9, 20.0, 0.0)
    traj = run_hybrid(s, p, cfg=cfg)
    assert traj.status == "domain-exit"
    assert traj.events[-1][2] == 1.0
    with pytest.raises(PulseError) as exc:
        for _ in range(20000):
            s = step_hybrid(s, p, None, cfg)
    assert exc.value.kind == "domain-exit"


def test_invalid_states_and_configs():
    with pytest.raises(PulseError):
        HybridConfig(dx=0.0)
    x = HybridConfig().grid()
    with pytest.raises(PulseError):
        FieldState(x, np.zeros_like(x), 10.0, 20.0, 0.0)
    with pytest.raises(PulseError):
        FieldState(x, np.full_like(x, np.nan), 20.0, 10.0, 0.0)
