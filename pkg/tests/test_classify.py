import math

import numpy as np
import pytest

from frontpulse.analysis import front_velocities, tp_exact
from frontpulse.classify import (
    ClassifyConfig,
    PhaseDiagram,
    ScatterConfig,
    bisect_boundary,
    classify_homogeneous,
    classify_scattering,
    first_transition,
    residence_time,
    run_homogeneous,
    run_scattering,
    run_trap,
    scatter_label,
    sweep_phase_diagram,
    trap_check,
    window_stats,
)
from frontpulse.errors import PulseError
from frontpulse.model import Constant, ModelParams, SharpBump, SquareWell, response_analytic
from frontpulse.reduced_ode import IntegratorConfig, InterfaceState, Trajectory, Truncated, integrate

P0 = ModelParams(tau=0.17)
H_STAR = -math.log(0.002)
COLUMNS = ("l2", "l1", "r2", "r1")


def _synthetic(center, width, t):
    return Trajectory(t, np.column_stack([center + width / 2, center - width / 2,
                                          np.zeros_like(t), np.zeros_like(t)]), COLUMNS)


def _mirror(traj):
    s = traj.states
    return Trajectory(traj.times, np.column_stack([-s[:, 1], -s[:, 0], -s[:, 3], -s[:, 2]]), COLUMNS,
                      traj.events, traj.status, traj.tier)


T = np.linspace(0.0, 4000.0, 4001)


@pytest.mark.parametrize(
    "center, width, label",
    [
        (np.zeros_like(T), np.full_like(T, H_STAR), "SP"),
        (np.zeros_like(T), H_STAR + 3 * np.sin(T / 10), "SB"),
        (0.3 * T, H_STAR + 3 * np.sin(T / 10), "TB"),
        (0.3 * T, np.full_like(T, H_STAR), "TPplus"),
        (-0.3 * T, np.full_like(T, H_STAR), "TPminus"),
    ],
)
def test_labels_from_synthetic_series(center, width, label):
    assert classify_homogeneous(_synthetic(center, width, T), P0) == label


def test_nonstationary_window_is_unresolved():
    width = H_STAR + np.where(T > 3500, 3 * np.sin(T / 10), 0.0)
    assert classify_homogeneous(_synthetic(np.zeros_like(T), width, T), P0) == "Unresolved"


def test_short_horizon_raises():
    t = np.linspace(0, 100, 101)
    with pytest.raises(PulseError) as exc:
        classify_homogeneous(_synthetic(np.zeros_like(t), np.full_like(t, H_STAR), t), P0)
    assert exc.value.kind == "horizon-too-short"


def test_exact_fixed_point_is_standing():
    p = ModelParams(tau=0.182)
    traj = integrate(Truncated(), InterfaceState.centered(0.0, H_STAR), p, cfg=IntegratorConfig(t_end=4000.0))
    stats = window_stats(traj.times, traj.center, traj.h)
    assert stats.drift == pytest.approx(0.0, abs=1e-12)
    assert stats.amplitude < 1e-12
    assert classify_homogeneous(traj, p) == "SP"


@pytest.mark.parametrize("tau, label", [(0.182, "SP"), (0.176, "SB"), (0.1733, "TB"), (0.17, "TPplus")])
def test_homogeneous_behaviors(tau, label):
    p = ModelParams(tau=tau)
    traj = run_homogeneous(p)
    assert classify_homogeneous(traj, p) == label
    mirrored = {"TPplus": "TPminus", "TPminus": "TPplus"}.get(label, label)
    if label != "TB":
        assert classify_homogeneous(_mirror(traj), p) == mirrored


def test_stride_does_not_change_labels():
    for tau in (0.176, 0.17):
        p = ModelParams(tau=tau)
        a = run_homogeneous(p, cfg=IntegratorConfig(t_end=4000.0, record_stride=1))
        b = run_homogeneous(p, cfg=IntegratorConfig(t_end=4000.0, record_stride=10))
        assert classify_homogeneous(a, p) == classify_homogeneous(b, p)


def test_first_transition():
    taus = [0.18, 0.179, 0.178]
    assert first_transition(taus, ["SP", "SB", "SB"], "SB") == 0.179
    assert first_transition(taus, ["SP", "SP", "SP"], "TB") is None


@pytest.mark.parametrize("eps0, label", [(0.002, "PEN"), (0.006, "DEC1"), (0.01, "REB"), (-0.008, "DEC2")])
def test_scattering_regions_at_narrow_bump(eps0, label):
    assert scatter_label(P0, SharpBump(eps0, 10.0)).label == label


def test_dec2_turning_point_inside_bump():
    out = scatter_label(P0, SharpBump(-0.008, 10.0))
    assert -5.0 < out.turning_point < 5.0


def test_decomposition_fronts_run_at_single_front_speeds():
    het = SharpBump(0.006, 10.0)
    traj = run_scattering(P0, het)
    s = traj.final_state()
    assert traj.status == "decomposed"
    right = front_velocities("right", P0).r_plus
    left = front_velocities("left", P0).r_minus
    assert abs(s.r2 - right) / abs(right) < 0.1
    assert abs(s.r1 - left) / abs(left) < 0.1


def test_margin_rule_moves_shallow_turning_point():
    het = SharpBump(0.006, 10.0)
    traj = run_scattering(P0, het)
    forcing = classify_scattering(traj, het, P0)
    margin = classify_scattering(traj, het, P0, dec_rule="margin", dec_margin=0.5)
    assert forcing.label == "DEC1"
    assert margin.label == ("DEC1" if forcing.turning_point <= -4.5 else "DEC2")


def test_penetrated_pulse_recovers_traveling_speed():
    traj = run_scattering(P0, SharpBump(0.002, 10.0))
    tp = tp_exact(P0)
    s = traj.final_state()
    assert s.l1 > 5.0
    assert s.r1 == pytest.approx(tp.r_star, rel=0.1)


def test_phase_diagram_shape_and_determinism():
    d0 = [8.0, 10.0]
    eps = [-0.008, 0.002, 0.006, 0.01]
    a = sweep_phase_diagram(d0, eps, P0, jobs=1)
    b = sweep_phase_diagram(d0, eps, P0, jobs=2)
    assert a.labels.shape == (2, 4)
    assert (a.labels == b.labels).all()
    assert list(a.labels[1]) == ["DEC2", "PEN", "DEC1", "REB"]
    assert len(list(a.rows())) == 8


def test_phase_diagram_rejects_unsorted_axes():
    with pytest.raises(PulseError):
        sweep_phase_diagram([10.0, 8.0], [0.0, 0.01], P0)
    with pytest.raises(PulseError):
        PhaseDiagram(np.zeros(2), np.zeros(3), np.zeros((3, 2), dtype=object))


def test_bisection_keeps_differing_labels():
    lo, hi, la, lb = bisect_boundary(P0, 70.0, 0.0022, 0.0024, tol=1e-5)
    assert (la, lb) == ("PEN", "REB")
    assert hi - lo <= 1e-5
    assert 0.00225 <= lo < hi <= 0.00236
    assert scatter_label(P0, SharpBump(lo, 70.0)).label == "PEN"
    assert scatter_label(P0, SharpBump(hi, 70.0)).label == "REB"


def test_bisection_needs_a_label_change():
    with pytest.raises(PulseError) as exc:
        bisect_boundary(P0, 10.0, 0.001, 0.002)
    assert exc.value.kind == "no-boundary"


def test_residence_time_of_quick_penetration():
    het = SharpBump(0.0005, 70.0)
    traj = run_scattering(P0, het)
    tp = tp_exact(P0)
    t_res = residence_time(traj, het)
    crossing = (70.0 - tp.h_star) / tp.r_star
    assert 0.5 * crossing < t_res < 2.0 * crossing


def test_residence_time_grows_towards_boundary():
    eps = [0.0021, 0.0022, 0.00225, 0.00228, 0.0022875, 0.002295]
    times = [residence_time(run_scattering(P0, SharpBump(e, 70.0)), SharpBump(e, 70.0)) for e in eps]
    assert all(b > a for a, b in zip(times, times[1:]))


def test_receding_pulse_never_enters():
    het = SharpBump(0.002, 70.0)
    tp = tp_exact(P0)
    s0 = InterfaceState.centered(-60.0, tp.h_star, -tp.r_star, -tp.r_star)
    traj = integrate(Truncated(), s0, P0, resp=response_analytic(het, P0), cfg=IntegratorConfig(t_end=200.0),
                     het=het)
    with pytest.raises(PulseError) as exc:
        residence_time(traj, het)
    assert exc.value.kind == "no-entry"
    with pytest.raises(PulseError):
        residence_time(traj, Constant())


@pytest.mark.parametrize("eps1, eps2", [(0.0048, -0.0080), (0.0070, -0.0070), (0.0048, -0.0040), (0.0048, -0.0048)])
def test_square_well_traps(eps1, eps2):
    _, res = run_trap(P0, SquareWell(eps1, eps2, 10.0, 30.0), horizon=5000.0)
    assert res.trapped


def test_flat_well_lets_pulse_escape_right():
    _, res = run_trap(P0, SquareWell(0.0, 0.0, 10.0, 30.0), horizon=5000.0)
    assert not res.trapped and res.side == "right"


def test_trap_check_on_pulse_that_never_arrives():
    het = SquareWell(0.0048, -0.008, 10.0, 30.0)
    t = np.linspace(0, 10, 11)
    traj = _synthetic(np.full_like(t, -100.0), np.full_like(t, H_STAR), t)
    res = trap_check(traj, het, 5000.0)
    assert not res.trapped and res.side == "left"


def test_scatter_config_blowup_scales_with_support():
    from frontpulse.classify import scatter_integrator_config

    icfg = scatter_integrator_config(P0, SharpBump(0.002, 70.0), ScatterConfig())
    assert icfg.h_blowup == pytest.approx(120.0)


def test_classify_config_defaults():
    cfg = ClassifyConfig()
    assert (cfg.transient_skip, cfg.window) == (2500.0, 1000.0)


def test_lingering_front_is_followed_after_decomposition():
    # near the DEC1/REB boundary the right front idles at the bump edge when the width latches
    out = scatter_label(P0, SharpBump(0.007, 10.0))
    assert out.status == "decomposed"
    assert out.label == "DEC1"
