"""Acceptance criteria 1-12, one PASS/FAIL line each (see the terminal summary).

Criteria the implementation cannot meet are split into a passing part and an
``xfail`` part so the shortfall stays visible in the report.
"""

import itertools
import math
from dataclasses import replace

import numpy as np
import pytest

from frontpulse.analysis import (
    bifurcation_points,
    eps0_for_front,
    front_velocities,
    het_hopf_sweep,
    het_sp,
    legacy_bifurcation_points,
    sp_eigenvalues,
    sp_jacobian,
    stationary_front,
    tp_exact,
)
from frontpulse.classify import (
    behavior_map,
    bisect_boundary,
    classify_homogeneous,
    first_transition,
    residence_time,
    run_homogeneous,
    run_scattering,
    run_trap,
    scatter_label,
)
from frontpulse.hybrid import HybridConfig, homogeneous_state, run_hybrid
from frontpulse.model import (
    ModelParams,
    SharpBump,
    SquareWell,
    box_response,
    derive_coefficients,
    response_analytic,
    response_numeric,
)
from frontpulse.pde import PdeConfig, homogeneous_pulse_state, run_pde
from frontpulse.reduced_ode import (
    IntegratorConfig,
    InterfaceState,
    LegacyWeakInteraction,
    mass_determinant,
    rhs_full,
    rhs_homogeneous3d,
    rhs_single_front,
    rhs_truncated,
    single_front_normal_form,
)

P0 = ModelParams(tau=0.17)
ODE_TAUS = (0.182, 0.176, 0.1733, 0.17)
ODE_CLASSES = ("SP", "SB", "TB", "TPplus")
PDE_TAUS = (0.185, 0.181, 0.17721, 0.175)


def _runs(labels):
    return [k for k, _ in itertools.groupby(labels)]


# 1 ------------------------------------------------------------------------


def test_criterion_01_closed_form(report):
    c = derive_coefficients(P0)
    bp = bifurcation_points(P0, c)
    got = (c.h0, c.tau_c, bp.tau_d, bp.tau_H)
    want = (6.2146081, 0.1767767, 0.1742259, 0.1793274)
    ok = all(abs(g - w) < 5e-8 for g, w in zip(got, want))
    deg = bifurcation_points(P0, replace(c, G1=0.0, phi1=0.0))
    ok_deg = abs(deg.tau_d - c.tau_c) < 1e-15 and abs(deg.tau_H - c.tau_c) < 1e-15
    detail = "h*={:.7f} tau_c={:.7f} tau_d={:.7f} tau_H={:.7f}; degenerate coincide={}".format(*got, ok_deg)
    assert report("1", ok and ok_deg, detail)


# 2 ------------------------------------------------------------------------


def test_criterion_02_eigenvalues(report):
    c = derive_coefficients(P0)
    worst = 0.0
    for tau in np.linspace(0.16, 0.2, 50):
        cubic = sp_eigenvalues(P0, c, tau)
        numeric = np.linalg.eigvals(sp_jacobian(P0, c, tau))
        worst = max(worst, max(np.min(np.abs(numeric - z)) for z in cubic))
    bp = bifurcation_points(P0, c)
    pair = [e for e in sp_eigenvalues(P0, c, bp.tau_H) if abs(e.imag) > 1e-8]
    re = max(abs(e.real) for e in pair)
    im_err = max(abs(abs(e.imag) - math.sqrt(2 * bp.P)) for e in pair)
    ok = worst < 1e-9 and len(pair) == 2 and re < 1e-10 and im_err < 1e-12
    assert report("2", ok, f"max |cubic - QR| = {worst:.2e}; at tau_H |Re| = {re:.2e}, Im error = {im_err:.2e}")


# 3 ------------------------------------------------------------------------


def test_criterion_03_behavior_map(report):
    labels = [classify_homogeneous(run_homogeneous(ModelParams(tau=t)), ModelParams(tau=t)) for t in ODE_TAUS]
    bp = bifurcation_points(P0)
    scan = [round(0.185 - 0.001 * k, 3) for k in range(16)]
    scan_labels = behavior_map(scan, P0)
    sb_onset = first_transition(scan, scan_labels, "SB")
    tp_onset = first_transition(scan, scan_labels, "TPplus") or first_transition(scan, scan_labels, "TPminus")
    ok = (tuple(labels) == ODE_CLASSES and sb_onset is not None and abs(sb_onset - bp.tau_H) <= 0.003
          and tp_onset is not None and tp_onset < bp.tau_d)
    detail = (f"classes {dict(zip(ODE_TAUS, labels))}; SB onset {sb_onset} vs tau_H {bp.tau_H:.5f}; "
              f"TP from {tp_onset} < tau_d {bp.tau_d:.5f}")
    assert report("3", ok, detail)


# 4 ------------------------------------------------------------------------

PUBLISHED_FRONT = (0.5985, -0.4942, -0.1043)


def test_criterion_04_front_velocities_series(report):
    fv = front_velocities("left", P0)
    got = (fv.approx_plus, fv.approx_minus, fv.approx_zero)
    err = max(abs(g - w) for g, w in zip(got, PUBLISHED_FRONT))
    assert report("4", err <= 5e-4, "asymptotic roots ({:.4f}, {:.4f}, {:.4f}), max error {:.1e}".format(*got, err))


@pytest.mark.xfail(strict=True, reason="the published values come from the asymptotic series; exact roots differ by 4e-3")
def test_criterion_04_front_velocities_exact(report):
    fv = front_velocities("left", P0)
    got = (fv.r_plus, fv.r_minus, fv.r_zero)
    err = max(abs(g - w) for g, w in zip(got, PUBLISHED_FRONT))
    assert report("4 (exact roots)", err <= 5e-4,
                  "exact roots ({:.4f}, {:.4f}, {:.4f}), max error {:.1e}".format(*got, err))


# 5 ------------------------------------------------------------------------


def test_criterion_05_stationary_front(report):
    residuals = []
    for offset in (3.0, 7.0):
        het = SharpBump(eps0_for_front(P0, 10.0, offset), 10.0)
        sf = stationary_front(P0, het)
        residuals.append(abs(response_analytic(het, P0)(sf.l_star)))
    sf = stationary_front(P0, SharpBump(eps0_for_front(P0, 10.0, 5.9565), 10.0))
    ok = max(residuals) < 1e-12 and abs(sf.l_star - 5.9565) <= 1e-3
    assert report("5", ok, f"residuals {max(residuals):.1e}; l1* = {sf.l_star:.4f}")


# 6 ------------------------------------------------------------------------


def test_criterion_06_bump_phase_structure(report):
    pos = _runs([scatter_label(P0, SharpBump(e, 10.0)).label for e in np.arange(1, 25) * 5e-4])
    neg = _runs([scatter_label(P0, SharpBump(-e, 10.0)).label for e in np.arange(1, 25) * 5e-4])
    wide = _runs([scatter_label(P0, SharpBump(e, 70.0)).label for e in np.arange(1, 9) * 5e-4])
    lo, hi, _, _ = bisect_boundary(P0, 70.0, 0.0022, 0.0024, tol=1e-5)
    star = 0.5 * (lo + hi)
    dec2 = scatter_label(P0, SharpBump(-0.008, 10.0))
    inside = -5.0 < dec2.turning_point < 5.0
    ok = (pos == ["PEN", "DEC1", "REB"] and neg == ["PEN", "DEC2"] and wide == ["PEN", "REB"]
          and 0.00225 <= star <= 0.00236 and dec2.label == "DEC2" and inside)
    detail = (f"d0=10 eps0>0 {'->'.join(pos)}, eps0<0 {'->'.join(neg)}; d0=70 {'->'.join(wide)} "
              f"at eps0*={star:.6f}; DEC2 turning point {dec2.turning_point:.2f}")
    assert report("6", ok, detail)


# 7 ------------------------------------------------------------------------


def test_criterion_07_residence_monotone(report):
    eps = (0.0021, 0.0022, 0.00225, 0.00228, 0.0022875, 0.002295)
    times = [residence_time(run_scattering(P0, SharpBump(e, 70.0)), SharpBump(e, 70.0)) for e in eps]
    ok = all(b > a for a, b in zip(times, times[1:]))
    assert report("7", ok, "T = " + ", ".join(f"{t:.1f}" for t in times))


# 8 ------------------------------------------------------------------------


def test_criterion_08_heterogeneous_hopf(report):
    tau_h = het_hopf_sweep(P0, None, SharpBump(0.01, 40.0))
    assert report("8", tau_h is not None and abs(tau_h - 0.1955) <= 0.002, f"tau_H(het) = {tau_h:.5f}")


# 9 ------------------------------------------------------------------------


def test_criterion_09_square_well(report):
    pairs = [(0.0048, -0.0080), (0.0070, -0.0070), (0.0048, -0.0040), (0.0048, -0.0048)]
    trapped = [run_trap(P0, SquareWell(a, b, 10.0, 30.0), horizon=5000.0)[1].trapped for a, b in pairs]
    _, flat = run_trap(P0, SquareWell(0.0, 0.0, 10.0, 30.0), horizon=5000.0)
    ok = all(trapped) and not flat.trapped
    assert report("9", ok, f"trapped {trapped}; flat well escapes {flat.side}")


# 10 -----------------------------------------------------------------------


def test_criterion_10_legacy_ordering(report):
    c = derive_coefficients(P0)
    bare = legacy_bifurcation_points(P0, LegacyWeakInteraction(M0_tilde=0.0, beta1=0.0))
    bp = bifurcation_points(P0, c)
    ok = abs(bare[0] - c.tau_c) < 1e-12 and abs(bare[1] - c.tau_c) < 1e-12 and bp.tau_d < bp.tau_H
    detail = f"legacy without drift terms {bare[0]:.7f}, {bare[1]:.7f}; tau_d {bp.tau_d:.7f} < tau_H {bp.tau_H:.7f}"
    assert report("10", ok, detail)


# 11 -----------------------------------------------------------------------


def _hybrid_label(tau):
    p = ModelParams(tau=tau)
    cfg = HybridConfig(x_hi=60.0, t_end=4000.0)
    traj = run_hybrid(homogeneous_state(p, cfg), p, cfg=cfg)
    return classify_homogeneous(traj, p), traj


def _pde_label(tau, length, t_end=1200.0):
    p = ModelParams(tau=tau)
    cfg = PdeConfig(x_hi=length, t_end=t_end)
    traj = run_pde(homogeneous_pulse_state(p, cfg), p, cfg=cfg)
    if traj.status != "completed":
        return traj.status
    from frontpulse.classify import ClassifyConfig

    return classify_homogeneous(traj, p, cfg=ClassifyConfig(transient_skip=600.0, window=600.0))


@pytest.mark.slow
def test_criterion_11_hybrid_width(report):
    label, traj = _hybrid_label(0.182)
    h_star = derive_coefficients(P0).h0
    rel = abs(np.mean(traj.h[traj.times > 3000]) - h_star) / h_star
    assert report("11 (hybrid width)", label == "SP" and rel < 0.05, f"SP width off h* by {100 * rel:.2f}%")


@pytest.mark.slow
@pytest.mark.parametrize("tau, expected", [(0.176, "SB"), (0.17, "TPplus")])
def test_criterion_11_hybrid_classes(report, tau, expected):
    label, _ = _hybrid_label(tau)
    assert report(f"11 (hybrid tau={tau})", label == expected, f"{label}, reduced ODE {expected}")


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="the hybrid traveling branch is already stable at tau=0.1733")
def test_criterion_11_hybrid_traveling_breather(report):
    label, _ = _hybrid_label(0.1733)
    assert report("11 (hybrid tau=0.1733)", label == "TB", f"{label}, reduced ODE TB")


@pytest.mark.slow
@pytest.mark.parametrize("tau, length, expected", [(0.185, 60.0, "SP"), (0.181, 60.0, "SB"), (0.175, 120.0, "TPplus")])
def test_criterion_11_pde_classes(report, tau, length, expected):
    label = _pde_label(tau, length)
    assert report(f"11 (PDE tau={tau})", label == expected, f"{label}, expected {expected}")


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="the PDE breathing pulse at tau=0.17721 does not drift at eps=0.05")
def test_criterion_11_pde_traveling_breather(report):
    label = _pde_label(0.17721, 120.0)
    assert report("11 (PDE tau=0.17721)", label == "TB", f"{label}, expected TB")


# 12 -----------------------------------------------------------------------


def test_criterion_12_properties(report):
    rng = np.random.default_rng(7)
    worst_eq = 0.0
    for _ in range(200):
        y = np.array([0.0, 0.0, rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8)])
        c0, h = rng.uniform(-50, 50), rng.uniform(2, 40)
        y[:2] = c0 + h / 2, c0 - h / 2
        shift = rng.uniform(-30, 30)
        mirror = np.array([-y[1], -y[0], -y[3], -y[2]])
        for rhs in (rhs_full, rhs_truncated):
            a = rhs(y, P0)
            b = rhs(y + np.array([shift, shift, 0, 0]), P0)
            m = rhs(mirror, P0)
            worst_eq = max(worst_eq, np.max(np.abs(a - b)), np.max(np.abs(m - [-a[1], -a[0], -a[3], -a[2]])))

    det_min = math.inf
    for tau in ODE_TAUS:
        p = ModelParams(tau=tau)
        for row in run_homogeneous(p).states:
            if row[0] - row[1] >= 1.0:
                det_min = min(det_min, mass_determinant(row, p))

    fast = ModelParams(tau=0.02)
    ref = single_front_normal_form("left", 0.0, 0.05, fast, IntegratorConfig(
        method="rk45_adaptive", dt=1e-4, atol=1e-14, rtol=1e-14, t_end=10.0))
    errs = []
    for dt in (1e-2, 5e-3, 2.5e-3):
        tr = single_front_normal_form("left", 0.0, 0.05, fast, IntegratorConfig(dt=dt, t_end=10.0, record_stride=1))
        errs.append(np.max(np.abs(tr.states[-1] - ref.states[-1])))
    order = [math.log2(errs[0] / errs[1]), math.log2(errs[1] / errs[2])]

    x = np.linspace(-60, 60, 601)
    well = SquareWell(0.0048, -0.008, 10.0, 30.0)
    boxes = (0.001 + 0.0048 * box_response(x, -35.0, -5.0, 1.0) - 0.008 * box_response(x, -5.0, 5.0, 1.0)
             + 0.0048 * box_response(x, 5.0, 35.0, 1.0))
    lin = max(np.max(np.abs(response_analytic(well, P0)(x) - boxes)),
              np.max(np.abs(response_analytic(SharpBump(0.006, 10.0), replace(P0, delta0=0.003))(x)
                            - 3 * response_analytic(SharpBump(0.002, 10.0), P0)(x))))
    num = np.max(np.abs(response_numeric(well, P0, grid_n=16384)(x) - boxes))

    sp = ModelParams(tau=0.182)
    tp = tp_exact(P0)
    het = SharpBump(0.01, 40.0)
    hsp = het_sp(P0, None, het)
    front_het = SharpBump(eps0_for_front(P0, 10.0, 5.9565), 10.0)
    sf = stationary_front(P0, front_het)
    residuals = [
        np.max(np.abs(rhs_truncated(InterfaceState.centered(0.0, sp_h := derive_coefficients(sp).h0), sp))),
        np.max(np.abs(rhs_full(InterfaceState.centered(0.0, sp_h), sp))),
        np.max(np.abs(rhs_homogeneous3d([tp.h_star, tp.r_star, tp.r_star], P0))),
        np.max(np.abs(rhs_truncated(np.array([hsp.h_star / 2, -hsp.h_star / 2, 0, 0]), P0, None,
                                    response_analytic(het, P0)))),
        abs(rhs_single_front("left", [0.0, front_velocities("left", P0).r_zero], P0)[1]),
        abs(rhs_single_front("left", [sf.l_star, 0.0], P0, None, response_analytic(front_het, P0))[1]),
    ]
    ok = (worst_eq < 1e-12 and det_min > 0 and all(3.7 < q < 4.3 for q in order) and lin < 1e-15
          and num < 1e-6 and max(residuals) < 1e-10)
    detail = (f"equivariance {worst_eq:.1e}; min det {det_min:.3g}; RK4 orders {order[0]:.2f}, {order[1]:.2f}; "
              f"linearity {lin:.1e} (numeric {num:.1e}); max fixed-point residual {max(residuals):.1e}")
    assert report("12", ok, detail)
