"""Command-line entry point.

    python -m frontpulse <command> --config run.yaml [--out DIR] [--jobs N] [--svg]

Commands: simulate, analyze, phase-diagram, classify, residence.  Every run
writes ``resolved_config.yaml`` next to its artifacts and prints a one-line
summary.  Failures exit with status 2 and print ``error kind=<kind>`` on
stderr.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from frontpulse import hybrid as hyb
from frontpulse import pde
from frontpulse.analysis import (
    bifurcation_points,
    front_velocities,
    het_hopf_sweep,
    het_sp,
    legacy_bifurcation_points,
    sp_eigenvalues,
    stationary_front,
    tp_exact,
)
from frontpulse.classify import (
    classify_homogeneous,
    classify_scattering,
    homogeneous_initial_state,
    residence_time,
    run_scattering,
    run_trap,
    sweep_phase_diagram,
    window_stats,
)
from frontpulse.config import RunConfig, dump_config, initial_kick, parse_config
from frontpulse.errors import PulseError
from frontpulse.io import svg_labels, svg_lines, write_csv
from frontpulse.model import (
    Constant,
    SharpBump,
    SquareWell,
    derive_coefficients,
    response_for,
    support,
)
from frontpulse.reduced_ode import InterfaceState, Trajectory, incoming_pulse, integrate, variant_from_name

COMMANDS = ("simulate", "analyze", "phase-diagram", "classify", "residence")
_DISPLAY = {"TPplus": "TP+", "TPminus": "TP-"}


def _homogeneous(cfg: RunConfig) -> bool:
    return isinstance(cfg.heterogeneity, Constant)


def _mode(cfg: RunConfig) -> str:
    if cfg.initial.mode != "auto":
        return cfg.initial.mode
    return "homogeneous" if _homogeneous(cfg) else "incoming"


def _ode_start(cfg: RunConfig, c) -> InterfaceState:
    p, ini = cfg.params, cfg.initial
    mode = _mode(cfg)
    if mode == "homogeneous":
        return homogeneous_initial_state(p, c, kick=initial_kick(cfg))
    if mode == "incoming":
        return incoming_pulse(p, cfg.heterogeneity, ini.distance, ini.direction)
    return InterfaceState.centered(ini.center or 0.0, ini.h if ini.h is not None else c.h0, ini.r2, ini.r1)


def _field_start(cfg: RunConfig):
    """Initial state for the hybrid or PDE tier."""
    p, ini, icfg = cfg.params, cfg.initial, cfg.integrator
    mode = _mode(cfg)
    center, h, speed = ini.center, ini.h, ini.speed
    if mode == "homogeneous" and cfg.tier == "pde":
        return pde.homogeneous_pulse_state(p, icfg, kick=initial_kick(cfg))
    if mode in ("homogeneous", "incoming"):
        if p.tau < hyb.drift_threshold(p):
            h_tp, c_tp = hyb.traveling_pulse(p)
            h, speed = h_tp + (initial_kick(cfg) if mode == "homogeneous" else 0.0), c_tp
        else:
            h = (h if h is not None else derive_coefficients(p).h0) + initial_kick(cfg)
            speed = 0.0
        if mode == "incoming":
            if speed <= 0:
                raise PulseError("no-traveling-pulse", "an incoming pulse needs tau below the drift threshold")
            lo = support(cfg.heterogeneity)[0]
            dist = 30.0 * p.sqrtD if ini.distance is None else ini.distance
            center = lo - dist - h / 2
    if cfg.tier == "hybrid":
        return hyb.initial_state(p, icfg, center=center, h=h, het=cfg.heterogeneity, speed=speed)
    return pde.pulse_state(p, icfg, center=center, h=h, het=cfg.heterogeneity, speed=speed)


def run_model(cfg: RunConfig) -> Trajectory:
    """Run the configured tier from its configured start."""
    p, het = cfg.params, cfg.heterogeneity
    if cfg.tier == "hybrid":
        return hyb.run_hybrid(_field_start(cfg), p, het, cfg.integrator)
    if cfg.tier == "pde":
        return pde.run_pde(_field_start(cfg), p, het, cfg.integrator)
    if not _homogeneous(cfg) and _mode(cfg) == "incoming" and cfg.tier != "ode-legacy":
        from dataclasses import replace

        return run_scattering(p, het, replace(cfg.scatter, variant=cfg.tier))
    c = derive_coefficients(p)
    resp = None if _homogeneous(cfg) else response_for(het, p)
    return integrate(variant_from_name(cfg.tier), _ode_start(cfg, c), p, c=c, resp=resp,
                     cfg=cfg.integrator, het=het)


def _window(cfg: RunConfig, traj: Trajectory):
    t = traj.times
    start = max(t[0] + cfg.classify.transient_skip, t[-1] - cfg.classify.window)
    sel = t >= start
    if sel.sum() < 2:
        sel = np.ones_like(t, dtype=bool)
    return window_stats(t[sel], traj.center[sel], traj.h[sel])


def label_run(cfg: RunConfig, traj: Trajectory) -> str:
    p = cfg.params
    if _homogeneous(cfg):
        try:
            return classify_homogeneous(traj, p, cfg=cfg.classify)
        except PulseError as exc:
            if exc.kind == "horizon-too-short":
                return "Unresolved"
            raise
    if isinstance(cfg.heterogeneity, SharpBump) and traj.tier in ("ode-truncated", "ode-full"):
        sc = cfg.scatter
        return classify_scattering(traj, cfg.heterogeneity, p, velocity_rtol=sc.velocity_rtol,
                                   dec_rule=sc.dec_rule, dec_margin=sc.dec_margin).label
    return "Unresolved"


def _write_traj(out: Path, traj: Trajectory, svg: bool):
    traj.write_csv(out / "trajectory.csv", out / "events.csv")
    if svg:
        svg_lines(out / "trajectory.svg", traj.times, {"l1": traj.l1, "l2": traj.l2},
                  title=f"{traj.tier}: interfaces", xlabel="t", ylabel="x")


def cmd_simulate(cfg: RunConfig, out: Path, args) -> str:
    traj = run_model(cfg)
    _write_traj(out, traj, args.svg)
    lab = label_run(cfg, traj)
    st = _window(cfg, traj)
    return (f"{_DISPLAY.get(lab, lab)} mean_velocity={st.drift!r} mean_width={st.mean_width!r} "
            f"status={traj.status}")


def cmd_classify(cfg: RunConfig, out: Path, args) -> str:
    traj = run_model(cfg)
    lab = label_run(cfg, traj)
    st = _window(cfg, traj)
    write_csv(out / "classification.csv", ["key", "value"],
              [("label", lab), ("drift", st.drift), ("amplitude", st.amplitude),
               ("mean_width", st.mean_width), ("status", traj.status)])
    if args.svg:
        svg_lines(out / "width.svg", traj.times, {"h": traj.h}, title="pulse width", xlabel="t", ylabel="h")
    return _DISPLAY.get(lab, lab)


def analysis_report(cfg: RunConfig) -> list[tuple[str, object]]:
    p, het = cfg.params, cfg.heterogeneity
    c = derive_coefficients(p)
    rows: list[tuple[str, object]] = [
        ("tau", p.tau), ("D", p.D), ("delta0", p.delta0),
        ("h_star", c.h0), ("tau_c", c.tau_c), ("m0", c.m0), ("g3", c.g3), ("g3_tilde", c.g3_tilde),
        ("G0", c.G0), ("G1", c.G1), ("phi0", c.phi0), ("phi1", c.phi1), ("phi2", c.phi2),
    ]
    bp = bifurcation_points(p, c)
    rows += [("tau_d", bp.tau_d), ("tau_H", bp.tau_H), ("k_H", bp.k_H)]
    for k, lam in enumerate(sp_eigenvalues(p, c)):
        rows += [(f"sp_eig{k}_re", float(np.real(lam))), (f"sp_eig{k}_im", float(np.imag(lam)))]
    if p.tau < bp.tau_d:
        tp = tp_exact(p, p.tau, c)
        rows += [("tp_h_star", tp.h_star), ("tp_r_star", tp.r_star)]
    rows.append(("hybrid_tau_d", hyb.drift_threshold(p)))
    if cfg.tier == "ode-legacy":
        tp_leg, th_leg = legacy_bifurcation_points(p)
        rows += [("legacy_tau_pitchfork", tp_leg), ("legacy_tau_hopf", th_leg)]
    if isinstance(het, SharpBump):
        fv = front_velocities("left", p, c)
        rows += [("front_r_plus", fv.r_plus), ("front_r_minus", fv.r_minus), ("front_r_zero", fv.r_zero),
                 ("front_r_plus_series", fv.approx_plus), ("front_r_minus_series", fv.approx_minus),
                 ("front_r_zero_series", fv.approx_zero)]
        try:
            sf = stationary_front(p, het, c)
            rows += [("front_l_star", sf.l_star), ("front_branch", sf.branch), ("front_stability", sf.stability)]
        except PulseError as exc:
            rows.append(("front_l_star", exc.kind))
        try:
            rows.append(("het_sp_h_star", het_sp(p, c, het).h_star))
        except PulseError as exc:
            rows.append(("het_sp_h_star", exc.kind))
        if cfg.analyze.hopf_sweep:
            a = cfg.analyze
            rows.append(("het_tau_H", het_hopf_sweep(p, c, het, (a.tau_lo, a.tau_hi), a.samples)))
    return rows


def cmd_analyze(cfg: RunConfig, out: Path, args) -> str:
    rows = analysis_report(cfg)
    write_csv(out / "report.csv", ["key", "value"], rows)
    d = dict(rows)
    return f"h*={d['h_star']:.7f} tau_c={d['tau_c']:.7f} tau_d={d['tau_d']:.7f} tau_H={d['tau_H']:.7f}"


def cmd_phase_diagram(cfg: RunConfig, out: Path, args) -> str:
    sw = cfg.sweep
    if not sw.d0 or not sw.eps0:
        raise PulseError("missing-parameter", "sweep.d0 and sweep.eps0")
    diag = sweep_phase_diagram(sw.d0, sw.eps0, cfg.params, cfg=cfg.scatter, jobs=args.jobs,
                               refine=sw.refine, tol=sw.tol)
    write_csv(out / "phase_diagram.csv", ["d0", "eps0", "label"], diag.rows())
    write_csv(out / "boundaries.csv", ["d0", "eps0", "transition"], diag.boundaries)
    if args.svg:
        svg_labels(out / "phase_diagram.svg", diag.d0, diag.eps0, diag.labels.T,
                   title="scattering outcomes", xlabel="d0", ylabel="eps0")
    counts = {lab: int(np.sum(diag.labels == lab)) for lab in sorted(set(diag.labels.ravel()))}
    return " ".join(f"{k}={v}" for k, v in counts.items()) + f" cells={diag.labels.size}"


def cmd_residence(cfg: RunConfig, out: Path, args) -> str:
    p, het = cfg.params, cfg.heterogeneity
    if isinstance(het, SquareWell):
        traj, res = run_trap(p, het, horizon=cfg.residence.horizon, dt=cfg.scatter.dt)
        _write_traj(out, traj, args.svg)
        write_csv(out / "trap.csv", ["key", "value"],
                  [("trapped", res.trapped), ("side", res.side or ""),
                   ("t_exit", res.t_exit if res.t_exit is not None else "")])
        return "trapped" if res.trapped else f"escaped side={res.side}"
    if not isinstance(het, SharpBump):
        raise PulseError("invalid-config", "residence needs a sharp_bump or square_well heterogeneity")
    eps_list = cfg.residence.eps0 or (het.eps0,)
    rows = []
    for e in eps_list:
        h_e = SharpBump(float(e), het.d0, het.xc)
        traj = run_scattering(p, h_e, cfg.scatter)
        try:
            rows.append((float(e), residence_time(traj, h_e)))
        except PulseError as exc:
            rows.append((float(e), exc.kind))
    write_csv(out / "residence.csv", ["eps0", "residence_time"], rows)
    if args.svg:
        good = [(e, t) for e, t in rows if isinstance(t, float)]
        if good:
            xs, ts = zip(*good)
            svg_lines(out / "residence.svg", xs, {"T": np.array(ts)}, title="residence time",
                      xlabel="eps0", ylabel="T")
    return " ".join(f"{e!r}:{t if isinstance(t, str) else format(t, '.6g')}" for e, t in rows)


_HANDLERS = {
    "simulate": cmd_simulate,
    "analyze": cmd_analyze,
    "phase-diagram": cmd_phase_diagram,
    "classify": cmd_classify,
    "residence": cmd_residence,
}


def dispatch(cfg: RunConfig, command: str, out: str | Path | None = None, jobs: int | None = None,
             svg: bool = False) -> str:
    """Run ``command`` and write its artifacts; returns the summary line."""
    if command not in _HANDLERS:
        raise PulseError("unknown-command", command)
    out = Path(out if out is not None else cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    (out / "resolved_config.yaml").write_text(dump_config(cfg))
    args = argparse.Namespace(jobs=jobs, svg=svg)
    return _HANDLERS[command](cfg, out, args)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="frontpulse", description="Front-pair pulse simulations and analysis.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="YAML run configuration")
    ap.add_argument("--out", default=None, help="output directory (default: the config's output)")
    ap.add_argument("--jobs", type=int, default=None, help="worker processes for sweeps (default: all cores)")
    ap.add_argument("--svg", action="store_true", help="also write SVG quick-looks")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = Path(args.config).read_text()
        cfg = parse_config(text, env=os.environ)
        summary = dispatch(cfg, args.command, args.out, args.jobs, args.svg)
    except PulseError as exc:
        print(f"error kind={exc.kind} message={exc.message}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error kind=io-error message={exc}", file=sys.stderr)
        return 2
    print(summary)
    return 0


if __name__ == "__main__":
    sys.exit(main())
