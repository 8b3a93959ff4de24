"""Scan the homogeneous behaviour class over tau on one tier.

    python scripts/tau_scan.py --tier ode-truncated --lo 0.170 --hi 0.185 --step 0.001
"""

import argparse
import sys

import numpy as np

from frontpulse.cli import label_run, run_model
from frontpulse.config import from_mapping


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--tier", default="ode-truncated")
    ap.add_argument("--lo", type=float, default=0.170)
    ap.add_argument("--hi", type=float, default=0.185)
    ap.add_argument("--step", type=float, default=0.001)
    ap.add_argument("--t-end", type=float, default=4000.0)
    ap.add_argument("--length", type=float, default=60.0, help="domain length for the field tiers")
    args = ap.parse_args()
    taus = np.round(np.arange(args.hi, args.lo - 0.5 * args.step, -args.step), 6)
    print("tau,label,status")
    for tau in taus:
        integ = {"t_end": args.t_end}
        if args.tier in ("hybrid", "pde"):
            integ["x_hi"] = args.length
        cfg = from_mapping({"tier": args.tier, "params": {"tau": float(tau), "D": 1.0}, "integrator": integ})
        traj = run_model(cfg)
        print(f"{tau!r},{label_run(cfg, traj)},{traj.status}", flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
