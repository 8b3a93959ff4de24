"""Run every checked-in configuration through the CLI.

    python scripts/reproduce_figures.py [--jobs N] [--svg] [--only NAME ...]

Each config writes into its own ``output`` directory; the phase-diagram
sweep is by far the longest run.
"""

import argparse
import sys
from pathlib import Path

from frontpulse.cli import dispatch
from frontpulse.config import parse_config

ROOT = Path(__file__).resolve().parent.parent
COMMANDS = {
    "fig2a_sp": "simulate",
    "fig3c_sweep": "phase-diagram",
    "fig5_residence": "residence",
    "fig7_trap": "residence",
}


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--jobs", type=int, default=None)
    ap.add_argument("--svg", action="store_true")
    ap.add_argument("--only", nargs="*", default=None, choices=sorted(COMMANDS))
    args = ap.parse_args()
    for name in args.only or sorted(COMMANDS):
        cfg = parse_config((ROOT / "configs" / f"{name}.yaml").read_text())
        summary = dispatch(cfg, COMMANDS[name], ROOT / cfg.output, jobs=args.jobs, svg=args.svg)
        print(f"{name}: {summary}", flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
