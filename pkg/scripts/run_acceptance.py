"""Run the acceptance suite and print its PASS/FAIL summary.

    python scripts/run_acceptance.py [--fast]

``--fast`` skips the hybrid and PDE cross-tier runs (marked ``slow``).
"""

import argparse
import sys
from pathlib import Path

import pytest


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--fast", action="store_true", help="skip the slow cross-tier runs")
    args = ap.parse_args()
    target = Path(__file__).resolve().parent.parent / "tests" / "test_acceptance.py"
    argv = [str(target), "-q", "-rxX"]
    if args.fast:
        argv += ["-m", "not slow"]
    return pytest.main(argv)


if __name__ == "__main__":
    sys.exit(main())
