#!/usr/bin/env python3
"""Run every verification suite at contract scale and write a consolidated report.

Usage:
    python scripts/run_acceptance.py [--seed N] [--out DIR]

Exit code 0 iff every suite passes. Equivalent to `pytest tests/test_acceptance.py`
but emits the CSV/text reports of each suite into one directory.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from bridgelines import suites  # noqa: E402
from bridgelines.cli import _write_reports  # noqa: E402


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--out", default="acceptance-reports")
    args = parser.parse_args()

    order = [
        "reflection", "walk-exact", "convergence", "glauber-stationarity",
        "coupling", "gibbs", "tails", "pw", "detect", "transforms",
    ]
    all_ok = True
    for name in order:
        kwargs = {"n_seeds": 10} if name == "detect" else {}
        result = suites.run_suite(name, seed=args.seed, **kwargs)
        _write_reports(result, args.out)
        status = "PASS" if result.passed else "FAIL"
        print(f"{status}  {name}")
        if not result.passed:
            all_ok = False
            for line in result.lines():
                print("   ", line)
    print("ALL SUITES PASS" if all_ok else "SUITE FAILURES PRESENT")
    return 0 if all_ok else 1


if __name__ == "__main__":
    sys.exit(main())
