"""Verify every built-in mapping over its acceptance grid and print the reports."""

import argparse
import sys

from gfaccess import accessibility as A


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tol", type=float, default=1e-10)
    ap.add_argument("--points", type=int, default=50, help="s-points per parameter value")
    args = ap.parse_args()
    reports = A.verify_builtin_suite(args.tol, args.points)
    for label, rep in reports.items():
        print(f"[{label}]")
        print(rep.summary())
    worst = max(r.max_abs_residual for r in reports.values())
    ok = all(r.passed for r in reports.values())
    print(f"\n{len(reports)} grids, max residual {worst:.3e}: {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
