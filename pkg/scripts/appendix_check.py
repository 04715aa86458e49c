"""Compare the DE closed-form density against numerical CF inversion.

For each (a, b) the density is inverted from the CF on 200 points of
[-10 sqrt(b), 10 sqrt(b)] and the worst absolute gap is reported.
"""

import argparse
import math
import sys
import time

import numpy as np

from gfaccess import defun as D
from gfaccess import transforms as T


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pairs", default="0:1,0.5:1,1:4", help="comma-separated a:b pairs")
    ap.add_argument("--points", type=int, default=200)
    ap.add_argument("--tol", type=float, default=1e-6)
    args = ap.parse_args()
    ok = True
    for item in args.pairs.split(","):
        a, b = (float(v) for v in item.split(":"))
        d = D.DifferentiatedErrorFunction(a, b)
        y = np.linspace(-10 * math.sqrt(b), 10 * math.sqrt(b), args.points)
        t0 = time.perf_counter()
        inv = T.gil_pelaez_pdf(T.CharacteristicFunction.of(d), y)
        gap = float(np.max(np.abs(inv - D.pdf(d, y))))
        ok = ok and gap <= args.tol
        print(f"a={a:g} b={b:g}: max |closed form - inversion| = {gap:.3e} "
              f"({time.perf_counter() - t0:.2f}s)")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
