#!/usr/bin/env python3
"""Grid sweep of every invariant for each reference surface and support.

A residual report compares closed forms against the numeric oracles row by
row.  Rows too close to a zero of the support are marked inconclusive.
"""

import time

import numpy as np

from ruledpolar import FIXTURES, SUPPORTS, fixture, polar, residual_report


def main(n=12):
    grid = (np.linspace(-4, 4, n), np.linspace(-3, 3, n))
    for name in FIXTURES:
        spec = fixture(name)
        for f in SUPPORTS:
            t0 = time.perf_counter()
            rep = residual_report(spec, polar(spec, f), grid)
            worst = max(rep.rows, key=lambda r: (r.rel_err or 0.0) / r.tol)
            print(f"{name:6} f = {f:11} pass/fail/inconclusive {rep.summary():14} worst {worst.quantity:9} "
                  f"{worst.rel_err:.1e} / {worst.tol:g}  ({time.perf_counter() - t0:.2f} s)")


if __name__ == "__main__":
    main()
