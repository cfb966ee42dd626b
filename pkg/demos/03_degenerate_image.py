#!/usr/bin/env python3
"""Supports of trigonometric form collapse the normal image to a curve.

For f = c1 cos V + c2 sin V the relative normal depends on u only.  The
curvature and torsion of that curve are compared with Frenet invariants
computed numerically from samples.
"""

import numpy as np

from ruledpolar import SpecialPolar, fd_jet, fixture, frenet_at, gamma_star, polar_normal


def main():
    sp = SpecialPolar(fixture("FIX-C"), 1.0, 0.4)
    jet = fd_jet(lambda a, b: polar_normal(sp.spec, sp.polar, a, b), np.array([0.5]), np.array([1.0]))
    print("|dy/dv| at (0.5, 1) =", float(np.linalg.norm(jet.dv)))
    print(f"{'u':>6}{'kappa*':>14}{'Frenet':>14}{'sigma*':>14}{'Frenet':>14}")
    for u in np.linspace(-3, 3, 7):
        g = gamma_star(sp, u)
        k, s = frenet_at(sp.curve, u)
        print(f"{u:6.2f}{float(g.kappa_star):14.8f}{k:14.8f}{float(g.sigma_star):14.8f}{s:14.8f}")


if __name__ == "__main__":
    main()
