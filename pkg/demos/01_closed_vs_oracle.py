#!/usr/bin/env python3
"""Closed forms against independent numeric recomputation at one point.

The surface has constant striction distance 1 and curvature 1, normalized by
the support f(V) = cos V.  At (u, v) = (pi/2, 2) the closed forms give exact
rational values.  Each one is then recomputed from its definition with finite
differences of the surface and of the relative normal.
"""

import math

import numpy as np

from ruledpolar import (
    darboux_pick,
    fixture,
    numeric_scalar_curvature,
    numeric_shape_operator,
    polar,
    polar_pick_scalar,
    polar_shape_and_curvatures,
    polar_tchebychev,
)


def main():
    spec = fixture("FIX-C")
    ps = polar(spec, "cos(V)")
    q = ps.support_function()
    u, v = math.pi / 2, 2.0

    sh = polar_shape_and_curvatures(spec, ps, u, v)
    pk = polar_pick_scalar(spec, ps, u, v)
    tc = polar_tchebychev(spec, ps, u, v)
    fit = numeric_shape_operator(spec, q, u, v)
    db = darboux_pick(spec, q, u, v)
    S_num = numeric_scalar_curvature(spec, q, u, v)

    print(f"point (u, v) = ({u:.6f}, {v})   q = {float(q.q(u, v)):.6f}")
    print(f"{'':8}{'closed':>16}{'numeric':>16}")
    for name, a, b in [("K", sh.K, fit.K), ("H", sh.H, fit.H), ("J", pk.J, db.J), ("S", pk.S, S_num),
                       ("T1", tc.T[0], db.T[0]), ("T2", tc.T[1], db.T[1])]:
        print(f"{name:8}{float(a):16.10f}{float(b):16.10f}")
    print("3H - J - 3S =", float(3 * sh.H - pk.J - 3 * pk.S))
    print("shape operator at (0, 1), closed:\n", np.round(polar_shape_and_curvatures(spec, ps, 0.0, 1.0).B, 10))
    print("numeric:\n", np.round(numeric_shape_operator(spec, q, 0.0, 1.0).B, 8))


if __name__ == "__main__":
    main()
