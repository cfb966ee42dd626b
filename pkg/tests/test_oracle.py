import json
import math

import numpy as np
import pytest

from ruledpolar.fixtures import polar
from ruledpolar.oracle import (
    QUANTITIES,
    christoffel,
    darboux_pick,
    fd_jet,
    fd_weights,
    frenet_at,
    frenet_invariants,
    metric_scalar_curvature,
    numeric_scalar_curvature,
    numeric_shape_operator,
    residual_report,
)
from ruledpolar.polar import polar_pick_scalar
from ruledpolar.relative import make_support
from ruledpolar.surface import RuledSurfaceSpec, euclidean_curvatures


def test_fd_jet_trivial():
    jet = fd_jet(lambda u, v: v * v, 0.0, 3.0)
    assert jet.dv == pytest.approx(6.0, abs=1e-9)
    assert jet.du == 0.0
    jet = fd_jet(lambda u, v: np.sin(u) * v**3, 0.4, 1.2, order=2)
    assert jet.duv == pytest.approx(3 * math.cos(0.4) * 1.44, abs=1e-7)
    assert jet.dvv == pytest.approx(6 * math.sin(0.4) * 1.2, abs=1e-7)
    assert jet.duu == pytest.approx(-math.sin(0.4) * 1.2**3, abs=1e-7)


def test_fd_jet_support_chain_rule(specs):
    spec = specs["FIX-G"]
    ps = polar(spec, "cos(V)")
    u, v = 0.3, -1.2
    jet = fd_jet(ps.support_function().q, u, v)
    d = spec.delta(u)
    expected = ps.fdot(ps.V(u, v)) * d / (d * d + v * v)
    assert jet.dv == pytest.approx(expected, abs=1e-7)


def test_fd_jet_position_mixed_symmetry(specs):
    spec = specs["FIX-G"]
    P = spec.frames.position
    u, v = 0.7, 0.5
    a = fd_jet(lambda s, t: fd_jet(P, s, t).du, u, v).dv
    b = fd_jet(lambda s, t: fd_jet(P, s, t).dv, u, v).du
    np.testing.assert_allclose(a, b, atol=1e-6)


def test_fd_jet_vector_and_array_shapes():
    u = np.linspace(0, 1, 4)
    jet = fd_jet(lambda a, b: np.stack([a * b, a + b], -1), u, 2 * u, order=2)
    assert jet.du.shape == (4, 2) and jet.duv.shape == (4, 2)
    np.testing.assert_allclose(jet.duv[:, 0], 1.0, atol=1e-8)


def test_shape_operator_euclidean_helicoid():
    spec = RuledSurfaceSpec("1", "0", "0", (-2, 2))
    fit = numeric_shape_operator(spec, make_support("euclidean", spec), 0.5, 0.0)
    assert fit.K == pytest.approx(-1.0, abs=1e-8)
    assert np.max(fit.residual) < 1e-8


def test_shape_operator_example(fix_c, cos_c):
    fit = numeric_shape_operator(fix_c, cos_c.support_function(), 0.0, 1.0)
    np.testing.assert_allclose(fit.B, [[0, 1], [0, 0]], atol=1e-8)


def test_darboux_example_and_symmetry(fix_c, cos_c):
    d = darboux_pick(fix_c, cos_c.support_function(), math.pi / 2, 2.0)
    assert d.J == pytest.approx(2.25, abs=1e-4)
    np.testing.assert_allclose(d.T, [1, 4], atol=1e-4)
    A = d.A
    for perm in [(0, 2, 1), (1, 0, 2), (2, 1, 0), (1, 2, 0), (2, 0, 1)]:
        np.testing.assert_allclose(A, np.transpose(A, perm), atol=1e-5)


@pytest.mark.parametrize("f", ["cos(V)", "exp(V/2)", "2 + sin(V)"])
def test_darboux_right_helicoid(f):
    spec = RuledSurfaceSpec("2", "0", "0", (-2, 2))
    q = polar(spec, f).support_function()
    d = darboux_pick(spec, q, np.array([-1.0, 0.5]), np.array([0.7, -1.3]))
    assert np.max(np.abs(d.J)) < 1e-4


def test_scalar_curvature_example(fix_c, cos_c):
    S = numeric_scalar_curvature(fix_c, cos_c.support_function(), math.pi / 2, 2.0)
    assert S == pytest.approx(-0.75, rel=1e-3)


def test_scalar_curvature_euclidean_identity(specs):
    spec = specs["FIX-G"]
    q = make_support("euclidean", spec)
    u, v = np.array([-1.0, 0.3, 2.0]), np.array([0.5, -1.5, 2.2])
    S = numeric_scalar_curvature(spec, q, u, v)
    _, Ht = euclidean_curvatures(spec, u, v)
    Je = polar_pick_scalar(spec, polar(spec, "1"), u, v).J_EUK
    np.testing.assert_allclose(S, Ht - Je / 3, rtol=1e-3, atol=1e-6)


def test_flat_metrics():
    # constant indefinite metric and the polar-coordinate plane
    const = lambda u, v: np.broadcast_to(np.array([[0.0, 1.0], [1.0, 2.0]]), np.shape(u) + (2, 2))  # noqa: E731

    def plane(u, v):
        r = 1.5 + u
        z = np.zeros_like(r)
        return np.stack([np.stack([1 + z, z], -1), np.stack([z, r * r], -1)], -2)

    u, v = np.array([0.1, 0.7]), np.array([-0.4, 1.0])
    assert np.max(np.abs(metric_scalar_curvature(const, u, v))) < 1e-6
    assert np.max(np.abs(metric_scalar_curvature(plane, u, v))) < 1e-6
    G = christoffel(plane, u, v)
    np.testing.assert_allclose(G[:, 0, 1, 1], -(1.5 + u), atol=1e-8)


def test_sphere_curvature():
    def sphere(u, v):
        s = np.sin(u)
        z = np.zeros_like(s)
        return np.stack([np.stack([1 + z, z], -1), np.stack([z, s * s], -1)], -2)

    K = metric_scalar_curvature(sphere, np.array([0.6, 1.2]), np.array([0.0, 2.0]))
    np.testing.assert_allclose(K, 1.0, rtol=1e-6)


def test_fd_weights():
    w = fd_weights([-1, 0, 1], 1)
    np.testing.assert_allclose(w, [-0.5, 0, 0.5], atol=1e-14)


def test_frenet_classical():
    t = np.linspace(-0.4, 0.4, 9)
    circle = np.stack([2 * np.cos(t + 0.3), 2 * np.sin(t + 0.3), 0 * t], -1)
    k, s = frenet_invariants(circle, 0.1)
    assert k == pytest.approx(0.5, abs=1e-6) and abs(s) < 1e-6
    k, s = frenet_at(lambda t: np.stack([np.cos(t), np.sin(t), t], -1), 1.0)
    assert k == pytest.approx(0.5, abs=1e-6) and s == pytest.approx(0.5, abs=1e-6)


def test_frenet_errors():
    line = np.stack([np.arange(9.0), 0 * np.arange(9.0), 0 * np.arange(9.0)], -1)
    with pytest.raises(ValueError):
        frenet_invariants(line, 1.0)
    with pytest.raises(ValueError):
        frenet_invariants(line[:6], 1.0)


def test_stencil_halving_self_consistency(fix_c, cos_c):
    # oracle outputs move by less than their claimed accuracy when all stencils halve
    import ruledpolar.oracle as oracle

    q = cos_c.support_function()
    u, v = np.array([0.4, -1.2]), np.array([1.1, -0.6])
    a = (darboux_pick(fix_c, q, u, v).J, numeric_scalar_curvature(fix_c, q, u, v))
    b = (darboux_pick(fix_c, q, u, v, scale=0.5).J, numeric_scalar_curvature(fix_c, q, u, v, scale=0.5))
    assert np.max(np.abs(a[0] - b[0]) / (1 + np.abs(a[0]))) < 1e-5
    assert np.max(np.abs(a[1] - b[1]) / (1 + np.abs(a[1]))) < 1e-3
    assert oracle.TOLERANCES["S"] >= 1e-3


def test_report_helicoid_passes(specs):
    spec = specs["FIX-H"]
    rep = residual_report(spec, polar(spec, "cos(V)"), (np.linspace(-4, 4, 20), np.linspace(-3, 3, 20)))
    assert rep.ok, rep.failures()[:3]
    assert len(rep.rows) == 400 * len(QUANTITIES)
    names = [r.quantity for r in rep.rows if (r.i, r.j) == (3, 7)]
    assert names == [n for n, _ in QUANTITIES]
    json.dumps(rep.as_dict(), allow_nan=False)


def test_report_negative_control(fix_c, cos_c):
    grid = (np.linspace(-1, 1, 4), np.linspace(-2, 2, 4))
    rep = residual_report(fix_c, cos_c, grid, corrupt={"J": 1.1})
    failed = {r.quantity for r in rep.failures()}
    assert "J" in failed and "identity_136" in failed
    assert not rep.ok


def test_report_errors_become_rows(fix_c, cos_c):
    # u beyond the integrated range fails at that point only
    rep = residual_report(fix_c, cos_c, (np.array([0.0, 50.0]), np.array([1.0])))
    good = [r for r in rep.rows if r.i == 0]
    bad = [r for r in rep.rows if r.i == 1]
    assert all(r.status == "pass" for r in good)
    assert all(r.status == "fail" and r.note for r in bad)


def test_report_inconclusive_near_zero_support(fix_c, cos_c):
    u = 0.3
    v0 = math.tan(u - math.pi / 2)  # q = 0 here
    v = v0 + 5e-8 * (1 + v0 * v0)  # dq/dv = 1 / (1 + v0^2) at the zero
    q = cos_c.support_function().q(u, v)
    assert 1e-8 < abs(q) < 1e-7
    rep = residual_report(fix_c, cos_c, (np.array([u]), np.array([v])))
    status = {r.quantity: r.status for r in rep.rows}
    assert status["S"] == "inconclusive"
    assert status["identity_136"] == "pass"


def test_report_tolerance_override(fix_c, cos_c):
    grid = (np.array([0.2]), np.array([0.5]))
    rep = residual_report(fix_c, cos_c, grid, tolerances={"S": 1e-30}, tol_scale=2.0)
    assert rep.meta["tolerances"]["S"] == 2e-30
    with pytest.raises(ValueError):
        residual_report(fix_c, cos_c, grid, tolerances={"nope": 1.0})
