import math

import numpy as np
import pytest

from ruledpolar.oracle import frenet_at, fd_jet
from ruledpolar.polar import polar_normal, polar_pick_scalar, polar_support_vector, polar_tchebychev
from ruledpolar.special import DegenerateCurveError, SpecialPolar, gamma_star, special_fields
from ruledpolar.surface import RuledSurfaceSpec, coordinates_to_frame

KAPPAS = {"zero": "0", "one": "1", "sin": "sin(u)"}


def _spec(kappa, delta="1", lam="0"):
    return RuledSurfaceSpec(delta, kappa, lam, (-3, 3), u0=0.0)


def test_requires_nonzero_coefficients():
    with pytest.raises(ValueError):
        SpecialPolar(_spec("0"), 0.0, 0.0)


def test_great_circle():
    sp = SpecialPolar(_spec("0"), 1.0, 0.0)
    u = np.linspace(-2, 2, 9)
    g = gamma_star(sp, u)
    np.testing.assert_allclose(g.y, sp.spec.frames.n(u), atol=1e-13)
    np.testing.assert_allclose(g.kappa_star, 1.0)
    np.testing.assert_allclose(g.sigma_star, 0.0)
    assert np.all(np.isnan(g.slope_ratio))


def test_unit_conical_curvature():
    sp = SpecialPolar(_spec("1"), 1.0, 0.0)
    u = np.array([-1.0, 0.4, 1.2])
    g = gamma_star(sp, u)
    np.testing.assert_allclose(g.kappa_star, 1 / np.abs(np.cos(u)))
    np.testing.assert_allclose(g.sigma_star, -1 / np.cos(u))
    np.testing.assert_allclose(np.abs(g.slope_ratio), 1.0)


def test_degenerate_point():
    sp = SpecialPolar(_spec("1"), 1.0, 0.0)
    with pytest.raises(DegenerateCurveError):
        gamma_star(sp, math.pi / 2)


@pytest.mark.parametrize("kappa", KAPPAS.values())
@pytest.mark.parametrize("c", [(1.0, 0.0), (0.6, -1.3)])
def test_image_is_v_independent(kappa, c):
    sp = SpecialPolar(_spec(kappa, delta="1.5 + cos(u)/2", lam="u/3"), *c)
    ps = sp.polar
    u = np.linspace(-2.5, 2.5, 11)
    for v in (-2.0, -0.3, 0.9, 2.4):
        vv = v + 0 * u
        q = ps.support_function().q(u, vv)
        ok = np.abs(q) > 1e-3
        y = lambda a, b: polar_normal(sp.spec, ps, a, b)  # noqa: E731
        jet = fd_jet(y, u[ok], vv[ok])
        assert np.max(np.abs(jet.dv)) <= 1e-8
        np.testing.assert_allclose(y(u[ok], vv[ok]), sp.curve(u[ok]), atol=1e-12)


@pytest.mark.parametrize("kappa", KAPPAS.values())
def test_frenet_oracle(kappa):
    sp = SpecialPolar(_spec(kappa), 1.0, 0.4)
    for u in (-1.1, 0.2, 0.9):
        g = gamma_star(sp, u)
        k, s = frenet_at(sp.curve, u)
        assert abs(k - g.kappa_star) <= 1e-5
        assert abs(s - g.sigma_star) <= 1e-5


def test_frenet_negative_delta():
    sp = SpecialPolar(_spec("sin(u) + 0.5", delta="-2 - sin(u)", lam="0.3"), 1.0, -0.5)
    for u in (-0.8, 0.5, 1.7):
        g = gamma_star(sp, u)
        k, s = frenet_at(sp.curve, u)
        assert abs(k - g.kappa_star) <= 1e-5
        assert abs(s - g.sigma_star) <= 1e-5


def test_constant_slope_ratio():
    sp = SpecialPolar(_spec("1"), 2.0, 1.0)
    u = np.linspace(-2.5, 2.5, 41)
    A, _ = sp.AB(u)
    u = u[np.abs(A) > 1e-3]
    g = gamma_star(sp, u)
    np.testing.assert_allclose(np.abs(g.slope_ratio * sp.spec.kappa(u)), 1.0, atol=1e-8)


def test_fields_collapse_to_polar_cos():
    spec = _spec("0")
    sp = SpecialPolar(spec, 1.0, 0.0)
    u, v = np.array([0.0, 0.4]), np.array([0.5, -1.0])
    np.testing.assert_allclose(special_fields(sp, u, v).J, polar_pick_scalar(spec, sp.polar, u, v).J, atol=1e-9)


def test_helicoid_fields_pick_zero():
    sp = SpecialPolar(RuledSurfaceSpec("2", "0", "0", (-3, 3)), 0.3, 1.1)
    u, v = np.meshgrid(np.linspace(-2, 2, 7), np.linspace(-2, 2, 7))
    np.testing.assert_allclose(special_fields(sp, u, v).J, 0.0, atol=1e-12)


@pytest.mark.parametrize("delta", ["1", "2 + sin(u)", "-1.5 - cos(u)/3"])
def test_fields_change_of_basis(delta):
    spec = RuledSurfaceSpec(delta, "cos(u)", "u/5", (-3, 3), u0=0.0)
    sp = SpecialPolar(spec, 1.0, 0.3)
    u, v = np.array([math.pi / 2, -0.7, 1.3]), np.array([2.0, 0.4, -1.1])
    sf = special_fields(sp, u, v)
    T = polar_tchebychev(spec, sp.polar, u, v).T
    Q = polar_support_vector(spec, sp.polar, u, v).Q
    np.testing.assert_allclose(sf.T, coordinates_to_frame(spec, u, v, T[..., 0], T[..., 1]), atol=1e-9)
    np.testing.assert_allclose(sf.Q, coordinates_to_frame(spec, u, v, Q[..., 0], Q[..., 1]), atol=1e-9)
    np.testing.assert_allclose(sf.J, polar_pick_scalar(spec, sp.polar, u, v).J, rtol=1e-9, atol=1e-9)
