import math

import numpy as np
import pytest

from ruledpolar.fixtures import polar
from ruledpolar.oracle import fd_jet
from ruledpolar.polar import polar_normal, polar_support_vector, polar_tchebychev
from ruledpolar.relative import (
    SupportVanishingError,
    VectorField2,
    field_calculus,
    general_fields,
    gradient_field,
    make_support,
    relative_metric,
    relative_normal_general,
    tchebychev_field,
)
from ruledpolar.surface import RuledSurfaceSpec, euclidean_curvatures, fundamental_forms, surface_jet

PTS = (np.array([-1.3, 0.2, 0.9, 2.1]), np.array([0.4, -2.2, 1.7, -0.3]))


def test_euclidean_support(fix_c):
    q = make_support("euclidean", fix_c)
    assert q.values(0.3, 0.2) == (1.0, 0.0, 0.0)
    y = relative_normal_general(fix_c, q, *PTS)
    np.testing.assert_allclose(y, surface_jet(fix_c, *PTS).xi, atol=1e-13)
    G, _ = relative_metric(fix_c, q, *PTS)
    _, h = fundamental_forms(fix_c, *PTS)
    np.testing.assert_allclose(G.matrix(), h.matrix())


def test_manhart_examples():
    spec = RuledSurfaceSpec("1", "1", "0", (-2, 2))
    q = make_support("manhart", spec, a=0.25)
    assert q.q(0.5, 0.0) == 1.0
    q = make_support("manhart", spec, a=1.0)
    qq, _, qv = q.values(0.0, 1.0)
    assert qq == pytest.approx(0.25)
    assert qv == pytest.approx(-0.5)
    jet = fd_jet(q.q, 0.0, 1.0)
    assert jet.dv == pytest.approx(-0.5, abs=1e-9)


def test_manhart_partials_fd(specs):
    spec = specs["FIX-G"]
    q = make_support("manhart", spec, a=-0.7)
    u, v = PTS
    jet = fd_jet(q.q, u, v)
    _, qu, qv = q.values(u, v)
    np.testing.assert_allclose(jet.du, qu, rtol=1e-8)
    np.testing.assert_allclose(jet.dv, qv, rtol=1e-8)


def test_support_window_rejection(fix_c):
    with pytest.raises(SupportVanishingError):
        make_support("polar", fix_c, window=((-1, 1), (-3, 3)), f="cos(V)")


@pytest.mark.parametrize("family, params", [("manhart", {"a": 0.3}), ("polar", {"f": "exp(V/2)"})])
def test_relative_normal_support_identity(specs, family, params):
    spec = specs["FIX-G"]
    q = make_support(family, spec, **params)
    y = relative_normal_general(spec, q, *PTS)
    xi = surface_jet(spec, *PTS).xi
    np.testing.assert_allclose(np.einsum("...i,...i", xi, y), q.q(*PTS), atol=1e-10)


def test_general_normal_equals_polar_normal(matrix):
    for _, _, spec, ps in matrix:
        q = ps.support_function()
        u, v = PTS
        try:
            a = relative_normal_general(spec, q, u, v)
        except SupportVanishingError:
            continue
        np.testing.assert_allclose(a, polar_normal(spec, ps, u, v), atol=1e-10)


def test_relative_metric(specs):
    spec = specs["FIX-G"]
    q = make_support("polar", spec, f="2 + sin(V)")
    G, Gi = relative_metric(spec, q, *PTS)
    prod = np.einsum("...ij,...jk->...ik", G.matrix(), Gi.matrix())
    np.testing.assert_allclose(prod, np.broadcast_to(np.eye(2), prod.shape), atol=1e-10)
    assert np.all(Gi.a11 == 0)
    d = spec.delta(PTS[0])
    w = np.sqrt(d * d + PTS[1] ** 2)
    np.testing.assert_allclose(Gi.a12, w * q.q(*PTS) / d)


def test_relative_metric_example():
    spec = RuledSurfaceSpec("1", "1", "0", (-1, 1))
    half = make_support("custom", spec, q=lambda u, v: 0.5 + 0 * v, q_u=lambda u, v: 0 * v, q_v=lambda u, v: 0 * v)
    G, Gi = relative_metric(spec, half, 0.0, 1.0)
    assert G.a12 == pytest.approx(math.sqrt(2))
    assert np.allclose(np.linalg.inv(G.matrix()), Gi.matrix())


def test_field_calculus_zero(fix_c):
    q = make_support("polar", fix_c, f="exp(V/2)")
    zero = VectorField2(lambda u, v: np.zeros(np.shape(u) + (2,)))
    out = field_calculus(fix_c, q, zero, *PTS)
    for x in out:
        np.testing.assert_array_equal(x, 0.0)


def test_curl_g_of_t_vanishes(matrix):
    for _, f, spec, ps in matrix:
        if f == "cos(V)":
            continue
        q = ps.support_function()
        out = field_calculus(spec, q, tchebychev_field(spec, q), *PTS)
        assert np.max(np.abs(out.curl_G)) < 1e-7


def test_helicoid_unit_support_div():
    spec = RuledSurfaceSpec("1", "0", "0", (-2, 2))
    ps = polar(spec, "1")
    q = ps.support_function()
    out = field_calculus(spec, q, tchebychev_field(spec, q), *PTS)
    np.testing.assert_allclose(out.div_I, 0, atol=1e-9)
    np.testing.assert_allclose(polar_tchebychev(spec, ps, *PTS).div_I, 0, atol=1e-14)


def test_general_fields_euclidean_helicoid():
    spec = RuledSurfaceSpec("1", "0", "0", (-2, 2))
    T, Q = general_fields(spec, make_support("euclidean", spec), *PTS)
    v = PTS[1]
    np.testing.assert_allclose(T[..., 0], v / np.sqrt(1 + v * v))
    np.testing.assert_allclose(T[..., 1], 0, atol=1e-15)
    np.testing.assert_array_equal(Q, 0)


def test_general_fields_constant_support(fix_c):
    c = make_support("custom", fix_c, q=lambda u, v: 3.0 + 0 * v, q_u=lambda u, v: 0 * v, q_v=lambda u, v: 0 * v)
    _, Q = general_fields(fix_c, c, *PTS)
    np.testing.assert_array_equal(Q, 0)


def test_general_fields_match_polar(matrix):
    u, v = PTS
    for _, _, spec, ps in matrix:
        q = ps.support_function()
        try:
            T, Q = general_fields(spec, q, u, v)
        except SupportVanishingError:
            continue
        np.testing.assert_allclose(T, polar_tchebychev(spec, ps, u, v).T, rtol=1e-9, atol=1e-9)
        np.testing.assert_allclose(Q, polar_support_vector(spec, ps, u, v).Q, rtol=1e-9, atol=1e-9)


@pytest.mark.parametrize("family, params", [("manhart", {"a": 0.6}), ("polar", {"f": "2 + sin(V)"})])
def test_tchebychev_is_gradient_of_log_ratio(specs, family, params):
    spec = specs["FIX-G"]
    q = make_support(family, spec, **params)

    def phi(u, v):
        K, _ = euclidean_curvatures(spec, u, v)
        return np.log(np.abs(q.q(u, v)) / np.abs(K) ** 0.25)

    grad = gradient_field(spec, q, phi)(*PTS)
    T, _ = general_fields(spec, q, *PTS)
    np.testing.assert_allclose(grad, T, rtol=1e-6, atol=1e-6)


def test_rank_conditions(specs, rng):
    spec = specs["FIX-G"]
    q = make_support("manhart", spec, a=0.4)
    u, v = rng.uniform(-3, 3, 30), rng.uniform(-3, 3, 30)
    j = surface_jet(spec, u, v)
    y = lambda a, b: relative_normal_general(spec, q, a, b)  # noqa: E731
    jet = fd_jet(y, u, v)
    x1, x2 = j.x_u, j.x_v
    base = np.linalg.det(np.stack([x1, x2, y(u, v)], -2))
    assert np.min(np.abs(base)) > 1e-3
    for yi in (jet.du, jet.dv):
        det = np.linalg.det(np.stack([x1, x2, yi], -2))
        assert np.max(np.abs(det) / (1 + np.linalg.norm(yi, axis=-1))) < 1e-6
