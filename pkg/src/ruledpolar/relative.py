"""Relative normalizations given by an arbitrary support function.

A support function ``q(u, v)`` fixes the relative normal ``y`` uniquely.
This module holds the machinery that does not depend on the polar form of
``q``: the relative normal in frame components, the relative metric
``G_ij = h_ij / q`` and its inverse, divergence and rotation of tangent
vector fields with respect to ``I`` and ``G``, and the general Tchebychev
and support vector fields.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .surface import RuledSurfaceSpec, SymTensor2, frame_to_world, fundamental_forms

__all__ = [
    "Q_MIN",
    "SupportVanishingError",
    "SupportFunction",
    "VectorField2",
    "FieldCalculus",
    "make_support",
    "relative_normal_coefficients",
    "relative_normal_general",
    "relative_metric",
    "metric_partials",
    "field_calculus",
    "general_fields",
    "tchebychev_field",
    "support_field",
    "gradient_field",
]

Q_MIN = 1e-8


class SupportVanishingError(ValueError):
    """The support function is (numerically) zero at an evaluation point."""


def _pair(u, v):
    return np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))


def _check_support(q, u, v):
    bad = np.abs(q) < Q_MIN
    if np.any(bad):
        i = np.flatnonzero(np.ravel(bad))[0]
        uu, vv = np.ravel(np.broadcast_to(u, np.shape(bad)))[i], np.ravel(np.broadcast_to(v, np.shape(bad)))[i]
        raise SupportVanishingError(f"|q| < {Q_MIN:g} at (u, v) = ({uu:.17g}, {vv:.17g})")


@dataclass(frozen=True, eq=False)
class SupportFunction:
    """``q`` and its first partials; second partials optional.

    ``family`` is one of ``euclidean``, ``manhart``, ``polar``, ``custom``;
    ``params`` records the family parameters (``a`` or ``f``).
    """

    q: Callable
    q_u: Callable
    q_v: Callable
    family: str = "custom"
    params: dict = field(default_factory=dict)
    q_uu: Callable | None = None
    q_uv: Callable | None = None
    q_vv: Callable | None = None

    def __call__(self, u, v):
        u, v = _pair(u, v)
        return self.q(u, v)

    def values(self, u, v, check: bool = True):
        """``(q, q_u, q_v)`` at the given points."""
        u, v = _pair(u, v)
        q = self.q(u, v)
        if check:
            _check_support(q, u, v)
        return q, self.q_u(u, v), self.q_v(u, v)

    def check_window(self, u_range, v_range, n: int = 40):
        """Reject if ``|q| < Q_MIN`` or ``q`` changes sign on an ``n x n`` sample."""
        U, V = np.meshgrid(np.linspace(*u_range, n), np.linspace(*v_range, n), indexing="ij")
        q = self.q(U, V)
        _check_support(q, U, V)
        s = np.sign(q)
        if np.any(s[1:] != s[:-1]) or np.any(s[:, 1:] != s[:, :-1]):
            raise SupportVanishingError("support function changes sign on the window")
        return self


def make_support(family: str, spec: RuledSurfaceSpec, window=None, **params) -> SupportFunction:
    """Build a support function of a named family.

    ``euclidean``: q = 1.  ``manhart``: q = |K~|^a with ``a`` given.
    ``polar``: q = f(V) with ``f`` an expression in ``V`` (see
    :mod:`ruledpolar.polar`).  ``custom``: pass callables ``q``, ``q_u``,
    ``q_v``.  With ``window=((u_lo, u_hi), (v_lo, v_hi))`` the result is
    checked for vanishing on a sample of that window.
    """
    if family == "euclidean":
        one = lambda u, v: np.ones(np.broadcast(u, v).shape)  # noqa: E731
        zero = lambda u, v: np.zeros(np.broadcast(u, v).shape)  # noqa: E731
        sf = SupportFunction(one, zero, zero, "euclidean", {}, zero, zero, zero)
    elif family == "manhart":
        a = float(params["a"])

        def q(u, v):
            d = spec.delta(u)
            return (d * d / (d * d + v * v) ** 2) ** a

        def q_u(u, v):
            d, dd = spec.delta(u), spec.ddelta(u)
            w2 = d * d + v * v
            return q(u, v) * a * (2.0 * dd / d - 4.0 * d * dd / w2)

        def q_v(u, v):
            d = spec.delta(u)
            return q(u, v) * a * (-4.0 * v / (d * d + v * v))

        sf = SupportFunction(q, q_u, q_v, "manhart", {"a": a})
    elif family == "polar":
        from .polar import PolarSupport

        f = params["f"]
        ps = f if isinstance(f, PolarSupport) else PolarSupport(spec, f)
        sf = ps.support_function()
    elif family == "custom":
        sf = SupportFunction(params["q"], params["q_u"], params["q_v"], "custom", {})
    else:
        raise ValueError(f"unknown support family {family!r}")
    if window is not None:
        sf.check_window(*window)
    return sf


def relative_normal_coefficients(spec: RuledSurfaceSpec, q: SupportFunction, u, v) -> np.ndarray:
    """Components ``(y1, y2, y3)`` of the relative normal in the frame ``(e, n, z)``."""
    u, v = _pair(u, v)
    qq, q1, q2 = q.values(u, v)
    d, dd, k = spec.delta(u), spec.ddelta(u), spec.kappa(u)
    w2 = d * d + v * v
    w = np.sqrt(w2)
    y1 = -w * (d * q1 + q2 * (k * w2 + dd * v)) / (d * d)
    y2 = (d * d * qq - w2 * v * q2) / (d * w)
    y3 = -(v * qq + w2 * q2) / w
    return np.stack([y1, y2, y3], axis=-1)


def relative_normal_general(spec: RuledSurfaceSpec, q: SupportFunction, u, v, frames=None) -> np.ndarray:
    """Relative normal ``y`` in world coordinates."""
    frames = spec.frames if frames is None else frames
    u, v = _pair(u, v)
    F, _ = frames.at(u)
    return frame_to_world(F, relative_normal_coefficients(spec, q, u, v))


def relative_metric(spec: RuledSurfaceSpec, q: SupportFunction, u, v) -> tuple[SymTensor2, SymTensor2]:
    """Relative metric ``G`` and its inverse (closed form)."""
    u, v = _pair(u, v)
    qq = q.values(u, v)[0]
    _, h = fundamental_forms(spec, u, v)
    d, dd, k, lam = spec.delta(u), spec.ddelta(u), spec.kappa(u), spec.lam(u)
    w2 = d * d + v * v
    w = np.sqrt(w2)
    G = SymTensor2(h.a11 / qq, h.a12 / qq, h.a22 / qq)
    Ginv = SymTensor2(
        np.zeros_like(w),
        w * qq / d,
        w * qq * (k * w2 + dd * v - d * d * lam) / (d * d),
    )
    return G, Ginv


class MetricPartials(NamedTuple):
    """Values and exact first partials of the metric data at a point.

    ``g``, ``G``: component arrays ``(..., 2, 2)``; ``dg``, ``dG``:
    ``(..., 2, 2, 2)`` with the derivative index last.  ``w`` and ``a`` are
    the area elements of ``I`` and ``G``; ``dw``, ``da`` their partials.
    """

    g: np.ndarray
    dg: np.ndarray
    G: np.ndarray
    dG: np.ndarray
    w: np.ndarray
    dw: np.ndarray
    a: np.ndarray
    da: np.ndarray


def metric_partials(spec: RuledSurfaceSpec, q: SupportFunction, u, v) -> MetricPartials:
    u, v = _pair(u, v)
    c = spec.coefficients(u)
    d, dd, ddd, k, dk, lam, dlam = c.delta, c.ddelta, c.dddelta, c.kappa, c.dkappa, c.lam, c.dlam
    qq, q1, q2 = q.values(u, v)
    w2 = d * d + v * v
    w = np.sqrt(w2)
    w_u, w_v = d * dd / w, v / w

    g11 = w2 + d * d * lam * lam
    g12 = d * lam
    g11_u = 2 * d * dd + 2 * d * lam * (dd * lam + d * dlam)
    g11_v = 2 * v
    g12_u = dd * lam + d * dlam
    zero = np.zeros_like(w)

    P = dd * v - d * d * lam
    h11 = -k * w - P / w
    h11_u = -dk * w - k * w_u - ((ddd * v - 2 * d * dd * lam - d * d * dlam) * w - P * w_u) / w2
    h11_v = -k * w_v - (dd * w - P * w_v) / w2
    h12 = d / w
    h12_u = (dd * w - d * w_u) / w2
    h12_v = -d * w_v / w2

    def mat(a11, a12, a22):
        return np.stack([np.stack([a11, a12], -1), np.stack([a12, a22], -1)], -2)

    g = mat(g11, g12, np.ones_like(w))
    dg = np.stack([mat(g11_u, g12_u, zero), mat(g11_v, zero, zero)], -1)
    h = mat(h11, h12, zero)
    dh = np.stack([mat(h11_u, h12_u, zero), mat(h11_v, h12_v, zero)], -1)
    G = h / qq[..., None, None]
    dq = np.stack([q1, q2], -1)
    dG = (dh - G[..., None] * dq[..., None, None, :]) / qq[..., None, None, None]

    a = np.abs(d) / (w * np.abs(qq))
    da = a[..., None] * (
        np.stack([dd / d, zero], -1) - np.stack([w_u, w_v], -1) / w[..., None] - dq / qq[..., None]
    )
    return MetricPartials(g, dg, G, dG, w, np.stack([w_u, w_v], -1), a, da)


@dataclass(frozen=True, eq=False)
class VectorField2:
    """Tangent vector field by contravariant components ``X^1``, ``X^2``.

    ``jac(u, v)``, if given, returns ``dX^i/du^j`` as ``(..., 2, 2)``;
    otherwise partials come from central differences with
    ``h = 1e-5 (1 + |coordinate|)``.
    """

    components: Callable
    jac: Callable | None = None

    def __call__(self, u, v):
        return np.asarray(self.components(*_pair(u, v)), float)

    def jacobian(self, u, v):
        u, v = _pair(u, v)
        if self.jac is not None:
            return np.asarray(self.jac(u, v), float)
        hu = 1e-5 * (1.0 + np.abs(u))
        hv = 1e-5 * (1.0 + np.abs(v))
        du = (self(u + hu, v) - self(u - hu, v)) / (2 * hu[..., None])
        dv = (self(u, v + hv) - self(u, v - hv)) / (2 * hv[..., None])
        return np.stack([du, dv], -1)


class FieldCalculus(NamedTuple):
    div_I: np.ndarray
    curl_I: np.ndarray
    div_G: np.ndarray
    curl_G: np.ndarray


def _div_curl(X, dX, g, dg, area, darea):
    # div = (area X^i)_/i / area; curl = ((g_2j X^j)_/1 - (g_1j X^j)_/2) / area
    div = (np.einsum("...i,...i->...", darea, X) + area * np.einsum("...ii->...", dX)) / area
    # d_k (g_ij X^j) = dg_ijk X^j + g_ij dX^j_k
    dlow = np.einsum("...ijk,...j->...ik", dg, X) + np.einsum("...ij,...jk->...ik", g, dX)
    curl = (dlow[..., 1, 0] - dlow[..., 0, 1]) / area
    return div, curl


def field_calculus(spec: RuledSurfaceSpec, q: SupportFunction, X: VectorField2, u, v) -> FieldCalculus:
    """Divergence and rotation of ``X`` with respect to ``I`` and to ``G``.

    The ``G`` versions use the same templates as the ``I`` versions with
    ``g_ij`` replaced by ``G_ij`` and ``w`` by ``sqrt|det G|``.
    """
    u, v = _pair(u, v)
    m = metric_partials(spec, q, u, v)
    Xv = X(u, v)
    dX = X.jacobian(u, v)
    div_I, curl_I = _div_curl(Xv, dX, m.g, m.dg, m.w, m.dw)
    div_G, curl_G = _div_curl(Xv, dX, m.G, m.dG, m.a, m.da)
    return FieldCalculus(div_I, curl_I, div_G, curl_G)


def general_fields(spec: RuledSurfaceSpec, q: SupportFunction, u, v) -> tuple[np.ndarray, np.ndarray]:
    """Tchebychev vector ``T`` and support vector ``Q`` (coordinate components)."""
    u, v = _pair(u, v)
    qq, q1, q2 = q.values(u, v)
    d, dd, k, lam = spec.delta(u), spec.ddelta(u), spec.kappa(u), spec.lam(u)
    w2 = d * d + v * v
    w = np.sqrt(w2)
    T1 = (w2 * q2 + v * qq) / (d * w)
    T2 = (2 * d * w2 * q1 + dd * qq * (d * d - v * v)) / (2 * d * d * w) + T1 * (k * w2 + dd * v - d * d * lam) / d
    _, Ginv = relative_metric(spec, q, u, v)
    g1, g2 = -q1 / (qq * qq), -q2 / (qq * qq)
    Q1 = 0.25 * (Ginv.a11 * g1 + Ginv.a12 * g2)
    Q2 = 0.25 * (Ginv.a12 * g1 + Ginv.a22 * g2)
    return np.stack([T1, T2], -1), np.stack([Q1, Q2], -1)


def tchebychev_field(spec: RuledSurfaceSpec, q: SupportFunction) -> VectorField2:
    return VectorField2(lambda u, v: general_fields(spec, q, u, v)[0])


def support_field(spec: RuledSurfaceSpec, q: SupportFunction) -> VectorField2:
    return VectorField2(lambda u, v: general_fields(spec, q, u, v)[1])


def gradient_field(spec: RuledSurfaceSpec, q: SupportFunction, phi: Callable) -> VectorField2:
    """``G``-gradient of the scalar ``phi(u, v)``, partials by central differences."""

    def comps(u, v):
        hu = 1e-5 * (1.0 + np.abs(u))
        hv = 1e-5 * (1.0 + np.abs(v))
        p_u = (phi(u + hu, v) - phi(u - hu, v)) / (2 * hu)
        p_v = (phi(u, v + hv) - phi(u, v - hv)) / (2 * hv)
        _, Ginv = relative_metric(spec, q, u, v)
        return np.stack([Ginv.a11 * p_u + Ginv.a12 * p_v, Ginv.a12 * p_u + Ginv.a22 * p_v], -1)

    return VectorField2(comps)
