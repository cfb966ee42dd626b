"""Closed forms for polar normalizations ``q = f(V)``.

``V = arctan(v / delta) - int kappa du`` (principal branch, integration
constant fixed by ``int kappa = 0`` at the surface's base point ``u0``).
Dots denote derivatives of ``f`` with respect to ``V``.

All evaluators accept broadcastable arrays for ``u`` and ``v`` and raise
:class:`~ruledpolar.relative.SupportVanishingError` where ``|q| < Q_MIN``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .expr import Add, Const, Div, Expr, Func, Mul, Neg, Sub, Var, as_expr, differentiate
from .relative import SupportFunction, _check_support, _pair
from .surface import RuledSurfaceSpec, euclidean_curvatures, frame_to_world

__all__ = [
    "PolarSupport",
    "ShapeResult",
    "PickResult",
    "TchebychevResult",
    "SupportVectorResult",
    "Classification",
    "polar_V",
    "polar_normal",
    "polar_normal_coefficients",
    "polar_shape_and_curvatures",
    "polar_pick_scalar",
    "polar_tchebychev",
    "polar_support_vector",
    "classify",
    "trig_coefficients",
]


def polar_V(spec: RuledSurfaceSpec, u, v):
    """``V = arctan(v / delta) - int_{u0}^{u} kappa``."""
    u, v = _pair(u, v)
    return np.arctan(v / spec.delta(u)) - spec.kappa_integral(u)


@dataclass(frozen=True, eq=False)
class PolarSupport:
    """Support function ``q = f(V)`` on a given surface.

    ``f`` is an expression (or expression text) in the variable ``V``.
    """

    spec: RuledSurfaceSpec
    f: Expr

    def __post_init__(self):
        object.__setattr__(self, "f", as_expr(self.f, var="V"))

    @cached_property
    def fdot(self) -> Expr:
        return differentiate(self.f)

    @cached_property
    def fddot(self) -> Expr:
        return differentiate(self.fdot)

    def V(self, u, v):
        return polar_V(self.spec, u, v)

    def V_partials(self, u, v):
        """``(V_u, V_v)``."""
        u, v = _pair(u, v)
        d, dd, k = self.spec.delta(u), self.spec.ddelta(u), self.spec.kappa(u)
        w2 = d * d + v * v
        return -v * dd / w2 - k, d / w2

    def derivs(self, u, v, check: bool = True):
        """``(q, qdot, qddot)`` at ``(u, v)``."""
        Vv = self.V(u, v)
        q = self.f(Vv)
        if check:
            _check_support(q, *_pair(u, v))
        return q, self.fdot(Vv), self.fddot(Vv)

    def support_function(self) -> SupportFunction:
        sp = self.spec

        def q(u, v):
            return self.f(self.V(u, v))

        def q_u(u, v):
            return self.fdot(self.V(u, v)) * self.V_partials(u, v)[0]

        def q_v(u, v):
            return self.fdot(self.V(u, v)) * self.V_partials(u, v)[1]

        def second(u, v):
            u, v = _pair(u, v)
            d, dd, ddd, k, dk = sp.delta(u), sp.ddelta(u), sp.dddelta(u), sp.kappa(u), sp.dkappa(u)
            w2 = d * d + v * v
            Vu, Vv = -v * dd / w2 - k, d / w2
            Vuu = -v * ddd / w2 + 2 * v * d * dd * dd / (w2 * w2) - dk
            Vuv = dd * (v * v - d * d) / (w2 * w2)
            Vvv = -2 * v * d / (w2 * w2)
            VV = self.V(u, v)
            f1, f2 = self.fdot(VV), self.fddot(VV)
            return f2 * Vu * Vu + f1 * Vuu, f2 * Vu * Vv + f1 * Vuv, f2 * Vv * Vv + f1 * Vvv

        return SupportFunction(
            q, q_u, q_v, "polar", {"f": str(self.f)},
            lambda u, v: second(u, v)[0],
            lambda u, v: second(u, v)[1],
            lambda u, v: second(u, v)[2],
        )


class _Pt(NamedTuple):
    d: np.ndarray
    dd: np.ndarray
    ddd: np.ndarray
    k: np.ndarray
    dk: np.ndarray
    lam: np.ndarray
    v: np.ndarray
    w: np.ndarray
    w2: np.ndarray
    q: np.ndarray
    qd: np.ndarray
    qdd: np.ndarray


def _point(ps: PolarSupport, u, v) -> _Pt:
    u, v = _pair(u, v)
    sp = ps.spec
    d = sp.delta(u)
    w2 = d * d + v * v
    q, qd, qdd = ps.derivs(u, v)
    return _Pt(d, sp.ddelta(u), sp.dddelta(u), sp.kappa(u), sp.dkappa(u), sp.lam(u), v, np.sqrt(w2), w2, q, qd, qdd)


def polar_normal_coefficients(spec: RuledSurfaceSpec, ps: PolarSupport, u, v) -> np.ndarray:
    """Frame components ``(0, y2, y3)`` of the polar normal."""
    p = _point(ps, u, v)
    y2 = (p.d * p.q - p.qd * p.v) / p.w
    y3 = -(p.q * p.v + p.d * p.qd) / p.w
    return np.stack([np.zeros_like(y2), y2, y3], -1)


def polar_normal(spec: RuledSurfaceSpec, ps: PolarSupport, u, v, frames=None) -> np.ndarray:
    """Polar relative normal in world coordinates; it lies in span{n, z}."""
    frames = spec.frames if frames is None else frames
    u, v = _pair(u, v)
    F, _ = frames.at(u)
    return frame_to_world(F, polar_normal_coefficients(spec, ps, u, v))


class ShapeResult(NamedTuple):
    B: np.ndarray  # (..., 2, 2), B[i, j] = B_i^j
    K: np.ndarray
    H: np.ndarray


def polar_shape_and_curvatures(spec: RuledSurfaceSpec, ps: PolarSupport, u, v) -> ShapeResult:
    """Relative shape operator, relative curvature and relative mean curvature."""
    p = _point(ps, u, v)
    d, dd, k, lam, v, w, q, qd, qdd = p.d, p.dd, p.k, p.lam, p.v, p.w, p.q, p.qd, p.qdd
    w3 = w * p.w2
    s = q + qdd
    B11 = -(k * p.w2 + dd * v) * s / w3
    B12 = (
        -qd * v**3
        - d * d * qd * v
        + d**3 * (q * (k * lam + 1) + k * lam * qdd)
        + d * v * (q * (k * lam * v + v + dd * lam) + lam * qdd * (k * v + dd))
    ) / w3
    B21 = d * s / w3
    B22 = -d * d * lam * s / w3
    B = np.stack([np.stack([B11, B12], -1), np.stack([B21, B22], -1)], -2)
    K = -d * (d * q - qd * v) * s / (p.w2 * p.w2)
    _, Ht = euclidean_curvatures(spec, u, v)
    return ShapeResult(B, K, Ht * s)


class PickResult(NamedTuple):
    J: np.ndarray
    J_EUK: np.ndarray
    S: np.ndarray


def polar_pick_scalar(spec: RuledSurfaceSpec, ps: PolarSupport, u, v) -> PickResult:
    """Pick invariant, Euclidean Pick invariant and scalar curvature of ``G``.

    ``J_EUK / v`` is evaluated in its regular form so ``J`` is finite on the
    striction curve ``v = 0``.
    """
    p = _point(ps, u, v)
    d, dd, k, lam, v, w, w2, q, qd, qdd = p.d, p.dd, p.k, p.lam, p.v, p.w, p.w2, p.q, p.qd, p.qdd
    w3 = w * w2
    Jhat = 3.0 * (k * v**3 + d * d * (k - lam) * v + d * d * dd) / (2.0 * d * d * w3)
    Ht = -(k * w2 + dd * v + d * d * lam) / (2.0 * w3)
    J = (q * v + d * qd) * (Jhat + 3.0 * Ht * qd / (d * q))
    L = k * w2 + d * d * lam + dd * v
    S = (
        -q * q * (k * w2 * w2 + d * d * ((d * d - v * v) * lam + 2 * dd * v))
        + d * d * L * qd * qd
        + d * q * ((2 * d * d * lam * v + (v * v - d * d) * dd) * qd - d * L * qdd)
    ) / (2.0 * d * d * w3 * q)
    return PickResult(J, v * Jhat, S)


class TchebychevResult(NamedTuple):
    T: np.ndarray  # (..., 2) coordinate components
    div_I: np.ndarray
    curl_I: np.ndarray
    div_G: np.ndarray
    curl_G: np.ndarray
    tau: np.ndarray
    curl_I_printed: np.ndarray


def polar_tchebychev(spec: RuledSurfaceSpec, ps: PolarSupport, u, v) -> TchebychevResult:
    """Tchebychev vector field of a polar normalization and its derived scalars.

    ``curl_I`` is the rotation obtained from its defining template; the
    long expanded expression in circulation drops a factor ``delta**3`` on
    one group of terms, its value is returned as ``curl_I_printed`` (the
    two agree when ``|delta| = 1``).  The potential ``tau`` uses ``|q|``
    so it is real for negative support functions as well.
    """
    p = _point(ps, u, v)
    d, dd, ddd, k, dk, lam, v, w, w2, q, qd, qdd = p
    w3 = w * w2
    T1 = (q * v + d * qd) / (d * w)
    T2 = (q * (2 * k * v * w2 - 2 * d * d * lam * v + dd * w2) - 2 * d**3 * lam * qd) / (2 * d * d * w)
    L = k * w2 + d * d * lam + dd * v

    div_I = (
        2 * w2 * q * ((3 * v * v + d * d) * k - d * d * lam)
        + d * ((-dd * v * v + d * d * (-2 * lam * v + dd)) * qd - 2 * d * L * qdd)
    ) / (2 * d * d * w3)

    def curl(scale):
        return -(
            2 * dd * q * v * v * (2 * k * v + dd)
            + d * d * q * (4 * (k * lam + 1) * v * v + dd * (2 * k + lam) * v + dd * dd)
            + scale * (qd * (4 * v + (k + lam) * (2 * k * v + dd)) - q * (2 * dk * v + ddd))
            + d * v * (2 * k * k * qd * v * v + 3 * k * dd * qd * v + dd * dd * qd - q * v * (2 * dk * v + ddd))
            + 2 * d**4 * (q * (k * lam + 1) + qdd)
        ) / (2 * d**3 * w2)

    div_G = (
        q * q * (k * w2 * w2 + d * d * ((v * v - d * d) * lam - 2 * dd * v))
        + d * d * qd * qd * L
        + d * q * (qd * (2 * d * d * lam * v + dd * (v * v - d * d)) - d * qdd * L)
    ) / (d * d * w3 * q)
    tau = np.log(w * np.abs(q) / np.sqrt(np.abs(d)))
    return TchebychevResult(
        np.stack([T1, T2], -1), div_I, curl(d**3), div_G, np.zeros_like(div_G), tau, curl(1.0)
    )


class SupportVectorResult(NamedTuple):
    Q: np.ndarray
    div_I: np.ndarray
    curl_I: np.ndarray
    div_G: np.ndarray
    curl_G: np.ndarray
    potential: np.ndarray
    curl_I_printed: np.ndarray


def polar_support_vector(spec: RuledSurfaceSpec, ps: PolarSupport, u, v) -> SupportVectorResult:
    """Support vector field ``Q = 1/4 grad_G(1/q)`` and its derived scalars.

    ``curl_I`` carries ``q**2`` in the denominator; the commonly quoted
    form with a single ``q`` is returned as ``curl_I_printed``.
    """
    p = _point(ps, u, v)
    d, dd, ddd, k, dk, lam, v, w, w2, q, qd, qdd = p
    Q1 = -qd / (4 * w * q)
    Q2 = d * lam * qd / (4 * w * q)
    _, Ht = euclidean_curvatures(spec, u, v)
    div_I = Ht * (qd * qd - q * qdd) / (2 * q * q)
    num = -d * qd * qd + q * (qd * v + d * qdd)
    L = k * w2 + dd * v + d * d * lam
    div_G = (
        qd * (q * (-dd * v * v + d * d * (-2 * lam * v + dd)) - 2 * d * qd * L) + d * q * qdd * L
    ) / (4 * d * w * w2 * q * q)
    return SupportVectorResult(
        np.stack([Q1, Q2], -1),
        div_I,
        num / (4 * w2 * q * q),
        div_G,
        np.zeros_like(div_G),
        1.0 / (4 * q),
        num / (4 * w2 * q),
    )


# ---------------------------------------------------------------- classify

def _linear_terms(e: Expr, sign: float = 1.0):
    # flatten sums into (coefficient, atom) pairs; None if not a plain sum of scaled atoms
    if isinstance(e, Add):
        a, b = _linear_terms(e.left, sign), _linear_terms(e.right, sign)
        return None if a is None or b is None else a + b
    if isinstance(e, Sub):
        a, b = _linear_terms(e.left, sign), _linear_terms(e.right, -sign)
        return None if a is None or b is None else a + b
    if isinstance(e, Neg):
        return _linear_terms(e.arg, -sign)
    if isinstance(e, Mul):
        if isinstance(e.left, Const):
            return _linear_terms(e.right, sign * e.left.value)
        if isinstance(e.right, Const):
            return _linear_terms(e.left, sign * e.right.value)
        return None
    if isinstance(e, Div) and isinstance(e.right, Const) and e.right.value != 0:
        return _linear_terms(e.left, sign / e.right.value)
    if isinstance(e, Const):
        return [(sign * e.value, None)]
    return [(sign, e)]


def trig_coefficients(f: Expr) -> tuple[float, float] | None:
    """``(c1, c2)`` if ``f`` is written as ``c1 cos V + c2 sin V``, else None."""
    terms = _linear_terms(f)
    if terms is None:
        return None
    c1 = c2 = 0.0
    for c, atom in terms:
        if atom is None:
            if c != 0.0:
                return None
        elif isinstance(atom, Func) and isinstance(atom.arg, Var) and atom.name in ("cos", "sin"):
            if atom.name == "cos":
                c1 += c
            else:
                c2 += c
        else:
            return None
    if c1 == 0.0 and c2 == 0.0:
        return None
    return c1, c2


@dataclass(frozen=True)
class Classification:
    K_zero: bool
    H_zero: bool
    J_zero: bool
    Q_incompressible_I: bool
    right_helicoid: bool
    trig_form: bool
    exp_form: bool
    method: str
    grid: int
    v_range: tuple[float, float]
    tol: float

    def as_dict(self) -> dict:
        return {
            "K_zero": self.K_zero,
            "H_zero": self.H_zero,
            "J_zero": self.J_zero,
            "Q_incompressible_I": self.Q_incompressible_I,
            "right_helicoid": self.right_helicoid,
            "trig_form": self.trig_form,
            "exp_form": self.exp_form,
            "method": self.method,
            "grid": self.grid,
            "v_range": list(self.v_range),
            "tol": self.tol,
        }


def classify(
    spec: RuledSurfaceSpec, ps: PolarSupport, grid: int = 40, v_range=(-3.0, 3.0), tol: float = 1e-9
) -> Classification:
    """Predicates for vanishing ``K``, ``H``, ``J`` and ``div_I Q``.

    ``f`` is first matched structurally against ``c1 cos V + c2 sin V``;
    otherwise ``q + qddot`` is sampled on a ``grid x grid`` window.  The
    exponential form is detected by sampling ``qdot**2 - q qddot``.
    Residuals are compared against ``tol * (1 + scale)``.
    """
    helicoid = spec.is_right_helicoid(samples=grid, tol=tol)
    U, Vg = np.meshgrid(np.linspace(*spec.domain, grid), np.linspace(*v_range, grid), indexing="ij")
    VV = ps.V(U, Vg)
    q, qd, qdd = ps.f(VV), ps.fdot(VV), ps.fddot(VV)
    if trig_coefficients(ps.f) is not None:
        trig, method = True, "structural"
    else:
        trig = bool(np.max(np.abs(q + qdd)) <= tol * (1.0 + np.max(np.abs(q))))
        method = "sampled"
    expo = bool(np.max(np.abs(qd * qd - q * qdd)) <= tol * (1.0 + np.max(q * q)))
    return Classification(
        K_zero=trig,
        H_zero=trig or helicoid,
        J_zero=helicoid,
        Q_incompressible_I=expo or helicoid,
        right_helicoid=helicoid,
        trig_form=trig,
        exp_form=expo,
        method=method,
        grid=grid,
        v_range=(float(v_range[0]), float(v_range[1])),
        tol=tol,
    )
