"""First-principles recomputation of the relative invariants.

Nothing here calls the closed forms of :mod:`ruledpolar.polar` or
:mod:`ruledpolar.special`.  The oracles work from definitions only:

* the shape operator from finite differences of the relative normal and of
  the integrated surface, fitted to ``y_/i = -B_i^j x_/j``;
* the Darboux tensor ``A_ijk = q^-1 <xi, D_k D_j x_/i>`` with covariant
  derivatives of the metric ``G_ij = <xi, x_/ij> / q``, whose Christoffel
  symbols come from finite differences of ``G``; the position jets
  ``x_/ij``, ``x_/ijk`` follow exactly from the frame equations;
* the curvature of ``G`` from second differences of ``G``;
* curvature and torsion of a sampled space curve by the general
  (non-unit-speed) Frenet formulas.

Residual reports compare closed forms against these paths point by point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .expr import Const, Expr, differentiate
from .relative import (
    Q_MIN,
    SupportFunction,
    VectorField2,
    _pair,
    field_calculus,
    general_fields,
    relative_metric,
    relative_normal_general,
)
from .surface import RuledSurfaceSpec

__all__ = [
    "FDJet",
    "fd_jet",
    "PositionJets",
    "ShapeFit",
    "numeric_shape_operator",
    "christoffel",
    "metric_scalar_curvature",
    "DarbouxResult",
    "darboux_pick",
    "numeric_metric",
    "numeric_scalar_curvature",
    "fd_weights",
    "frenet_invariants",
    "frenet_at",
    "g_gradient",
    "ReportRow",
    "ResidualReport",
    "residual_report",
    "TOLERANCES",
    "QUANTITIES",
    "local_scale",
]


# ----------------------------------------------------------- differences

class FDJet(NamedTuple):
    du: np.ndarray | None = None
    dv: np.ndarray | None = None
    duu: np.ndarray | None = None
    duv: np.ndarray | None = None
    dvv: np.ndarray | None = None


def _bcast(h, val):
    h = np.asarray(h, float)
    return h.reshape(h.shape + (1,) * (np.ndim(val) - h.ndim))


def fd_jet(f: Callable, u, v, order: int = 1, h: float | None = None, scale=1.0) -> FDJet:
    """Central-difference partials of ``f(u, v)`` with one Richardson step.

    ``order=1`` gives ``(du, dv)`` with ``h = 1e-4 (1 + |coordinate|)``;
    ``order=2`` additionally gives ``(duu, duv, dvv)`` with
    ``h = 1e-3 (1 + |coordinate|)``.  ``f`` may return arrays with trailing
    axes; leading axes broadcast with ``u`` and ``v``.  ``scale`` (scalar or
    per point) shrinks the step where ``f`` varies on short lengths.
    """
    u, v = _pair(u, v)
    base = 1e-4 if order == 1 else 1e-3
    base = (base if h is None else h) * np.asarray(scale, float)
    hu0 = base * (1.0 + np.abs(u))
    hv0 = base * (1.0 + np.abs(v))

    def first(hu, hv):
        fu = f(u + hu, v) - f(u - hu, v)
        fv = f(u, v + hv) - f(u, v - hv)
        return fu / (2 * _bcast(hu, fu)), fv / (2 * _bcast(hv, fv))

    def second(hu, hv):
        f0 = f(u, v)
        fuu = (f(u + hu, v) - 2 * f0 + f(u - hu, v)) / _bcast(hu, f0) ** 2
        fvv = (f(u, v + hv) - 2 * f0 + f(u, v - hv)) / _bcast(hv, f0) ** 2
        fuv = (f(u + hu, v + hv) - f(u + hu, v - hv) - f(u - hu, v + hv) + f(u - hu, v - hv)) / (
            4 * _bcast(hu, f0) * _bcast(hv, f0)
        )
        return fuu, fuv, fvv

    def rich(a, b):
        return (4.0 * b - a) / 3.0

    d1 = first(hu0, hv0)
    d2 = first(hu0 / 2, hv0 / 2)
    du, dv = rich(d1[0], d2[0]), rich(d1[1], d2[1])
    if order == 1:
        return FDJet(du, dv)
    if order != 2:
        raise ValueError("order must be 1 or 2")
    s1 = second(hu0, hv0)
    s2 = second(hu0 / 2, hv0 / 2)
    return FDJet(du, dv, *(rich(a, b) for a, b in zip(s1, s2)))


def g_gradient(Ginv, du, dv):
    """Raise a gradient ``(du, dv)`` with the inverse metric ``Ginv (..., 2, 2)``."""
    grad = np.stack([du, dv], -1)
    return np.einsum("...ij,...j->...i", Ginv, grad)


# -------------------------------------------------------- shape operator

class ShapeFit(NamedTuple):
    B: np.ndarray  # (..., 2, 2), B[i, j] = B_i^j
    K: np.ndarray
    H: np.ndarray
    residual: np.ndarray  # (..., 2): |y_/i + B_i^j x_/j|
    y_norm: np.ndarray  # (..., 2): |y_/i|
    det_xxy: np.ndarray  # det[x_/1, x_/2, y]


def numeric_shape_operator(spec: RuledSurfaceSpec, q: SupportFunction, u, v, frames=None, scale=1.0) -> ShapeFit:
    """Least-squares shape operator from differences of ``y`` and ``x``."""
    frames = spec.frames if frames is None else frames
    u, v = _pair(u, v)
    y = lambda a, b: relative_normal_general(spec, q, a, b, frames)  # noqa: E731
    yj = fd_jet(y, u, v, scale=scale)
    xj = fd_jet(frames.position, u, v, scale=scale)
    M = np.stack([xj.du, xj.dv], -1)  # (..., 3, 2)
    MtM = np.einsum("...ki,...kj->...ij", M, M)
    B = np.empty(u.shape + (2, 2))
    res = np.empty(u.shape + (2,))
    ynorm = np.empty(u.shape + (2,))
    for i, yi in enumerate((yj.du, yj.dv)):
        rhs = np.einsum("...ki,...k->...i", M, -yi)
        b = np.linalg.solve(MtM, rhs[..., None])[..., 0]
        B[..., i, :] = b
        fit = yi + np.einsum("...kj,...j->...k", M, b)
        res[..., i] = np.linalg.norm(fit, axis=-1)
        ynorm[..., i] = np.linalg.norm(yi, axis=-1)
    K = B[..., 0, 0] * B[..., 1, 1] - B[..., 0, 1] * B[..., 1, 0]
    H = 0.5 * (B[..., 0, 0] + B[..., 1, 1])
    det = np.linalg.det(np.stack([xj.du, xj.dv, y(u, v)], -2))
    return ShapeFit(B, K, H, res, ynorm, det)


# ----------------------------------------------------- exact position jets

def _dframe(t, kappa: Expr):
    # derivative of a e + b n + c z along u, expressed in the frame again
    a, b, c = t
    return (
        differentiate(a) - b,
        differentiate(b) + a - kappa * c,
        differentiate(c) + kappa * b,
    )


class PositionJets:
    """Partial derivatives of ``x = s + v e`` up to third order, in frame components.

    Built symbolically from ``e' = n, n' = -e + kappa z, z' = -kappa n`` and
    ``s' = delta lam e + delta z``; evaluation is exact up to rounding.
    """

    def __init__(self, spec: RuledSurfaceSpec):
        k = spec.kappa
        zero, one = Const(0.0), Const(1.0)
        s1 = (spec.delta * spec.lam, zero, spec.delta)
        s2 = _dframe(s1, k)
        s3 = _dframe(s2, k)
        e0 = (one, zero, zero)
        e1 = _dframe(e0, k)
        e2 = _dframe(e1, k)
        e3 = _dframe(e2, k)
        self._s = (None, s1, s2, s3)
        self._e = (e0, e1, e2, e3)

    @staticmethod
    def _ev(t, u):
        return np.stack([np.broadcast_to(c(u), u.shape) for c in t], -1)

    def __call__(self, u, v) -> dict:
        """Map from sorted index tuples (1 = u, 2 = v) to arrays ``(..., 3)``."""
        u, v = _pair(u, v)
        e = [self._ev(t, u) for t in self._e]
        s = [None] + [self._ev(t, u) for t in self._s[1:]]
        V = v[..., None]
        zero = np.zeros(u.shape + (3,))
        return {
            (1,): s[1] + V * e[1],
            (2,): e[0],
            (1, 1): s[2] + V * e[2],
            (1, 2): e[1],
            (2, 2): zero,
            (1, 1, 1): s[3] + V * e[3],
            (1, 1, 2): e[2],
            (1, 2, 2): zero,
            (2, 2, 2): zero,
        }


def _xi_h(jets):
    n = np.cross(jets[(1,)], jets[(2,)])
    xi = n / np.linalg.norm(n, axis=-1, keepdims=True)
    h = np.empty(xi.shape[:-1] + (2, 2))
    for i in range(2):
        for j in range(2):
            h[..., i, j] = np.einsum("...k,...k->...", xi, jets[tuple(sorted((i + 1, j + 1)))])
    return xi, h


def numeric_metric(spec: RuledSurfaceSpec, q: SupportFunction, jets: PositionJets | None = None) -> Callable:
    """``(u, v) -> G_ij`` as ``(..., 2, 2)`` from ``<xi, x_/ij> / q``."""
    jets = PositionJets(spec) if jets is None else jets

    def G(u, v):
        u, v = _pair(u, v)
        _, h = _xi_h(jets(u, v))
        return h / q.q(u, v)[..., None, None]

    return G


def christoffel(G: Callable, u, v, scale=1.0):
    """Christoffel symbols ``Gamma[..., a, i, j] = Gamma^a_ij`` of a metric field."""
    u, v = _pair(u, v)
    jet = fd_jet(G, u, v, order=1, scale=scale)
    dG = np.stack([jet.du, jet.dv], -1)  # dG[..., i, j, k] = d_k G_ij
    Gi = np.linalg.inv(G(u, v))
    # low[..., m, i, j] = 1/2 (d_i G_mj + d_j G_mi - d_m G_ij)
    low = 0.5 * (_d(dG, "mj,i") + _d(dG, "mi,j") - _d(dG, "ij,m"))
    return np.einsum("...am,...mij->...aij", Gi, low)


def _d(dG, pattern):
    # reorder dG[..., p, q, r] (= d_r G_pq) into an array indexed [..., m, i, j]
    comps, deriv = pattern.split(",")
    out = np.empty(dG.shape)
    for m in range(2):
        for i in range(2):
            for j in range(2):
                idx = {"m": m, "i": i, "j": j}
                out[..., m, i, j] = dG[..., idx[comps[0]], idx[comps[1]], idx[deriv]]
    return out


def metric_scalar_curvature(G: Callable, u, v, scale=1.0):
    """Gaussian curvature ``R_1212 / det G`` of a 2D (pseudo-)metric field.

    Equal to half the Ricci scalar.  Uses second differences of ``G`` with
    the ``order=2`` stencil.
    """
    u, v = _pair(u, v)
    g = G(u, v)
    jet = fd_jet(G, u, v, order=2, scale=scale)
    dG = np.stack([jet.du, jet.dv], -1)
    gi = np.linalg.inv(g)
    low = _d(dG, "mj,i") + _d(dG, "mi,j") - _d(dG, "ij,m")
    Gam = 0.5 * np.einsum("...am,...mij->...aij", gi, low)
    d11_22 = jet.duu[..., 1, 1]
    d22_11 = jet.dvv[..., 0, 0]
    d12_12 = jet.duv[..., 0, 1]
    quad = np.einsum("...ab,...a,...b->...", g, Gam[..., :, 0, 1], Gam[..., :, 0, 1]) - np.einsum(
        "...ab,...a,...b->...", g, Gam[..., :, 0, 0], Gam[..., :, 1, 1]
    )
    R1212 = -0.5 * (d11_22 + d22_11 - 2 * d12_12) + quad
    return R1212 / np.linalg.det(g)


class DarbouxResult(NamedTuple):
    A: np.ndarray  # (..., 2, 2, 2)
    J: np.ndarray
    T: np.ndarray  # (..., 2) Tchebychev components 1/2 A_i^{im}


def darboux_pick(
    spec: RuledSurfaceSpec, q: SupportFunction, u, v, jets: PositionJets | None = None, scale=1.0
) -> DarbouxResult:
    """Darboux tensor, Pick invariant and Tchebychev vector from definitions."""
    jets = PositionJets(spec) if jets is None else jets
    u, v = _pair(u, v)
    G = numeric_metric(spec, q, jets)
    X = jets(u, v)
    xi, h = _xi_h(X)
    qq = q.q(u, v)
    Gam = christoffel(G, u, v, scale)
    Gi = np.linalg.inv(G(u, v))
    A = np.empty(u.shape + (2, 2, 2))
    for i in range(2):
        for j in range(2):
            for k in range(2):
                t = np.einsum("...c,...c->...", xi, X[tuple(sorted((i + 1, j + 1, k + 1)))])
                for m in range(2):
                    t = t - Gam[..., m, i, j] * h[..., m, k] - Gam[..., m, j, k] * h[..., m, i] - Gam[..., m, k, i] * h[..., m, j]
                A[..., i, j, k] = t / qq
    Aup = np.einsum("...ia,...jb,...kc,...abc->...ijk", Gi, Gi, Gi, A)
    J = 0.5 * np.einsum("...ijk,...ijk->...", A, Aup)
    T = 0.5 * np.einsum("...ij,...mk,...ijk->...m", Gi, Gi, A)
    return DarbouxResult(A, J, T)


def numeric_scalar_curvature(spec: RuledSurfaceSpec, q: SupportFunction, u, v, jets: PositionJets | None = None, scale=1.0):
    """Curvature of the relative metric from second differences of ``G``."""
    return metric_scalar_curvature(numeric_metric(spec, q, jets), u, v, scale)


# --------------------------------------------------------------- curves

def fd_weights(offsets, order: int) -> np.ndarray:
    """Finite-difference weights for the ``order``-th derivative at 0 (unit spacing)."""
    x = np.asarray(offsets, float)
    n = len(x)
    Vm = np.vander(x, n, increasing=True).T
    rhs = np.zeros(n)
    rhs[order] = math.factorial(order)
    return np.linalg.solve(Vm, rhs)


def frenet_invariants(samples, spacing: float):
    """Curvature and torsion at the centre of equally spaced curve samples.

    ``samples`` is ``(m, 3)`` (or ``(m, ..., 3)``) with odd ``m >= 7``;
    returns ``(curvature, torsion)`` from ``|y' x y''| / |y'|^3`` and
    ``<y' x y'', y'''> / |y' x y''|^2``.
    """
    P = np.asarray(samples, float)
    m = P.shape[0]
    if m < 7 or m % 2 == 0:
        raise ValueError("need an odd number (>= 7) of samples")
    off = np.arange(m) - m // 2
    d = [np.tensordot(fd_weights(off, k), P, axes=(0, 0)) / spacing**k for k in (1, 2, 3)]
    c = np.cross(d[0], d[1])
    nc = np.linalg.norm(c, axis=-1)
    n1 = np.linalg.norm(d[0], axis=-1)
    if np.any(n1 < 1e-8) or np.any(nc < 1e-8):
        raise ValueError("curve is irregular or has an inflection at the sample centre")
    return nc / n1**3, np.einsum("...i,...i->...", c, d[2]) / nc**2


def frenet_at(curve: Callable, t, h: float = 1e-2, points: int = 9):
    """Sample ``curve`` on ``points`` nodes around ``t`` and apply :func:`frenet_invariants`."""
    t = np.asarray(t, float)
    off = np.arange(points) - points // 2
    P = np.stack([curve(t + k * h) for k in off], 0)
    return frenet_invariants(P, h)


# -------------------------------------------------------------- reports

TOLERANCES = {
    "B": 1e-5,
    "K": 1e-5,
    "H": 1e-5,
    "J": 1e-4,
    "J_EUK": 1e-4,
    "S": 5e-3,
    "T": 1e-4,
    "Q": 1e-6,
    "tau": 1e-6,
    "potential": 1e-6,
    "div_curl": 1e-6,
    "curl_G": 1e-6,
    "identity_136": 1e-8,
    "rank_fit": 1e-6,
    "rank_det": 1e-7,
}


@dataclass(frozen=True)
class ReportRow:
    i: int
    j: int
    u: float
    v: float
    quantity: str
    closed: float
    oracle: float
    abs_err: float
    rel_err: float
    tol: float
    status: str  # pass | fail | inconclusive
    note: str = ""

    def as_dict(self) -> dict:
        return {
            "i": self.i,
            "j": self.j,
            "u": self.u,
            "v": self.v,
            "quantity": self.quantity,
            "closed": self.closed,
            "oracle": self.oracle,
            "abs_err": self.abs_err,
            "rel_err": self.rel_err,
            "tol": self.tol,
            "status": self.status,
            "note": self.note,
        }


@dataclass
class ResidualReport:
    rows: list[ReportRow] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def counts(self) -> dict:
        c = {"passed": 0, "failed": 0, "inconclusive": 0}
        key = {"pass": "passed", "fail": "failed", "inconclusive": "inconclusive"}
        for r in self.rows:
            c[key[r.status]] += 1
        return c

    @property
    def ok(self) -> bool:
        return self.counts["failed"] == 0

    def failures(self) -> list[ReportRow]:
        return [r for r in self.rows if r.status == "fail"]

    def summary(self) -> str:
        c = self.counts
        return f"{c['passed']}/{c['failed']}/{c['inconclusive']}"

    def as_dict(self) -> dict:
        return {
            "meta": self.meta,
            "summary": self.counts,
            "ok": self.ok,
            "rows": [r.as_dict() for r in self.rows],
        }


def _fl(x):
    x = float(x)
    return x if math.isfinite(x) else None


# (name, tolerance key); the order is the row order within each point
QUANTITIES = [
    ("B", "B"), ("K", "K"), ("H", "H"), ("J", "J"), ("J_EUK", "J_EUK"), ("S", "S"),
    ("identity_136", "identity_136"),
    ("T", "T"), ("divI_T", "div_curl"), ("curlI_T", "div_curl"), ("divG_T", "div_curl"),
    ("curlG_T", "curl_G"), ("tau", "tau"),
    ("Q", "Q"), ("divI_Q", "div_curl"), ("curlI_Q", "div_curl"), ("divG_Q", "div_curl"),
    ("curlG_Q", "curl_G"), ("potential", "potential"),
    ("rank_fit", "rank_fit"), ("rank_det", "rank_det"),
]


def local_scale(q: SupportFunction, u, v, floor: float = 1e-3):
    """Step-size factor ``min(1, |q| / |grad q|)``, clipped below at ``floor``."""
    qq, qu, qv = q.values(u, v, check=False)
    g = np.hypot(qu, qv)
    with np.errstate(divide="ignore", invalid="ignore"):
        ell = np.where(g > 0, np.abs(qq) / np.where(g > 0, g, 1.0), 1.0)
    return np.clip(ell, floor, 1.0)


def _fd_field(X: Callable, scale) -> VectorField2:
    def jac(u, v):
        jet = fd_jet(X, u, v, scale=scale)
        return np.stack([jet.du, jet.dv], -1)

    return VectorField2(X, jac)


def _evaluate(spec, ps, q, euclid, jets, u, v, corrupt) -> dict:
    """Closed form, oracle and error denominator per quantity on flat arrays."""
    from .polar import polar_pick_scalar, polar_shape_and_curvatures, polar_support_vector, polar_tchebychev

    c = lambda name, x: np.asarray(x, float) * corrupt.get(name, 1.0)  # noqa: E731
    sc = local_scale(q, u, v)
    sh = polar_shape_and_curvatures(spec, ps, u, v)
    pk = polar_pick_scalar(spec, ps, u, v)
    tc = polar_tchebychev(spec, ps, u, v)
    sv = polar_support_vector(spec, ps, u, v)
    out = {}

    fit = numeric_shape_operator(spec, q, u, v, scale=sc)
    B = c("B", sh.B)
    out["B"] = (B, fit.B, 1.0 + np.max(np.abs(B), axis=(-2, -1)))
    K, H = c("K", sh.K), c("H", sh.H)
    out["K"] = (K, fit.K, 1.0 + np.abs(K))
    out["H"] = (H, fit.H, 1.0 + np.abs(H))

    db = darboux_pick(spec, q, u, v, jets, sc)
    J, JE, S = c("J", pk.J), c("J_EUK", pk.J_EUK), c("S", pk.S)
    out["J"] = (J, db.J, 1.0 + np.abs(J))
    out["J_EUK"] = (JE, darboux_pick(spec, euclid, u, v, jets).J, 1.0 + np.abs(JE))
    out["S"] = (S, numeric_scalar_curvature(spec, q, u, v, jets, sc), 1.0 + np.abs(S))
    out["identity_136"] = (3 * H - J - 3 * S, np.zeros_like(J), 1.0 + np.abs(J))

    m = relative_metric(spec, q, u, v)[1].matrix()
    Tc = c("T", tc.T)
    out["T"] = (Tc, db.T, 1.0 + np.max(np.abs(Tc), -1))
    fcT = field_calculus(spec, q, _fd_field(lambda a, b: general_fields(spec, q, a, b)[0], sc), u, v)
    for key, closed, oracle in (("divI_T", tc.div_I, fcT.div_I), ("curlI_T", tc.curl_I, fcT.curl_I),
                                ("divG_T", tc.div_G, fcT.div_G)):
        closed = c(key, closed)
        out[key] = (closed, oracle, 1.0 + np.abs(closed))
    # rotation is a difference of terms the size of the divergence
    out["curlG_T"] = (c("curlG_T", tc.curl_G), fcT.curl_G, 1.0 + np.abs(fcT.div_G))
    tj = fd_jet(lambda a, b: polar_tchebychev(spec, ps, a, b).tau, u, v, scale=sc)
    out["tau"] = (Tc, g_gradient(m, tj.du, tj.dv), 1.0 + np.max(np.abs(Tc), -1))

    Qc = c("Q", sv.Q)
    Gn = numeric_metric(spec, q, jets)(u, v)
    iq = fd_jet(lambda a, b: 1.0 / q.q(a, b), u, v, scale=sc)
    out["Q"] = (Qc, 0.25 * g_gradient(np.linalg.inv(Gn), iq.du, iq.dv), 1.0 + np.max(np.abs(Qc), -1))
    fcQ = field_calculus(spec, q, _fd_field(lambda a, b: general_fields(spec, q, a, b)[1], sc), u, v)
    for key, closed, oracle in (("divI_Q", sv.div_I, fcQ.div_I), ("curlI_Q", sv.curl_I, fcQ.curl_I),
                                ("divG_Q", sv.div_G, fcQ.div_G)):
        closed = c(key, closed)
        out[key] = (closed, oracle, 1.0 + np.abs(closed))
    out["curlG_Q"] = (c("curlG_Q", sv.curl_G), fcQ.curl_G, 1.0 + np.abs(fcQ.div_G))
    pj = fd_jet(lambda a, b: polar_support_vector(spec, ps, a, b).potential, u, v, scale=sc)
    out["potential"] = (Qc, g_gradient(m, pj.du, pj.dv), 1.0 + np.max(np.abs(Qc), -1))

    resid = np.max(fit.residual / (1.0 + fit.y_norm), -1)
    out["rank_fit"] = (np.zeros_like(resid), resid, np.ones_like(resid))
    d = spec.delta(u)
    wq = np.sqrt(d * d + v * v) * q.q(u, v)
    out["rank_det"] = (wq, fit.det_xxy, 1.0 + np.abs(wq))
    return out


def residual_report(
    spec: RuledSurfaceSpec,
    ps,
    grid,
    tol_scale: float = 1.0,
    corrupt: dict | None = None,
    tolerances: dict | None = None,
) -> ResidualReport:
    """Closed form versus oracle, one row per point and quantity.

    ``grid`` is ``(u_values, v_values)``, in which case every ``(u_i, v_j)``
    is checked, or a pair of equally shaped 2D arrays of explicit points.
    ``tolerances`` overrides entries of :data:`TOLERANCES` before scaling.
    ``corrupt`` multiplies named closed-form quantities (negative controls).
    Where ``|q| < 10 q_min`` the difference stencils straddle the zero of
    ``q``; oracle rows there are marked inconclusive and only the closed-form
    identity row is binding.
    Errors are ``max |closed - oracle|`` over components divided by
    ``1 + |closed|``, except that rotations ``curl_G`` are measured against
    ``1 + |div_G|`` and the ``rank_fit`` residual is already relative.
    Evaluation errors become failing rows; the sweep always completes.
    """
    from .relative import make_support

    corrupt = dict(corrupt or {})
    us, vs = (np.atleast_1d(np.asarray(g, float)) for g in grid)
    if us.ndim == 2 and us.shape == vs.shape:
        U, V = us.ravel(), vs.ravel()
        shape = us.shape
    else:
        U, V = (a.ravel() for a in np.meshgrid(us, vs, indexing="ij"))
        shape = (len(us), len(vs))
    unknown = set(tolerances or {}) - set(TOLERANCES)
    if unknown:
        raise ValueError(f"unknown tolerance keys {sorted(unknown)}")
    q = ps.support_function()
    euclid = make_support("euclidean", spec)
    jets = PositionJets(spec)
    tols = {k: t * tol_scale for k, t in {**TOLERANCES, **(tolerances or {})}.items()}
    report = ResidualReport(meta={
        "surface": {"delta": str(spec.delta), "kappa": str(spec.kappa), "lam": str(spec.lam),
                    "domain": [float(a) for a in spec.domain], "u0": spec.u0},
        "support": str(ps.f),
        "grid": list(shape),
        "tol_scale": tol_scale,
        "tolerances": tols,
        "corrupt": corrupt,
    })
    with np.errstate(all="ignore"):
        try:
            blocks = [(np.arange(U.size), _evaluate(spec, ps, q, euclid, jets, U, V, corrupt), None)]
        except Exception:  # noqa: BLE001 - retry point by point to localise
            blocks = []
            for k in range(U.size):
                try:
                    blocks.append(([k], _evaluate(spec, ps, q, euclid, jets, U[k:k + 1], V[k:k + 1], corrupt), None))
                except Exception as exc:  # noqa: BLE001
                    blocks.append(([k], None, f"{type(exc).__name__}: {exc}"))
        small = np.zeros(U.shape, bool)
        for k in range(U.size):
            try:
                small[k] = abs(float(q.q(U[k], V[k]))) < 10 * Q_MIN
            except Exception:  # noqa: BLE001 - reported through the failing rows
                pass

    rows = {}
    for idx, res, err in blocks:
        for pos, k in enumerate(idx):
            i, j = divmod(int(k), shape[1])
            for name, tkey in QUANTITIES:
                tol = tols[tkey]
                if res is None:
                    rows[(k, name)] = ReportRow(i, j, float(U[k]), float(V[k]), name, None, None, None, None,
                                                tol, "fail", err)
                    continue
                closed, oracle, denom = (np.asarray(a)[pos] for a in res[name])
                abs_err = float(np.max(np.abs(closed - oracle)))
                rel = abs_err / float(denom)
                note = ""
                if small[k] and name != "identity_136":
                    status, note = "inconclusive", "|q| below 10*q_min"
                else:
                    status = "pass" if math.isfinite(rel) and rel <= tol else "fail"
                cv = float(np.linalg.norm(closed)) if np.ndim(closed) else float(closed)
                ov = float(np.linalg.norm(oracle)) if np.ndim(oracle) else float(oracle)
                rows[(k, name)] = ReportRow(i, j, float(U[k]), float(V[k]), name, _fl(cv), _fl(ov),
                                            _fl(abs_err), _fl(rel), tol, status, note)
    report.rows = [rows[(k, name)] for k in range(U.size) for name, _ in QUANTITIES]
    return report
