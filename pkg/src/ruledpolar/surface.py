"""Skew ruled surfaces in standard parameters.

A surface is fixed, up to a rigid motion, by its distribution parameter
``delta(u)``, conical curvature ``kappa(u)`` and ``lam(u) = cot(striction)``.
The moving frame ``(e, n, z)`` and the striction curve ``s`` are obtained by
integrating

    e' = n,   n' = -e + kappa z,   z' = -kappa n,   s' = delta lam e + delta z

and the surface is ``x(u, v) = s(u) + v e(u)``.

Everything that only needs the invariants (fundamental forms, curvatures,
all relative invariants downstream) is evaluated in closed form without
touching the integrated frame.  Inputs ``u`` and ``v`` may be scalars or
broadcastable numpy arrays throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .expr import Antiderivative, Expr, ExprDomainError, as_expr, differentiate

__all__ = [
    "RuledSurfaceSpec",
    "SurfaceError",
    "Coefficients",
    "FramePath",
    "SurfaceJet",
    "SymTensor2",
    "integrate_frame",
    "surface_jet",
    "fundamental_forms",
    "euclidean_curvatures",
    "frame_to_coordinates",
    "coordinates_to_frame",
    "frame_to_world",
]

DELTA_MIN = 1e-8


class SurfaceError(ValueError):
    """Invalid surface data or a failed frame integration."""


class Coefficients(NamedTuple):
    """Invariants and their u-derivatives evaluated at some ``u``."""

    delta: np.ndarray
    ddelta: np.ndarray
    dddelta: np.ndarray
    kappa: np.ndarray
    dkappa: np.ndarray
    lam: np.ndarray
    dlam: np.ndarray
    kappa_int: np.ndarray


@dataclass(frozen=True, eq=False)
class RuledSurfaceSpec:
    """Fundamental invariants of a skew ruled surface plus initial data.

    ``delta``, ``kappa`` and ``lam`` accept expressions or expression text
    in ``u``.  ``u0`` defaults to the left end of ``domain``; the initial
    frame defaults to the standard basis and the initial striction point to
    the origin.
    """

    delta: Expr
    kappa: Expr
    lam: Expr
    domain: tuple[float, float]
    u0: float | None = None
    frame0: np.ndarray | None = None
    s0: np.ndarray | None = None
    name: str = ""

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "delta", as_expr(self.delta))
        set_(self, "kappa", as_expr(self.kappa))
        set_(self, "lam", as_expr(self.lam))
        a, b = (float(t) for t in self.domain)
        if not (math.isfinite(a) and math.isfinite(b) and b > a):
            raise SurfaceError(f"invalid domain {self.domain!r}")
        set_(self, "domain", (a, b))
        u0 = a if self.u0 is None else float(self.u0)
        if not a <= u0 <= b:
            raise SurfaceError("u0 must lie in the domain")
        set_(self, "u0", u0)
        F0 = np.eye(3) if self.frame0 is None else np.array(self.frame0, dtype=float)
        if F0.shape != (3, 3):
            raise SurfaceError("frame0 must be a 3x3 array with rows e, n, z")
        if np.max(np.abs(F0 @ F0.T - np.eye(3))) > 1e-12:
            raise SurfaceError("initial frame is not orthonormal within 1e-12")
        if np.linalg.det(F0) < 0:
            raise SurfaceError("initial frame is not right-handed")
        set_(self, "frame0", F0)
        s0 = np.zeros(3) if self.s0 is None else np.array(self.s0, dtype=float).reshape(3)
        set_(self, "s0", s0)
        F0.setflags(write=False)
        s0.setflags(write=False)

        samples = np.linspace(a, b, 10_000)
        try:
            d = self.delta(samples)
            self.kappa(samples)
            self.lam(samples)
        except ExprDomainError as exc:
            raise SurfaceError(f"invariants not finite on the domain: {exc}") from None
        if np.min(np.abs(d)) < DELTA_MIN or np.any(np.sign(d[1:]) != np.sign(d[:-1])):
            raise SurfaceError("delta vanishes on the domain; the surface is not skew")

    # exact derivatives, built once
    @cached_property
    def ddelta(self) -> Expr:
        return differentiate(self.delta)

    @cached_property
    def dddelta(self) -> Expr:
        return differentiate(self.ddelta)

    @cached_property
    def dkappa(self) -> Expr:
        return differentiate(self.kappa)

    @cached_property
    def dlam(self) -> Expr:
        return differentiate(self.lam)

    @cached_property
    def cached_range(self) -> tuple[float, float]:
        """Domain padded so finite-difference stencils near the ends stay valid."""
        a, b = self.domain
        pad = 0.05 * (1.0 + max(abs(a), abs(b)))
        return a - pad, b + pad

    @cached_property
    def kappa_integral(self) -> Antiderivative:
        lo, hi = self.cached_range
        return Antiderivative(self.kappa, lo, hi, u0=self.u0)

    @cached_property
    def frames(self) -> FramePath:
        return integrate_frame(self)

    def coefficients(self, u) -> Coefficients:
        return Coefficients(
            self.delta(u),
            self.ddelta(u),
            self.dddelta(u),
            self.kappa(u),
            self.dkappa(u),
            self.lam(u),
            self.dlam(u),
            self.kappa_integral(u),
        )

    def is_right_helicoid(self, samples: int = 40, tol: float = 1e-9) -> bool:
        """delta constant and kappa = lam = 0 on a uniform sample of the domain."""
        u = np.linspace(*self.domain, samples)
        return bool(
            np.max(np.abs(self.ddelta(u))) <= tol
            and np.max(np.abs(self.kappa(u))) <= tol
            and np.max(np.abs(self.lam(u))) <= tol
        )


# ------------------------------------------------------------------ frames

def _rhs(F, s, kappa, delta, lam):
    # F has rows e, n, z (leading axes allowed)
    e, n, z = F[..., 0, :], F[..., 1, :], F[..., 2, :]
    k = kappa[..., None]
    dF = np.stack([n, -e + k * z, -k * n], axis=-2)
    ds = (delta * lam)[..., None] * e + delta[..., None] * z
    return dF, ds


def _rk4_step(F, s, h, c0, c1, c2):
    # c0, c1, c2: (kappa, delta, lam) at t, t + h/2, t + h
    hh = h[..., None, None] if np.ndim(h) else h
    hs = h[..., None] if np.ndim(h) else h
    k1F, k1s = _rhs(F, s, *c0)
    k2F, k2s = _rhs(F + 0.5 * hh * k1F, s + 0.5 * hs * k1s, *c1)
    k3F, k3s = _rhs(F + 0.5 * hh * k2F, s + 0.5 * hs * k2s, *c1)
    k4F, k4s = _rhs(F + hh * k3F, s + hs * k3s, *c2)
    F = F + hh / 6.0 * (k1F + 2 * k2F + 2 * k3F + k4F)
    s = s + hs / 6.0 * (k1s + 2 * k2s + 2 * k3s + k4s)
    return F, s


def _orthonormalize(F):
    e = F[0] / np.linalg.norm(F[0])
    n = F[1] - np.dot(F[1], e) * e
    n = n / np.linalg.norm(n)
    return np.stack([e, n, np.cross(e, n)])


@dataclass(frozen=True, eq=False)
class FramePath:
    """Integrated moving frame and striction curve.

    ``knots`` holds the RK4 grid, ``F`` the frames (rows e, n, z) and ``S``
    the striction points.  Values between knots come from one classical RK4
    step out of the nearest knot, which keeps the path smooth to roughly
    machine precision (finite differences of it are meaningful).
    ``max_drift`` is the largest orthonormality defect removed by the
    per-step Gram-Schmidt correction.
    """

    spec: RuledSurfaceSpec
    knots: np.ndarray
    F: np.ndarray
    S: np.ndarray
    max_drift: float

    def _locate(self, u):
        lo, hi = self.knots[0], self.knots[-1]
        tol = 1e-12 * (1.0 + max(abs(lo), abs(hi)))
        if np.any(u < lo - tol) or np.any(u > hi + tol):
            raise ExprDomainError(f"u outside the integrated range [{lo}, {hi}]")
        idx = np.clip(np.searchsorted(self.knots, u), 1, len(self.knots) - 1)
        left, right = self.knots[idx - 1], self.knots[idx]
        return np.where(u - left <= right - u, idx - 1, idx)

    def at(self, u):
        """Return ``(F, s)``: frame rows ``(..., 3, 3)`` and striction ``(..., 3)``."""
        arr = np.asarray(u, dtype=float)
        flat = arr.ravel()
        k = self._locate(flat)
        t0 = self.knots[k]
        h = flat - t0
        sp = self.spec

        def coeffs(t):
            return sp.kappa(t), sp.delta(t), sp.lam(t)

        F, s = _rk4_step(self.F[k], self.S[k], h, coeffs(t0), coeffs(t0 + 0.5 * h), coeffs(flat))
        F = F.reshape(arr.shape + (3, 3))
        s = s.reshape(arr.shape + (3,))
        return F, s

    def e(self, u):
        return self.at(u)[0][..., 0, :]

    def n(self, u):
        return self.at(u)[0][..., 1, :]

    def z(self, u):
        return self.at(u)[0][..., 2, :]

    def s(self, u):
        return self.at(u)[1]

    def position(self, u, v):
        """``x(u, v) = s(u) + v e(u)`` as world coordinates."""
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        F, s = self.at(u)
        return s + v[..., None] * F[..., 0, :]


def integrate_frame(spec: RuledSurfaceSpec, step: float | None = None) -> FramePath:
    """Integrate the frame equations over ``spec.cached_range``.

    Fixed-step classical RK4 from ``u0`` in both directions, Gram-Schmidt
    after every step.  The default step is ``min(1e-3 * |I|, 2e-3)``.
    """
    a, b = spec.domain
    lo, hi = spec.cached_range
    h = min(1e-3 * (b - a), 2e-3) if step is None else float(step)
    if not h > 0:
        raise SurfaceError("step must be positive")

    def grid(start, end):
        n = max(1, int(math.ceil(abs(end - start) / h)))
        return np.linspace(start, end, n + 1)

    fwd = grid(spec.u0, hi)
    bwd = grid(spec.u0, lo)

    def march(ts):
        hs = np.diff(ts)
        mids = ts[:-1] + 0.5 * hs
        try:
            kt, dt, lt = spec.kappa(ts), spec.delta(ts), spec.lam(ts)
            km, dm, lm = spec.kappa(mids), spec.delta(mids), spec.lam(mids)
        except ExprDomainError as exc:
            raise SurfaceError(f"frame integration failed: {exc}") from None
        F = np.empty((len(ts), 3, 3))
        S = np.empty((len(ts), 3))
        F[0], S[0] = spec.frame0, spec.s0
        drift = 0.0
        for i, hi_ in enumerate(hs):
            Fi, Si = _rk4_step(
                F[i], S[i], hi_,
                (kt[i], dt[i], lt[i]), (km[i], dm[i], lm[i]), (kt[i + 1], dt[i + 1], lt[i + 1]),
            )
            drift = max(drift, float(np.max(np.abs(Fi @ Fi.T - np.eye(3)))))
            F[i + 1] = _orthonormalize(Fi)
            S[i + 1] = Si
        if not (np.all(np.isfinite(F)) and np.all(np.isfinite(S))):
            raise SurfaceError("frame integration produced non-finite values")
        return F, S, drift

    Ff, Sf, df = march(fwd)
    Fb, Sb, db = march(bwd)
    knots = np.concatenate([bwd[:0:-1], fwd])
    F = np.concatenate([Fb[:0:-1], Ff])
    S = np.concatenate([Sb[:0:-1], Sf])
    for arr in (knots, F, S):
        arr.setflags(write=False)
    return FramePath(spec, knots, F, S, max(df, db))


# -------------------------------------------------------------- pointwise

@dataclass(frozen=True)
class SymTensor2:
    """Symmetric 2x2 tensor ``[[a11, a12], [a12, a22]]`` (array entries allowed)."""

    a11: np.ndarray
    a12: np.ndarray
    a22: np.ndarray

    @property
    def det(self):
        return self.a11 * self.a22 - self.a12 * self.a12

    @property
    def trace(self):
        return self.a11 + self.a22

    def matrix(self) -> np.ndarray:
        a11, a12, a22 = np.broadcast_arrays(self.a11, self.a12, self.a22)
        return np.stack([np.stack([a11, a12], -1), np.stack([a12, a22], -1)], -2)

    @classmethod
    def from_matrix(cls, M) -> SymTensor2:
        M = np.asarray(M, float)
        return cls(M[..., 0, 0], 0.5 * (M[..., 0, 1] + M[..., 1, 0]), M[..., 1, 1])


@dataclass(frozen=True)
class SurfaceJet:
    x: np.ndarray
    x_u: np.ndarray
    x_v: np.ndarray
    xi: np.ndarray
    w: np.ndarray


def frame_to_world(F, coeffs):
    """Combine frame rows ``F[..., (e, n, z), :]`` with coefficients ``(..., 3)``."""
    return np.einsum("...i,...ij->...j", np.asarray(coeffs, float), F)


def surface_jet(spec: RuledSurfaceSpec, u, v, frames: FramePath | None = None) -> SurfaceJet:
    """Position, tangent vectors and unit normal at ``(u, v)``."""
    frames = spec.frames if frames is None else frames
    u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
    d, lam = spec.delta(u), spec.lam(u)
    w = np.sqrt(d * d + v * v)
    F, s = frames.at(u)
    e, n, z = F[..., 0, :], F[..., 1, :], F[..., 2, :]
    V = v[..., None]
    x = s + V * e
    x_u = (d * lam)[..., None] * e + V * n + d[..., None] * z
    xi = (d[..., None] * n - V * z) / w[..., None]
    return SurfaceJet(x, x_u, e.copy(), xi, w)


def fundamental_forms(spec: RuledSurfaceSpec, u, v) -> tuple[SymTensor2, SymTensor2]:
    """First and second fundamental forms ``(g, h)``."""
    u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
    d, dd, k, lam = spec.delta(u), spec.ddelta(u), spec.kappa(u), spec.lam(u)
    w2 = d * d + v * v
    w = np.sqrt(w2)
    g = SymTensor2(w2 + d * d * lam * lam, d * lam, np.ones_like(w))
    h = SymTensor2(-(k * w2 + dd * v - d * d * lam) / w, d / w, np.zeros_like(w))
    return g, h


def euclidean_curvatures(spec: RuledSurfaceSpec, u, v):
    """Gaussian and mean curvature ``(K~, H~)``."""
    u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
    d, dd, k, lam = spec.delta(u), spec.ddelta(u), spec.kappa(u), spec.lam(u)
    w2 = d * d + v * v
    K = -d * d / (w2 * w2)
    H = -(k * w2 + dd * v + d * d * lam) / (2.0 * w2 * np.sqrt(w2))
    return K, H


def coordinates_to_frame(spec: RuledSurfaceSpec, u, v, X1, X2) -> np.ndarray:
    """Frame components ``(e, n, z)`` of the tangent vector ``X1 x_u + X2 x_v``."""
    u, v, X1, X2 = np.broadcast_arrays(*(np.asarray(t, float) for t in (u, v, X1, X2)))
    d, lam = spec.delta(u), spec.lam(u)
    return np.stack([X1 * d * lam + X2, X1 * v, X1 * d], axis=-1)


def frame_to_coordinates(spec: RuledSurfaceSpec, u, v, c) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`coordinates_to_frame` for tangent vectors.

    The n and z components of a tangent vector are proportional to
    ``(v, delta)``; the coordinate ``X1`` is recovered from that pair by
    least squares, ``X2`` from the e component.
    """
    c = np.asarray(c, float)
    u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
    d, lam = spec.delta(u), spec.lam(u)
    X1 = (c[..., 1] * v + c[..., 2] * d) / (v * v + d * d)
    X2 = c[..., 0] - X1 * d * lam
    return X1, X2
