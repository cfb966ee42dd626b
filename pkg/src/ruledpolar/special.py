"""The polar normalization ``q = c1 cos V + c2 sin V``.

Both relative curvatures vanish for this family and the relative image
collapses to a curve: ``y`` depends on ``u`` only,

    y(u) = A(u) n(u) - B(u) z(u),
    A = c1 cos(F) - c2 sin(F),   B = c2 cos(F) + c1 sin(F),   F = int kappa du,

with curvature ``1/|A|`` and torsion ``-kappa/A``.  The ratio of the two
is ``+-1/kappa``, so the image curve has constant slope exactly when the
surface does.

These forms use ``cos(arctan(v/delta)) = delta/w`` and so hold as written
for ``delta > 0``.  For ``delta < 0`` the image curve is ``-(A n - B z)``
and its torsion changes sign; :func:`gamma_star` carries the factor
``sign(delta)``, and :func:`special_fields` falls back to the general
polar closed forms.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .expr import parse
from .polar import PolarSupport, polar_pick_scalar, polar_support_vector, polar_tchebychev
from .relative import Q_MIN, _check_support, _pair
from .surface import RuledSurfaceSpec, coordinates_to_frame, frame_to_world

__all__ = ["SpecialPolar", "GammaStar", "SpecialFields", "DegenerateCurveError", "gamma_star", "special_fields"]


class DegenerateCurveError(ValueError):
    """The image curve is singular (``A = 0``) at the requested parameter."""


@dataclass(frozen=True, eq=False)
class SpecialPolar:
    spec: RuledSurfaceSpec
    c1: float
    c2: float

    def __post_init__(self):
        c1, c2 = float(self.c1), float(self.c2)
        if not c1 * c1 + c2 * c2 > 0:
            raise ValueError("c1 and c2 must not both vanish")
        object.__setattr__(self, "c1", c1)
        object.__setattr__(self, "c2", c2)

    @cached_property
    def polar(self) -> PolarSupport:
        return PolarSupport(self.spec, parse(f"{self.c1!r}*cos(V) + {self.c2!r}*sin(V)", var="V"))

    def AB(self, u):
        F = self.spec.kappa_integral(u)
        c, s = np.cos(F), np.sin(F)
        return self.c1 * c - self.c2 * s, self.c2 * c + self.c1 * s

    def curve(self, u, frames=None):
        """Points ``y(u)`` of the image curve in world coordinates."""
        frames = self.spec.frames if frames is None else frames
        u = np.asarray(u, float)
        A, B = self.AB(u)
        sgn = np.sign(self.spec.delta(u))
        F, _ = frames.at(u)
        return frame_to_world(F, sgn[..., None] * np.stack([np.zeros_like(A), A, -B], -1))


class GammaStar(NamedTuple):
    y: np.ndarray
    kappa_star: np.ndarray
    sigma_star: np.ndarray
    slope_ratio: np.ndarray  # nan where kappa = 0


def gamma_star(sp: SpecialPolar, u, frames=None) -> GammaStar:
    """Image curve point, its curvature, torsion and curvature/torsion ratio."""
    u = np.asarray(u, float)
    A, _ = sp.AB(u)
    if np.any(np.abs(A) < Q_MIN):
        raise DegenerateCurveError("c1 cos(F) - c2 sin(F) vanishes; the image curve is singular there")
    k = sp.spec.kappa(u)
    kappa_star = 1.0 / np.abs(A)
    sigma_star = -np.sign(sp.spec.delta(u)) * k / A
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(k == 0.0, np.nan, kappa_star / np.where(k == 0.0, 1.0, sigma_star))
    if ratio.ndim == 0:
        ratio = np.float64(ratio)
    return GammaStar(sp.curve(u, frames), kappa_star, sigma_star, ratio)


class SpecialFields(NamedTuple):
    J: np.ndarray
    T: np.ndarray  # (..., 3) components in (e, n, z)
    Q: np.ndarray  # (..., 3) components in (e, n, z)


def special_fields(sp: SpecialPolar, u, v) -> SpecialFields:
    """Pick invariant and Tchebychev/support vectors in the moving frame."""
    u, v = _pair(u, v)
    spec = sp.spec
    d, dd, k, lam = spec.delta(u), spec.ddelta(u), spec.kappa(u), spec.lam(u)
    if np.any(d < 0):
        ps = sp.polar
        J = polar_pick_scalar(spec, ps, u, v).J
        T = polar_tchebychev(spec, ps, u, v).T
        Q = polar_support_vector(spec, ps, u, v).Q
        return SpecialFields(
            J,
            coordinates_to_frame(spec, u, v, T[..., 0], T[..., 1]),
            coordinates_to_frame(spec, u, v, Q[..., 0], Q[..., 1]),
        )
    c1, c2 = sp.c1, sp.c2
    w = np.sqrt(d * d + v * v)
    V = sp.polar.V(u, v)
    q = c1 * np.cos(V) + c2 * np.sin(V)
    _check_support(q, u, v)
    F = spec.kappa_integral(u)
    cF, sF = np.cos(F), np.sin(F)
    B = c2 * cF + c1 * sF
    J = (
        3.0 * B / (2.0 * d * d * w * q)
        * (
            cF * (k * (c2 * v * v + 2 * c1 * d * v - c2 * d * d) + d * (-c2 * d * lam + c1 * dd))
            + sF * (k * (c1 * v * v - 2 * c2 * d * v - c1 * d * d) - d * (c1 * d * lam + c2 * dd))
        )
    )
    T = np.stack([w / (2 * d * d) * q * (2 * k * v + dd), v / d * B, B], -1)
    s = (c1 * np.sin(V) - c2 * np.cos(V)) / (4 * w * q)
    Q = np.stack([np.zeros_like(s), s * v, s * d], -1)
    return SpecialFields(J, T, Q)
