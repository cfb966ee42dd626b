"""Reference surfaces and supports used by the tests, demos and docs."""

from __future__ import annotations

from .expr import parse
from .polar import PolarSupport
from .surface import RuledSurfaceSpec

__all__ = ["FIXTURES", "SUPPORTS", "fixture", "polar"]

# name -> (delta, kappa, lam)
FIXTURES = {
    "FIX-H": ("1", "0", "0"),  # right helicoid
    "FIX-C": ("1", "1", "0"),
    "FIX-G": ("2 + sin(u)", "cos(u)", "u/5"),
}

SUPPORTS = ("cos(V)", "exp(V/2)", "2 + sin(V)")


def fixture(name: str, domain=(-4.0, 4.0), u0: float = 0.0) -> RuledSurfaceSpec:
    d, k, l = FIXTURES[name]
    return RuledSurfaceSpec(d, k, l, domain, u0=u0, name=name)


def polar(spec: RuledSurfaceSpec, f: str) -> PolarSupport:
    return PolarSupport(spec, parse(f, var="V"))
