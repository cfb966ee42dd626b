"""Batch front end: ``ruledpolar {eval,verify,classify} --config job.json``.

Exit codes: 0 success, 1 verification failures, 2 configuration error,
3 evaluation error.  All outputs are deterministic for a given config.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .expr import ExprDomainError, ExprSyntaxError, parse
from .oracle import TOLERANCES, darboux_pick, numeric_scalar_curvature, numeric_shape_operator, residual_report
from .polar import (
    PolarSupport,
    classify,
    polar_pick_scalar,
    polar_shape_and_curvatures,
    polar_support_vector,
    polar_tchebychev,
    polar_V,
)
from .relative import Q_MIN, SupportVanishingError, field_calculus, general_fields, make_support
from .special import SpecialPolar
from .surface import RuledSurfaceSpec, SurfaceError, euclidean_curvatures

__all__ = ["ConfigError", "EvaluationError", "JobConfig", "Grid", "evaluate", "run_eval", "run_verify",
           "run_classify", "main", "CSV_HEADER"]

CSV_HEADER = [
    "u", "v", "V", "q", "Ktilde", "Htilde", "K", "H", "J", "S", "T1", "T2", "Q1", "Q2",
    "divI_T", "curlI_T", "divG_T", "divI_Q", "curlI_Q", "divG_Q",
]

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_EVAL = 0, 1, 2, 3


class ConfigError(ValueError):
    """Invalid job configuration."""


class EvaluationError(RuntimeError):
    """An invariant could not be evaluated at some grid point."""


@dataclass
class JobConfig:
    surface: dict
    normalization: dict
    grid: dict
    outputs: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    corrupt: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict) -> "JobConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        extra = set(data) - {"surface", "normalization", "grid", "outputs", "tolerances", "corrupt"}
        if extra:
            raise ConfigError(f"unknown config keys {sorted(extra)}")
        for key in ("surface", "normalization", "grid"):
            if not isinstance(data.get(key), dict):
                raise ConfigError(f"missing or invalid section {key!r}")
        cfg = cls(
            dict(data["surface"]),
            dict(data["normalization"]),
            dict(data["grid"]),
            dict(data.get("outputs") or {}),
            dict(data.get("tolerances") or {}),
            dict(data.get("corrupt") or {}),
        )
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "JobConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        return cls.from_dict(data)

    def validate(self):
        g = self.grid
        try:
            nu, nv = int(g["u_count"]), int(g["v_count"])
            v_lo, v_hi = (float(x) for x in g["v_range"])
        except (KeyError, TypeError, ValueError):
            raise ConfigError("grid needs u_count, v_count and v_range [lo, hi]") from None
        if nu < 2 or nv < 2:
            raise ConfigError("grid counts must be at least 2")
        if not (math.isfinite(v_lo) and math.isfinite(v_hi) and v_hi > v_lo):
            raise ConfigError("v_range must be finite and increasing")
        bad = set(self.tolerances) - set(TOLERANCES)
        if bad:
            raise ConfigError(f"unknown tolerance keys {sorted(bad)}")
        for k, t in self.tolerances.items():
            if not (isinstance(t, (int, float)) and t > 0):
                raise ConfigError(f"tolerance {k!r} must be a positive number")
        fam = self.normalization.get("family")
        if fam not in ("polar", "special", "manhart"):
            raise ConfigError("normalization.family must be polar, special or manhart")
        self.build()  # parses expressions and checks the surface

    def build(self):
        """``(spec, polar_support_or_None, support_function)``."""
        s = self.surface
        try:
            spec = RuledSurfaceSpec(
                parse(str(s["delta"])), parse(str(s["kappa"])), parse(str(s["lam"])),
                tuple(s["domain"]), s.get("u0"),
            )
        except KeyError as exc:
            raise ConfigError(f"surface is missing {exc.args[0]!r}") from None
        except ExprSyntaxError as exc:
            raise ConfigError(f"parse error: {exc}") from None
        except (SurfaceError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid surface: {exc}") from None
        n = self.normalization
        try:
            if n["family"] == "polar":
                ps = PolarSupport(spec, parse(str(n["f"]), var="V"))
                return spec, ps, ps.support_function()
            if n["family"] == "special":
                ps = SpecialPolar(spec, float(n["c1"]), float(n["c2"])).polar
                return spec, ps, ps.support_function()
            return spec, None, make_support("manhart", spec, a=float(n["a"]))
        except KeyError as exc:
            raise ConfigError(f"normalization is missing {exc.args[0]!r}") from None
        except ExprSyntaxError as exc:
            raise ConfigError(f"parse error: {exc}") from None
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid normalization: {exc}") from None


@dataclass
class Grid:
    U: np.ndarray
    V: np.ndarray
    nudged: list


def build_grid(cfg: JobConfig, spec, q) -> Grid:
    """Tensor grid over the surface domain; points with ``|q| < q_min`` move by half a cell."""
    g = cfg.grid
    nu, nv = int(g["u_count"]), int(g["v_count"])
    us = np.linspace(*spec.domain, nu)
    v_lo, v_hi = (float(x) for x in g["v_range"])
    vs = np.linspace(v_lo, v_hi, nv)
    U, V = np.meshgrid(us, vs, indexing="ij")
    half = 0.5 * (v_hi - v_lo) / (nv - 1)
    nudged = []
    for i in range(nu):
        for j in range(nv):
            try:
                qv = float(q.q(U[i, j], V[i, j]))
            except ExprDomainError as exc:
                raise EvaluationError(
                    f"evaluation failed at grid point ({i}, {j}) u={float(U[i, j])!r} v={float(V[i, j])!r}: {exc}"
                ) from None
            if abs(qv) < Q_MIN:
                old = float(V[i, j])
                V[i, j] = old + half if j < nv - 1 else old - half
                nudged.append({"i": i, "j": j, "u": float(U[i, j]), "v_from": old, "v_to": float(V[i, j])})
    return Grid(U, V, nudged)


def _first_bad(fn, U, V):
    # locate the first grid point that fails when evaluated alone
    for i in range(U.shape[0]):
        for j in range(U.shape[1]):
            try:
                out = fn(U[i:i + 1, j:j + 1], V[i:i + 1, j:j + 1])
                if not all(np.all(np.isfinite(c)) for c in out.values()):
                    return i, j, "non-finite value"
            except Exception as exc:  # noqa: BLE001
                return i, j, f"{type(exc).__name__}: {exc}"
    return None


def _columns(spec, ps, q, U, V) -> dict:
    d = {"u": U, "v": V, "V": polar_V(spec, U, V), "q": q.q(U, V)}
    d["Ktilde"], d["Htilde"] = euclidean_curvatures(spec, U, V)
    if ps is not None:
        sh = polar_shape_and_curvatures(spec, ps, U, V)
        pk = polar_pick_scalar(spec, ps, U, V)
        tc = polar_tchebychev(spec, ps, U, V)
        sv = polar_support_vector(spec, ps, U, V)
        d.update(K=sh.K, H=sh.H, J=pk.J, S=pk.S, T1=tc.T[..., 0], T2=tc.T[..., 1], Q1=sv.Q[..., 0],
                 Q2=sv.Q[..., 1], divI_T=tc.div_I, curlI_T=tc.curl_I, divG_T=tc.div_G, divI_Q=sv.div_I,
                 curlI_Q=sv.curl_I, divG_Q=sv.div_G)
    else:
        # no closed forms outside the polar family: use the numeric paths
        q.values(U, V)
        fit = numeric_shape_operator(spec, q, U, V)
        T, Q = general_fields(spec, q, U, V)
        from .oracle import _fd_field

        fcT = field_calculus(spec, q, _fd_field(lambda a, b: general_fields(spec, q, a, b)[0], 1.0), U, V)
        fcQ = field_calculus(spec, q, _fd_field(lambda a, b: general_fields(spec, q, a, b)[1], 1.0), U, V)
        d.update(K=fit.K, H=fit.H, J=darboux_pick(spec, q, U, V).J, S=numeric_scalar_curvature(spec, q, U, V),
                 T1=T[..., 0], T2=T[..., 1], Q1=Q[..., 0], Q2=Q[..., 1], divI_T=fcT.div_I, curlI_T=fcT.curl_I,
                 divG_T=fcT.div_G, divI_Q=fcQ.div_I, curlI_Q=fcQ.curl_I, divG_Q=fcQ.div_G)
    return {k: np.broadcast_to(np.asarray(d[k], float), U.shape) for k in CSV_HEADER}


def evaluate(cfg: JobConfig):
    """Evaluate every CSV column on the (nudged) grid; returns ``(spec, grid, columns)``."""
    spec, ps, q = cfg.build()
    grid = build_grid(cfg, spec, q)
    fn = lambda U, V: _columns(spec, ps, q, U, V)  # noqa: E731
    try:
        with np.errstate(all="ignore"):
            cols = fn(grid.U, grid.V)
        ok = all(np.all(np.isfinite(c)) for c in cols.values())
    except (ExprDomainError, SupportVanishingError, FloatingPointError, ValueError, np.linalg.LinAlgError):
        ok = False
    if not ok:
        with np.errstate(all="ignore"):
            bad = _first_bad(fn, grid.U, grid.V)
        i, j, msg = bad if bad else (-1, -1, "non-finite value")
        where = f"grid point ({i}, {j}) u={float(grid.U[i, j])!r} v={float(grid.V[i, j])!r}" if i >= 0 else "grid"
        raise EvaluationError(f"evaluation failed at {where}: {msg}")
    return spec, grid, cols


def _out(cfg: JobConfig, out_dir: Path, key: str, default: str | None) -> Path | None:
    name = cfg.outputs.get(key, default)
    if name is None:
        return None
    p = Path(name)
    return p if p.is_absolute() else out_dir / p


def write_csv(path: Path, cols: dict):
    shape = cols["u"].shape
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(CSV_HEADER)
        for i in range(shape[0]):
            for j in range(shape[1]):
                w.writerow([repr(float(cols[k][i, j])) for k in CSV_HEADER])


def write_obj(path: Path, spec, grid: Grid):
    X = spec.frames.position(grid.U, grid.V)
    nu, nv = grid.U.shape
    lines = [f"v {x!r} {y!r} {z!r}" for x, y, z in X.reshape(-1, 3).tolist()]
    for i in range(nu - 1):
        for j in range(nv - 1):
            a = i * nv + j + 1
            lines.append(f"f {a} {a + nv} {a + nv + 1} {a + 1}")
    path.write_text("\n".join(lines) + "\n")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def run_eval(cfg: JobConfig, out_dir: Path) -> int:
    spec, grid, cols = evaluate(cfg)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_csv(_out(cfg, out_dir, "csv", "invariants.csv"), cols)
    obj = _out(cfg, out_dir, "obj", "surface.obj")
    if obj is not None:
        write_obj(obj, spec, grid)
    if grid.nudged:
        print(f"nudged {len(grid.nudged)} grid point(s) off q = 0", file=sys.stderr)
    return EXIT_OK


def _predicates(spec, ps) -> dict:
    c = classify(spec, ps).as_dict()
    c["Q_incompressible"] = c["Q_incompressible_I"]
    return c


def run_verify(cfg: JobConfig, out_dir: Path, tol_scale: float = 1.0) -> int:
    spec, ps, q = cfg.build()
    if ps is None:
        raise ConfigError("verify needs a polar or special normalization")
    grid = build_grid(cfg, spec, q)
    rep = residual_report(spec, ps, (grid.U, grid.V), tol_scale=tol_scale, corrupt=cfg.corrupt,
                          tolerances=cfg.tolerances)
    rep.meta["nudged"] = grid.nudged
    data = rep.as_dict()
    data["predicates"] = _predicates(spec, ps)
    out_dir.mkdir(parents=True, exist_ok=True)
    _out(cfg, out_dir, "report", "report.json").write_text(_dump(data))
    c = rep.counts
    print(f"passed/failed/inconclusive: {c['passed']}/{c['failed']}/{c['inconclusive']}")
    errors = [r for r in rep.rows if r.status == "fail" and r.closed is None and r.note]
    if errors:
        r = errors[0]
        print(f"evaluation error at grid point ({r.i}, {r.j}) u={r.u!r} v={r.v!r}: {r.note}", file=sys.stderr)
        return EXIT_EVAL
    return EXIT_OK if rep.ok else EXIT_FAIL


def run_classify(cfg: JobConfig, out_dir: Path) -> int:
    spec, ps, _ = cfg.build()
    if ps is None:
        raise ConfigError("classify needs a polar or special normalization")
    text = _dump(_predicates(spec, ps))
    out_dir.mkdir(parents=True, exist_ok=True)
    _out(cfg, out_dir, "classification", "classification.json").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="ruledpolar", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=["eval", "verify", "classify"])
    parser.add_argument("--config", required=True, help="JSON job configuration")
    parser.add_argument("--out-dir", default=".", help="directory for relative output paths")
    parser.add_argument("--tol-scale", type=float, default=1.0, help="multiply all verification tolerances")
    args = parser.parse_args(argv)
    out_dir = Path(args.out_dir)
    try:
        if not (math.isfinite(args.tol_scale) and args.tol_scale > 0):
            raise ConfigError("--tol-scale must be positive")
        cfg = JobConfig.load(args.config)
        if args.command == "eval":
            return run_eval(cfg, out_dir)
        if args.command == "verify":
            return run_verify(cfg, out_dir, args.tol_scale)
        return run_classify(cfg, out_dir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (EvaluationError, ExprDomainError, SupportVanishingError) as exc:
        print(f"evaluation error: {exc}", file=sys.stderr)
        return EXIT_EVAL


if __name__ == "__main__":
    sys.exit(main())
