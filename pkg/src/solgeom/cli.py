"""Command-line entry point.

    python -m solgeom paper-verify --seed 7
    python -m solgeom tension --map pi1 --points random:10:1
    python -m solgeom probe-rch --restarts 1000 --seed 42

Every command writes one JSON report
``{"version", "config", "records", "pass", "wall_ms"}``.  Exit status is 0
when every record passes, 1 when a check fails and 2 for usage, config or
evaluation errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

import numpy as np

from . import __version__, catalog
from . import geometry as geo
from . import mapcalc as mc
from . import submersion as sub
from .config import ConfigError, load_config
from .expr import ExpressionError
from .geometry import GeometryError
from .sampling import grid_points, random_points
from .verify import DEFAULT_TOLERANCES, record, run_suite

COMMANDS = ("paper-verify", "curvature", "tension", "bitension", "integrability",
            "submersion-check", "probe-rch")


class UsageError(ValueError):
    pass


# --- argument handling ----------------------------------------------------------------------------

def parse_points(spec: str, dim: int) -> np.ndarray:
    """``random:N:SEED``, ``grid:K`` or explicit ``x,y,z;x,y,z``."""
    kind, _, rest = spec.partition(":")
    try:
        if kind == "random":
            n, seed = rest.split(":")
            if int(n) < 1:
                raise UsageError("random sample needs N >= 1")
            return random_points(int(n), int(seed), dim)
        if kind == "grid":
            return grid_points(int(rest), dim)
        body = rest if kind == "explicit" else spec
        pts = [[float(x) for x in chunk.split(",")] for chunk in body.split(";") if chunk.strip()]
    except ValueError as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(f"cannot read point spec {spec!r}") from None
    if not pts or any(len(p) != dim for p in pts):
        raise UsageError(f"point spec {spec!r} must give points with {dim} coordinates")
    return np.array(pts)


def parse_tolerances(items) -> dict:
    out = {}
    for item in items or []:
        key, eq, value = item.partition("=")
        if not eq:
            key, value = "*", key
        try:
            tol = float(value)
        except ValueError:
            raise UsageError(f"tolerance {item!r} is not a number") from None
        if not tol > 0 or not math.isfinite(tol):
            raise UsageError(f"tolerance {item!r} must be positive")
        keys = DEFAULT_TOLERANCES if key == "*" else [key]
        for k in keys:
            if k not in DEFAULT_TOLERANCES:
                raise UsageError(f"unknown tolerance class {k!r} (use {', '.join(DEFAULT_TOLERANCES)})")
            out[k] = tol
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="solgeom", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON file with extra manifolds, maps and frames")
        p.add_argument("--output", help="write the report here instead of standard output")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--points", help="random:N:SEED, grid:K or x,y,z;x,y,z")
        p.add_argument("--tol", action="append", metavar="[CLASS=]VALUE",
                       help="override tolerances; classes: identity, curvature, bitension")
        return p

    common(subs.add_parser("paper-verify", help="run the full verification suite")).add_argument(
        "--restarts", type=int, default=1000)
    p = common(subs.add_parser("curvature", help="curvature of a manifold at sample points"))
    p.add_argument("--manifold", default="sol")
    p.add_argument("--frame", help="also report R(e_i, e_j, e_k, e_l) in this frame")
    for name in ("tension", "bitension"):
        common(subs.add_parser(name, help=f"{name} field of a map")).add_argument("--map", required=True)
    common(subs.add_parser("integrability", help="integrability data of a frame")).add_argument(
        "--frame", required=True)
    p = common(subs.add_parser("submersion-check", help="certify a Riemannian submersion"))
    p.add_argument("--map", required=True)
    p.add_argument("--frame", help="reference frame for the vertical vector")
    p = common(subs.add_parser("probe-rch", help="infeasibility probe of the harmonic system"))
    p.add_argument("--restarts", type=int, default=1000)
    p.add_argument("--control", action="store_true", help="use the solvable sign-flipped system")
    return parser


# --- commands --------------------------------------------------------------------------------------

class Objects:
    def __init__(self, loaded=None):
        self.loaded = loaded or {"manifolds": {}, "maps": {}, "frames": {}}

    def get(self, name: str, kind: str):
        local = self.loaded[kind + "s"]
        if name in local:
            return local[name]
        try:
            return catalog.get(name, kind)
        except KeyError as exc:
            raise UsageError(exc.args[0]) from None


def _points(args, dim: int) -> np.ndarray:
    return parse_points(args.points or f"random:10:{args.seed}", dim)


def _curvature(args, objs, tols):
    m = objs.get(args.manifold, "manifold")
    frame = objs.get(args.frame, "frame") if args.frame else None
    out = []
    for p in _points(args, m.dim):
        local = geo.LocalGeometry(m, p, 2)
        tensor = geo.CurvatureTensor(local.riemann_lowered.value.copy())
        g = local.metric.value
        value = {"ricci": geo.ricci(m, p).tolist(),
                 "scalar": float(np.einsum("ab,ab->", np.linalg.inv(g), geo.ricci(m, p)))}
        if m.dim == 2:
            value["gauss"] = geo.gauss_curvature(m, p)
        if frame is not None:
            value["frame"] = geo.frame_curvature(frame, p).tolist()
        out.append(record(f"curvature/{m.name}", "R(X,Y,Z,W) = g(R(Z,W)Y, X)", p,
                          tensor.symmetry_residual(), tols["identity"], value=value))
    return out


def _tension(args, objs, tols, which):
    phi = objs.get(args.map, "map")
    fn = mc.tension if which == "tension" else mc.bitension
    out = []
    for p in _points(args, phi.source.dim):
        res = fn(phi, p)
        out.append(record(f"{which}/{phi.name}", "tau = Trace nabla d phi" if which == "tension" else "BT1",
                          p, None, None, passed=True,
                          value={"image": res.image.tolist(), "components": res.components.tolist(),
                                 "norm": res.norm}))
    return out


def _integrability(args, objs, tols):
    f = objs.get(args.frame, "frame")
    out = []
    for p in _points(args, f.manifold.dim):
        d = sub.integrability_data(f, p)
        value = {k: v + 0.0 for k, v in d.values().items()}
        value["adapted"] = d.is_adapted
        out.append(record(f"integrability/{f.name}", "R1", p, d.defect, tols["identity"], value=value))
    return out


def _submersion(args, objs, tols):
    phi = objs.get(args.map, "map")
    ref = objs.get(args.frame, "frame") if args.frame else None
    if ref is None and phi.source is catalog.sol():
        ref = catalog.sol_frame()
    pts = parse_points(args.points, phi.source.dim) if args.points else mc.default_samples(phi.source.dim)
    rep = mc.is_riemannian_submersion(phi, pts, tols["identity"], reference=ref)
    worst = rep.worst_residual
    return [record(f"submersion/{phi.name}", "Riemannian submersion", pts,
                   worst if math.isfinite(worst) else None, tols["identity"], passed=rep.passed,
                   value={"vertical": rep.vertical, "reference": ref.name if ref else None,
                          "failures": [{"point": p, "reason": r} for p, r in rep.failures]})]


def _probe(args, objs, tols):
    if args.restarts < 1:
        raise UsageError("--restarts must be at least 1")
    res = sub.probe_rch_infeasibility(args.restarts, args.seed, control=args.control)
    ok = res.min_residual < 1e-8 if args.control else res.min_residual >= 0.9
    return [record("probe-rch" + ("/control" if args.control else ""), "RCH", None, None, None,
                   value={"min_residual": res.min_residual, "argmin": list(res.argmin),
                          "restarts": res.restarts, "seed": res.seed}, passed=ok)]


def _paper_verify(args, objs, tols):
    if args.restarts < 1:
        raise UsageError("--restarts must be at least 1")
    pts = _points(args, 3) if args.points else None
    return run_suite(pts, args.seed, args.restarts, tols)


HANDLERS = {
    "paper-verify": _paper_verify,
    "curvature": _curvature,
    "tension": lambda a, o, t: _tension(a, o, t, "tension"),
    "bitension": lambda a, o, t: _tension(a, o, t, "bitension"),
    "integrability": _integrability,
    "submersion-check": _submersion,
    "probe-rch": _probe,
}


def _clean(x):
    """Replace non-finite floats so the report is strict JSON."""
    if isinstance(x, float):
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    return x


def config_echo(args) -> dict:
    echo = {"command": args.command}
    for key in ("manifold", "map", "frame", "config", "points", "seed", "restarts", "control"):
        if hasattr(args, key):
            echo[key] = getattr(args, key)
    echo["tolerances"] = {**DEFAULT_TOLERANCES, **parse_tolerances(args.tol)}
    return echo


def run(args) -> tuple[dict, int]:
    start = time.perf_counter()
    tols = {**DEFAULT_TOLERANCES, **parse_tolerances(args.tol)}
    loaded = None
    if args.config:
        # objects without declared samples are validated at the run's points
        pts = None
        if args.points:
            try:
                pts = parse_points(args.points, 3)
            except UsageError:
                pts = None
        loaded = load_config(args.config, pts)
    records = HANDLERS[args.command](args, Objects(loaded), tols)
    report = {"version": __version__, "config": config_echo(args), "records": records,
              "pass": all(r["pass"] for r in records)}
    report["wall_ms"] = int(round((time.perf_counter() - start) * 1000))
    return _clean(report), 0 if report["pass"] else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report, status = run(args)
    except (UsageError, ConfigError, GeometryError, ExpressionError) as exc:
        print(f"solgeom: error: {exc}", file=sys.stderr)
        return 2
    text = json.dumps(report, indent=2) + "\n"
    if args.output:
        try:
            with open(args.output, "w") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"solgeom: error: cannot write {args.output}: {exc.strerror}", file=sys.stderr)
            return 2
    else:
        sys.stdout.write(text)
    if status:
        failed = [r["name"] for r in report["records"] if not r["pass"]]
        print(f"solgeom: {len(failed)} check(s) failed: {', '.join(failed[:10])}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
