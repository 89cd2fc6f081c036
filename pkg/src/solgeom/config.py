"""JSON descriptions of manifolds, maps and frames.

Structural validation uses a JSON Schema; the remaining checks (triangular
metric rows, component counts, references, expression syntax) report the
JSON pointer of the offending value.
"""

from __future__ import annotations

import json
from pathlib import Path

import jsonschema
import numpy as np

from . import catalog
from .expr import DomainError, ExpressionError, ParseError, parse
from .geometry import ChartedManifold, FrameField, GeometryError, LocalGeometry
from .mapcalc import SmoothMap

_EXPR = {"type": ["string", "number"]}
_NAME = {"type": "string", "pattern": "^[A-Za-z_][A-Za-z0-9_.-]*$"}
_POINT = {"type": "array", "items": {"type": "number"}, "minItems": 1}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "manifolds": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["name", "coords", "metric_upper"],
                "properties": {
                    "name": _NAME,
                    "coords": {"type": "array", "minItems": 1, "uniqueItems": True,
                               "items": {"type": "string", "pattern": "^[A-Za-z][A-Za-z0-9_]*$"}},
                    "metric_upper": {"type": "array", "items": {"type": "array", "items": _EXPR}},
                    "samples": {"type": "array", "items": _POINT},
                },
            },
        },
        "maps": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["name", "source", "target", "components"],
                "properties": {
                    "name": _NAME,
                    "source": _NAME,
                    "target": _NAME,
                    "components": {"type": "array", "minItems": 1, "items": _EXPR},
                    "params": {"type": "object", "additionalProperties": {"type": "number"}},
                },
            },
        },
        "frames": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["name", "manifold", "vectors"],
                "properties": {
                    "name": _NAME,
                    "manifold": _NAME,
                    "vectors": {"type": "array", "items": {"type": "array", "items": _EXPR}},
                    "vertical": {"type": "integer", "minimum": 1},
                },
            },
        },
    },
}


class ConfigError(ValueError):
    def __init__(self, message: str, pointer: str = ""):
        self.pointer = pointer
        super().__init__(f"{pointer or '/'}: {message}")


def _pointer(path) -> str:
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in path)


def _expr(value, pointer: str):
    text = repr(float(value)) if isinstance(value, (int, float)) else value
    try:
        return parse(text)
    except ParseError as exc:
        raise ConfigError(f"cannot parse {text!r}: {exc}", pointer) from None


def _resolve(name, kind, local: dict, pointer: str):
    if name in local:
        return local[name]
    try:
        return catalog.get(name, kind)
    except KeyError as exc:
        raise ConfigError(str(exc.args[0]), pointer) from None


def load_config(path, points=None) -> dict:
    """Load and validate a configuration file.

    Objects are checked at each manifold's ``samples`` when declared, otherwise
    at ``points`` (if given): metrics must be positive definite, frames
    orthonormal and maps evaluable.
    """
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return build_config(doc, points)


def build_config(doc, points=None) -> dict:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        first = errors[0]
        raise ConfigError(first.message, _pointer(first.absolute_path))

    taken = set(catalog.entries())
    out = {"manifolds": {}, "maps": {}, "frames": {}}
    samples = {}

    def claim(name, pointer):
        if name in taken:
            raise ConfigError(f"name {name!r} is already in use", pointer)
        taken.add(name)

    for i, m in enumerate(doc.get("manifolds", [])):
        base = f"/manifolds/{i}"
        claim(m["name"], base + "/name")
        n = len(m["coords"])
        rows = m["metric_upper"]
        if len(rows) != n:
            raise ConfigError(f"metric_upper needs {n} rows (upper triangle), got {len(rows)}",
                              base + "/metric_upper")
        upper = []
        for r, row in enumerate(rows):
            if len(row) != n - r:
                raise ConfigError(f"row {r} of the upper triangle needs {n - r} entries, got {len(row)}",
                                  f"{base}/metric_upper/{r}")
            upper.append([_expr(v, f"{base}/metric_upper/{r}/{c}") for c, v in enumerate(row)])
        try:
            manifold = ChartedManifold.from_upper(m["name"], tuple(m["coords"]), upper)
        except (GeometryError, ExpressionError) as exc:
            raise ConfigError(str(exc), base) from None
        for k, p in enumerate(m.get("samples", [])):
            if len(p) != n:
                raise ConfigError(f"sample point needs {n} coordinates", f"{base}/samples/{k}")
        out["manifolds"][m["name"]] = manifold
        samples[m["name"]] = m.get("samples")

    for i, f in enumerate(doc.get("frames", [])):
        base = f"/frames/{i}"
        claim(f["name"], base + "/name")
        manifold = _resolve(f["manifold"], "manifold", out["manifolds"], base + "/manifold")
        n = manifold.dim
        vecs = f["vectors"]
        if len(vecs) != n:
            raise ConfigError(f"frame needs {n} vectors, got {len(vecs)}", base + "/vectors")
        rows = []
        for r, v in enumerate(vecs):
            if len(v) != n:
                raise ConfigError(f"vector needs {n} components, got {len(v)}", f"{base}/vectors/{r}")
            rows.append(tuple(_expr(c, f"{base}/vectors/{r}/{k}") for k, c in enumerate(v)))
        vertical = f.get("vertical", n)
        if vertical > n:
            raise ConfigError(f"vertical must be in 1..{n}", base + "/vertical")
        try:
            frame = FrameField(f["name"], manifold, tuple(rows), vertical - 1)
        except GeometryError as exc:
            raise ConfigError(str(exc), base) from None
        out["frames"][f["name"]] = frame

    for i, mp in enumerate(doc.get("maps", [])):
        base = f"/maps/{i}"
        claim(mp["name"], base + "/name")
        source = _resolve(mp["source"], "manifold", out["manifolds"], base + "/source")
        target = _resolve(mp["target"], "manifold", out["manifolds"], base + "/target")
        comps = mp["components"]
        if len(comps) != target.dim:
            raise ConfigError(f"map needs {target.dim} components, got {len(comps)}", base + "/components")
        exprs = tuple(_expr(c, f"{base}/components/{k}") for k, c in enumerate(comps))
        try:
            out["maps"][mp["name"]] = SmoothMap(mp["name"], source, target, exprs,
                                                 dict(mp.get("params", {})))
        except GeometryError as exc:
            raise ConfigError(str(exc), base + "/components") from None

    _validate(out, samples, points)
    return out


def _sample_points(manifold, samples, points):
    pts = samples.get(manifold.name)
    if pts is None and points is not None:
        pts = [p for p in np.asarray(points, dtype=float) if len(p) == manifold.dim]
    return pts or []


def _validate(out: dict, samples: dict, points) -> None:
    for name, m in out["manifolds"].items():
        for p in _sample_points(m, samples, points):
            try:
                m.metric_jet(p, 0)
            except (GeometryError, DomainError) as exc:
                raise ConfigError(str(exc), f"/manifolds/{list(out['manifolds']).index(name)}") from None
    for k, (name, f) in enumerate(out["frames"].items()):
        for p in _sample_points(f.manifold, samples, points):
            try:
                LocalGeometry(f.manifold, p, 0).frame(f)
            except (GeometryError, DomainError) as exc:
                raise ConfigError(str(exc), f"/frames/{k}") from None
    for k, (name, mp) in enumerate(out["maps"].items()):
        for p in _sample_points(mp.source, samples, points):
            try:
                mp.image(p)
            except (GeometryError, DomainError) as exc:
                raise ConfigError(f"map {name!r} at {list(map(float, p))}: {exc}", f"/maps/{k}") from None
