"""Named constructions of the manifolds, frames and maps used throughout.

Sol frames are written in the left-invariant basis

    E1 = exp(-z) d/dx,   E2 = exp(z) d/dy,   E3 = d/dz,

and :func:`in_sol_basis` converts rows of E-components to coordinate
components.  ``ADAPTED`` pairs each catalog submersion with frames whose third
leg is its vertical direction.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Any

import numpy as np

from .expr import Apply, Expression, Num, parse
from .geometry import ChartedManifold, FrameField, LocalGeometry, orthonormality_residual
from .mapcalc import SmoothMap

_E_SCALES = ("exp(-z)", "exp(z)", "1")


@lru_cache(maxsize=None)
def sol() -> ChartedManifold:
    return ChartedManifold.diagonal("sol", ("x", "y", "z"), ["exp(2*z)", "exp(-2*z)", "1"])


@lru_cache(maxsize=None)
def hyperbolic_xz() -> ChartedManifold:
    return ChartedManifold.diagonal("hyperbolic_xz", ("x", "z"), ["exp(2*z)", "1"])


@lru_cache(maxsize=None)
def hyperbolic_yz() -> ChartedManifold:
    return ChartedManifold.diagonal("hyperbolic_yz", ("y", "z"), ["exp(-2*z)", "1"])


@lru_cache(maxsize=None)
def euclidean(n: int) -> ChartedManifold:
    coords = {1: ("t",), 2: ("u", "v"), 3: ("x", "y", "z")}.get(n) or tuple(f"x{i}" for i in range(1, n + 1))
    return ChartedManifold.diagonal(f"euclidean{n}", coords, ["1"] * n)


def _times(a: Expression, b: str) -> Expression:
    if isinstance(a, Num) and a.value == 0.0:
        return a
    if b == "1":
        return a
    if isinstance(a, Num) and a.value == 1.0:
        return parse(b)
    return a * parse(b)


def in_sol_basis(name: str, rows, vertical: int = 2) -> FrameField:
    """Frame on Sol from rows ``a[i] = (a_i^1, a_i^2, a_i^3)`` of E-components."""
    rows = [[parse(c) if isinstance(c, str) else c for c in row] for row in rows]
    vectors = tuple(tuple(_times(c, s) for c, s in zip(row, _E_SCALES)) for row in rows)
    return FrameField(name, sol(), vectors, vertical)


@lru_cache(maxsize=None)
def sol_frame() -> FrameField:
    return in_sol_basis("sol_frame", [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]])


@lru_cache(maxsize=None)
def case1_frame() -> FrameField:
    """{E3, E2, -E1}, vertical -E1."""
    return in_sol_basis("case1", [["0", "0", "1"], ["0", "1", "0"], ["-1", "0", "0"]])


@lru_cache(maxsize=None)
def case1_frame_alias() -> FrameField:
    """{E3, E2, E1}: same legs as ``case1`` with the vertical sign flipped (left-handed)."""
    return in_sol_basis("case1_alias", [["0", "0", "1"], ["0", "1", "0"], ["1", "0", "0"]])


@lru_cache(maxsize=None)
def case2_frame() -> FrameField:
    """{E3, E1, E2}, vertical E2."""
    return in_sol_basis("case2", [["0", "0", "1"], ["1", "0", "0"], ["0", "1", "0"]])


def cr1_frame(theta, alpha, name: str = "cr1") -> FrameField:
    """Orthonormal frame with ``e1`` orthogonal to E1, parameterised by two angle fields.

    e1 = cos(t) E2 + sin(t) E3
    e2 = sin(a) E1 - sin(t) cos(a) E2 + cos(t) cos(a) E3
    e3 = cos(a) E1 + sin(t) sin(a) E2 - cos(t) sin(a) E3
    """
    t = parse(theta) if isinstance(theta, str) else _as_expr(theta)
    a = parse(alpha) if isinstance(alpha, str) else _as_expr(alpha)
    ct, st = Apply("cos", t), Apply("sin", t)
    ca, sa = Apply("cos", a), Apply("sin", a)
    rows = [
        [Num(0.0), ct, st],
        [sa, -(st * ca), ct * ca],
        [ca, st * sa, -(ct * sa)],
    ]
    return in_sol_basis(name, rows)


def _as_expr(x) -> Expression:
    if isinstance(x, Expression):
        return x
    return parse(repr(float(x))) if float(x) >= 0 else -parse(repr(-float(x)))


@lru_cache(maxsize=None)
def pi1_rotated_frame() -> FrameField:
    """Adapted frame of ``pi1`` rotated by a basic angle (a function of y, z only)."""
    return cr1_frame("0.3 + 0.1*y + 0.2*z", "0", name="pi1_rotated")


@lru_cache(maxsize=None)
def pi1_twisted_frame() -> FrameField:
    """Frame with vertical E1 whose horizontal legs are not basic (angle depends on x)."""
    return cr1_frame("0.3 + 0.2*x + 0.1*y - 0.15*z", "0", name="pi1_twisted")


@lru_cache(maxsize=None)
def pi1_geodesic_frame() -> FrameField:
    """Vertical E1 and horizontal e1 = cos(t)E2 + sin(t)E3 with cos(t) = exp(z)/10.

    This angle makes e1 a geodesic field (D_{e1} e1 = 0).  Defined for z < log(10).
    """
    c, s = "0.1*exp(z)", "sqrt(1 - 0.01*exp(2*z))"
    return in_sol_basis("pi1_geodesic", [["0", c, s], ["0", f"-{s}", c], ["1", "0", "0"]])


@lru_cache(maxsize=None)
def euclidean_frame() -> FrameField:
    return FrameField.from_strings("euclid_frame", euclidean(3), [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]])


def _euclid_rotation(name: str, angle: str) -> FrameField:
    c, s = f"cos({angle})", f"sin({angle})"
    return FrameField.from_strings(name, euclidean(3), [[c, s, "0"], [f"-{s}", c, "0"], ["0", "0", "1"]])


@lru_cache(maxsize=None)
def euclidean_rotated_frame() -> FrameField:
    return _euclid_rotation("euclid_rotated", "0.3*x + 0.2*y + 0.05*x*y")


@lru_cache(maxsize=None)
def euclidean_twisted_frame() -> FrameField:
    return _euclid_rotation("euclid_twisted", "0.3*x + 0.2*y - 0.4*z + 0.05*x*z")


@lru_cache(maxsize=None)
def pi1() -> SmoothMap:
    return SmoothMap.from_strings("pi1", sol(), hyperbolic_yz(), ["y", "z"])


@lru_cache(maxsize=None)
def pi2() -> SmoothMap:
    return SmoothMap.from_strings("pi2", sol(), hyperbolic_xz(), ["x", "z"])


def biharmonic_example(A: float = 1.0, B: float = 1.0, C: float = 0.0, D: float = 0.0) -> SmoothMap:
    """(x, y, z) -> (y, A z^3 + B z^2 + C z + D) into the Euclidean plane."""
    return SmoothMap.from_strings("biharmonic_example", sol(), euclidean(2),
                                  ["y", "A*z^3 + B*z^2 + C*z + D"],
                                  {"A": float(A), "B": float(B), "C": float(C), "D": float(D)})


@lru_cache(maxsize=None)
def euclidean_projection() -> SmoothMap:
    return SmoothMap.from_strings("euclid_pi", euclidean(3), euclidean(2), ["x", "y"])


@lru_cache(maxsize=None)
def sol_identity() -> SmoothMap:
    return SmoothMap.from_strings("sol_identity", sol(), sol(), ["x", "y", "z"])


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    kind: str  # "manifold" | "frame" | "map"
    payload: Any
    provenance: str


# submersion -> frames whose third leg spans its fibres and whose horizontal legs are basic
ADAPTED = {
    "pi1": ("case1", "pi1_rotated"),
    "pi2": ("case2",),
    "euclid_pi": ("euclid_frame", "euclid_rotated"),
}

# frames whose third leg is tangent to a Riemannian foliation (horizontal legs may twist)
FOLIATED_FRAMES = ("case1", "case1_alias", "case2", "pi1_rotated", "pi1_twisted", "pi1_geodesic",
                   "euclid_frame", "euclid_rotated", "euclid_twisted")

SUBMERSION_REFERENCE = {"pi1": "sol_frame", "pi2": "sol_frame"}

_BUILDERS = [
    ("sol", "manifold", sol, "exp(2z)dx^2 + exp(-2z)dy^2 + dz^2"),
    ("hyperbolic_xz", "manifold", hyperbolic_xz, "exp(2z)dx^2 + dz^2, target of pi2"),
    ("hyperbolic_yz", "manifold", hyperbolic_yz, "exp(-2z)dy^2 + dz^2, target of pi1"),
    ("euclidean2", "manifold", lambda: euclidean(2), "target of the cubic biharmonic map"),
    ("euclidean3", "manifold", lambda: euclidean(3), "flat source of the harmonic control"),
    ("sol_frame", "frame", sol_frame, "left-invariant frame exp(-z)dx, exp(z)dy, dz"),
    ("case1", "frame", case1_frame, "adapted to pi1: E3, E2, -E1"),
    ("case1_alias", "frame", case1_frame_alias, "E3, E2, E1 (left-handed)"),
    ("case2", "frame", case2_frame, "adapted to pi2: E3, E1, E2"),
    ("cr1_0", "frame", lambda: cr1_frame("0", "0", name="cr1_0"), "two-angle family at theta = alpha = 0"),
    ("pi1_rotated", "frame", pi1_rotated_frame, "pi1-adapted, angle depends on y and z only"),
    ("pi1_twisted", "frame", pi1_twisted_frame, "fibres of pi1, angle also depends on x"),
    ("pi1_geodesic", "frame", pi1_geodesic_frame, "fibres of pi1, e1 has no E1 part and f1 = 0"),
    ("euclid_frame", "frame", euclidean_frame, "coordinate frame of flat space"),
    ("euclid_rotated", "frame", euclidean_rotated_frame, "flat space, rotation basic for euclid_pi"),
    ("euclid_twisted", "frame", euclidean_twisted_frame, "flat space, rotation twisting along the fibres"),
    ("pi1", "map", pi1, "(x, y, z) -> (y, z)"),
    ("pi2", "map", pi2, "(x, y, z) -> (x, z)"),
    ("biharmonic_example", "map", biharmonic_example, "(y, A z^3 + B z^2 + C z + D) with A = B = 1, C = D = 0"),
    ("euclid_pi", "map", euclidean_projection, "flat projection, harmonic"),
    ("sol_identity", "map", sol_identity, "identity of Sol"),
]

# checked at construction: every frame must be orthonormal here
VALIDATION_POINTS = np.array([[0.0, 0.0, 0.0], [1.0, 2.0, 1.5], [-1.5, 0.5, -2.0], [0.7, -1.2, 2.0]])


@lru_cache(maxsize=None)
def entries() -> dict[str, CatalogEntry]:
    out: dict[str, CatalogEntry] = {}
    for name, kind, build, provenance in _BUILDERS:
        if name in out:
            raise ValueError(f"duplicate catalog name {name!r}")
        payload = build()
        if kind == "frame":
            for p in VALIDATION_POINTS:
                local = LocalGeometry(payload.manifold, p, 0)
                v = payload.jet(p, 0).value
                res = orthonormality_residual(v, local.metric.value)
                if res > 1e-10:
                    raise ValueError(f"catalog frame {name!r} not orthonormal at {p} ({res:.3g})")
        out[name] = CatalogEntry(name, kind, payload, provenance)
    return out


def get(name: str, kind: str | None = None):
    try:
        entry = entries()[name]
    except KeyError:
        raise KeyError(f"no catalog entry named {name!r}") from None
    if kind is not None and entry.kind != kind:
        raise KeyError(f"catalog entry {name!r} is a {entry.kind}, not a {kind}")
    return entry.payload
