"""Metric-derived tensor calculus on a single coordinate chart.

Curvature follows ``R(X, Y)Z = [D_X, D_Y]Z - D_[X,Y] Z`` and is lowered as
``R(X, Y, Z, W) = g(R(Z, W)Y, X)``, so for an orthonormal pair the sectional
curvature is ``R(e1, e2, e1, e2)``.

Every quantity is computed from jets of the metric and frame components, so
the ``*_jet`` helpers return fields whose derivatives are still available to
callers that need them (integrability data, tension, bitension).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .expr import Expression, evaluate, parse
from .jet import MAX_ORDER, Jet, inv, jeinsum

ORTHONORMAL_TOL = 1e-10


class GeometryError(ValueError):
    pass


class MetricError(GeometryError):
    """The metric is not positive definite at an evaluation point."""


class FrameError(GeometryError):
    """A frame fails orthonormality at an evaluation point."""


def _coerce_point(coords: Sequence[str], p) -> np.ndarray:
    if isinstance(p, Mapping):
        try:
            return np.array([float(p[c]) for c in coords])
        except KeyError as exc:
            raise GeometryError(f"point does not bind coordinate {exc.args[0]!r}") from None
    arr = np.asarray(p, dtype=float).reshape(-1)
    if arr.shape != (len(coords),):
        raise GeometryError(f"point {[float(v) for v in arr]} does not have {len(coords)} coordinates")
    return arr


@dataclass(frozen=True, eq=False)
class ChartedManifold:
    """A coordinate chart with a symmetric metric of closed-form entries."""

    name: str
    coords: tuple[str, ...]
    metric: tuple[tuple[Expression, ...], ...]

    def __post_init__(self):
        n = len(self.coords)
        if len(set(self.coords)) != n:
            raise GeometryError(f"duplicate coordinate names in {self.coords}")
        if len(self.metric) != n or any(len(row) != n for row in self.metric):
            raise GeometryError(f"metric of {self.name!r} must be {n}x{n}")
        for i in range(n):
            for j in range(i):
                if self.metric[i][j] != self.metric[j][i]:
                    raise GeometryError(f"metric of {self.name!r} is not symmetric at ({i},{j})")

    @classmethod
    def from_upper(cls, name: str, coords, upper) -> "ChartedManifold":
        """Build from the upper triangle: ``upper[i]`` lists entries ``g_ii .. g_in``."""
        coords = tuple(coords)
        n = len(coords)
        if len(upper) != n or any(len(row) != n - i for i, row in enumerate(upper)):
            raise GeometryError(f"metric_upper of {name!r} must have rows of length {n}, {n - 1}, ..., 1")
        full = [[None] * n for _ in range(n)]
        for i, row in enumerate(upper):
            for k, entry in enumerate(row):
                e = parse(entry)
                full[i][i + k] = full[i + k][i] = e
        return cls(name, coords, tuple(tuple(r) for r in full))

    @classmethod
    def diagonal(cls, name: str, coords, entries) -> "ChartedManifold":
        n = len(coords)
        zero = parse("0")
        upper = [[entries[i]] + [zero] * (n - i - 1) for i in range(n)]
        return cls.from_upper(name, coords, upper)

    @property
    def dim(self) -> int:
        return len(self.coords)

    def point(self, p) -> np.ndarray:
        return _coerce_point(self.coords, p)

    def seeds(self, p, order: int = MAX_ORDER) -> dict[str, Jet]:
        return dict(zip(self.coords, Jet.variables(self.point(p), order)))

    def metric_jet(self, p, order: int = MAX_ORDER) -> Jet:
        env = self.seeds(p, order)
        n = self.dim
        cache = {}
        rows = []
        for i in range(n):
            row = []
            for j in range(n):
                key = (min(i, j), max(i, j))
                if key not in cache:
                    cache[key] = evaluate(self.metric[key[0]][key[1]], env, n, order)
                row.append(cache[key])
            rows.append(Jet.stack(row))
        g = Jet.stack(rows)
        _check_positive_definite(self, self.point(p), g.value)
        return g


def _check_positive_definite(m: ChartedManifold, p: np.ndarray, g: np.ndarray) -> None:
    for k in range(1, len(g) + 1):
        minor = np.linalg.det(g[:k, :k])
        if not minor > 0.0:
            raise MetricError(f"metric of {m.name!r} is not positive definite at {[float(v) for v in p]} "
                              f"(leading minor {k} = {minor:.3g})")


@dataclass(frozen=True, eq=False)
class FrameField:
    """Vector fields given by coordinate components; ``vertical`` indexes e3."""

    name: str
    manifold: ChartedManifold
    vectors: tuple[tuple[Expression, ...], ...]
    vertical: int = 2

    def __post_init__(self):
        n = self.manifold.dim
        if len(self.vectors) != n or any(len(v) != n for v in self.vectors):
            raise GeometryError(f"frame {self.name!r} needs {n} vectors with {n} components")
        if not 0 <= self.vertical < n:
            raise GeometryError(f"frame {self.name!r}: vertical leg {self.vertical} out of range")

    @classmethod
    def from_strings(cls, name, manifold, vectors, vertical: int = 2) -> "FrameField":
        vecs = tuple(tuple(parse(c) for c in v) for v in vectors)
        return cls(name, manifold, vecs, vertical)

    def jet(self, p, order: int = MAX_ORDER, env: Mapping[str, Jet] | None = None) -> Jet:
        env = env or self.manifold.seeds(p, order)
        n = self.manifold.dim
        return Jet.stack([Jet.stack([evaluate(c, env, n, order) for c in v]) for v in self.vectors])


def orthonormality_residual(frame_values: np.ndarray, g: np.ndarray) -> float:
    gram = frame_values @ g @ frame_values.T
    return float(np.max(np.abs(gram - np.eye(len(gram)))))


@dataclass
class LocalGeometry:
    """Jets of the metric and its derived quantities about one point."""

    manifold: ChartedManifold
    point: np.ndarray
    order: int = MAX_ORDER
    seeds: dict = field(init=False)
    metric: Jet = field(init=False)

    def __post_init__(self):
        self.point = self.manifold.point(self.point)
        self.seeds = self.manifold.seeds(self.point, self.order)
        self.metric = self.manifold.metric_jet(self.point, self.order)

    @cached_property
    def inverse_metric(self) -> Jet:
        return inv(self.metric)

    @cached_property
    def christoffel(self) -> Jet:
        """``Gamma[k, i, j]`` = coefficient of d_k in D_{d_i} d_j."""
        return christoffel_from_metric(self.metric, self.inverse_metric)

    @cached_property
    def riemann_up(self) -> Jet:
        """``R[a, b, c, d]`` with ``R(d_c, d_d) d_b = R[a, b, c, d] d_a``."""
        gam = self.christoffel
        d_gam = gam.gradient()  # [a, b, c, e] = d_e Gamma^a_bc
        return (d_gam.retag("adbc->abcd") - d_gam.retag("acbd->abcd")
                + jeinsum("ace,edb->abcd", gam, gam) - jeinsum("ade,ecb->abcd", gam, gam))

    @cached_property
    def riemann_lowered(self) -> Jet:
        return jeinsum("ia,ajkl->ijkl", self.metric, self.riemann_up)

    def frame(self, frame: FrameField) -> Jet:
        if frame.manifold is not self.manifold:
            raise GeometryError(f"frame {frame.name!r} lives on {frame.manifold.name!r}, "
                                f"not {self.manifold.name!r}")
        v = frame.jet(self.point, self.order, self.seeds)
        res = orthonormality_residual(v.value, self.metric.value)
        if res > ORTHONORMAL_TOL:
            raise FrameError(f"frame {frame.name!r} is not orthonormal at {list(self.point)} "
                             f"(residual {res:.3g})")
        return v


def christoffel_from_metric(g: Jet, g_inv: Jet) -> Jet:
    dg = g.gradient()  # [i, j, k] = d_k g_ij
    lowered = 0.5 * (dg.retag("kji->kij") + dg.retag("kij->kij") - dg.retag("ijk->kij"))
    # lowered[l, i, j] = (d_i g_lj + d_j g_li - d_l g_ij) / 2
    return jeinsum("kl,lij->kij", g_inv, lowered)


def bracket_coefficients(v: Jet, g: Jet) -> Jet:
    """``c[i, j, k]`` with ``[e_i, e_j] = sum_k c[i, j, k] e_k`` (orthonormal ``v``)."""
    dv = v.gradient()  # [j, a, b] = d_b v[j, a]
    t = jeinsum("ib,jab->ija", v, dv)
    brackets = t - t.retag("jia->ija")
    lowered = jeinsum("ab,kb->ka", g, v)
    return jeinsum("ija,ka->ijk", brackets, lowered)


def connection_coefficients(c: Jet) -> Jet:
    """``w[i, j, k]`` with ``D_{e_i} e_j = sum_k w[i, j, k] e_k`` from bracket data."""
    return 0.5 * (c - c.retag("jki->ijk") + c.retag("kij->ijk"))


# --- public point-evaluation API -------------------------------------------------------------

def metric_at(m: ChartedManifold, p) -> np.ndarray:
    return m.metric_jet(p, 0).value.copy()


def inverse_metric_at(m: ChartedManifold, p) -> np.ndarray:
    return np.linalg.inv(metric_at(m, p))


def christoffel(m: ChartedManifold, p) -> np.ndarray:
    """``Gamma[k, i, j]`` (upper index first) at ``p``."""
    return LocalGeometry(m, p, 1).christoffel.value.copy()


@dataclass(frozen=True)
class CurvatureTensor:
    """Fully lowered curvature ``components[i, j, k, l] = g(R(d_k, d_l) d_j, d_i)``."""

    components: np.ndarray

    def in_frame(self, vectors: np.ndarray) -> np.ndarray:
        v = np.asarray(vectors, dtype=float)
        return np.einsum("abcd,ia,jb,kc,ld->ijkl", self.components, v, v, v, v)

    def symmetry_residual(self) -> float:
        """Worst violation of the pair antisymmetries, pair symmetry and first Bianchi."""
        r = self.components
        checks = [
            r + r.transpose(1, 0, 2, 3),
            r + r.transpose(0, 1, 3, 2),
            r - r.transpose(2, 3, 0, 1),
            r + np.einsum("iklj->ijkl", r) + np.einsum("iljk->ijkl", r),
        ]
        return float(max(np.max(np.abs(c)) for c in checks))


def riemann_lowered(m: ChartedManifold, p) -> CurvatureTensor:
    return CurvatureTensor(LocalGeometry(m, p, 2).riemann_lowered.value.copy())


def ricci(m: ChartedManifold, p) -> np.ndarray:
    """``Ric(X, Y) = sum_i R(Y, e_i, X, e_i)`` in coordinates."""
    local = LocalGeometry(m, p, 2)
    r = local.riemann_lowered.value
    g_inv = np.linalg.inv(local.metric.value)
    return np.einsum("cd,bcad->ab", g_inv, r)


def gauss_curvature(m: ChartedManifold, p) -> float:
    if m.dim != 2:
        raise GeometryError(f"Gauss curvature needs a surface, {m.name!r} has dimension {m.dim}")
    local = LocalGeometry(m, p, 2)
    g = local.metric.value
    return float(local.riemann_lowered.value[0, 1, 0, 1] / np.linalg.det(g))


def frame_bracket(f: FrameField, p) -> np.ndarray:
    """Structure coefficients ``c[i, j, k]``: ``[e_i, e_j] = sum_k c[i, j, k] e_k``."""
    local = LocalGeometry(f.manifold, p, 1)
    return bracket_coefficients(local.frame(f), local.metric).value.copy()


def frame_connection(f: FrameField, p) -> np.ndarray:
    """Connection coefficients ``w[i, j, k]``: ``D_{e_i} e_j = sum_k w[i, j, k] e_k``."""
    local = LocalGeometry(f.manifold, p, 1)
    c = bracket_coefficients(local.frame(f), local.metric)
    return connection_coefficients(c).value.copy()


def frame_components(f: FrameField, reference: FrameField, p) -> np.ndarray:
    """``a[i, j] = g(e_i, E_j)``, the rows of ``f`` expressed in ``reference``."""
    local = LocalGeometry(f.manifold, p, 0)
    v, w = local.frame(f).value, local.frame(reference).value
    a = v @ local.metric.value @ w.T
    res = float(np.max(np.abs(a @ a.T - np.eye(len(a)))))
    if res > ORTHONORMAL_TOL:
        raise FrameError(f"change of frame is not orthogonal (residual {res:.3g})")
    return a


def frame_curvature(f: FrameField, p) -> np.ndarray:
    """``R(e_i, e_j, e_k, e_l)`` in the frame ``f``."""
    local = LocalGeometry(f.manifold, p, 2)
    v = local.frame(f).value
    return CurvatureTensor(local.riemann_lowered.value).in_frame(v)
