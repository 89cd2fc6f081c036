"""Differential, tension and bitension of maps between charted manifolds.

In coordinates ``x`` on the source and ``y`` on the target,

    tau^c = g^ij (d_i d_j phi^c - Gamma^k_ij d_k phi^c + Gbar^c_ab(phi) d_i phi^a d_j phi^b)

and the bitension is the rough Laplacian of ``tau`` along ``phi`` minus the
trace of ``Rbar(dphi, tau) dphi``, with the target curvature in the same sign
convention as :mod:`solgeom.geometry`.  Everything is carried as jets, so
``tau`` is differentiated exactly rather than by re-differencing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import qmc

from .expr import Expression, evaluate, parse
from .geometry import ChartedManifold, FrameField, GeometryError, LocalGeometry
from .jet import MAX_ORDER, Jet, jeinsum, sqrt

RANK_TOL = 1e-12
SIGN_TOL = 1e-12
DEFAULT_SAMPLES = 64


@dataclass(frozen=True, eq=False)
class SmoothMap:
    name: str
    source: ChartedManifold
    target: ChartedManifold
    components: tuple[Expression, ...]
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.components) != self.target.dim:
            raise GeometryError(f"map {self.name!r} needs {self.target.dim} components")
        allowed = set(self.source.coords) | set(self.params)
        for c in self.components:
            extra = c.variables() - allowed
            if extra:
                raise GeometryError(f"map {self.name!r} uses undeclared names {sorted(extra)}")

    @classmethod
    def from_strings(cls, name, source, target, components, params=None) -> "SmoothMap":
        return cls(name, source, target, tuple(parse(c) for c in components), dict(params or {}))

    def with_params(self, **params) -> "SmoothMap":
        return SmoothMap(self.name, self.source, self.target, self.components, {**self.params, **params})

    def jet(self, local: LocalGeometry) -> Jet:
        env = {**self.params, **local.seeds}
        n = self.source.dim
        return Jet.stack([evaluate(c, env, n, local.order) for c in self.components])

    def image(self, p) -> np.ndarray:
        return self.jet(LocalGeometry(self.source, p, 0)).value.copy()


@dataclass(frozen=True)
class TensionResult:
    point: np.ndarray
    image: np.ndarray
    components: np.ndarray
    norm: float


class _MapJets:
    """Jets of a map and of both metrics about one source point."""

    def __init__(self, phi: SmoothMap, p, order: int = MAX_ORDER):
        self.map = phi
        self.local = LocalGeometry(phi.source, p, order)
        self.phi = phi.jet(self.local)
        self.image = self.phi.value.copy()
        self.target = LocalGeometry(phi.target, self.image, order)
        inner = [self.phi[a] for a in range(phi.target.dim)]
        self.target_christoffel = self.target.christoffel.compose(inner)
        self.dphi = self.phi.gradient()  # [a, i] = d_i phi^a

    def tension(self) -> Jet:
        g_inv = self.local.inverse_metric
        hess = self.dphi.gradient()  # [a, i, j]
        src = jeinsum("kij,ak->aij", self.local.christoffel, self.dphi)
        tgt = jeinsum("cab,ai->cbi", self.target_christoffel, self.dphi)
        tgt = jeinsum("cbi,bj->cij", tgt, self.dphi)
        return jeinsum("ij,aij->a", g_inv, hess - src + tgt)

    def covariant(self, v: Jet) -> Jet:
        """``D^phi_{d_i} V`` for a vector field ``V[..., c]`` along the map; new axis ``i`` first."""
        dv = v.gradient()  # [..., c, i]
        conn = jeinsum("cab,ai->cbi", self.target_christoffel, self.dphi)
        if v.ndim == 1:
            return dv.retag("ci->ic") + jeinsum("cbi,b->ic", conn, v)
        return dv.retag("jci->ijc") + jeinsum("cbi,jb->ijc", conn, v)

    def bitension(self) -> tuple[Jet, Jet]:
        tau = self.tension()
        w = self.covariant(tau)  # [i, c]
        ww = self.covariant(w)  # [i, j, c] = D_i D_j tau
        g_inv = self.local.inverse_metric
        rough = jeinsum("ij,ijc->c", g_inv, ww - jeinsum("kij,kc->ijc", self.local.christoffel, w))
        r_bar = self.target.riemann_up.value  # [c, d, a, b]: R(d_a, d_b) d_d
        dphi = self.dphi.value
        curv = np.einsum("ij,cdab,ai,b,dj->c", g_inv.value, r_bar, dphi, tau.value, dphi)
        return tau, rough.value - curv

    def norm(self, v: np.ndarray) -> float:
        h = self.target.metric.value
        return float(np.sqrt(max(v @ h @ v, 0.0)))


def differential(phi: SmoothMap, p) -> np.ndarray:
    """``dphi[a, i] = d phi^a / d x^i`` at ``p``."""
    local = LocalGeometry(phi.source, p, 1)
    return phi.jet(local).gradient().value.copy()


def tension(phi: SmoothMap, p) -> TensionResult:
    mj = _MapJets(phi, p, 2)
    tau = mj.tension().value.copy()
    return TensionResult(mj.local.point, mj.image, tau, mj.norm(tau))


def bitension(phi: SmoothMap, p) -> TensionResult:
    mj = _MapJets(phi, p, 4)
    _, tau2 = mj.bitension()
    return TensionResult(mj.local.point, mj.image, tau2, mj.norm(tau2))


def tension_and_bitension(phi: SmoothMap, p) -> tuple[TensionResult, TensionResult]:
    mj = _MapJets(phi, p, 4)
    tau, tau2 = mj.bitension()
    tau = tau.value.copy()
    return (TensionResult(mj.local.point, mj.image, tau, mj.norm(tau)),
            TensionResult(mj.local.point, mj.image, tau2, mj.norm(tau2)))


# --- Riemannian submersions ---------------------------------------------------------------------

def vertical_field_jet(phi: SmoothMap, local: LocalGeometry) -> Jet:
    """Unit field spanning ``ker dphi`` for a map from a 3-manifold to a surface.

    The sign is whatever the cross product of the component gradients gives;
    callers that report it normalise with :func:`_orient`.
    """
    if phi.source.dim != 3 or phi.target.dim != 2:
        raise GeometryError("vertical field needs a 3-manifold mapped to a surface")
    dphi = phi.jet(local).gradient()
    r1, r2 = dphi[0], dphi[1]
    v = Jet.stack([r1[1] * r2[2] - r1[2] * r2[1],
                   r1[2] * r2[0] - r1[0] * r2[2],
                   r1[0] * r2[1] - r1[1] * r2[0]])
    length2 = jeinsum("a,ab->b", v, local.metric.truncate(v.order))
    length2 = jeinsum("b,b->", length2, v)
    return v * sqrt(length2).reciprocal()


def _orient(vec_in_reference: np.ndarray) -> float:
    for c in vec_in_reference:
        if abs(c) > SIGN_TOL:
            return 1.0 if c > 0 else -1.0
    return 1.0


def mean_curvature_pushforward(phi: SmoothMap, p) -> np.ndarray:
    """``dphi(D_{e3} e3)`` for the unit vertical field ``e3``."""
    local = LocalGeometry(phi.source, p, 2)
    e3 = vertical_field_jet(phi, local)
    v = e3.value
    de3 = e3.gradient().value  # [a, b] = d_b e3^a
    acc = de3 @ v + np.einsum("abc,b,c->a", local.christoffel.value, v, v)
    return differential(phi, p) @ acc


def default_samples(dim: int, n: int = DEFAULT_SAMPLES, box: float = 2.0) -> np.ndarray:
    """Deterministic quasi-random points in ``[-box, box]^dim`` (Halton)."""
    unit = qmc.Halton(d=dim, scramble=False).random(n + 1)[1:]
    return -box + 2.0 * box * unit


@dataclass
class SubmersionReport:
    passed: bool
    worst_residual: float
    vertical: list  # unit vertical vectors, in the reference frame when given
    failures: list  # (point, reason)


def is_riemannian_submersion(phi: SmoothMap, points: Sequence | None = None, tol: float = 1e-9,
                             reference: FrameField | None = None) -> SubmersionReport:
    """Check that ``dphi`` is an isometry on the horizontal space at every sample.

    The vertical vector is reported in ``reference`` components (coordinate
    components if no reference is given), signed so its first nonzero entry
    is positive.
    """
    if phi.source.dim != phi.target.dim + 1:
        raise GeometryError("submersion check needs fibres of dimension one")
    if points is None:
        points = default_samples(phi.source.dim)
    worst = 0.0
    verticals, failures = [], []
    for p in points:
        local = LocalGeometry(phi.source, p, 1)
        g = local.metric.value
        d = phi.jet(local).gradient().value
        sv = np.linalg.svd(d, compute_uv=False)
        if sv[-1] <= RANK_TOL * max(sv[0], 1.0):
            failures.append((list(local.point), "differential is rank deficient"))
            worst = np.inf
            continue
        # horizontal space = image of g^-1 dphi^T
        basis = np.linalg.solve(g, d.T)
        cols = []
        for k in range(basis.shape[1]):
            x = basis[:, k].copy()
            for c in cols:
                x -= (c @ g @ x) * c
            cols.append(x / np.sqrt(x @ g @ x))
        horizontal = np.array(cols).T
        h = phi.target.metric_jet(phi.jet(local).value, 0).value
        pushed = d @ horizontal
        residual = float(np.max(np.abs(pushed.T @ h @ pushed - np.eye(pushed.shape[1]))))
        if residual > tol:
            failures.append((list(local.point), f"horizontal isometry residual {residual:.3g}"))
        worst = max(worst, residual)
        null = np.linalg.svd(d)[2][-1]
        v = null / np.sqrt(null @ g @ null)
        if reference is not None:
            comps = local.frame(reference).value @ g @ v
        else:
            comps = v
        verticals.append(list(comps * _orient(comps)))
    return SubmersionReport(not failures, float(worst), verticals, failures)
