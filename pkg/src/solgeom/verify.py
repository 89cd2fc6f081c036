"""The verification suite behind ``paper-verify``.

Each check names the catalog entries it uses and the published example values
it covers.  :func:`assemble` refuses to build the suite when a catalog entry
is missing, when some catalog entry is unused, or when a published value has
no check, so coverage is asserted rather than assumed.

Record order is the order of ``CHECKS``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import catalog
from . import geometry as geo
from . import mapcalc as mc
from . import submersion as sub
from .sampling import SplitMix64, random_points

DEFAULT_TOLERANCES = {"identity": 1e-9, "curvature": 1e-7, "bitension": 1e-6}

# published example values that the suite must cover
PUBLISHED = (
    "sol-metric-at-001", "so3-r1212", "so3-r1313-r2323", "gauss-hyperbolic-xz", "gauss-hyperbolic-yz",
    "so1-brackets", "case1-brackets", "so2-connection", "case2-connection", "case1-components",
    "cr1-zero-components", "pi1-differential", "pi1-submersion", "pi2-submersion",
    "pi2-bitension-norm", "example-biharmonic", "example-proper-biharmonic", "case1-data",
    "case2-data", "case1-rc0-line4", "case1-base-curvature", "case2-base-curvature",
    "case1-not-harmonic", "case2-not-harmonic", "case1-pro1", "case2-pro1",
)


@dataclass
class Context:
    points: np.ndarray  # (n, 3) sample points of Sol
    seed: int
    restarts: int
    tolerances: dict

    def plane(self, axes) -> np.ndarray:
        return self.points[:, list(axes)]


@dataclass(frozen=True)
class Check:
    name: str
    anchor: str
    uses: tuple
    covers: tuple
    run: Callable


def record(name, anchor, points, worst, tolerance, value=None, passed=None, note=None) -> dict:
    if passed is None:
        passed = bool(worst is not None and tolerance is not None and worst <= tolerance)
    out = {"name": name, "anchor": anchor,
           "points": [[float(x) for x in p] for p in np.atleast_2d(points)] if points is not None else [],
           "worst_residual": None if worst is None else float(worst),
           "tolerance": None if tolerance is None else float(tolerance),
           "pass": bool(passed)}
    if value is not None:
        out["value"] = value
    if note:
        out["note"] = note
    return out


def _worst(values) -> float:
    return float(max((abs(v) for v in values), default=0.0))


# --- expected tables ------------------------------------------------------------------------

def _so3_expected() -> np.ndarray:
    r = np.zeros((3, 3, 3, 3))
    for (i, j), k in {(0, 1): 1.0, (0, 2): -1.0, (1, 2): -1.0}.items():
        r[i, j, i, j] = r[j, i, j, i] = k
        r[i, j, j, i] = r[j, i, i, j] = -k
    return r


def _connection_table(entries) -> np.ndarray:
    """``w[i, j, k]`` from {(i, j): {k: coefficient}} (1-based indices)."""
    w = np.zeros((3, 3, 3))
    for (i, j), terms in entries.items():
        for k, c in terms.items():
            w[i - 1, j - 1, k - 1] = c
    return w


def _bracket_table(entries) -> np.ndarray:
    c = np.zeros((3, 3, 3))
    for (i, j), terms in entries.items():
        for k, v in terms.items():
            c[i - 1, j - 1, k - 1] = v
            c[j - 1, i - 1, k - 1] = -v
    return c


SO1 = _bracket_table({(1, 3): {1: 1.0}, (2, 3): {2: -1.0}})
SO2 = _connection_table({(1, 1): {3: -1.0}, (1, 3): {1: 1.0}, (2, 2): {3: 1.0}, (2, 3): {2: -1.0}})
CASE1_BRACKETS = _bracket_table({(1, 2): {2: 1.0}, (1, 3): {3: -1.0}})
CASE1_CONNECTION = _connection_table({(2, 1): {2: -1.0}, (2, 2): {1: 1.0}, (3, 1): {3: 1.0}, (3, 3): {1: -1.0}})
# D_{e2} e1 = +e2 here: D_{E1} E3 = E1 forces it, although one display prints -e2
CASE2_CONNECTION = _connection_table({(2, 1): {2: 1.0}, (2, 2): {1: -1.0}, (3, 1): {3: -1.0}, (3, 3): {1: 1.0}})
CASE1_DATA = {"f1": 0.0, "f2": 1.0, "f3": 0.0, "k1": -1.0, "k2": 0.0, "sigma": 0.0}
CASE2_DATA = {"f1": 0.0, "f2": -1.0, "f3": 0.0, "k1": 1.0, "k2": 0.0, "sigma": 0.0}


# --- checks ------------------------------------------------------------------------------------

def _metric(ctx):
    p = np.array([0.0, 0.0, 1.0])
    g = geo.metric_at(catalog.get("sol"), p)
    want = np.diag([np.e ** 2, np.e ** -2, 1.0])
    return record("metric/sol", "Sol metric", p, np.max(np.abs(g - want)), ctx.tolerances["identity"],
                  value=np.diag(g).tolist())


def _so3(ctx):
    f = catalog.get("sol_frame")
    want = _so3_expected()
    worst = _worst(np.max(np.abs(geo.frame_curvature(f, p) - want)) for p in ctx.points)
    return record("curvature/sol_frame", "So3: R_1212 = 1, R_1313 = R_2323 = -1", ctx.points, worst,
                  ctx.tolerances["identity"], value={"R1212": 1.0, "R1313": -1.0, "R2323": -1.0})


def _gauss(name, axes, anchor):
    def run(ctx):
        m = catalog.get(name)
        pts = ctx.plane(axes)
        ks = [geo.gauss_curvature(m, p) for p in pts]
        return record(f"gauss/{name}", anchor, pts, _worst(k + 1 for k in ks), ctx.tolerances["identity"],
                      value=ks[0])
    return run


def _table(kind, frame, want, anchor, fn):
    def run(ctx):
        f = catalog.get(frame)
        worst = _worst(np.max(np.abs(fn(f, p) - want)) for p in ctx.points)
        return record(f"{kind}/{frame}", anchor, ctx.points, worst, ctx.tolerances["identity"])
    return run


def _components(frame, rows, anchor):
    def run(ctx):
        f, ref = catalog.get(frame), catalog.get("sol_frame")
        want = np.array(rows, dtype=float)
        worst = _worst(np.max(np.abs(geo.frame_components(f, ref, p) - want)) for p in ctx.points)
        return record(f"components/{frame}", anchor, ctx.points, worst, ctx.tolerances["identity"],
                      value=rows)
    return run


def _frame_alias(ctx):
    # the two Case I signs must give the same reported residuals
    a, b = catalog.get("case1"), catalog.get("case1_alias")
    worst = 0.0
    for p in ctx.points:
        da, db = sub.integrability_data(a, p), sub.integrability_data(b, p)
        worst = max(worst, max(abs(da.values()[k] - db.values()[k]) for k in sub.NAMES))
        ra, rb = sub.check_curvature_identities(a, p), sub.check_curvature_identities(b, p)
        worst = max(worst, max(abs(abs(x.residual) - abs(y.residual)) for x, y in zip(ra.entries, rb.entries)))
        worst = max(worst, float(np.max(np.abs(sub.biharmonic_residual(da) - sub.biharmonic_residual(db)))))
    return record("alias/case1", "Case I frame, e3 = -E1 and e3 = E1", ctx.points, worst,
                  ctx.tolerances["identity"])


def _differential(ctx):
    phi = catalog.get("pi1")
    want = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    worst = _worst(np.max(np.abs(mc.differential(phi, p) - want)) for p in ctx.points)
    return record("differential/pi1", "re2(a): pi(x,y,z) = (y,z)", ctx.points, worst,
                  ctx.tolerances["identity"], value=want.tolist())


def _submersion(name, vertical, anchor):
    def run(ctx):
        phi = catalog.get(name)
        rep = mc.is_riemannian_submersion(phi, ctx.points, ctx.tolerances["identity"],
                                          reference=catalog.get("sol_frame"))
        dev = _worst(np.max(np.abs(np.array(v) - vertical)) for v in rep.vertical)
        worst = max(rep.worst_residual, dev)
        return record(f"submersion/{name}", anchor, ctx.points, worst, ctx.tolerances["identity"],
                      value={"vertical": list(vertical)})
    return run


def _norm(kind, name, expected, anchor, tol_key):
    fn = mc.tension if kind == "tension" else mc.bitension

    def run(ctx):
        phi = catalog.get(name)
        norms = [fn(phi, p).norm for p in ctx.points]
        return record(f"{kind}-norm/{name}", anchor, ctx.points, _worst(n - expected for n in norms),
                      ctx.tolerances[tol_key], value=norms[0])
    return run


def _identity_map(ctx):
    phi = catalog.get("sol_identity")
    worst = 0.0
    for p in ctx.points[:10]:
        t, b = mc.tension_and_bitension(phi, p)
        worst = max(worst, t.norm, b.norm, float(np.max(np.abs(mc.differential(phi, p) - np.eye(3)))))
    return record("harmonic/sol_identity", "identity of Sol: tau = tau2 = 0", ctx.points[:10], worst,
                  ctx.tolerances["identity"])


def _example_params(seed: int, n: int = 10) -> list:
    rng = SplitMix64(seed ^ 0xE4A)
    out = []
    while len(out) < n:
        a, b, c, d = rng.uniform(-2.0, 2.0, 4)
        if a * a + b * b > 0.01:
            out.append((a, b, c, d))
    return out


def _example(ctx):
    base = catalog.get("biharmonic_example")
    worst = 0.0
    for k, (a, b, c, d) in enumerate(_example_params(ctx.seed)):
        phi = base.with_params(A=a, B=b, C=c, D=d)
        for p in ctx.points[5 * k:5 * k + 5]:
            worst = max(worst, mc.bitension(phi, p).norm)
    return record("bitension/biharmonic_example", "Example: (y, Az^3+Bz^2+Cz+D) are biharmonic",
                  ctx.points[:50], worst, ctx.tolerances["bitension"])


def _proper(ctx):
    phi = catalog.get("biharmonic_example")
    p = np.array([0.0, 0.0, 1.0])
    t, b = mc.tension_and_bitension(phi, p)
    ok = b.norm <= ctx.tolerances["bitension"] and t.norm > 1.0
    return record("proper-biharmonic/biharmonic_example", "Example: A^2+B^2 > 0 proper biharmonic", p,
                  b.norm, ctx.tolerances["bitension"], value={"tension_norm": t.norm, "bitension_norm": b.norm},
                  passed=ok)


def _data(frame, want, anchor):
    def run(ctx):
        f = catalog.get(frame)
        worst = 0.0
        for p in ctx.points:
            d = sub.integrability_data(f, p)
            v = d.values()
            worst = max(worst, d.defect, max(abs(v[k] - want[k]) for k in sub.NAMES))
        return record(f"integrability/{frame}", anchor, ctx.points, worst, ctx.tolerances["identity"],
                      value=want)
    return run


def _report_record(name, anchor, points, reports, tol, value=None):
    worst = max((r.worst for r in reports), default=0.0)
    notes = sorted({e.note for r in reports for e in r.entries if e.note and e.label != "R1-form"})
    return record(name, anchor, points, worst, tol, value=value, note="; ".join(notes[:1]) or None)


def _rc0(frame, line4):
    def run(ctx):
        f = catalog.get(frame)
        reports = [sub.check_curvature_identities(f, p, ctx.tolerances["curvature"]) for p in ctx.points]
        value = None
        if line4 is not None:
            d = sub.integrability_data(f, ctx.points[0])
            value = {"line4": float(d.frame_curvature()[0, 1, 0, 1])}
            line_dev = _worst(sub.integrability_data(f, p).frame_curvature()[0, 1, 0, 1] - line4
                              for p in ctx.points)
            reports[0].add("RC0.4:value", ctx.points[0], line_dev, ctx.tolerances["curvature"])
        return _report_record(f"RC0/{frame}", "RC0", ctx.points, reports, ctx.tolerances["curvature"], value)
    return run


def _identity_suite(label, fn, frames, tol_key):
    def run(ctx):
        reports = [fn(catalog.get(f), p, ctx.tolerances[tol_key]) for f in frames for p in ctx.points]
        return _report_record(f"{label}/catalog", label, ctx.points, reports, ctx.tolerances[tol_key],
                              value={"frames": list(frames)})
    return run


def _base_curvature(frame, anchor):
    def run(ctx):
        f = catalog.get(frame)
        worst, value = 0.0, None
        for p in ctx.points:
            bc = sub.gauss_curvature_base(sub.integrability_data(f, p))
            value = bc.value if value is None else value
            worst = max(worst, abs(bc.value + 1), abs(bc.adapted_value + 1), abs(bc.fiber_residual))
        return record(f"base-curvature/{frame}", anchor, ctx.points, worst, ctx.tolerances["identity"],
                      value=value)
    return run


def _harmonic(frame, expected, anchor):
    def run(ctx):
        data = sub.sample_data(catalog.get(frame), ctx.points)
        got = sub.is_harmonic(data)
        return record(f"harmonic/{frame}", anchor, ctx.points, None, None, value=got, passed=got == expected)
    return run


def _biharmonic_form(frame, expected, anchor, note=None):
    # Delta k1 - k1 (-K + f2^2) as written in the case computations: minus the
    # first left-hand side of the biharmonic system
    def run(ctx):
        f = catalog.get(frame)
        values = [-float(sub.biharmonic_residual(sub.integrability_data(f, p))[0]) for p in ctx.points]
        if note:
            worst = _worst(abs(v) - expected for v in values)
        else:
            worst = _worst(v - expected for v in values)
        return record(f"biharmonic/{frame}", anchor, ctx.points, worst, ctx.tolerances["identity"],
                      value=values[0], note=note)
    return run


def _pushforward(name):
    def run(ctx):
        phi = catalog.get(name)
        worst = _worst(np.linalg.norm(mc.tension(phi, p).components + mc.mean_curvature_pushforward(phi, p))
                       for p in ctx.points)
        return record(f"mean-curvature/{name}", "PH: tau = -dpi(D_e3 e3)", ctx.points, worst, 1e-8)
    return run


def _harmonic_control(ctx):
    phi = catalog.get("euclid_pi")
    rep = mc.is_riemannian_submersion(phi, ctx.points, ctx.tolerances["identity"])
    worst = max([rep.worst_residual] + [mc.tension(phi, p).norm for p in ctx.points])
    data = sub.sample_data(catalog.get("euclid_frame"), ctx.points[:10])
    data += sub.sample_data(catalog.get("euclid_rotated"), ctx.points[:10])
    return record("harmonic/euclid_pi", "PH: k1 = k2 = 0 iff harmonic", ctx.points, worst,
                  ctx.tolerances["identity"], value=sub.is_harmonic(data),
                  passed=worst <= ctx.tolerances["identity"] and sub.is_harmonic(data))


def _cross(name, frame):
    def run(ctx):
        phi, f = catalog.get(name), catalog.get(frame)
        worst = 0.0
        for p in ctx.points:
            bt = mc.bitension(phi, p).norm
            pro = float(np.linalg.norm(sub.biharmonic_residual(sub.integrability_data(f, p))))
            worst = max(worst, abs(bt - pro))
        return record(f"cross-check/{name}/{frame}", "BT1 vs pro1", ctx.points, worst,
                      ctx.tolerances["bitension"])
    return run


def _probe(ctx):
    res = sub.probe_rch_infeasibility(ctx.restarts, ctx.seed)
    ctrl = sub.probe_rch_infeasibility(ctx.restarts, ctx.seed, control=True)
    ok = res.min_residual >= 0.9 and ctrl.min_residual < 1e-8
    return record("probe-rch", "RCH: sigma^2 = -1, a contradiction", None, None, None,
                  value={"min_residual": res.min_residual, "argmin": list(res.argmin),
                         "control_min_residual": ctrl.min_residual, "restarts": ctx.restarts},
                  passed=ok)


SUBMERSION_FRAMES = ("case1", "case1_alias", "case2", "pi1_rotated", "pi1_twisted", "pi1_geodesic",
                     "cr1_0", "euclid_frame", "euclid_rotated", "euclid_twisted")
SOL_FOLIATED = ("case1", "case2", "pi1_rotated", "pi1_twisted", "pi1_geodesic", "cr1_0")

CHECKS = [
    Check("metric/sol", "Sol metric", ("sol",), ("sol-metric-at-001",), _metric),
    Check("curvature/sol_frame", "So3", ("sol", "sol_frame"), ("so3-r1212", "so3-r1313-r2323"), _so3),
    Check("gauss/hyperbolic_xz", "K^N = -1", ("hyperbolic_xz",), ("gauss-hyperbolic-xz",),
          _gauss("hyperbolic_xz", (0, 2), "K^N = -1")),
    Check("gauss/hyperbolic_yz", "K^N = -1", ("hyperbolic_yz",), ("gauss-hyperbolic-yz",),
          _gauss("hyperbolic_yz", (1, 2), "re2(a) base, K^N = -1")),
    Check("bracket/sol_frame", "So1", ("sol_frame",), ("so1-brackets",),
          _table("bracket", "sol_frame", SO1, "So1", geo.frame_bracket)),
    Check("bracket/case1", "Case I", ("case1",), ("case1-brackets",),
          _table("bracket", "case1", CASE1_BRACKETS, "Case I: [e1,e2] = e2, [e1,e3] = -e3", geo.frame_bracket)),
    Check("connection/sol_frame", "So2", ("sol_frame",), ("so2-connection",),
          _table("connection", "sol_frame", SO2, "So2", geo.frame_connection)),
    Check("connection/case1", "Case I", ("case1",), (),
          _table("connection", "case1", CASE1_CONNECTION, "Case I connection", geo.frame_connection)),
    Check("connection/case2", "th6", ("case2",), ("case2-connection",),
          _table("connection", "case2", CASE2_CONNECTION, "th6", geo.frame_connection)),
    Check("components/case1", "Case I", ("case1",), ("case1-components",),
          _components("case1", [[0, 0, 1], [0, 1, 0], [-1, 0, 0]], "Case I: e3 = -E1")),
    Check("components/cr1_0", "CR1", ("cr1_0",), ("cr1-zero-components",),
          _components("cr1_0", [[0, 1, 0], [0, 0, 1], [1, 0, 0]], "CR1 with theta = alpha = 0")),
    Check("alias/case1", "Case I", ("case1", "case1_alias"), (), _frame_alias),
    Check("differential/pi1", "re2(a)", ("pi1",), ("pi1-differential",), _differential),
    Check("submersion/pi1", "re2(a)", ("pi1",), ("pi1-submersion",),
          _submersion("pi1", (1.0, 0.0, 0.0), "re2(a): Riemannian submersion, vertical E1")),
    Check("submersion/pi2", "re2(b)", ("pi2",), ("pi2-submersion",),
          _submersion("pi2", (0.0, 1.0, 0.0), "re2(b): Riemannian submersion, vertical E2")),
    Check("tension-norm/pi1", "HTh", ("pi1",), (),
          _norm("tension", "pi1", 1.0, "no harmonic Riemannian submersion from Sol", "identity")),
    Check("tension-norm/pi2", "HTh", ("pi2",), (),
          _norm("tension", "pi2", 1.0, "no harmonic Riemannian submersion from Sol", "identity")),
    Check("bitension-norm/pi1", "be2", ("pi1",), (),
          _norm("bitension", "pi1", 2.0, "be2: = 0 + 1 x 2 = 2 != 0", "bitension")),
    Check("bitension-norm/pi2", "be2", ("pi2",), ("pi2-bitension-norm",),
          _norm("bitension", "pi2", 2.0, "be2: = 0 + 1 x 2 = 2 != 0", "bitension")),
    Check("harmonic/sol_identity", "identity", ("sol_identity",), (), _identity_map),
    Check("bitension/biharmonic_example", "Example", ("biharmonic_example", "euclidean2"),
          ("example-biharmonic",), _example),
    Check("proper-biharmonic/biharmonic_example", "Example", ("biharmonic_example",),
          ("example-proper-biharmonic",), _proper),
    Check("integrability/case1", "Case I", ("case1",), ("case1-data",),
          _data("case1", CASE1_DATA, "Case I: f1 = f3 = k2 = sigma = 0, k1 = -f2 = -1")),
    Check("integrability/case2", "Case II", ("case2",), ("case2-data",),
          _data("case2", CASE2_DATA, "Case II: k1 = -f2 = 1")),
    Check("RC0/case1", "RC0", ("case1",), ("case1-rc0-line4",), _rc0("case1", -1.0)),
    Check("RC0/case2", "RC0", ("case2",), (), _rc0("case2", None)),
    Check("RC0/catalog", "RC0", SOL_FOLIATED, (),
          _identity_suite("RC0", sub.check_curvature_identities, SOL_FOLIATED, "curvature")),
    Check("Jac/catalog", "Jac", SUBMERSION_FRAMES + ("euclidean3",), (),
          _identity_suite("Jac", sub.check_jacobi, SUBMERSION_FRAMES, "identity")),
    Check("GCB0/catalog", "GCB0", SUBMERSION_FRAMES, (),
          _identity_suite("GCB0", sub.check_base_curvature, SUBMERSION_FRAMES, "identity")),
    Check("thb2/catalog", "thb2", ("case1", "case2", "pi1_geodesic"), (),
          _identity_suite("thb2", sub.check_thb2, ("case1", "case2", "pi1_geodesic"), "identity")),
    Check("base-curvature/case1", "GCB1", ("case1",), ("case1-base-curvature",),
          _base_curvature("case1", "K^N = e1(f2) - f2^2 = -1")),
    Check("base-curvature/case2", "GCB1", ("case2",), ("case2-base-curvature",),
          _base_curvature("case2", "K^N = -1")),
    Check("harmonic/case1", "PH", ("case1",), ("case1-not-harmonic",),
          _harmonic("case1", False, "PH: k1 = -1, not harmonic")),
    Check("harmonic/case2", "PH", ("case2",), ("case2-not-harmonic",),
          _harmonic("case2", False, "PH: k1 = 1, not harmonic")),
    Check("harmonic/euclid_pi", "PH", ("euclid_pi", "euclid_frame", "euclid_rotated"), (), _harmonic_control),
    Check("mean-curvature/pi1", "PH", ("pi1",), (), _pushforward("pi1")),
    Check("mean-curvature/pi2", "PH", ("pi2",), (), _pushforward("pi2")),
    Check("biharmonic/case1", "be2", ("case1",), ("case1-pro1",),
          _biharmonic_form("case1", 2.0, "be2: = 0 + 1 x 2 = 2 != 0")),
    Check("biharmonic/case2", "be3", ("case2",), ("case2-pro1",),
          _biharmonic_form("case2", 2.0, "be3: = 0 + 1 x 2 = 2",
                           note="the same expression evaluates to -2 with k1 = 1; the check compares magnitudes")),
    Check("cross-check/pi1/case1", "BT1 vs pro1", ("pi1", "case1"), (), _cross("pi1", "case1")),
    Check("cross-check/pi1/pi1_rotated", "BT1 vs pro1", ("pi1", "pi1_rotated"), (), _cross("pi1", "pi1_rotated")),
    Check("cross-check/pi2/case2", "BT1 vs pro1", ("pi2", "case2"), (), _cross("pi2", "case2")),
    Check("probe-rch", "RCH", (), (), _probe),
]


class CoverageError(RuntimeError):
    pass


def assemble(checks=None) -> list:
    """Validate coverage and return the ordered checks."""
    checks = list(CHECKS if checks is None else checks)
    names = set(catalog.entries())
    used = set()
    for c in checks:
        missing = [u for u in c.uses if u not in names]
        if missing:
            raise CoverageError(f"check {c.name!r} needs missing catalog entries {missing}")
        used.update(c.uses)
    # manifolds are used through the frames and maps built on them
    for n in list(used):
        payload = catalog.entries()[n].payload
        for attr in ("manifold", "source", "target"):
            m = getattr(payload, attr, None)
            if m is not None:
                used.add(m.name)
    unused = names - used
    if unused:
        raise CoverageError(f"catalog entries not exercised by the suite: {sorted(unused)}")
    covered = {x for c in checks for x in c.covers}
    uncovered = set(PUBLISHED) - covered
    if uncovered:
        raise CoverageError(f"published values without a check: {sorted(uncovered)}")
    return checks


def run_suite(points=None, seed: int = 0, restarts: int = 1000, tolerances=None) -> list:
    ctx = Context(random_points(50, seed, 3) if points is None else np.asarray(points, dtype=float),
                  seed, restarts, {**DEFAULT_TOLERANCES, **(tolerances or {})})
    return [c.run(ctx) for c in assemble()]
