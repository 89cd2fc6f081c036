import math

import numpy as np
import pytest

import oracles
from solgeom import catalog
from solgeom import geometry as geo
from solgeom.expr import parse
from solgeom.geometry import ChartedManifold, FrameField, LocalGeometry
from solgeom.sampling import random_points

SO3 = {(0, 1, 0, 1): 1.0, (0, 2, 0, 2): -1.0, (1, 2, 1, 2): -1.0}


def so3_tensor():
    r = np.zeros((3, 3, 3, 3))
    for (i, j, k, l), v in SO3.items():
        r[i, j, k, l] = r[j, i, l, k] = v
        r[j, i, k, l] = r[i, j, l, k] = -v
    return r


def manifolds():
    return [catalog.get(n) for n, e in catalog.entries().items() if e.kind == "manifold"]


# --- metric ---------------------------------------------------------------------------------------

def test_sol_metric_at_origin(sol):
    np.testing.assert_array_equal(geo.metric_at(sol, [0, 0, 0]), np.eye(3))


def test_sol_metric_at_unit_height(sol):
    np.testing.assert_allclose(geo.metric_at(sol, [0, 0, 1]), np.diag([math.e ** 2, math.e ** -2, 1]),
                               rtol=1e-15)


def test_euclidean_metric_is_identity():
    np.testing.assert_array_equal(geo.metric_at(catalog.euclidean(2), [3.0, -7.0]), np.eye(2))


@pytest.mark.parametrize("m", manifolds(), ids=lambda m: m.name)
def test_inverse_metric(m):
    for p in random_points(20, 1, m.dim):
        g, gi = geo.metric_at(m, p), geo.inverse_metric_at(m, p)
        assert np.max(np.abs(g @ gi - np.eye(m.dim))) < 1e-12
        np.testing.assert_array_equal(g, g.T)


def test_indefinite_metric_names_point():
    m = ChartedManifold.diagonal("bad", ("x", "y"), ["1", "x"])
    geo.metric_at(m, [1.0, 0.0])
    with pytest.raises(geo.MetricError, match=r"\[-0\.5, 2\.0\]"):
        geo.metric_at(m, [-0.5, 2.0])


def test_point_must_bind_every_coordinate(sol):
    with pytest.raises(geo.GeometryError):
        geo.metric_at(sol, {"x": 0.0, "y": 1.0})
    with pytest.raises(geo.GeometryError):
        geo.metric_at(sol, [0.0, 1.0])


def test_asymmetric_metric_rejected():
    one, x, y = parse("1"), parse("x"), parse("y")
    with pytest.raises(geo.GeometryError):
        ChartedManifold("m", ("x", "y"), ((one, x), (y, one)))


# --- Christoffel symbols ----------------------------------------------------------------------------

def test_sol_christoffel_closed_form(sol):
    for p in random_points(10, 2, 3):
        z = p[2]
        expected = np.zeros((3, 3, 3))
        expected[0, 0, 2] = expected[0, 2, 0] = 1.0
        expected[2, 0, 0] = -math.exp(2 * z)
        expected[1, 1, 2] = expected[1, 2, 1] = -1.0
        expected[2, 1, 1] = math.exp(-2 * z)
        np.testing.assert_allclose(geo.christoffel(sol, p), expected, rtol=1e-14, atol=1e-15)


def test_hyperbolic_christoffel_closed_form():
    m = catalog.hyperbolic_xz()
    for p in random_points(10, 3, 2):
        expected = np.zeros((2, 2, 2))
        expected[0, 0, 1] = expected[0, 1, 0] = 1.0
        expected[1, 0, 0] = -math.exp(2 * p[1])
        np.testing.assert_allclose(geo.christoffel(m, p), expected, rtol=1e-14, atol=1e-15)


def test_euclidean_christoffel_zero():
    assert not np.any(geo.christoffel(catalog.euclidean(2), [0.3, 0.4]))


def test_christoffel_matches_symbolic_for_a_full_metric():
    rows = [["2 + x^2", "x*y", "0"], ["x*y", "1 + y^2 + z^2", "0"], ["0", "0", "exp(x*z)"]]
    sym = oracles.SymbolicManifold(("x", "y", "z"), rows, simplify=False)
    m = ChartedManifold.from_upper("full", ("x", "y", "z"), [r[i:] for i, r in enumerate(rows)])
    for p in random_points(5, 4, 3, box=0.8):
        np.testing.assert_allclose(geo.christoffel(m, p), sym.christoffel_at(p), rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(geo.riemann_lowered(m, p).components, sym.riemann_at(p),
                                   rtol=1e-10, atol=1e-10)


@pytest.mark.parametrize("m", manifolds(), ids=lambda m: m.name)
def test_metric_compatibility_and_torsion_free(m):
    for p in random_points(30, 5, m.dim):
        local = LocalGeometry(m, p, 1)
        g = local.metric
        gam = local.christoffel.value
        dg = np.stack([g.diff(k).value for k in range(m.dim)])  # dg[k, i, j]
        compat = dg - np.einsum("lki,lj->kij", gam, g.value) - np.einsum("lkj,il->kij", gam, g.value)
        assert np.max(np.abs(compat)) < 1e-9
        assert np.max(np.abs(gam - gam.transpose(0, 2, 1))) < 1e-9


# --- curvature ---------------------------------------------------------------------------------------

@pytest.mark.parametrize("m", manifolds(), ids=lambda m: m.name)
def test_curvature_symmetries_at_100_points(m):
    for p in random_points(100, 6, m.dim):
        assert geo.riemann_lowered(m, p).symmetry_residual() < 1e-9


def test_sol_frame_curvature_golden(sol, points50):
    expected = so3_tensor()
    for p in points50:
        r = geo.frame_curvature(catalog.sol_frame(), p)
        assert np.max(np.abs(r - expected)) < 1e-9


def test_sol_curvature_matches_symbolic(sol):
    sym = oracles.sol_symbolic()
    for p in random_points(5, 7, 3):
        np.testing.assert_allclose(geo.riemann_lowered(sol, p).components, sym.riemann_at(p),
                                   rtol=1e-11, atol=1e-11)


def test_curvature_convention_on_round_sphere():
    # unit sphere, K = +1: g(R(X, Y)Y, X) = 1 for orthonormal X, Y
    m = ChartedManifold.diagonal("s2", ("t", "u"), ["1", "sin(t)^2"])
    p = [1.1, 0.3]
    r = geo.riemann_lowered(m, p)
    v = np.array([[1.0, 0.0], [0.0, 1 / math.sin(1.1)]])
    assert r.in_frame(v)[0, 1, 0, 1] == pytest.approx(1.0, abs=1e-12)
    assert geo.gauss_curvature(m, p) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("name", ["hyperbolic_xz", "hyperbolic_yz"])
def test_hyperbolic_gauss_curvature(name, points50):
    m = catalog.get(name)
    for p in random_points(50, 8, 2):
        assert abs(geo.gauss_curvature(m, p) + 1.0) < 1e-9


def test_euclidean_plane_flat():
    assert geo.gauss_curvature(catalog.euclidean(2), [1.0, 2.0]) == 0.0
    assert not np.any(geo.riemann_lowered(catalog.euclidean(2), [1.0, 2.0]).components)


def test_gauss_curvature_needs_surface(sol):
    with pytest.raises(geo.GeometryError):
        geo.gauss_curvature(sol, [0, 0, 0])


def test_sol_ricci_in_frame(sol):
    # Ric(E1,E1) = K12 + K13 = 0, Ric(E2,E2) = 0, Ric(E3,E3) = -2
    p = [0.3, -0.4, 0.9]
    v = geo.LocalGeometry(sol, p, 0).frame(catalog.sol_frame()).value
    np.testing.assert_allclose(v @ geo.ricci(sol, p) @ v.T, np.diag([0.0, 0.0, -2.0]), atol=1e-12)


# --- frames ---------------------------------------------------------------------------------------------

def test_sol_brackets(sol, points50):
    expected = np.zeros((3, 3, 3))
    expected[0, 2, 0], expected[2, 0, 0] = 1.0, -1.0
    expected[1, 2, 1], expected[2, 1, 1] = -1.0, 1.0
    for p in points50[:10]:
        np.testing.assert_allclose(geo.frame_bracket(catalog.sol_frame(), p), expected, atol=1e-12)


def test_case1_brackets():
    c = geo.frame_bracket(catalog.case1_frame(), [0.2, 0.5, -1.0])
    expected = np.zeros((3, 3, 3))
    expected[0, 1, 1], expected[1, 0, 1] = 1.0, -1.0
    expected[0, 2, 2], expected[2, 0, 2] = -1.0, 1.0
    np.testing.assert_allclose(c, expected, atol=1e-12)


def test_euclidean_coordinate_brackets_zero():
    assert not np.any(np.abs(geo.frame_bracket(catalog.euclidean_frame(), [1, 2, 3])) > 1e-15)


def _frames():
    return [catalog.get(n) for n, e in catalog.entries().items() if e.kind == "frame"]


@pytest.mark.parametrize("f", _frames(), ids=lambda f: f.name)
def test_bracket_antisymmetry_and_jacobi(f):
    for p in random_points(10, 9, 3):
        local = LocalGeometry(f.manifold, p, 2)
        c = geo.bracket_coefficients(local.frame(f), local.metric)
        cv = c.value
        assert np.max(np.abs(cv + cv.transpose(1, 0, 2))) < 1e-12
        v = local.frame(f).value
        dc = np.einsum("ka,ijla->ijlk", v, c.gradient().value)  # e_k(c_ij^l)
        jac = np.zeros(3)
        for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)]:
            # [[e_i, e_j], e_k] = c_ij^m [e_m, e_k] - e_k(c_ij^l) e_l
            jac += np.einsum("m,ml->l", cv[i, j], cv[:, k, :]) - dc[i, j, :, k]
        assert np.max(np.abs(jac)) < 1e-9


SO2 = {(0, 0): [0, 0, -1], (0, 2): [1, 0, 0], (1, 1): [0, 0, 1], (1, 2): [0, -1, 0],
       (0, 1): [0, 0, 0], (1, 0): [0, 0, 0], (2, 0): [0, 0, 0], (2, 1): [0, 0, 0], (2, 2): [0, 0, 0]}


def test_sol_connection_every_line(points50):
    for p in points50:
        w = geo.frame_connection(catalog.sol_frame(), p)
        for (i, j), row in SO2.items():
            assert np.max(np.abs(w[i, j] - row)) < 1e-10


def test_case2_connection_examples():
    w = geo.frame_connection(catalog.case2_frame(), [0.1, -0.3, 0.6])
    np.testing.assert_allclose(w[1, 1], [-1, 0, 0], atol=1e-12)
    np.testing.assert_allclose(w[2, 2], [1, 0, 0], atol=1e-12)


@pytest.mark.parametrize("f", _frames(), ids=lambda f: f.name)
def test_connection_skew_and_torsion_identity(f):
    for p in random_points(10, 10, 3):
        w = geo.frame_connection(f, p)
        c = geo.frame_bracket(f, p)
        assert np.max(np.abs(w + w.transpose(0, 2, 1))) < 1e-9
        assert np.max(np.abs(w - w.transpose(1, 0, 2) - c)) < 1e-9


def test_frame_components_examples():
    p = [0.4, -1.0, 0.7]
    np.testing.assert_allclose(geo.frame_components(catalog.case1_frame(), catalog.sol_frame(), p),
                               [[0, 0, 1], [0, 1, 0], [-1, 0, 0]], atol=1e-14)
    np.testing.assert_allclose(geo.frame_components(catalog.cr1_frame(0, 0), catalog.sol_frame(), p),
                               [[0, 1, 0], [0, 0, 1], [1, 0, 0]], atol=1e-14)
    f = catalog.pi1_twisted_frame()
    np.testing.assert_allclose(geo.frame_components(f, f, p), np.eye(3), atol=1e-14)


def test_frame_components_orthogonal():
    for p in random_points(20, 11, 3):
        a = geo.frame_components(catalog.pi1_rotated_frame(), catalog.sol_frame(), p)
        assert np.max(np.abs(a @ a.T - np.eye(3))) < 1e-10


def test_non_orthonormal_frame_rejected(sol):
    f = FrameField.from_strings("skew", sol, [["exp(-z)", "0", "0"], ["0.1*exp(-z)", "exp(z)", "0"],
                                              ["0", "0", "1"]])
    with pytest.raises(geo.FrameError):
        geo.frame_bracket(f, [0, 0, 0])
    with pytest.raises(geo.FrameError):
        geo.frame_connection(f, [0, 0, 0])
