import math

import numpy as np
import pytest

import oracles
from solgeom import catalog
from solgeom import mapcalc as mc
from solgeom import submersion as sub
from solgeom.geometry import ChartedManifold, GeometryError
from solgeom.mapcalc import SmoothMap
from solgeom.sampling import random_points

GENERIC = ("x + 0.3*y*z", "z + 0.2*sin(y)")


def generic_map():
    return SmoothMap.from_strings("generic", catalog.sol(), catalog.hyperbolic_xz(), GENERIC)


# --- differential -----------------------------------------------------------------------------------

def test_differential_of_pi1():
    for p in random_points(5, 1, 3):
        np.testing.assert_array_equal(mc.differential(catalog.pi1(), p), [[0, 1, 0], [0, 0, 1]])


def test_differential_of_identity():
    np.testing.assert_array_equal(mc.differential(catalog.sol_identity(), [0.3, 0.1, -2.0]), np.eye(3))


@pytest.mark.parametrize("A, B, C", [(1, 1, 0), (2, -1, 0.5), (0, 3, -2)])
def test_differential_of_cubic_map(A, B, C):
    phi = catalog.biharmonic_example(A, B, C, 0.7)
    np.testing.assert_allclose(mc.differential(phi, [0, 0, 1]), [[0, 1, 0], [0, 0, 3 * A + 2 * B + C]])


def test_map_rejects_unknown_names():
    with pytest.raises(GeometryError):
        SmoothMap.from_strings("bad", catalog.sol(), catalog.euclidean(2), ["y", "w*z"])


def test_map_component_count():
    with pytest.raises(GeometryError):
        SmoothMap.from_strings("bad", catalog.sol(), catalog.euclidean(2), ["y"])


# --- submersions ------------------------------------------------------------------------------------------

@pytest.mark.parametrize("name, vertical", [("pi1", [1, 0, 0]), ("pi2", [0, 1, 0])])
def test_projections_are_riemannian_submersions(name, vertical):
    rep = mc.is_riemannian_submersion(catalog.get(name), reference=catalog.sol_frame())
    assert rep.passed
    assert rep.worst_residual < 1e-9
    assert len(rep.vertical) == mc.DEFAULT_SAMPLES
    np.testing.assert_allclose(rep.vertical, [vertical] * mc.DEFAULT_SAMPLES, atol=1e-12)


def test_projection_into_wrong_metric_fails():
    phi = SmoothMap.from_strings("pi1_flat", catalog.sol(), catalog.euclidean(2), ["y", "z"])
    rep = mc.is_riemannian_submersion(phi, [[0, 0, 0], [0.1, 0.2, 1.0]])
    assert not rep.passed
    # at z = 0 the metrics agree; at z = 1 the unit vector exp(z) d_y has flat length exp(1)
    assert len(rep.failures) == 1
    assert rep.failures[0][0] == [0.1, 0.2, 1.0]
    assert rep.worst_residual == pytest.approx(math.exp(2) - 1, rel=1e-12)


def test_rank_deficient_differential_is_a_failure():
    phi = SmoothMap.from_strings("fold", catalog.euclidean(3), catalog.euclidean(2), ["x", "x*x"])
    rep = mc.is_riemannian_submersion(phi, [[0.5, 0.0, 0.0]])
    assert not rep.passed
    assert "rank" in rep.failures[0][1]


def test_submersion_needs_one_dimensional_fibres():
    with pytest.raises(GeometryError):
        mc.is_riemannian_submersion(catalog.sol_identity())


def test_default_samples():
    pts = mc.default_samples(3)
    assert pts.shape == (64, 3)
    assert np.all(np.abs(pts) <= 2.0)
    np.testing.assert_array_equal(pts, mc.default_samples(3))
    assert len({tuple(p) for p in pts}) == 64


# --- tension --------------------------------------------------------------------------------------------

def test_identity_is_harmonic():
    for p in random_points(5, 2, 3):
        res = mc.tension(catalog.sol_identity(), p)
        assert res.norm < 1e-12


def test_pi2_tension():
    for p in random_points(20, 3, 3):
        res = mc.tension(catalog.pi2(), p)
        np.testing.assert_allclose(res.components, [0, -1], atol=1e-12)
        assert res.norm == pytest.approx(1.0, abs=1e-12)


def test_cubic_map_tension_at_height_two():
    res = mc.tension(catalog.biharmonic_example(1, 0, 0, 0), [0.4, -0.3, 2.0])
    np.testing.assert_allclose(res.components, [0, 12], atol=1e-12)
    assert res.norm == pytest.approx(12.0)


def test_tension_matches_symbolic_oracle():
    sol_s, hyp_s = oracles.sol_symbolic(), oracles.hyperbolic_xz_symbolic()
    _, tau = oracles.symbolic_tension(sol_s, hyp_s, GENERIC)
    tau_f = oracles.lambdify(sol_s, tau)
    for p in random_points(10, 4, 3, box=1.0):
        np.testing.assert_allclose(mc.tension(generic_map(), p).components, tau_f(p), rtol=1e-10, atol=1e-10)


def test_norm_is_target_metric_length():
    for p in random_points(20, 5, 3, box=1.0):
        for res in mc.tension_and_bitension(generic_map(), p):
            h = catalog.hyperbolic_xz().metric_jet(res.image, 0).value
            assert abs(res.norm ** 2 - res.components @ h @ res.components) < 1e-12 * max(1.0, res.norm ** 2)


def test_image_is_map_value():
    np.testing.assert_allclose(generic_map().image([1.0, 2.0, 0.5]), [1.3, 0.5 + 0.2 * math.sin(2.0)])


@pytest.mark.parametrize("isometry", [("u + 1.5", "w"), ("exp(-0.7)*u", "w + 0.7")],
                         ids=["translation", "dilation"])
def test_tension_commutes_with_target_isometries(isometry):
    # both maps are isometries of exp(2w) du^2 + dw^2
    outer = [s.replace("u", f"({GENERIC[0]})").replace("w", f"({GENERIC[1]})") for s in isometry]
    composed = SmoothMap.from_strings("composed", catalog.sol(), catalog.hyperbolic_xz(), outer)
    iso = SmoothMap.from_strings("iso", catalog.hyperbolic_xz(), catalog.hyperbolic_xz(),
                                 [s.replace("u", "x").replace("w", "z") for s in isometry])
    for p in random_points(10, 6, 3, box=1.0):
        base = mc.tension(generic_map(), p)
        pushed = mc.differential(iso, base.image) @ base.components
        assert np.max(np.abs(mc.tension(composed, p).components - pushed)) < 1e-8


# --- bitension -----------------------------------------------------------------------------------------------

def test_identity_has_zero_bitension():
    for p in random_points(5, 7, 3):
        assert mc.bitension(catalog.sol_identity(), p).norm < 1e-9


def test_pi2_bitension_norm():
    for p in random_points(20, 8, 3):
        assert mc.bitension(catalog.pi2(), p).norm == pytest.approx(2.0, abs=1e-9)


def test_cubic_maps_are_biharmonic():
    for k, p in enumerate(random_points(10, 9, 3)):
        A, B, C, D = random_points(1, 100 + k, 4)[0]
        assert mc.bitension(catalog.biharmonic_example(A, B, C, D), p).norm < 1e-6


def test_bitension_matches_symbolic_oracle():
    sol_s, hyp_s = oracles.sol_symbolic(), oracles.hyperbolic_xz_symbolic()
    _, tau2 = oracles.symbolic_bitension(sol_s, hyp_s, GENERIC, curvature=-1.0)
    tau2_f = oracles.lambdify(sol_s, tau2)
    for p in random_points(5, 10, 3, box=1.0):
        np.testing.assert_allclose(mc.bitension(generic_map(), p).components, tau2_f(p), rtol=1e-9, atol=1e-9)


def test_symbolic_oracle_reproduces_pi2():
    sol_s, hyp_s = oracles.sol_symbolic(), oracles.hyperbolic_xz_symbolic()
    tau, tau2 = oracles.symbolic_bitension(sol_s, hyp_s, ("x", "z"), curvature=-1.0)
    assert [float(t.simplify()) for t in tau] == [0.0, -1.0]
    assert [float(t.simplify()) for t in tau2] == [0.0, 2.0]


def test_vertical_geodesic_has_zero_tension_and_bitension():
    # t -> (x0, y0, t) runs along a z-line, a geodesic of Sol
    line = SmoothMap.from_strings("z_line", catalog.euclidean(1), catalog.sol(), ["0.4", "-1.1", "t"])
    for t in np.linspace(-2, 2, 9):
        tau, tau2 = mc.tension_and_bitension(line, [t])
        assert tau.norm < 1e-12
        assert tau2.norm < 1e-9


def test_horizontal_line_is_not_harmonic():
    # x-lines are not geodesics: D_{E1} E1 = -E3
    line = SmoothMap.from_strings("x_line", catalog.euclidean(1), catalog.sol(), ["t", "0", "0.5"])
    tau = mc.tension(line, [0.3])
    assert tau.norm == pytest.approx(math.exp(1.0), rel=1e-12)


# --- fibre mean curvature -------------------------------------------------------------------------------

@pytest.mark.parametrize("name", ["pi1", "pi2", "euclid_pi"])
def test_tension_is_minus_pushed_mean_curvature(name, points50):
    phi = catalog.get(name)
    for p in points50:
        tau = mc.tension(phi, p).components
        assert np.max(np.abs(tau + mc.mean_curvature_pushforward(phi, p))) < 1e-8


@pytest.mark.parametrize("name, frame, harmonic", [("pi1", "case1", False), ("pi2", "case2", False),
                                                   ("euclid_pi", "euclid_frame", True)])
def test_harmonic_iff_fibres_are_geodesics(name, frame, harmonic, points50):
    phi = catalog.get(name)
    for p in points50[:10]:
        d = sub.integrability_data(catalog.get(frame), p)
        minimal = math.hypot(d.k1, d.k2) < 1e-9
        zero_tension = mc.tension(phi, p).norm < 1e-9
        assert minimal == zero_tension == harmonic


def test_vertical_field_is_unit_and_in_kernel():
    phi = generic_map()
    from solgeom.geometry import LocalGeometry

    for p in random_points(5, 11, 3, box=1.0):
        local = LocalGeometry(phi.source, p, 1)
        v = mc.vertical_field_jet(phi, local).value
        assert abs(v @ local.metric.value @ v - 1) < 1e-12
        assert np.max(np.abs(mc.differential(phi, p) @ v)) < 1e-12


def test_custom_manifold_map():
    # a map out of a non-Sol chart goes through the same machinery
    m = ChartedManifold.diagonal("warped", ("a", "b", "c"), ["1", "exp(2*a)", "1"])
    phi = SmoothMap.from_strings("proj", m, catalog.euclidean(2), ["a", "c"])
    rep = mc.is_riemannian_submersion(phi, random_points(5, 12, 3))
    assert rep.passed
    # fibres are b-lines with mean curvature -grad(a); the tension is (1, 0)
    np.testing.assert_allclose(mc.tension(phi, [0.2, 0.1, 0.3]).components, [1, 0], atol=1e-12)
