import numpy as np
import pytest

from solgeom import catalog
from solgeom import geometry as geo
from solgeom import mapcalc as mc
from solgeom.sampling import random_points

FRAMES = [n for n, e in catalog.entries().items() if e.kind == "frame"]


def test_names_are_unique_and_kinds_known():
    names = [b[0] for b in catalog._BUILDERS]
    assert len(names) == len(set(names))
    assert {e.kind for e in catalog.entries().values()} == {"manifold", "frame", "map"}


def test_every_entry_has_a_description():
    for e in catalog.entries().values():
        assert e.provenance.strip()


def test_get_unknown_name():
    with pytest.raises(KeyError, match="no catalog entry"):
        catalog.get("nil")


def test_get_checks_the_kind():
    with pytest.raises(KeyError, match="is a map"):
        catalog.get("pi1", "frame")
    assert catalog.get("pi1", "map") is catalog.pi1()


@pytest.mark.parametrize("name", FRAMES)
def test_frames_are_orthonormal(name):
    f = catalog.get(name)
    for p in random_points(100, 21, f.manifold.dim):
        v = f.jet(p, 0).value
        g = geo.LocalGeometry(f.manifold, p, 0).metric.value
        assert np.max(np.abs(v @ g @ v.T - np.eye(3))) < 1e-12


def test_cr1_at_zero_angles():
    # theta = alpha = 0: e1 = E2, e2 = E3, e3 = E1
    np.testing.assert_allclose(geo.frame_components(catalog.get("cr1_0"), catalog.sol_frame(), [0.3, -1.0, 0.8]),
                               [[0, 1, 0], [0, 0, 1], [1, 0, 0]], atol=1e-15)


def test_case1_components():
    np.testing.assert_allclose(geo.frame_components(catalog.case1_frame(), catalog.sol_frame(), [1.0, 1.0, -1.0]),
                               [[0, 0, 1], [0, 1, 0], [-1, 0, 0]], atol=1e-15)


def test_alias_differs_only_in_e3():
    p = [0.2, 0.4, -0.6]
    a = catalog.case1_frame().jet(p, 0).value
    b = catalog.case1_frame_alias().jet(p, 0).value
    np.testing.assert_array_equal(a[:2], b[:2])
    np.testing.assert_array_equal(a[2], -b[2])


@pytest.mark.parametrize("name, tension, bitension", [("pi1", 1.0, 2.0), ("pi2", 1.0, 2.0)])
def test_projection_norms(name, tension, bitension):
    for p in random_points(10, 22, 3):
        tau, tau2 = mc.tension_and_bitension(catalog.get(name), p)
        assert tau.norm == pytest.approx(tension, abs=1e-12)
        assert tau2.norm == pytest.approx(bitension, abs=1e-9)


def test_example_with_zero_coefficients_is_harmonic():
    phi = catalog.biharmonic_example(0, 0, 0, 0)
    for p in random_points(5, 23, 3):
        assert mc.tension(phi, p).norm < 1e-12


def test_default_example_parameters():
    phi = catalog.get("biharmonic_example")
    np.testing.assert_allclose(phi.image([0.0, 0.5, 2.0]), [0.5, 12.0])


def test_catalog_is_cached():
    assert catalog.entries() is catalog.entries()
    assert catalog.sol() is catalog.get("sol")


def test_foliated_and_adapted_names_exist():
    names = set(catalog.entries())
    assert set(catalog.FOLIATED_FRAMES) <= names
    for m, frames in catalog.ADAPTED.items():
        assert m in names and set(frames) <= names
