import numpy as np
import pytest

from solgeom.sampling import SplitMix64, grid_points, random_points


def test_splitmix_reference_outputs():
    # first outputs for seed 0 from the reference C implementation
    rng = SplitMix64(0)
    assert [rng.next_u64() for _ in range(3)] == [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]


def test_doubles_in_unit_interval():
    rng = SplitMix64(12345)
    xs = [rng.next_double() for _ in range(10000)]
    assert min(xs) >= 0.0 and max(xs) < 1.0
    assert abs(np.mean(xs) - 0.5) < 0.02


def test_seed_is_reduced_mod_two_to_64():
    assert SplitMix64(-1).state == 2 ** 64 - 1
    assert SplitMix64(2 ** 64 + 5).next_u64() == SplitMix64(5).next_u64()


def test_random_points_deterministic_and_in_box():
    a = random_points(50, 7, 3)
    np.testing.assert_array_equal(a, random_points(50, 7, 3))
    assert a.shape == (50, 3)
    assert np.all(np.abs(a) <= 2.0)
    assert not np.array_equal(a, random_points(50, 8, 3))


def test_random_points_are_drawn_coordinate_by_coordinate():
    rng = SplitMix64(3)
    first = [-2.0 + 4.0 * rng.next_double() for _ in range(3)]
    np.testing.assert_array_equal(random_points(2, 3, 3)[0], first)


def test_grid_order_is_lexicographic():
    g = grid_points(3, 2, box=1.0)
    np.testing.assert_array_equal(g[:4], [[-1, -1], [-1, 0], [-1, 1], [0, -1]])
    assert g.shape == (9, 2)


def test_grid_single_point_is_origin():
    np.testing.assert_array_equal(grid_points(1, 3), [[0, 0, 0]])
    with pytest.raises(ValueError):
        grid_points(0, 3)
