import numpy as np
import pytest

from lcsam.bodies import (Ball, Box, GeometryError, Interval, Polytope, Sum, anisotropic_perimeter,
                          gauge_norm, minkowski_sum, quermassintegrals, support_function_body,
                          surface_area_measure, volume)

SQUARE = Box([-1, -1], [1, 1])
DISK = Ball([0, 0], 1.0)


def test_support_examples():
    assert support_function_body(DISK, [3, 4]) == pytest.approx(5)
    L = Interval(-1, 2)
    assert support_function_body(L, [1]) == 2 and support_function_body(L, [-1]) == 1
    assert support_function_body(SQUARE, [1, 1]) == 2


def test_gauge_examples(rng):
    x = rng.normal(size=(5, 2))
    np.testing.assert_allclose(gauge_norm(DISK, x), np.linalg.norm(x, axis=1))
    L = Interval(-1, 2)
    assert gauge_norm(L, [4]) == pytest.approx(2) and gauge_norm(L, [-4]) == pytest.approx(4)
    with pytest.raises(GeometryError):
        gauge_norm(Interval(0, 1), [1.0])


def test_gauge_support_duality(rng):
    tri = Polytope([[-1, -1], [2, -0.5], [0, 1.5]])
    ang = np.linspace(0, 2 * np.pi, 20000, endpoint=False)
    U = np.c_[np.cos(ang), np.sin(ang)]
    boundary = U / gauge_norm(tri, U)[:, None]
    for th in rng.normal(size=(20, 2)):
        assert np.max(boundary @ th) == pytest.approx(tri.support(th), rel=1e-3)


def test_minkowski_examples():
    s = minkowski_sum(Interval(0, 1), Interval(0, 1))
    assert s.support([1]) == pytest.approx(2) and s.support([-1]) == pytest.approx(0)
    rounded = minkowski_sum(SQUARE, DISK)
    assert isinstance(rounded, Sum)
    assert rounded.support([3, 4]) == pytest.approx(7 + 5)
    tri = Polytope([[0, 0], [1, 0], [0, 1]])
    doubled = minkowski_sum(tri, tri)
    np.testing.assert_allclose(sorted(map(tuple, doubled.vertices)), [(0, 0), (0, 2), (2, 0)])


def test_support_additivity(rng):
    K = Polytope([[0, 0], [2, 0.3], [1, 2], [-0.5, 1]])
    thetas = rng.normal(size=(1000, 2))
    s = minkowski_sum(K, SQUARE)
    np.testing.assert_allclose(s.support(thetas), K.support(thetas) + SQUARE.support(thetas),
                               atol=1e-12)


def test_volume_examples():
    assert volume(Box([0, 0], [1, 1])) == 1
    assert volume(DISK) == pytest.approx(np.pi, abs=1e-12)
    assert volume(minkowski_sum(SQUARE, DISK)) == pytest.approx(12 + np.pi, rel=1e-9)
    with pytest.raises(GeometryError):
        volume(Box([0.0], [np.inf]))


def atoms(m):
    return {tuple(np.round(p, 12)): w for p, w in zip(m.points, m.weights)}


def test_surface_area_measure_examples():
    assert atoms(surface_area_measure(Interval(0, 1))) == {(-1.0,): 1.0, (1.0,): 1.0}
    sq = atoms(surface_area_measure(SQUARE))
    assert sorted(sq.values()) == pytest.approx([2, 2, 2, 2]) and len(sq) == 4
    cube = surface_area_measure(Box([0, 0, 0], [1, 1, 1]))
    assert len(cube) == 6 and np.allclose(cube.weights, 1)


def test_surface_measure_closure():
    hexagon = Polytope([[np.cos(a), np.sin(a) * 0.6] for a in np.linspace(0, 6, 7)])
    m = surface_area_measure(hexagon)
    assert np.linalg.norm(m.weights @ m.points) < 1e-10


def test_quermass_examples():
    q = quermassintegrals(SQUARE, DISK)
    np.testing.assert_allclose(q.coefficients, [4, 4, np.pi], atol=1e-9)
    assert q.residual <= 1e-8
    tri = Polytope([[0, 0], [1, 0], [0, 1]])
    assert quermassintegrals(tri, tri).coefficients == pytest.approx([0.5] * 3)
    assert quermassintegrals(Interval(0, 1), Interval(-1, 1)).coefficients == pytest.approx([1, 2])


def test_perimeter_examples():
    assert anisotropic_perimeter(Interval(0, 1), Interval(-1, 1)) == pytest.approx(2)
    assert anisotropic_perimeter(Interval(0, 1), Interval(-1, 2)) == pytest.approx(3)
    assert anisotropic_perimeter(SQUARE, DISK) == pytest.approx(8)


def test_first_variation_of_volume():
    K = Polytope([[0, 0], [3, 0], [1, 2]])
    L = Polytope([[-1, -1], [2, 0], [0, 1]])
    target = anisotropic_perimeter(K, L)
    quotients = [(volume(minkowski_sum(K, L.scale(t))) - volume(K)) / t for t in (1e-2, 1e-3, 1e-4)]
    gaps = [abs(q - target) for q in quotients]
    assert gaps[0] > gaps[1] > gaps[2] and gaps[2] < 1e-3
