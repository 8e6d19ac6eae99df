import math

import numpy as np
import pytest

from lcsam.bodies import Ball, Box, GeometryError, Interval
from lcsam.anisotropic_tv import (BumpField, GridField, coarea_check, divergence_pairing_check,
                                  dual_norm_bound, field_catalog, level_set, tv_grid,
                                  tv_representation)

from conftest import fn

SQUARE = Box([-1, -1], [1, 1])
DISK = Ball([0, 0], 1.0)
LAPLACE2 = fn(form="laplace", dim=2)


def indicator_field(n=4000, w=4.0):
    return GridField.sample(fn(form="indicator", body={"type": "interval", "lo": 0, "hi": 1}), w, n)


def test_tv_grid_indicator():
    assert tv_grid(indicator_field(), Interval(-1, 1)) == pytest.approx(2)
    assert tv_grid(indicator_field(), Interval(-1, 2)) == pytest.approx(3)


def test_tv_grid_requires_interior_origin():
    with pytest.raises(GeometryError):
        tv_grid(indicator_field(), Interval(0, 1))


def test_tv_representation_examples():
    rep = tv_representation(fn(form="laplace", dim=1), Interval(-1, 2))
    assert rep.boundary == 0 and rep.total == pytest.approx(3, rel=1e-10)
    rep = tv_representation(fn(form="indicator", body={"type": "box", "lo": [-1, -1], "hi": [1, 1]}), DISK)
    assert rep.absolutely_continuous == 0 and rep.total == pytest.approx(8)
    # polar oracle: int_0^{2pi} h_L(theta) dtheta * int_0^inf r e^{-r} dr
    assert tv_representation(LAPLACE2, DISK).total == pytest.approx(2 * math.pi, rel=1e-8)
    assert tv_representation(LAPLACE2, SQUARE).total == pytest.approx(8, rel=1e-8)


def test_level_set_examples():
    F = level_set(fn(form="laplace", dim=1), math.exp(-2))
    assert F.support([1]) == pytest.approx(2) and F.support([-1]) == pytest.approx(2)
    G = level_set(fn(form="gaussian", dim=2), math.exp(-0.5))
    th = np.array([[0.6, 0.8], [-1.0, 0.0]])
    np.testing.assert_allclose(G.support(th), 1.0, rtol=1e-12)
    with pytest.raises(ValueError):
        level_set(fn(form="gaussian", dim=1), 2.0)


def test_grid_level_set_close_to_disk():
    grid = GridField.sample(LAPLACE2, 6.0, 128)
    F = level_set(grid, math.exp(-2))
    ang = np.linspace(0, 2 * np.pi, 16, endpoint=False)
    np.testing.assert_allclose(F.support(np.c_[np.cos(ang), np.sin(ang)]), 2, atol=2e-2)


def test_grid_csv_round_trip():
    grid = GridField.sample(fn(form="gaussian", dim=2), 3.0, 16)
    back = GridField.from_csv(grid.to_csv())
    np.testing.assert_array_equal(back.values, grid.values)
    np.testing.assert_array_equal(back.origin, grid.origin)
    assert back.spacing == pytest.approx(grid.spacing)


def test_grid_field_validation():
    with pytest.raises(ValueError):
        GridField(np.zeros(1), np.ones(1), np.ones(10))
    with pytest.raises(ValueError):
        GridField(np.zeros(1), np.ones(1), -np.pad(np.ones(4), 2))


@pytest.mark.parametrize("L", [Interval(-1, 1), Interval(-1, 2)], ids=["sym", "asym"])
def test_coarea_grid_1d(L):
    res = coarea_check(GridField.sample(fn(form="laplace", dim=1), 20.0, 4096), L)
    assert res.residual <= 1e-2
    assert res.tv == pytest.approx(L.support([1]) + L.support([-1]), rel=1e-2)


def test_coarea_closed_form():
    f = fn(form="gaussian", dim=2, center=[0.2, -0.1])
    res = coarea_check(f, Box([-1, -0.5], [2, 1]))
    assert res.residual <= 1e-8


def test_zero_field_gives_zero_pairing():
    f = fn(form="gaussian", dim=2)
    zero = BumpField(np.zeros(2), 1.0, np.zeros(2), np.zeros((2, 2)))
    assert divergence_pairing_check(f, zero) == (0.0, 0.0, 0.0)


@pytest.mark.parametrize("n", [1, 2])
@pytest.mark.parametrize("spec", [
    dict(form="gaussian"),
    dict(form="indicator", body="box"),
    dict(form="linear"),
], ids=["gauss", "indicator", "halfexp"])
def test_divergence_identity(n, spec):
    if spec["form"] == "gaussian":
        f = fn(form="gaussian", dim=n)
    elif spec["form"] == "indicator":
        f = fn(form="indicator", body={"type": "box", "lo": [-1] * n, "hi": [1] * n})
    else:
        f = fn(form="linear", slope=[1.0] * n, restrict={"type": "box", "lo": [0.0] * n, "hi": [None] * n})
    L = Interval(-1, 2) if n == 1 else DISK
    tv = tv_representation(f, L).total
    for field in field_catalog(n):
        lhs, bulk, flux = divergence_pairing_check(f, field)
        assert abs(lhs - (bulk + flux)) <= 1e-6
        if dual_norm_bound(field, L) <= 1:
            assert lhs <= tv + 1e-6


def test_catalog_has_five_fields():
    assert all(len(field_catalog(n)) == 5 for n in (1, 2))
