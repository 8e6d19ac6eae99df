import numpy as np
import pytest
from scipy import integrate as sci

from lcsam.bodies import Ball, Box, Interval
from lcsam.convex_core import (Linear, PowerNorm, Quadratic, dilate, envelope_holds, evaluate,
                               exponential_envelope, indicator, integrate, legendre_transform,
                               potential_gradient, restrict, sup_convolve,
                               support_function_of_function, LogConcaveFn)
from lcsam.convex_core.conjugate import grid_legendre
from lcsam.convex_core.potentials import Lattice

from conftest import fn


def lc(phi):
    return LogConcaveFn(phi)


def test_evaluate_examples(gauss1):
    box = lc(indicator(Interval(0, 1)))
    assert evaluate(box, [0.5]) == 1.0
    assert evaluate(box, [2.0]) == 0.0
    assert evaluate(gauss1, [0.0]) == 1.0
    with pytest.raises(ValueError):
        evaluate(gauss1, [np.inf])


def test_dilate_examples(gauss1):
    assert dilate(gauss1, 1) is gauss1
    sq = lc(indicator(Box([-1, -1], [1, 1])))
    d = dilate(sq, 2)
    assert d([1.9, -1.9]) == 1.0 and d([2.1, 0.0]) == 0.0
    with pytest.raises(ValueError):
        dilate(gauss1, 0)


def test_self_convolution_is_dilation(gauss1):
    xs = np.linspace(-5, 5, 41)[:, None]
    conv = sup_convolve(gauss1, gauss1, 1.0)
    np.testing.assert_allclose(conv(xs), dilate(gauss1, 2)(xs), rtol=1e-12)
    np.testing.assert_allclose(conv(xs), np.exp(-xs[:, 0] ** 2 / 4), rtol=1e-12)


def test_sup_convolve_indicators():
    K, L = lc(indicator(Interval(0, 1))), lc(indicator(Interval(-1, 2)))
    out = sup_convolve(K, L, 0.5)
    xs = np.array([[-0.55], [-0.45], [1.95], [2.05]])
    np.testing.assert_array_equal(out(xs), [0, 1, 1, 0])


def test_sup_convolve_gaussian_interval_bruteforce(gauss1, unit_interval):
    t = 0.7
    out = sup_convolve(gauss1, lc(indicator(unit_interval)), t)
    xs = np.linspace(-4, 4, 33)
    ys = np.linspace(-t, t, 20001)
    brute = np.array([np.max(np.exp(-(x - ys) ** 2 / 2)) for x in xs])
    np.testing.assert_allclose(out(xs[:, None]), brute, atol=1e-7)
    closed = np.exp(-np.maximum(np.abs(xs) - t, 0) ** 2 / 2)
    np.testing.assert_allclose(out(xs[:, None]), closed, rtol=1e-12)


def test_sup_convolve_zero_time_returns_f(gauss1, unit_interval):
    assert sup_convolve(gauss1, lc(indicator(unit_interval)), 0.0) is gauss1


def test_conjugate_closed_forms():
    q = Quadratic([[1.0]], [0.0])
    ys = np.linspace(-3, 3, 13)[:, None]
    np.testing.assert_allclose(legendre_transform(q)(ys), ys[:, 0] ** 2 / 2)
    ind = legendre_transform(indicator(Interval(-1, 1)))
    np.testing.assert_allclose(ind(ys), np.abs(ys[:, 0]))
    absval = legendre_transform(PowerNorm(1.0, 1.0, [0.0]))
    assert absval([0.5]) == 0.0 and np.isinf(absval([1.5]))


def test_grid_conjugate_matches_bruteforce():
    lat = Lattice.covering([-3.0], [3.0], (61,))
    grid = grid_legendre(indicator(Interval(-1, 1)), lat)
    xs = np.linspace(-1, 1, 20001)
    brute = np.array([np.max(y * xs) for y in lat.axes()[0]])
    np.testing.assert_allclose(grid(lat.points()), brute, atol=1e-6)


def test_support_function_of_function():
    L = Interval(-1, 2)
    hg = support_function_of_function(lc(indicator(L)))
    ys = np.linspace(-2, 2, 9)[:, None]
    np.testing.assert_allclose(hg(ys), L.support(ys))
    raised = support_function_of_function(lc(indicator(L, log_height=0.8)))
    np.testing.assert_allclose(raised(ys), L.support(ys) + 0.8)
    gs = support_function_of_function(fn(form="gaussian", dim=2))
    np.testing.assert_allclose(gs([3.0, 4.0]), 12.5)


def test_potential_gradient_examples():
    assert np.allclose(potential_gradient(Quadratic(np.eye(2), [0, 0]), [1.0, 2.0]), [1, 2])
    assert potential_gradient(PowerNorm(1.0, 1.0, [0.0]), [3.0]) == pytest.approx(1.0)
    half = restrict(Linear([1.0]), Box([0.0], [np.inf]))
    assert potential_gradient(half, [0.7]) == pytest.approx(1.0)


def test_integrate_examples(gauss1, halfexp):
    assert integrate(lc(indicator(Box([0, 0], [1, 1])))) == pytest.approx(1.0, abs=1e-14)
    assert integrate(gauss1) == pytest.approx(np.sqrt(2 * np.pi), rel=1e-10)
    assert integrate(halfexp) == pytest.approx(1.0, rel=1e-10)


def test_integrate_against_scipy_two_dim():
    f = fn(form="gaussian", dim=2, center=[0.3, -0.2], matrix=[[2.0, 0.5], [0.5, 1.0]])
    ref, _ = sci.dblquad(lambda y, x: f([x, y]), -12, 12, -12, 12, epsabs=1e-13)
    assert integrate(f) == pytest.approx(ref, rel=1e-8)


@pytest.mark.parametrize("spec", [
    dict(form="laplace", dim=1),
    dict(form="indicator", body={"type": "interval", "lo": 0, "hi": 1}),
    dict(form="gaussian", dim=2),
])
def test_envelope_bounds_function(spec):
    f = fn(**spec)
    env = exponential_envelope(f)
    assert env.c > 0
    pts = np.random.default_rng(0).uniform(-15, 15, size=(2000, f.dim))
    assert envelope_holds(f, env, pts)
