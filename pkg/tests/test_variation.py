import math

import numpy as np
import pytest
from scipy import integrate as sci

from lcsam.bodies import Ball, Box, Interval, minkowski_sum
from lcsam.convex_core import LogConcaveFn, indicator, integrate
from lcsam.variation import (IntegralCurve, delta_limit, delta_measure_formula, delta_via_levelsets,
                             integral_curve, pointwise_derivative_check, relative_error,
                             scaling_shift_check, truncation_convergence, variation_report)

from conftest import fn

ROOT2PI = math.sqrt(2 * math.pi)


def ind(body):
    return LogConcaveFn(indicator(body))


@pytest.fixture
def box_g(unit_interval):
    return ind(unit_interval)


def test_curve_gaussian_interval(gauss1, box_g):
    curve = integral_curve(gauss1, box_g, [1.0, 0.5, 0.25])
    np.testing.assert_allclose(curve.values, 2 * curve.ts + ROOT2PI, rtol=1e-12)


def test_curve_intervals(box_g):
    curve = integral_curve(ind(Interval(0, 1)), box_g, [1.0, 0.25])
    np.testing.assert_allclose(curve.values, 1 + 2 * curve.ts, rtol=1e-13)


def test_curve_self_convolution(gauss1):
    curve = integral_curve(gauss1, gauss1, [1.0])
    assert curve.values[0] == pytest.approx(2 * math.sqrt(math.pi), rel=1e-10)


def test_schedule_validation(gauss1, box_g):
    with pytest.raises(ValueError):
        integral_curve(gauss1, box_g, [0.5, 1.0])


@pytest.mark.parametrize("f", ["gauss", "interval"])
def test_delta_limit_examples(f, gauss1, box_g):
    base = gauss1 if f == "gauss" else ind(Interval(0, 1))
    lim = delta_limit(integral_curve(base, box_g))
    assert lim.value == pytest.approx(2, abs=1e-6) and lim.monotone and lim.concave


def test_point_indicator_gives_zero(gauss1):
    g = fn(form="indicator", body={"type": "point", "at": [0.6]})
    assert delta_limit(integral_curve(gauss1, g)).value == pytest.approx(0, abs=1e-12)


def test_limit_rejects_decreasing_quotients():
    curve = IntegralCurve(np.array([1.0, 0.5]), np.array([3.0, 1.5]), 1.0)
    with pytest.raises(ArithmeticError):
        delta_limit(curve)


def test_limit_flags_divergence(gauss1):
    lim = delta_limit(integral_curve(gauss1, fn(form="laplace", dim=1)))
    assert lim.divergent and math.isinf(lim.value)
    rhs = delta_measure_formula(gauss1, fn(form="laplace", dim=1))
    assert math.isinf(rhs.total)


def test_measure_formula_examples(gauss1, halfexp, box_g):
    g2 = fn(form="gaussian", dim=1, center=[0.3])
    h = lambda y: 0.3 * y + y * y / 2  # conjugate of the shifted quadratic
    ref, _ = sci.quad(lambda x: h(x) * math.exp(-x * x / 2), -40, 40, epsabs=1e-13)
    assert delta_measure_formula(gauss1, g2).total == pytest.approx(ref, rel=1e-9)
    side = delta_measure_formula(halfexp, box_g)
    assert side.mu_part == pytest.approx(1, rel=1e-10) and side.nu_part == pytest.approx(1)
    sq = delta_measure_formula(ind(Box([-1, -1], [1, 1])), ind(Ball([0, 0], 1.0)))
    assert sq.mu_part == 0 and sq.nu_part == pytest.approx(8)


def test_levelset_route(box_g):
    L = Interval(-1, 1)
    assert delta_via_levelsets(ind(Interval(0, 3)), L) == pytest.approx(2)
    assert delta_via_levelsets(fn(form="laplace", dim=1), L) == pytest.approx(2, rel=1e-9)
    assert delta_via_levelsets(fn(form="gaussian", dim=1), L) == pytest.approx(2, rel=1e-9)


def test_scaling_examples(box_g, gauss1):
    assert scaling_shift_check(gauss1, box_g, 0) == (0.0, 0.0)
    a, b = scaling_shift_check(ind(Interval(0, 1)), box_g, 1.0)
    assert a == pytest.approx(1, abs=1e-6) and b == pytest.approx(1)
    a, b = scaling_shift_check(gauss1, box_g, -2.0)
    assert a == pytest.approx(-2 * ROOT2PI, abs=1e-5) and b == pytest.approx(-2 * ROOT2PI)


def test_pointwise_examples(gauss1, halfexp, box_g):
    lhs, rhs = pointwise_derivative_check(gauss1, box_g, [1.0])
    assert lhs == pytest.approx(math.exp(-0.5), abs=1e-6) and rhs == pytest.approx(math.exp(-0.5))
    lhs, rhs = pointwise_derivative_check(halfexp, box_g, [0.5])
    assert lhs == pytest.approx(math.exp(-0.5), abs=1e-6) and rhs == pytest.approx(math.exp(-0.5))
    lhs, rhs = pointwise_derivative_check(gauss1, box_g, [0.0])
    assert lhs == pytest.approx(0, abs=1e-9) and rhs == 0


def _truncated_gauss_oracle(m):
    def h(y):
        y = abs(y)
        return y * y / 2 if y <= m else m * y - m * m / 2
    return sci.quad(lambda x: h(x) * math.exp(-x * x / 2), -40, 40, points=[-m, m], epsabs=1e-13)[0]


def test_truncation_gaussian(gauss1):
    ms = [1, 2, 4, 8]
    seq = truncation_convergence(gauss1, gauss1, ms)
    assert np.all(np.diff(seq) >= -1e-8)
    np.testing.assert_allclose(seq, [_truncated_gauss_oracle(m) for m in ms], rtol=1e-4)
    assert seq[-1] == pytest.approx(ROOT2PI / 2, rel=1e-8)


def test_truncation_inactive_for_compact_g(gauss1, box_g):
    seq = truncation_convergence(gauss1, box_g, [2, 4, 8])
    np.testing.assert_allclose(seq, 2, rtol=1e-10)


def test_minkowski_linearity():
    f = fn(form="gaussian", dim=2, center=[0.3, 0.0])
    L, B = Box([-1, -0.5], [2, 1]), Ball([0.2, 0.1], 0.7)
    total = delta_measure_formula(f, ind(minkowski_sum(L, B))).total
    parts = delta_measure_formula(f, ind(L)).total + delta_measure_formula(f, ind(B)).total
    assert total == pytest.approx(parts, rel=1e-6)


def test_translation_invariance():
    f = fn(form="gaussian", dim=2, center=[0.3, 0.0], restrict={"type": "ball", "center": [0, 0], "radius": 2})
    g = ind(Box([-1, -0.5], [2, 1]))
    base = delta_measure_formula(f, g).total
    assert delta_measure_formula(f.translate([1.0, -2.0]), g).total == pytest.approx(base, rel=1e-6)
    assert delta_measure_formula(f, g.translate([0.4, 0.9])).total == pytest.approx(base, rel=1e-6)


def test_report_relative_error(halfexp, box_g):
    rep = variation_report(halfexp, box_g)
    assert rep.rel_error < 1e-3 and rep.rel_error == relative_error(rep.lhs, rep.rhs)
    assert len(rep.quotients) == len(rep.ts) == 13
    assert relative_error(math.inf, math.inf) == 0.0
