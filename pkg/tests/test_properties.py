import numpy as np
from hypothesis import given, settings, strategies as st

from lcsam.bodies import Ball, Box, Polytope, gauge_norm, minkowski_sum
from lcsam.convex_core import (LogConcaveFn, PowerNorm, Quadratic, indicator, legendre_transform,
                               sup_convolve)
from lcsam.variation import integral_curve

from conftest import fn

coord = st.floats(-3, 3, allow_nan=False)
point2 = st.tuples(coord, coord).map(np.array)
lam = st.sampled_from([0.25, 0.5, 0.75])


@st.composite
def spd(draw):
    a = draw(st.floats(0.2, 3))
    c = draw(st.floats(0.2, 3))
    b = draw(st.floats(-0.9, 0.9)) * np.sqrt(a * c)
    return np.array([[a, b], [b, c]])


@st.composite
def polygons(draw):
    pts = draw(st.lists(point2, min_size=3, max_size=8))
    P = np.array(pts)
    u, v = P[1] - P[0], P[2] - P[0]
    area = abs(u[0] * v[1] - u[1] * v[0])
    if area < 1e-2:
        P = np.vstack([P, P[0] + [1, 0], P[0] + [0, 1]])
    return Polytope(P)


potentials = st.one_of(
    st.builds(lambda A, b: Quadratic(A, b), spd(), point2),
    st.builds(lambda a, p, m: PowerNorm(a, p, m), st.floats(0.1, 3), st.floats(1, 4), point2),
)


@settings(max_examples=60, deadline=None)
@given(potentials, point2, point2, lam)
def test_potential_convexity(phi, x, y, t):
    mid = phi((1 - t) * x + t * y)
    assert mid <= (1 - t) * phi(x) + t * phi(y) + 1e-9 * (1 + abs(phi(x)) + abs(phi(y)))


@settings(max_examples=60, deadline=None)
@given(potentials, point2, point2)
def test_young_fenchel(phi, x, y):
    star = legendre_transform(phi)
    assert phi(x) + star(y) >= x @ y - 1e-9 * (1 + abs(x @ y))


@settings(max_examples=40, deadline=None)
@given(potentials, point2)
def test_biconjugate(phi, x):
    back = legendre_transform(legendre_transform(phi))
    assert np.isclose(back(x), phi(x), rtol=1e-9, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(polygons(), polygons(), st.lists(point2, min_size=1, max_size=20))
def test_support_additivity(K, L, thetas):
    T = np.array(thetas)
    s = minkowski_sum(K, L)
    np.testing.assert_allclose(s.support(T), K.support(T) + L.support(T), atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(spd(), point2)
def test_gauge_unit_ball_is_body(A, x):
    from lcsam.bodies import Ellipsoid
    E = Ellipsoid(np.zeros(2), A)
    inside = E.contains(x, tol=0)
    g = gauge_norm(E, x)
    assert (g <= 1 + 1e-9) if inside else (g >= 1 - 1e-9)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 2), st.floats(0.1, 2), coord)
def test_supconv_monotone_in_t(t1, t2, x):
    f = fn(form="gaussian", dim=1, center=[0.5])
    g = LogConcaveFn(indicator(Box([-0.3], [1.2])))
    lo, hi = sorted([t1, t2])
    assert sup_convolve(f, g, lo)([x]) <= sup_convolve(f, g, hi)([x]) + 1e-15


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 2), st.floats(-2, 2), st.floats(-2, 2))
def test_supconv_support_is_minkowski_sum(t, a, b):
    K, L = Box([-1.0], [a * 0.1 + 0.5]), Box([b * 0.1 - 0.4], [1.0])
    out = sup_convolve(LogConcaveFn(indicator(K)), LogConcaveFn(indicator(L)), t)
    s = minkowski_sum(K, L.scale(t))
    assert np.allclose(out.support.support([[1.0], [-1.0]]), s.support([[1.0], [-1.0]]))


@settings(max_examples=10, deadline=None)
@given(st.floats(0.2, 2), st.floats(-1, 1))
def test_log_integral_concave(r, m):
    f = fn(form="gaussian", dim=1, center=[m])
    g = LogConcaveFn(indicator(Ball([0.0], r)))
    curve = integral_curve(f, g, 2.0 ** -np.arange(6))
    assert np.max(curve.concavity_defects()) <= 1e-6
    assert np.all(np.diff(curve.values[::-1]) >= 0)
