"""Quadrature for log-concave functions.

``quadrature_nodes`` returns geometric nodes and weights (the integrand
``f`` is not folded in) so the same rule serves ``int f`` and the
push-forward measure built from it. The rule is chosen from the structure
of the potential: constant on a body, separable, radial, one-dimensional,
or a generic planar fallback.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..bodies import Ball, Box, Polytope
from ..quadrature import adaptive_rule, gauss_legendre
from .logconcave import IntegrabilityError, LogConcaveFn, exponential_envelope
from .potentials import Potential

ANGULAR_SECTORS = 32
ANGULAR_ORDER = 16


@dataclass(frozen=True)
class NodeSet:
    """Quadrature rule ``sum_i weights[i] * F(nodes[i])`` for ``int F``.

    ``exact`` is set (and the nodes empty) when ``f`` is a constant multiple
    of an indicator and its integral is a closed-form volume.
    """

    nodes: np.ndarray
    weights: np.ndarray
    exact: float | None = None
    value: float | None = None

    def integrate(self, F) -> float:
        if not len(self.weights):
            return 0.0
        vals = np.asarray(F(self.nodes), dtype=float)
        return math.fsum(self.weights * vals)


def _fn(phi: Potential) -> LogConcaveFn:
    return LogConcaveFn(phi)


def _values(f, X):
    return f(X) if len(X) else np.empty(0)


def integrate(f: LogConcaveFn, tail_tol=1e-10, rel_tol=1e-12) -> float:
    """``int f`` with a certified truncation tail below ``tail_tol`` (relative)."""
    rule = quadrature_nodes(f, tail_tol=tail_tol, rel_tol=rel_tol)
    if rule.exact is not None:
        value = rule.exact
    elif rule.value is not None:
        value = rule.value
    else:
        value = rule.integrate(lambda X: _values(f, X))
    if not (value > 0 and np.isfinite(value)):
        raise IntegrabilityError("integral not in (0, inf)")
    return value


def quadrature_nodes(f: LogConcaveFn, tail_tol=1e-10, rel_tol=1e-12) -> NodeSet:
    phi = f.potential
    n = f.dim
    const = phi.constant_value()
    dom = f.support
    if const is not None:
        if dom is None or not dom.is_bounded:
            raise IntegrabilityError("constant function on an unbounded set")
        vol = dom.volume()
        if not vol > 0:
            raise IntegrabilityError("integral not in (0, inf)")
        return NodeSet(np.empty((0, n)), np.empty(0), math.exp(-const) * vol)
    if n == 1:
        return _rule_1d(phi, tail_tol, rel_tol)
    parts = phi.as_separable()
    if parts is not None and all(p.dim == 1 for p in parts):
        return _rule_separable(parts, tail_tol, rel_tol)
    rad = phi.as_radial()
    if rad is not None and n == 2:
        return _rule_radial(rad[0], rad[1], tail_tol, rel_tol)
    if n == 2:
        return _rule_planar(f, tail_tol, rel_tol)
    raise NotImplementedError("no quadrature rule for this three-dimensional function")


def _truncated_interval(phi, tail_tol):
    """Support interval clipped so the discarded mass is below the tolerance."""
    f = _fn(phi)
    lo, hi = -np.inf, np.inf
    if phi.domain is not None:
        b = phi.domain.bbox()
        lo, hi = float(b[0][0]), float(b[1][0])
    if np.isfinite(lo) and np.isfinite(hi):
        return lo, hi, None
    env = exponential_envelope(f)
    R = env.truncation_radius(1, tail_tol * env.A)
    return max(lo, -R), min(hi, R), env


def _breaks_1d(phi, lo, hi):
    pts = [lo, hi, float(phi.center_hint()[0])] + [float(k) for k in phi.kinks()]
    return sorted({p for p in pts if lo <= p <= hi})


def _rule_1d(phi, tail_tol, rel_tol):
    lo, hi, env = _truncated_interval(phi, tail_tol)

    def F(x):
        with np.errstate(over="ignore"):
            return np.exp(-phi._eval(x[:, None]))

    rule = adaptive_rule(F, _breaks_1d(phi, lo, hi), rel_tol=rel_tol)
    if env is not None and rule.value > 0:
        # second pass when the tail bound is large relative to the integral
        R_need = env.truncation_radius(1, tail_tol * rule.value)
        if R_need > max(-lo, hi) * 1.001:
            dlo, dhi = (-np.inf, np.inf) if phi.domain is None else (
                float(phi.domain.bbox()[0][0]), float(phi.domain.bbox()[1][0]))
            lo, hi = max(dlo, -R_need), min(dhi, R_need)
            rule = adaptive_rule(F, _breaks_1d(phi, lo, hi), rel_tol=rel_tol)
    return NodeSet(rule.nodes[:, None], rule.weights, value=rule.value)


def _rule_separable(parts, tail_tol, rel_tol):
    n = len(parts)
    rules = []
    for p in parts:
        c = p.constant_value()
        if c is not None:
            lo, hi = p.domain.bbox()
            rules.append(_constant_interval_rule(float(lo[0]), float(hi[0]), c))
        else:
            rules.append(_rule_1d(p, tail_tol / n, rel_tol))
    mesh = np.meshgrid(*[r.nodes[:, 0] for r in rules], indexing="ij")
    wmesh = np.meshgrid(*[r.weights for r in rules], indexing="ij")
    nodes = np.column_stack([m.ravel() for m in mesh])
    weights = np.prod(np.stack([w.ravel() for w in wmesh]), axis=0)
    value = math.prod(r.value for r in rules)
    return NodeSet(nodes, weights, value=value)


def _constant_interval_rule(lo, hi, c=0.0, order=16):
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise IntegrabilityError("constant factor on an unbounded interval")
    x, w = gauss_legendre(order)
    return NodeSet((lo + (hi - lo) * x)[:, None], (hi - lo) * w, value=math.exp(-c) * (hi - lo))


def angular_rule(sectors=ANGULAR_SECTORS, order=ANGULAR_ORDER):
    """Angles and weights (summing to ``2 pi``); sector ends at multiples of ``2 pi / sectors``."""
    x, w = gauss_legendre(order)
    width = 2 * np.pi / sectors
    ang = (np.arange(sectors)[:, None] + x[None, :]).ravel() * width
    return ang, np.tile(w * width, sectors)


def _rule_radial(profile, center, tail_tol, rel_tol):
    """Polar rule ``int f = int_0^R r exp(-p(r)) dr dtheta`` about ``center``."""
    R = np.inf
    if profile.domain is not None:
        R = float(profile.domain.bbox()[1][0])
    env = None
    if not np.isfinite(R):
        radial = _fn(profile)
        env = exponential_envelope(radial)
        # tail of the planar function is bounded via the 1D profile envelope
        R = _planar_tail_radius(env.A, env.c, tail_tol * env.A)

    def F(r):
        with np.errstate(over="ignore"):
            return 2 * np.pi * r * np.exp(-profile._eval(r[:, None]))

    rule = adaptive_rule(F, [0.0, R] + [k for k in profile.kinks() if 0 < k < R], rel_tol=rel_tol)
    if env is not None and rule.value > 0:
        R2 = _planar_tail_radius(env.A, env.c, tail_tol * rule.value)
        if R2 > 1.001 * R:
            R = R2
            rule = adaptive_rule(F, [0.0, R], rel_tol=rel_tol)
    ang, aw = angular_rule()
    U = np.column_stack([np.cos(ang), np.sin(ang)])
    nodes = (center[None, None, :] + rule.nodes[:, None, None] * U[None, :, :]).reshape(-1, 2)
    weights = (rule.weights[:, None] * rule.nodes[:, None] * aw[None, :]).ravel()
    return NodeSet(nodes, weights, value=rule.value)


def _planar_tail_radius(A, c, tail):
    """Radius with ``int_{|x|>R} A exp(-c |x|) dx <= tail`` in the plane."""
    def mass(R):
        return 2 * np.pi * A * (c * R + 1) * math.exp(-c * R) / c ** 2
    R = 1.0
    while mass(R) > tail:
        R *= 1.25
        if R > 1e7:
            raise IntegrabilityError("no truncation radius within budget")
    return R


def _clip_polygon(poly, lo, hi):
    """Sutherland-Hodgman clip of a CCW polygon against an axis box."""
    out = [tuple(p) for p in poly]
    for axis in range(2):
        for bound, keep_le in ((hi[axis], True), (lo[axis], False)):
            if not np.isfinite(bound) or not out:
                continue
            inp, out = out, []
            for i, cur in enumerate(inp):
                prev = inp[i - 1]
                cin = cur[axis] <= bound if keep_le else cur[axis] >= bound
                pin = prev[axis] <= bound if keep_le else prev[axis] >= bound
                if cin != pin:
                    s = (bound - prev[axis]) / (cur[axis] - prev[axis])
                    out.append(tuple(prev[k] + s * (cur[k] - prev[k]) for k in range(2)))
                if cin:
                    out.append(cur)
    return np.array(out)


def _triangle_rule(order):
    """Collapsed (Duffy) Gauss rule on the reference triangle."""
    x, w = gauss_legendre(order)
    u, v = np.meshgrid(x, x, indexing="ij")
    wu, wv = np.meshgrid(w, w, indexing="ij")
    bary = np.column_stack([u.ravel() * (1 - v.ravel()), v.ravel()])
    return bary, (wu * wv * (1 - v)).ravel()


def _split(tris):
    a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
    ab, bc, ca = 0.5 * (a + b), 0.5 * (b + c), 0.5 * (c + a)
    return np.concatenate([np.stack(t, axis=1) for t in
                           ((a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca))])


def _tri_nodes(tris, order=12):
    bary, w = _triangle_rule(order)
    a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
    e1, e2 = b - a, c - a
    area2 = np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    pts = a[:, None, :] + bary[None, :, 0:1] * e1[:, None, :] + bary[None, :, 1:2] * e2[:, None, :]
    return pts.reshape(-1, 2), (area2[:, None] * w[None, :]).ravel()


def _rule_planar(f, tail_tol, rel_tol):
    phi = f.potential
    dom = f.support
    if isinstance(dom, Ball) or (dom is not None and not isinstance(dom, (Polytope, Box))):
        return _rule_polar_patch(f, dom, rel_tol)
    R = None
    if dom is None or not dom.is_bounded:
        env = exponential_envelope(f)
        R = env.truncation_radius(2, tail_tol * env.A)
    if dom is None:
        poly = np.array([[-R, -R], [R, -R], [R, R], [-R, R]])
    else:
        poly = dom.as_polytope().vertices if isinstance(dom, Box) and dom.is_bounded else None
        if isinstance(dom, Polytope):
            poly = dom.vertices
        elif poly is None:
            big = np.where(np.isfinite(dom.lo), dom.lo, -R), np.where(np.isfinite(dom.hi), dom.hi, R)
            poly = np.array([[big[0][0], big[0][1]], [big[1][0], big[0][1]],
                             [big[1][0], big[1][1]], [big[0][0], big[1][1]]])
        if R is not None:
            poly = _clip_polygon(poly, np.array([-R, -R]), np.array([R, R]))
    apex = np.asarray(phi.center_hint(), dtype=float)
    inside = np.isfinite(phi._eval(apex[None, :]))[0]
    if not inside:
        apex = poly.mean(axis=0)
    tris = np.stack([np.stack([apex, poly[i], poly[(i + 1) % len(poly)]]) for i in range(len(poly))])
    prev_val, prev = None, None
    for _ in range(7):
        nodes, weights = _tri_nodes(tris)
        val = math.fsum(weights * f(nodes))
        if prev_val is not None and abs(val - prev_val) <= max(rel_tol * 100, 1e-11) * abs(val):
            return NodeSet(nodes, weights)
        prev_val, prev = val, (nodes, weights)
        tris = _split(tris)
    return NodeSet(*prev)


def _rule_polar_patch(f, dom, rel_tol):
    """Tensor Gauss rule in polar coordinates about the center of a disk support."""
    if not isinstance(dom, Ball):
        raise NotImplementedError("planar quadrature needs a polygonal or disk support")
    c, Rb = dom.center, dom.radius
    prev = None
    for k in range(2, 9):
        x, w = gauss_legendre(16)
        m = 2 ** k
        edges = np.linspace(0, Rb, m + 1)
        r = (edges[:-1, None] + np.diff(edges)[:, None] * x[None, :]).ravel()
        wr = (np.diff(edges)[:, None] * w[None, :]).ravel() * r
        ang, aw = angular_rule(sectors=max(8, 2 * m))
        U = np.column_stack([np.cos(ang), np.sin(ang)])
        nodes = (c + r[:, None, None] * U[None, :, :]).reshape(-1, 2)
        weights = (wr[:, None] * aw[None, :]).ravel()
        val = math.fsum(weights * f(nodes))
        if prev is not None and abs(val - prev) <= max(rel_tol * 100, 1e-11) * abs(val):
            return NodeSet(nodes, weights)
        prev = val
    return NodeSet(nodes, weights)


__all__ = ["NodeSet", "integrate", "quadrature_nodes", "angular_rule"]
