"""Surface area measures of log-concave functions.

``build_mu`` pushes ``f dx`` forward under the gradient of the potential;
``build_nu`` pushes the ``f``-weighted boundary measure of the support
forward under the Gauss map. Both come back as weighted atoms.
"""

from __future__ import annotations

import math

import numpy as np

from .bodies import Ball, Box, Ellipsoid, Polytope, surface_area_measure
from .convex_core.integration import angular_rule, integrate, quadrature_nodes
from .convex_core.logconcave import LogConcaveFn, exponential_envelope
from .convex_core.potentials import DomainError, Linear, SumWithIndicator
from .discrete import DiscreteMeasure
from .quadrature import adaptive_rule

JITTER = 1e-9
MAX_FLAGGED_FRACTION = 1e-3


def _affine_slope(phi):
    """Constant gradient of a restricted affine potential, else ``None``."""
    if isinstance(phi, SumWithIndicator) and isinstance(phi.base, Linear):
        return phi.base.b
    if isinstance(phi, Linear):
        return phi.b
    return None


def _spread(nodes, mass):
    """``f``-weighted standard deviation of the nodes (the scale of the support)."""
    total = np.sum(mass)
    if not len(nodes) or not total > 0:
        return 1.0
    mean = mass @ nodes / total
    return float(np.sqrt(mass @ np.sum((nodes - mean) ** 2, axis=1) / total)) or 1.0


def jittered_nodes(f: LogConcaveFn, nodes, weights, seed=0, scale=JITTER):
    """Seeded perturbation of quadrature nodes; nodes pushed off the support stay put."""
    rng = np.random.default_rng(seed)
    spread = _spread(nodes, weights * f(nodes)) if len(nodes) else 1.0
    moved = nodes + rng.uniform(-1.0, 1.0, size=nodes.shape) * scale * spread
    with np.errstate(over="ignore"):
        ok = np.isfinite(f.potential._eval(moved)) if len(moved) else np.zeros(0, bool)
    return np.where(ok[:, None], moved, nodes)


def build_mu(f: LogConcaveFn, seed=0, tail_tol=1e-12, rel_tol=1e-12) -> DiscreteMeasure:
    """``(grad phi)_# (f dx)`` as atoms ``(grad phi(x_i), w_i f(x_i))``."""
    phi = f.potential
    n = f.dim
    rule = quadrature_nodes(f, tail_tol=tail_tol, rel_tol=rel_tol)
    if rule.exact is not None:
        return DiscreteMeasure(np.zeros((1, n)), np.array([rule.exact]), "euclidean", "mu",
                               {"seed": seed, "exact": True})
    slope = _affine_slope(phi)
    if slope is not None:
        mass = integrate(f, tail_tol=tail_tol, rel_tol=rel_tol)
        return DiscreteMeasure(slope[None, :].copy(), np.array([mass]), "euclidean", "mu",
                               {"seed": seed, "exact": True})
    X = jittered_nodes(f, rule.nodes, rule.weights, seed)
    fx = f(X)
    live = fx > 0
    X, w = X[live], rule.weights[live] * fx[live]
    G, flagged = phi._grad(X)
    bad = flagged | ~np.all(np.isfinite(G), axis=1)
    if np.sum(w[bad]) > MAX_FLAGGED_FRACTION * np.sum(w):
        raise DomainError("gradient unavailable on a non-negligible share of nodes")
    mu = DiscreteMeasure(G[~bad], w[~bad], "euclidean", "mu", {"seed": seed, "exact": False})
    return mu.merged() if _piecewise_constant_gradient(phi) else mu


def _piecewise_constant_gradient(phi):
    from .convex_core.potentials import PowerNorm
    return isinstance(phi, PowerNorm) and phi.p == 1


def boundary_quadrature(f: LogConcaveFn, order=16, tail_tol=1e-12, rel_tol=1e-12):
    """Points, outward unit normals and ``H^{n-1}`` weights on the boundary of ``K_f``."""
    dom = f.support
    n = f.dim
    empty = (np.empty((0, n)), np.empty((0, n)), np.empty(0))
    if dom is None:
        return empty
    if n == 1:
        lo, hi = dom.bbox()
        pts, nrm = [], []
        for v, s in ((lo[0], -1.0), (hi[0], 1.0)):
            if np.isfinite(v):
                pts.append([v])
                nrm.append([s])
        return np.array(pts).reshape(-1, 1), np.array(nrm).reshape(-1, 1), np.ones(len(pts))
    if n == 2:
        if isinstance(dom, Ball):
            return _circle_quadrature(dom)
        if isinstance(dom, Ellipsoid):
            return _ellipse_quadrature(dom)
        if isinstance(dom, (Box, Polytope)):
            return _edge_quadrature(f, dom, tail_tol, rel_tol)
    if n == 3 and isinstance(dom, (Box, Polytope)) and f.potential.constant_value() is not None:
        P = dom.as_polytope() if isinstance(dom, Box) else dom
        fs = P.facets()
        pts = np.array([fc.polygon.mean(axis=0) for fc in fs])
        return pts, np.array([fc.normal for fc in fs]), np.array([fc.area for fc in fs])
    raise NotImplementedError(f"boundary quadrature for {type(dom).__name__} in dimension {n}")


def _circle_quadrature(ball):
    ang, aw = angular_rule()
    U = np.column_stack([np.cos(ang), np.sin(ang)])
    return ball.center + ball.radius * U, U, ball.radius * aw


def _ellipse_quadrature(ell):
    ang, aw = angular_rule()
    U = np.column_stack([np.cos(ang), np.sin(ang)])
    vals, vecs = np.linalg.eigh(ell.matrix)
    S = vecs @ np.diag(vals ** -0.5) @ vecs.T
    P = ell.center + U @ S.T
    dP = np.column_stack([-np.sin(ang), np.cos(ang)]) @ S.T
    N = (P - ell.center) @ ell.matrix
    N /= np.linalg.norm(N, axis=1)[:, None]
    return P, N, np.linalg.norm(dP, axis=1) * aw


def _edge_quadrature(f, dom, tail_tol, rel_tol):
    env = None
    pts, nrms, wts = [], [], []
    for fc in dom.facets():
        a = fc.axes[0]
        lo, hi = float(fc.lo[0]), float(fc.hi[0])
        if not (np.isfinite(lo) and np.isfinite(hi)):
            if env is None:
                env = exponential_envelope(f)
            # along a line at distance d from 0: f <= A exp(-c |s|); tail 2A exp(-cR)/c
            R = math.log(max(2 * env.A / (env.c * tail_tol), 2.0)) / env.c
            lo, hi = max(lo, -R - abs(fc.origin @ a)), min(hi, R + abs(fc.origin @ a))
        hint = float((np.asarray(f.potential.center_hint()) - fc.origin) @ a)
        breaks = [lo, hi] + ([hint] if lo < hint < hi else [])

        def along(s, fc=fc, a=a):
            return f(fc.origin + s[:, None] * a)

        rule = adaptive_rule(along, breaks, rel_tol=rel_tol, abs_tol=1e-300)
        pts.append(fc.origin + rule.nodes[:, None] * a)
        nrms.append(np.tile(fc.normal, (len(rule.nodes), 1)))
        wts.append(rule.weights)
    return np.vstack(pts), np.vstack(nrms), np.concatenate(wts)


def build_nu(f: LogConcaveFn, tail_tol=1e-12, rel_tol=1e-12) -> DiscreteMeasure:
    """``(n_K)_# (f H^{n-1} on the boundary of K_f)``; one atom per facet for polyhedral supports."""
    n = f.dim
    dom = f.support
    if dom is None:
        return DiscreteMeasure.zero(n, "sphere", "nu")
    const = f.potential.constant_value()
    if const is not None and isinstance(dom, (Box, Polytope)) and dom.is_bounded:
        S = surface_area_measure(dom)
        return DiscreteMeasure(S.points, S.weights * math.exp(-const), "sphere", "nu")
    P, N, W = boundary_quadrature(f, tail_tol=tail_tol, rel_tol=rel_tol)
    vals = f(P) if len(P) else np.empty(0)
    if not np.all(np.isfinite(vals)):
        raise DomainError("f is not evaluable on the boundary of its support")
    m = DiscreteMeasure(N, W * vals, "sphere", "nu")
    return m.merged() if isinstance(dom, (Box, Polytope)) or n == 1 else m


def measure_integrate(m: DiscreteMeasure, psi) -> float:
    return m.integrate(psi)


def centering_defect(f: LogConcaveFn, seed=0) -> np.ndarray:
    """First moment of ``mu_f + nu_f`` (zero in exact arithmetic)."""
    mu, nu = build_mu(f, seed=seed), build_nu(f)
    return mu.moment() + (nu.moment() if len(nu) else np.zeros(f.dim))


def first_absolute_moment(mu: DiscreteMeasure) -> float:
    """``int |x| d mu``."""
    return mu.integrate(lambda Y: np.linalg.norm(Y, axis=1))


def essential_continuity_test(f: LogConcaveFn, tol=1e-9) -> bool:
    """``nu_f`` has (numerically) zero mass."""
    return build_nu(f).total_mass <= tol


__all__ = ["DiscreteMeasure", "build_mu", "build_nu", "boundary_quadrature", "measure_integrate",
           "centering_defect", "essential_continuity_test", "first_absolute_moment",
           "jittered_nodes"]
