"""Vectorized quadrature and scalar minimization helpers.

Everything here works on batches: integrands and objectives receive numpy
arrays and must return arrays of the same shape. Reductions use
``math.fsum`` over position-sorted contributions so results do not depend
on evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the Gauss-Legendre rule on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


@dataclass(frozen=True)
class Rule1D:
    """Final node set of an adaptive 1D integration."""

    nodes: np.ndarray
    weights: np.ndarray
    value: float
    error: float


def _panel_rule(a, b, order):
    x, w = gauss_legendre(order)
    h = (b - a)[:, None]
    return a[:, None] + h * x[None, :], h * w[None, :]


def adaptive_rule(func, breakpoints, rel_tol=1e-13, abs_tol=0.0, order=16,
                  max_depth=60, initial_panels=4):
    """Adaptive composite Gauss-Legendre integration on a finite interval.

    Parameters
    ----------
    func : callable
        Vectorized integrand. May return shape ``(m,)`` or ``(m, k)``; in the
        latter case every column must meet the tolerance.
    breakpoints : array_like
        Sorted interval end points plus interior kink hints.
    rel_tol, abs_tol : float
        A panel is accepted when the difference between the one-panel and
        the two-half-panel rules is below ``max(abs_tol, rel_tol * |I|)``
        scaled by the panel's share of the interval.

    Returns
    -------
    Rule1D
        Nodes and weights of the accepted (two-half-panel) rules.
    """
    pts = np.unique(np.asarray(breakpoints, dtype=float))
    pts = pts[np.isfinite(pts)]
    if pts.size < 2:
        return Rule1D(np.empty(0), np.empty(0), 0.0, 0.0)
    total_len = pts[-1] - pts[0]
    edges = np.concatenate([np.linspace(pts[i], pts[i + 1], initial_panels + 1)[:-1]
                            for i in range(pts.size - 1)] + [pts[-1:]])
    a, b = edges[:-1], edges[1:]
    keep = b > a
    a, b = a[keep], b[keep]

    accepted_nodes, accepted_weights = [], []
    scale = None
    err_total = 0.0
    depth = 0
    while a.size:
        mid = 0.5 * (a + b)
        xw = _panel_rule(a, b, order)
        xl = _panel_rule(a, mid, order)
        xr = _panel_rule(mid, b, order)
        xs = np.concatenate([xw[0], xl[0], xr[0]], axis=1)
        vals = np.asarray(func(xs.ravel()), dtype=float)
        vals = vals.reshape(xs.shape + vals.shape[1:])
        p = order
        w_whole = xw[1].reshape(xw[1].shape + (1,) * (vals.ndim - 2))
        w_left = xl[1].reshape(w_whole.shape)
        w_right = xr[1].reshape(w_whole.shape)
        coarse = np.sum(vals[:, :p] * w_whole, axis=1)
        fine = (np.sum(vals[:, p:2 * p] * w_left, axis=1)
                + np.sum(vals[:, 2 * p:] * w_right, axis=1))
        if scale is None:
            scale = np.abs(np.sum(fine, axis=0))
        else:
            scale = np.maximum(scale, np.abs(np.sum(fine, axis=0)))
        share = ((b - a) / total_len).reshape((-1,) + (1,) * (fine.ndim - 1))
        tol = np.maximum(abs_tol, rel_tol * scale) * share
        diff = np.abs(fine - coarse)
        ok = np.all(diff <= tol, axis=tuple(range(1, diff.ndim))) if diff.ndim > 1 \
            else diff <= tol
        if depth >= max_depth:
            ok[:] = True
        if np.any(ok):
            accepted_nodes.append(np.concatenate([xl[0][ok], xr[0][ok]], axis=1).ravel())
            accepted_weights.append(np.concatenate([xl[1][ok], xr[1][ok]], axis=1).ravel())
            err_total += float(np.sum(diff[ok]))
        a, b = np.concatenate([a[~ok], mid[~ok]]), np.concatenate([mid[~ok], b[~ok]])
        depth += 1

    nodes = np.concatenate(accepted_nodes)
    weights = np.concatenate(accepted_weights)
    order_idx = np.argsort(nodes, kind="stable")
    nodes, weights = nodes[order_idx], weights[order_idx]
    vals = np.asarray(func(nodes), dtype=float)
    if vals.ndim == 1:
        value = math.fsum(weights * vals)
    else:
        value = math.fsum(weights * vals[:, 0])
    return Rule1D(nodes, weights, value, err_total)


def integrate_1d(func, breakpoints, **kwargs) -> float:
    """Integral of a vectorized scalar function over a finite interval."""
    return adaptive_rule(func, breakpoints, **kwargs).value


def golden_minimize(fun, lo, hi, iterations=90):
    """Minimize convex functions on batches of brackets.

    ``fun(x)`` is evaluated on arrays shaped like ``lo``. Returns the
    minimizer and minimum value per bracket; the bracket end points are
    included as candidates so boundary minima are exact.
    """
    lo = np.asarray(lo, dtype=float).copy()
    hi = np.asarray(hi, dtype=float).copy()
    a0, b0 = lo.copy(), hi.copy()
    c = hi - GOLDEN * (hi - lo)
    d = lo + GOLDEN * (hi - lo)
    fc, fd = fun(c), fun(d)
    for _ in range(iterations):
        left = fc <= fd
        # left: minimum in [lo, d]
        hi = np.where(left, d, hi)
        lo = np.where(left, lo, c)
        new_c = np.where(left, hi - GOLDEN * (hi - lo), d)
        new_d = np.where(left, c, lo + GOLDEN * (hi - lo))
        new_fd = np.where(left, fc, np.nan)
        new_fc = np.where(left, np.nan, fd)
        probe = np.where(left, new_c, new_d)
        fp = fun(probe)
        fc = np.where(left, fp, new_fc)
        fd = np.where(left, new_fd, fp)
        c, d = new_c, new_d
    xs = np.stack([c, d, a0, b0])
    fs = np.stack([fc, fd, fun(a0), fun(b0)])
    k = np.argmin(fs, axis=0)
    idx = np.arange(xs.shape[1]) if xs.ndim == 2 else None
    if idx is None:
        return xs[k], fs[k]
    return xs[k, idx], fs[k, idx]


def kahan_sum(values) -> float:
    return math.fsum(np.asarray(values, dtype=float).ravel())
