"""Sup-convolution ``f * (t . g)`` via infimal convolution of potentials."""

from __future__ import annotations

import numpy as np

from ..bodies import Polytope, minkowski_sum
from .logconcave import LogConcaveFn, dilate
from .potentials import (GridPotential, InfConvolution1D, Lattice, Potential, Quadratic,
                         Radial, Separable, indicator)


def _point_of(psi: Potential):
    dom = psi.domain
    if isinstance(dom, Polytope) and len(dom.vertices) == 1:
        return dom.vertices[0]
    return None


def _quadratic_pair(phi, psi, t):
    """Both definite quadratics: conjugate of the sum of conjugates."""
    cf, cg = phi.conjugate(), psi.conjugate()
    s = Quadratic(cf.A + t * cg.A, cf.b + t * cg.b, cf.c + t * cg.c)
    return s.conjugate()


def infimal_convolution(phi: Potential, psi: Potential, t: float) -> Potential:
    """``x -> inf_y phi(y) + t psi((x - y) / t)`` for ``t > 0``."""
    v = _point_of(psi)
    if v is not None:
        return phi.translate(t * v).shift_value(t * float(psi.constant_value()))
    if psi is phi:
        return phi.dilate(1 + t)
    cf, cg = phi.constant_value(), psi.constant_value()
    if cf is not None and cg is not None:
        body = minkowski_sum(phi.domain, psi.domain.scale(t))
        return indicator(body, -(cf + t * cg))
    if (isinstance(phi, Quadratic) and isinstance(psi, Quadratic)
            and phi.is_definite and psi.is_definite):
        return _quadratic_pair(phi, psi, t)
    if phi.dim == 1:
        return InfConvolution1D(phi, psi, t)
    pf, pg = phi.as_separable(), psi.as_separable()
    if pf is not None and pg is not None:
        return Separable([infimal_convolution(a, b, t) for a, b in zip(pf, pg)])
    rf, rg = phi.as_radial(), psi.as_radial()
    if rf is not None and rg is not None:
        return Radial(InfConvolution1D(rf[0], rg[0], t), rf[1] + t * rg[1])
    return grid_infimal_convolution(phi, psi, t)


def grid_infimal_convolution(phi, psi, t, shape=41, extent=8.0):
    """Brute-force infimal convolution on lattices (generic fallback)."""
    n = phi.dim

    def box(p):
        dom = p.domain
        c = np.asarray(p.center_hint(), dtype=float)
        if dom is None:
            return c - extent, c + extent
        lo, hi = dom.bbox()
        return np.maximum(lo, c - extent), np.minimum(hi, c + extent)

    lf, hf = box(phi)
    lg, hg = box(psi)
    src = Lattice.covering(lf, hf, shape)
    ys = src.points()
    py = phi._eval(ys)
    keep = np.isfinite(py)
    ys, py = ys[keep], py[keep]
    out_lat = Lattice.covering(lf + t * lg, hf + t * hg, shape)
    xs = out_lat.points()
    vals = np.empty(len(xs))
    for i0 in range(0, len(xs), 256):
        xb = xs[i0:i0 + 256]
        z = (xb[:, None, :] - ys[None, :, :]) / t
        q = psi._eval(z.reshape(-1, n)).reshape(len(xb), len(ys))
        vals[i0:i0 + 256] = np.min(py[None, :] + t * q, axis=1)
    return GridPotential(out_lat, vals)


def sup_convolve(f: LogConcaveFn, g: LogConcaveFn, t: float) -> LogConcaveFn:
    """``f * (t . g)``: ``x -> sup_y f(y) g((x - y) / t)^t``."""
    if t < 0:
        raise ValueError("sup-convolution parameter must be nonnegative")
    if f.dim != g.dim:
        raise ValueError("dimension mismatch")
    if t == 0:
        return f
    if g is f:
        return dilate(f, 1 + t)
    return LogConcaveFn(infimal_convolution(f.potential, g.potential, t), f.label)


__all__ = ["sup_convolve", "infimal_convolution", "grid_infimal_convolution"]
