"""Legendre-Fenchel transforms and support functions of log-concave functions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..quadrature import golden_minimize
from .logconcave import LogConcaveFn
from .potentials import (DomainError, GridPotential, Lattice, Potential, SumWithIndicator,
                         ZeroFunction, _interval, _vec, as_points)


@dataclass(frozen=True, eq=False)
class NumericConjugate1D(Potential):
    """``y -> sup_x (x y - phi(x))`` by golden section on the concave objective."""

    phi: Potential
    max_doublings: int = 60

    @property
    def dim(self):
        return 1

    def _eval(self, Y):
        y = Y[:, 0]
        lo, hi = _interval(self.phi.domain)
        x0 = float(self.phi.center_hint()[0])

        def obj(x, ys):
            return self.phi._eval(x[:, None]) - x * ys

        lo_arr = np.full(len(y), lo)
        hi_arr = np.full(len(y), hi)
        unbounded = np.zeros(len(y), dtype=bool)
        for arr, sign in ((lo_arr, -1.0), (hi_arr, 1.0)):
            if np.isfinite(arr[0]):
                continue
            base = np.full(len(y), x0)
            f0 = obj(base, y)
            step = np.ones(len(y))
            done = np.zeros(len(y), dtype=bool)
            for _ in range(self.max_doublings):
                done |= obj(base + sign * step, y) > f0
                if np.all(done):
                    break
                step = np.where(done, step, 2 * step)
            # a flat objective is bounded; a still-decreasing one is not
            far = obj(base + sign * step, y)
            unbounded |= ~done & (far < f0 - 1e-9 * (1 + np.abs(f0)))
            arr[:] = np.where(done, base + sign * step, base + sign * np.minimum(step, 1e6))
        _, val = golden_minimize(lambda x: obj(x, y), lo_arr, hi_arr, iterations=120)
        out = -val
        out[unbounded] = np.inf
        return out

    def conjugate(self):
        return self.phi

    def kinks(self):
        return []


@dataclass(frozen=True, eq=False)
class RadialConjugate(Potential):
    """``y -> <center, y> + profile*(|y|)``: conjugate of ``profile(|x - center|)``."""

    profile_conjugate: Potential
    center: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center))

    @property
    def dim(self):
        return self.center.size

    def _eval(self, Y):
        r = np.linalg.norm(Y, axis=1)
        return Y @ self.center + self.profile_conjugate._eval(r[:, None])


@dataclass(frozen=True, eq=False)
class SeparableSum(Potential):
    """``y -> sum_i parts[i](y_i)`` for 1D parts of arbitrary type."""

    parts: tuple

    @property
    def dim(self):
        return len(self.parts)

    def _eval(self, Y):
        return sum(p._eval(Y[:, i:i + 1]) for i, p in enumerate(self.parts))


def _conjugate_1d(phi: Potential) -> Potential:
    closed = phi.conjugate()
    return closed if closed is not None else NumericConjugate1D(phi)


def legendre_transform(phi: Potential, lattice: Lattice | None = None) -> Potential:
    """``phi*(y) = sup_x <x, y> - phi(x)``.

    Closed forms from the catalog are returned exactly. Otherwise separable
    and radial structure reduce to 1D conjugates; as a last resort ``phi`` is
    sampled and conjugated on lattices (``lattice`` gives the query points).
    """
    if isinstance(phi, ZeroFunction):
        raise DomainError("empty effective domain")
    closed = phi.conjugate()
    if closed is not None:
        return closed
    if phi.dim == 1:
        return NumericConjugate1D(phi)
    parts = phi.as_separable()
    if parts is not None:
        return SeparableSum(tuple(_conjugate_1d(p) for p in parts))
    rad = phi.as_radial()
    if rad is not None:
        return RadialConjugate(_conjugate_1d(rad[0]), rad[1])
    if lattice is None:
        raise NotImplementedError("non-catalog conjugate needs a query lattice")
    return grid_legendre(phi, lattice)


def _maxplus_axis(values, xs, ys, axis):
    """``out[..., j, ...] = max_i xs[i] * ys[j] + values[..., i, ...]`` along one axis."""
    v = np.moveaxis(values, axis, -1)
    cand = ys[:, None] * xs[None, :]  # (ny, nx)
    res = np.max(cand + v[..., None, :], axis=-1)
    return np.moveaxis(res, -1, axis)


def conjugate_on_lattice(values, source: Lattice, target: Lattice) -> np.ndarray:
    """Factorized discrete conjugate: one 1D max-plus pass per axis (O(N M) each).

    ``phi*(y) = max_x1 [x1 y1 + max_x2 [x2 y2 + ... - phi(x)]]``.
    """
    out = -np.asarray(values, dtype=float).reshape(source.shape)
    xs, ys = source.axes(), target.axes()
    for axis in range(source.dim):
        out = _maxplus_axis(out, xs[axis], ys[axis], axis)
    return out


def grid_legendre(phi: Potential, target: Lattice, extent=None, points_per_axis=401,
                  growth_tol=1e-6) -> GridPotential:
    """Sampled conjugate on ``target`` with ``+inf`` detection.

    ``phi`` is sampled on a lattice of half-width ``R`` and of ``2R``; target
    values that grow between the two are flagged as ``+inf`` (the discrete
    conjugate of a function whose true conjugate is infinite grows with the
    sampling extent).
    """
    n = phi.dim
    center = np.asarray(phi.center_hint(), dtype=float)
    if extent is None:
        dom = phi.domain
        if dom is not None and dom.is_bounded:
            lo, hi = dom.bbox()
            extent = float(np.max(np.maximum(np.abs(lo - center), np.abs(hi - center))))
        else:
            extent = 10.0
    results = []
    for R in (extent, 2 * extent):
        src = Lattice.covering(center - R, center + R, points_per_axis)
        vals = phi._eval(src.points()).reshape(src.shape)
        results.append(conjugate_on_lattice(vals, src, target))
    small, big = results
    grew = big - small > growth_tol * 2 * extent * (1 + np.abs(small))
    out = np.where(grew, np.inf, small)
    return GridPotential(target, out)


@dataclass(frozen=True, eq=False)
class SupportFn:
    """``h_g = (-log g)*`` with a provenance tag."""

    evaluator: Potential
    provenance: str

    @property
    def dim(self):
        return self.evaluator.dim

    def __call__(self, y):
        return self.evaluator(y)

    def at(self, Y):
        X, _ = as_points(Y, self.dim)
        return self.evaluator._eval(X)


def support_function_of_function(g: LogConcaveFn, lattice: Lattice | None = None) -> SupportFn:
    psi = g.potential
    if isinstance(psi, ZeroFunction):
        raise DomainError("support function of the zero function")
    closed = psi.conjugate()
    if closed is not None:
        return SupportFn(closed, "closed-form")
    h = legendre_transform(psi, lattice)
    kind = "grid-conjugate" if isinstance(h, GridPotential) else "numeric-conjugate"
    return SupportFn(h, kind)


def restrict_to_ball(psi: Potential, m: float) -> Potential:
    """``psi + Ind_{|x| <= m}``, kept radial or 1D where possible."""
    from ..bodies import Ball, Box
    if psi.dim == 1:
        return SumWithIndicator(psi, Box([-m], [m]))
    return SumWithIndicator(psi, Ball(np.zeros(psi.dim), m))


__all__ = ["NumericConjugate1D", "RadialConjugate", "SeparableSum", "legendre_transform",
           "conjugate_on_lattice", "grid_legendre", "SupportFn",
           "support_function_of_function", "restrict_to_ball"]
