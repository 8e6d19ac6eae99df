"""Convex potentials ``phi`` with values in ``(-inf, +inf]``.

A log-concave function is carried as ``f = exp(-phi)``. Every form is
vectorized: ``phi(X)`` takes ``(m, n)`` points (or a single ``(n,)`` point)
and returns ``(m,)`` values, with ``np.inf`` as the sentinel for points
outside the effective domain.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..bodies import Ball, Box, ConvexBody, Polytope
from ..quadrature import golden_minimize


class DomainError(ValueError):
    """Raised for points outside (or on the boundary of) an effective domain."""


def as_points(x, n):
    """Coerce to an ``(m, n)`` batch; report whether a single point was given."""
    x = np.asarray(x, dtype=float)
    if n == 1:
        single = x.ndim == 0
        return x.reshape(-1, 1), single
    single = x.ndim == 1
    return x.reshape(-1, n), single


class Potential:
    dim: int

    def __call__(self, x):
        X, single = as_points(x, self.dim)
        vals = self._eval(X)
        return float(vals[0]) if single else vals

    def _eval(self, X):
        raise NotImplementedError

    def gradient(self, x, flags=False):
        """Gradient (batched). With ``flags=True`` also return a mask of points
        where only a subgradient (the minimal-norm one) was available."""
        X, single = as_points(x, self.dim)
        G, F = self._grad(X)
        if single:
            return (G[0], bool(F[0])) if flags else G[0]
        return (G, F) if flags else G

    def _grad(self, X):
        h = 1e-6
        G = np.zeros_like(X)
        for i in range(self.dim):
            e = np.zeros(self.dim)
            e[i] = h
            G[:, i] = (self._eval(X + e) - self._eval(X - e)) / (2 * h)
        return G, np.zeros(len(X), dtype=bool)

    @property
    def domain(self) -> ConvexBody | None:
        """Closure of ``{phi < inf}``; ``None`` means all of R^n."""
        return None

    def translate(self, a) -> "Potential":
        """``x -> phi(x - a)``."""
        raise NotImplementedError

    def dilate(self, t) -> "Potential":
        """``x -> t * phi(x / t)``."""
        raise NotImplementedError

    def conjugate(self) -> "Potential | None":
        """Closed-form Legendre transform, or ``None`` if not in the catalog."""
        return None

    def as_separable(self):
        """1D factor potentials if ``phi(x) = sum_i phi_i(x_i)``, else ``None``."""
        return None

    def as_radial(self):
        """``(profile, center)`` if ``phi(x) = profile(|x - center|)``, else ``None``.

        The profile is a 1D potential, even and nondecreasing on [0, inf)."""
        return None

    def constant_value(self):
        """``c`` if ``phi`` equals ``c`` on its whole domain, else ``None``."""
        return None

    def kinks(self):
        """Points where ``phi`` may fail to be smooth (1D hints)."""
        return []

    def center_hint(self) -> np.ndarray:
        """A point in the interior of the domain, near the minimizer."""
        return np.zeros(self.dim)

    def shift_value(self, c) -> "Potential":
        """``phi + c``."""
        if c == 0:
            return self
        return Tilted(self, np.zeros(self.dim), c)


def _vec(b, n=None):
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if n is not None and b.size != n:
        raise ValueError(f"expected length-{n} vector")
    return b


@dataclass(frozen=True, eq=False)
class Quadratic(Potential):
    """``1/2 <A x, x> + <b, x> + c`` with ``A`` positive semidefinite."""

    A: np.ndarray
    b: np.ndarray
    c: float = 0.0

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", _vec(self.b, A.shape[0]))
        object.__setattr__(self, "c", float(self.c))
        if not np.allclose(A, A.T) or np.min(np.linalg.eigvalsh(A)) < -1e-12:
            raise ValueError("quadratic form must be symmetric positive semidefinite")

    @property
    def dim(self):
        return self.A.shape[0]

    @classmethod
    def gaussian(cls, n, center=None, variance=1.0):
        m = np.zeros(n) if center is None else _vec(center, n)
        A = np.eye(n) / variance
        return cls(A, -A @ m, 0.5 * float(m @ A @ m))

    @property
    def is_definite(self):
        return np.min(np.linalg.eigvalsh(self.A)) > 1e-12

    @property
    def minimizer(self):
        return -np.linalg.solve(self.A, self.b)

    def _eval(self, X):
        return 0.5 * np.einsum("ij,jk,ik->i", X, self.A, X) + X @ self.b + self.c

    def _grad(self, X):
        return X @ self.A + self.b, np.zeros(len(X), dtype=bool)

    def translate(self, a):
        a = _vec(a, self.dim)
        return Quadratic(self.A, self.b - self.A @ a, self.c + 0.5 * a @ self.A @ a - self.b @ a)

    def dilate(self, t):
        return Quadratic(self.A / t, self.b, self.c * t)

    def conjugate(self):
        if not self.is_definite:
            return None
        Ainv = np.linalg.inv(self.A)
        Ainv = 0.5 * (Ainv + Ainv.T)
        return Quadratic(Ainv, -Ainv @ self.b, 0.5 * self.b @ Ainv @ self.b - self.c)

    def as_separable(self):
        if not np.allclose(self.A, np.diag(np.diag(self.A)), atol=0):
            return None
        cs = [self.c / self.dim] * self.dim
        return [Quadratic([[self.A[i, i]]], [self.b[i]], cs[i]) for i in range(self.dim)]

    def as_radial(self):
        a = self.A[0, 0]
        if not (a > 0 and np.allclose(self.A, a * np.eye(self.dim), atol=0)):
            return None
        m = -self.b / a
        c0 = self.c - 0.5 * a * float(m @ m)
        return Quadratic([[a]], [0.0], c0), m

    def center_hint(self):
        return self.minimizer if self.is_definite else np.zeros(self.dim)


@dataclass(frozen=True, eq=False)
class PowerNorm(Potential):
    """``alpha * |x - center|^p`` with ``alpha > 0`` and ``p >= 1``."""

    alpha: float
    p: float
    center: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center))
        if not (self.alpha > 0 and self.p >= 1):
            raise ValueError("power norm needs alpha > 0 and p >= 1")

    @property
    def dim(self):
        return self.center.size

    def _eval(self, X):
        return self.alpha * np.linalg.norm(X - self.center, axis=1) ** self.p

    def _grad(self, X):
        d = X - self.center
        r = np.linalg.norm(d, axis=1)
        at_center = r == 0
        with np.errstate(divide="ignore", invalid="ignore"):
            coef = np.where(at_center, 0.0, self.alpha * self.p * r ** (self.p - 2))
        G = coef[:, None] * d
        flagged = at_center if self.p == 1 else np.zeros(len(X), dtype=bool)
        return G, flagged

    def translate(self, a):
        return PowerNorm(self.alpha, self.p, self.center + _vec(a, self.dim))

    def dilate(self, t):
        return PowerNorm(self.alpha * t ** (1 - self.p), self.p, self.center * t)

    def conjugate(self):
        n = self.dim
        if self.p == 1:
            return SumWithIndicator(Linear(self.center, 0.0), Ball(np.zeros(n), self.alpha))
        q = self.p / (self.p - 1)
        coef = (1 - 1 / self.p) * (self.alpha * self.p) ** (-1 / (self.p - 1))
        base = PowerNorm(coef, q, np.zeros(n))
        if np.any(self.center != 0):
            return Tilted(base, self.center, 0.0)
        return base

    def as_separable(self):
        if self.p == 2 or self.dim == 1:
            return [PowerNorm(self.alpha, self.p, [m]) for m in self.center]
        return None

    def as_radial(self):
        return PowerNorm(self.alpha, self.p, [0.0]), self.center.copy()

    def kinks(self):
        return [float(self.center[0])] if self.dim == 1 and self.p < 2 else []

    def center_hint(self):
        return self.center.copy()


@dataclass(frozen=True, eq=False)
class Linear(Potential):
    """``<b, x> + c``; integrable only after restriction to a body."""

    b: np.ndarray
    c: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "b", _vec(self.b))
        object.__setattr__(self, "c", float(self.c))

    @property
    def dim(self):
        return self.b.size

    def _eval(self, X):
        return X @ self.b + self.c

    def _grad(self, X):
        return np.tile(self.b, (len(X), 1)), np.zeros(len(X), dtype=bool)

    def translate(self, a):
        return Linear(self.b, self.c - float(self.b @ _vec(a, self.dim)))

    def dilate(self, t):
        return Linear(self.b, self.c * t)

    def conjugate(self):
        return SumWithIndicator(Linear(np.zeros(self.dim), -self.c), Polytope(self.b[None, :]))

    def as_separable(self):
        return [Linear([bi], self.c / self.dim) for bi in self.b]

    def as_radial(self):
        if np.all(self.b == 0):
            return Linear([0.0], self.c), np.zeros(self.dim)
        return None

    def constant_value(self):
        return self.c if np.all(self.b == 0) else None


@dataclass(frozen=True, eq=False)
class Barrier(Potential):
    """``alpha / (1 - |x - center| / radius)`` inside the open ball, ``+inf`` outside.

    ``exp(-phi)`` is continuous and vanishes on the boundary sphere.
    """

    alpha: float
    radius: float
    center: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center))
        if not (self.alpha > 0 and self.radius > 0):
            raise ValueError("barrier needs alpha > 0 and radius > 0")

    @property
    def dim(self):
        return self.center.size

    def _eval(self, X):
        r = np.linalg.norm(X - self.center, axis=1) / self.radius
        with np.errstate(divide="ignore"):
            return np.where(r < 1, self.alpha / np.maximum(1 - r, 0.0), np.inf)

    def _grad(self, X):
        d = X - self.center
        r = np.linalg.norm(d, axis=1)
        s = r / self.radius
        if np.any(s >= 1):
            raise DomainError("gradient requested outside the open barrier ball")
        slope = self.alpha / (self.radius * (1 - s) ** 2)
        at_center = r == 0
        u = np.divide(d, r[:, None], out=np.zeros_like(d), where=~at_center[:, None])
        return slope[:, None] * u, at_center

    @property
    def domain(self):
        return Ball(self.center, self.radius)

    def translate(self, a):
        return Barrier(self.alpha, self.radius, self.center + _vec(a, self.dim))

    def dilate(self, t):
        return Barrier(self.alpha * t, self.radius * t, self.center * t)

    def as_separable(self):
        if self.dim == 1:
            return [self]
        return None

    def as_radial(self):
        return Barrier(self.alpha, self.radius, [0.0]), self.center.copy()

    def kinks(self):
        return [float(self.center[0])] if self.dim == 1 else []

    def center_hint(self):
        return self.center.copy()


def _intersect_bodies(A, B):
    """Intersection when it stays inside the catalog (intervals, boxes)."""
    if A is None:
        return B
    if B is None:
        return A
    if A.dim == 1 or (isinstance(A, Box) and isinstance(B, Box)):
        loA, hiA = A.bbox()
        loB, hiB = B.bbox()
        lo, hi = np.maximum(loA, loB), np.minimum(hiA, hiB)
        if np.any(lo > hi):
            raise DomainError("empty intersection of domains")
        if A.dim == 1:
            from ..bodies import Interval
            if np.isfinite(lo[0]) and np.isfinite(hi[0]):
                return Interval(lo[0], hi[0]) if lo[0] < hi[0] else Polytope([[lo[0]]])
            return Box(lo, hi)
        return Box(lo, hi)
    if _body_inside(A, B):
        return A
    if _body_inside(B, A):
        return B
    raise NotImplementedError("intersection of these bodies is outside the catalog")


def _body_inside(A, B, samples=720):
    """Cheap sufficient test for A subset of B via support functions."""
    if A.dim == 1:
        U = np.array([[1.0], [-1.0]])
    else:
        ang = np.linspace(0, 2 * np.pi, samples, endpoint=False)
        U = np.column_stack([np.cos(ang), np.sin(ang)])
        if A.dim != 2:
            return False
    return bool(np.all(A.support(U) <= B.support(U) - 1e-9 * (1 + np.abs(B.support(U)))))


@dataclass(frozen=True, eq=False)
class SumWithIndicator(Potential):
    """``base + Ind_body``: restricts ``exp(-base)`` to the body."""

    base: Potential
    body: ConvexBody

    def __post_init__(self):
        if self.base.dim != self.body.dim:
            raise ValueError("dimension mismatch between potential and body")

    @property
    def dim(self):
        return self.base.dim

    def _eval(self, X):
        inside = np.atleast_1d(self.body.contains(X))
        out = np.full(len(X), np.inf)
        if np.any(inside):
            out[inside] = self.base._eval(X[inside])
        return out

    def _grad(self, X):
        return self.base._grad(X)

    @property
    def domain(self):
        return _intersect_bodies(self.body, self.base.domain)

    def translate(self, a):
        return SumWithIndicator(self.base.translate(a), self.body.translate(a))

    def dilate(self, t):
        return SumWithIndicator(self.base.dilate(t), self.body.scale(t))

    def conjugate(self):
        if isinstance(self.base, Linear):
            return SupportPotential(self.body, self.base.b, -self.base.c)
        return None

    def as_separable(self):
        parts = self.base.as_separable()
        if parts is None:
            return None
        if isinstance(self.body, Box):
            bodies = [Box([lo], [hi]) for lo, hi in zip(self.body.lo, self.body.hi)]
        elif self.dim == 1:
            bodies = [self.body]
        else:
            return None
        return [SumWithIndicator(p, b) for p, b in zip(parts, bodies)]

    def as_radial(self):
        rad = self.base.as_radial()
        if rad is None or not isinstance(self.body, Ball):
            return None
        prof, m = rad
        if self.base.constant_value() is not None:
            m = self.body.center.copy()
        elif not np.allclose(m, self.body.center, atol=0):
            return None
        R = self.body.radius
        return SumWithIndicator(prof, Box([-R], [R])), m

    def constant_value(self):
        return self.base.constant_value()

    def kinks(self):
        lo, hi = self.body.bbox()
        return list(self.base.kinks()) + [float(v) for v in (lo[0], hi[0]) if np.isfinite(v)]

    def center_hint(self):
        c = self.base.center_hint()
        dom = self.domain
        inner = dom.interior_point()
        if dom.contains(c):
            # pull boundary minimizers strictly inside
            return 0.9 * c + 0.1 * inner
        return inner


@dataclass(frozen=True, eq=False)
class Tilted(Potential):
    """``base + <b, x> + c``."""

    base: Potential
    b: np.ndarray
    c: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "b", _vec(self.b, self.base.dim))
        object.__setattr__(self, "c", float(self.c))

    @property
    def dim(self):
        return self.base.dim

    def _eval(self, X):
        return self.base._eval(X) + X @ self.b + self.c

    def _grad(self, X):
        G, F = self.base._grad(X)
        return G + self.b, F

    @property
    def domain(self):
        return self.base.domain

    def translate(self, a):
        a = _vec(a, self.dim)
        return Tilted(self.base.translate(a), self.b, self.c - float(self.b @ a))

    def dilate(self, t):
        return Tilted(self.base.dilate(t), self.b, self.c * t)

    def conjugate(self):
        inner = self.base.conjugate()
        if inner is None:
            return None
        return Tilted(inner.translate(self.b), np.zeros(self.dim), -self.c)

    def as_separable(self):
        parts = self.base.as_separable()
        if parts is None:
            return None
        return [Tilted(p, [bi], self.c / self.dim) for p, bi in zip(parts, self.b)]

    def as_radial(self):
        if np.any(self.b != 0):
            return None
        rad = self.base.as_radial()
        if rad is None:
            return None
        return Tilted(rad[0], [0.0], self.c), rad[1]

    def constant_value(self):
        v = self.base.constant_value()
        if v is None or np.any(self.b != 0):
            return None
        return v + self.c

    def kinks(self):
        return self.base.kinks()

    def center_hint(self):
        return self.base.center_hint()

    def shift_value(self, c):
        return Tilted(self.base, self.b, self.c + c)


@dataclass(frozen=True, eq=False)
class SupportPotential(Potential):
    """``y -> h_body(y - shift) + c``: the conjugate of a restricted affine potential."""

    body: ConvexBody
    shift: np.ndarray
    c: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "shift", _vec(self.shift, self.body.dim))

    @property
    def dim(self):
        return self.body.dim

    def _eval(self, X):
        with np.errstate(invalid="ignore"):
            return np.atleast_1d(self.body.support(X - self.shift)) + self.c

    def _grad(self, X):
        return np.atleast_2d(self.body.support_point(X - self.shift)), np.zeros(len(X), dtype=bool)

    @property
    def domain(self):
        if self.body.is_bounded:
            return None
        return None if not isinstance(self.body, Box) else _recession_dual(self.body, self.shift)

    def translate(self, a):
        a = _vec(a, self.dim)
        return SupportPotential(self.body, self.shift + a, self.c)

    def dilate(self, t):
        return SupportPotential(self.body, self.shift * t, self.c * t)

    def conjugate(self):
        return SumWithIndicator(Linear(self.shift, -self.c), self.body)


def _recession_dual(box: Box, shift):
    lo = np.where(np.isfinite(box.lo), -np.inf, 0.0) + shift
    hi = np.where(np.isfinite(box.hi), np.inf, 0.0) + shift
    return Box(lo, hi)


@dataclass(frozen=True, eq=False)
class Separable(Potential):
    """``sum_i factors[i](x_i)`` with 1D factor potentials."""

    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if any(f.dim != 1 for f in self.factors):
            raise ValueError("separable factors must be one-dimensional")

    @property
    def dim(self):
        return len(self.factors)

    def _eval(self, X):
        return sum(f._eval(X[:, i:i + 1]) for i, f in enumerate(self.factors))

    def _grad(self, X):
        cols = [f._grad(X[:, i:i + 1]) for i, f in enumerate(self.factors)]
        G = np.column_stack([c[0][:, 0] for c in cols])
        F = np.any(np.column_stack([c[1] for c in cols]), axis=1)
        return G, F

    @property
    def domain(self):
        doms = [f.domain for f in self.factors]
        if all(d is None for d in doms):
            return None
        lo = [d.bbox()[0][0] if d is not None else -np.inf for d in doms]
        hi = [d.bbox()[1][0] if d is not None else np.inf for d in doms]
        return Box(lo, hi)

    def translate(self, a):
        a = _vec(a, self.dim)
        return Separable([f.translate([ai]) for f, ai in zip(self.factors, a)])

    def dilate(self, t):
        return Separable([f.dilate(t) for f in self.factors])

    def conjugate(self):
        conj = [f.conjugate() for f in self.factors]
        return None if any(c is None for c in conj) else Separable(conj)

    def as_separable(self):
        return list(self.factors)

    def constant_value(self):
        vals = [f.constant_value() for f in self.factors]
        return None if any(v is None for v in vals) else float(sum(vals))

    def center_hint(self):
        return np.array([f.center_hint()[0] for f in self.factors])


@dataclass(frozen=True, eq=False)
class Radial(Potential):
    """``profile(|x - center|)`` for an even 1D profile, nondecreasing on [0, inf)."""

    profile: Potential
    center: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center))

    @property
    def dim(self):
        return self.center.size

    def _eval(self, X):
        r = np.linalg.norm(X - self.center, axis=1)
        return self.profile._eval(r[:, None])

    def _grad(self, X):
        d = X - self.center
        r = np.linalg.norm(d, axis=1)
        g, _ = self.profile._grad(r[:, None])
        at_center = r == 0
        u = np.divide(d, r[:, None], out=np.zeros_like(d), where=~at_center[:, None])
        slope0 = self.profile._grad(np.array([[1e-300]]))[0][0, 0]
        flagged = at_center & (abs(slope0) > 0)
        return g[:, 0:1] * u, flagged

    @property
    def domain(self):
        dom = self.profile.domain
        if dom is None:
            return None
        R = dom.bbox()[1][0]
        return Ball(self.center, R) if np.isfinite(R) else None

    def translate(self, a):
        return Radial(self.profile, self.center + _vec(a, self.dim))

    def dilate(self, t):
        return Radial(self.profile.dilate(t), self.center * t)

    def as_radial(self):
        return self.profile, self.center.copy()

    def constant_value(self):
        return self.profile.constant_value()

    def center_hint(self):
        return self.center.copy()


@dataclass(frozen=True)
class Lattice:
    """Uniform tensor lattice: ``origin + spacing * index`` for ``index < shape``."""

    origin: tuple
    spacing: tuple
    shape: tuple

    @property
    def dim(self):
        return len(self.shape)

    def axes(self):
        return [self.origin[i] + self.spacing[i] * np.arange(self.shape[i]) for i in range(self.dim)]

    def points(self):
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.column_stack([m.ravel() for m in mesh])

    @classmethod
    def covering(cls, lo, hi, shape):
        lo, hi = np.atleast_1d(lo), np.atleast_1d(hi)
        shape = tuple(int(s) for s in np.broadcast_to(shape, lo.shape))
        spacing = tuple(float((h - l) / (s - 1)) for l, h, s in zip(lo, hi, shape))
        return cls(tuple(float(v) for v in lo), spacing, shape)


@dataclass(frozen=True, eq=False)
class GridPotential(Potential):
    """Lattice samples of a convex potential, multilinearly interpolated.

    ``np.inf`` entries mark lattice points outside the effective domain.
    """

    lattice: Lattice
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).reshape(self.lattice.shape)
        if np.any(np.isnan(v)) or np.any(v == -np.inf):
            raise ValueError("grid potential values must lie in (-inf, +inf]")
        if not np.any(np.isfinite(v)):
            raise DomainError("grid potential has empty effective domain")
        object.__setattr__(self, "values", v)

    @property
    def dim(self):
        return self.lattice.dim

    def _eval(self, X):
        lat = self.lattice
        idx = (X - np.array(lat.origin)) / np.array(lat.spacing)
        out = np.full(len(X), np.inf)
        shape = np.array(lat.shape)
        inside = np.all((idx >= -1e-9) & (idx <= shape - 1 + 1e-9), axis=1)
        if not np.any(inside):
            return out
        idx = np.clip(idx[inside], 0, shape - 1)
        base = np.minimum(np.floor(idx).astype(int), np.maximum(shape - 2, 0))
        frac = idx - base
        acc = np.zeros(len(idx))
        any_inf = np.zeros(len(idx), dtype=bool)
        for corner in np.ndindex(*([2] * self.dim)):
            c = np.array(corner)
            w = np.prod(np.where(c, frac, 1 - frac), axis=1)
            pos = tuple(np.minimum(base[:, i] + c[i], shape[i] - 1) for i in range(self.dim))
            v = self.values[pos]
            live = w > 0
            any_inf |= live & ~np.isfinite(v)
            acc += np.where(live & np.isfinite(v), w * np.where(np.isfinite(v), v, 0.0), 0.0)
        out[inside] = np.where(any_inf, np.inf, acc)
        return out

    def _grad(self, X):
        h = np.array(self.lattice.spacing)
        G = np.zeros_like(X)
        for i in range(self.dim):
            e = np.zeros(self.dim)
            e[i] = h[i]
            G[:, i] = (self._eval(X + e) - self._eval(X - e)) / (2 * h[i])
        if not np.all(np.isfinite(G)):
            raise DomainError("grid gradient requested at the domain boundary")
        return G, np.zeros(len(X), dtype=bool)

    @property
    def domain(self):
        pts = self.lattice.points()[np.isfinite(self.values.ravel())]
        if self.dim == 1:
            from ..bodies import Interval
            return Interval(pts.min(), pts.max())
        return Polytope(pts)

    def translate(self, a):
        a = _vec(a, self.dim)
        lat = self.lattice
        return GridPotential(Lattice(tuple(np.array(lat.origin) + a), lat.spacing, lat.shape), self.values)

    def dilate(self, t):
        lat = self.lattice
        return GridPotential(Lattice(tuple(np.array(lat.origin) * t), tuple(np.array(lat.spacing) * t),
                                     lat.shape), self.values * t)

    def center_hint(self):
        k = np.unravel_index(np.argmin(self.values), self.values.shape)
        return np.array([ax[i] for ax, i in zip(self.lattice.axes(), k)])


@dataclass(frozen=True, eq=False)
class InfConvolution1D(Potential):
    """``x -> inf_y phi(y) + t psi((x - y) / t)`` in one dimension, evaluated
    pointwise by golden-section search (exact up to rounding for convex data)."""

    phi: Potential
    psi: Potential
    t: float

    @property
    def dim(self):
        return 1

    @cached_property
    def _phi_minimizer(self):
        lo, hi = _interval(self.phi.domain)
        guess = np.array([float(self.phi.center_hint()[0])])
        lo_a, hi_a = np.array([lo]), np.array([hi])

        def objective(y, _):
            return self.phi._eval(y[:, None])

        lo_a, hi_a = _expand_bracket(objective, lo_a, hi_a, guess, guess)
        y, _ = golden_minimize(lambda y: objective(y, None), lo_a, hi_a, iterations=120)
        return float(y[0])

    def _eval(self, X):
        x = X[:, 0]
        t = self.t
        lo_f, hi_f = _interval(self.phi.domain)
        lo_g, hi_g = _interval(self.psi.domain)
        lo = np.maximum(lo_f, x - t * hi_g)
        hi = np.minimum(hi_f, x - t * lo_g)
        out = np.full(len(x), np.inf)
        ok = lo <= hi
        if not np.any(ok):
            return out
        xs, lo, hi = x[ok], lo[ok], hi[ok]
        c = self.psi.constant_value()
        if c is not None:
            # constant on an interval: minimize phi over a window by clipping its minimizer
            y = np.clip(self._phi_minimizer, lo, hi)
            out[ok] = self.phi._eval(y[:, None]) + t * c
            return out

        def objective(y, xsub):
            z = np.clip((xsub - y) / t, lo_g, hi_g)
            return self.phi._eval(y[:, None]) + t * self.psi._eval(z[:, None])

        guess = self.phi.center_hint()[0] + 0.0 * xs
        lo, hi = _expand_bracket(objective, lo, hi, guess, xs)
        _, val = golden_minimize(lambda y: objective(y, xs), lo, hi)
        out[ok] = val
        return out

    @property
    def domain(self):
        lo_f, hi_f = _interval(self.phi.domain)
        lo_g, hi_g = _interval(self.psi.domain)
        lo, hi = lo_f + self.t * lo_g, hi_f + self.t * hi_g
        if np.isneginf(lo) and np.isposinf(hi):
            return None
        return Box([lo], [hi])

    def translate(self, a):
        return InfConvolution1D(self.phi.translate(a), self.psi, self.t)

    def dilate(self, s):
        return InfConvolution1D(self.phi.dilate(s), self.psi, self.t * s)

    def kinks(self):
        kf = list(self.phi.kinks()) + [float(self.phi.center_hint()[0])]
        kg = list(self.psi.kinks()) + [float(self.psi.center_hint()[0])]
        for lim in _interval(self.psi.domain):
            if np.isfinite(lim):
                kg.append(float(lim))
        for lim in _interval(self.phi.domain):
            if np.isfinite(lim):
                kf.append(float(lim))
        return sorted({a + self.t * b for a in kf for b in kg})

    def center_hint(self):
        return self.phi.center_hint() + self.t * self.psi.center_hint()


def _interval(body):
    if body is None:
        return -np.inf, np.inf
    lo, hi = body.bbox()
    return float(lo[0]), float(hi[0])


def _expand_bracket(objective, lo, hi, guess, xs):
    """Replace infinite bracket ends by finite points past the minimizer."""
    lo, hi = lo.copy(), hi.copy()
    with np.errstate(invalid="ignore"):
        mid = 0.5 * (lo + hi)
    g = np.clip(np.where(np.isfinite(lo) & np.isfinite(hi), mid, guess), lo, hi)
    for arr, sign in ((lo, -1.0), (hi, 1.0)):
        bad = ~np.isfinite(arr)
        if not np.any(bad):
            continue
        gb, xb = g[bad], xs[bad]
        f0 = objective(gb, xb)
        step = np.ones_like(gb)
        for _ in range(200):
            done = objective(gb + sign * step, xb) > f0
            if np.all(done):
                break
            step = np.where(done, step, 2 * step)
        arr[bad] = gb + sign * step
    return lo, hi


def restrict(base: Potential, body: ConvexBody) -> Potential:
    return SumWithIndicator(base, body)


def indicator(body: ConvexBody, log_height: float = 0.0) -> Potential:
    """Potential of ``exp(log_height) * 1_body``."""
    return SumWithIndicator(Linear(np.zeros(body.dim), -log_height), body)


def zero_potential(n) -> Potential:
    return ZeroFunction(n)


@dataclass(frozen=True, eq=False)
class ZeroFunction(Potential):
    """``phi = +inf`` everywhere (``f = 0``); rejected by every integrable-input gate."""

    n: int

    @property
    def dim(self):
        return self.n

    def _eval(self, X):
        return np.full(len(X), np.inf)


__all__ = [
    "Potential", "Quadratic", "PowerNorm", "Linear", "Barrier", "SumWithIndicator",
    "Tilted", "SupportPotential", "Separable", "Radial", "Lattice", "GridPotential",
    "InfConvolution1D", "DomainError", "indicator", "restrict", "zero_potential",
    "ZeroFunction",
]
