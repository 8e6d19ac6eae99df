"""Log-concave functions ``f = exp(-phi)`` and their exponential envelopes."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..bodies import ConvexBody
from ..quadrature import golden_minimize
from .potentials import DomainError, Potential, as_points


class IntegrabilityError(ValueError):
    """The function is not integrable with positive integral."""


@dataclass(frozen=True, eq=False)
class LogConcaveFn:
    potential: Potential
    label: str = ""

    @property
    def dim(self) -> int:
        return self.potential.dim

    @property
    def support(self) -> ConvexBody | None:
        """``K_f``: closure of ``{f > 0}`` (``None`` for all of R^n)."""
        return self.potential.domain

    def __call__(self, x):
        X, single = as_points(x, self.dim)
        with np.errstate(over="ignore"):
            vals = np.exp(-self.potential._eval(X))
        return float(vals[0]) if single else vals

    def translate(self, a) -> "LogConcaveFn":
        return LogConcaveFn(self.potential.translate(a), self.label)

    def scale_value(self, c: float) -> "LogConcaveFn":
        """``exp(c) * f``."""
        return LogConcaveFn(self.potential.shift_value(-c), self.label)

    def __repr__(self):
        return f"LogConcaveFn({self.label or type(self.potential).__name__})"


def evaluate(f: LogConcaveFn, x):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("evaluation point must be finite")
    return f(x)


def dilate(g: LogConcaveFn, t: float) -> LogConcaveFn:
    """``t . g``: the function ``x -> g(x / t)^t``."""
    if not t > 0:
        raise ValueError("dilation factor must be positive")
    if t == 1:
        return g
    return LogConcaveFn(g.potential.dilate(t), g.label)


def potential_gradient(phi: Potential, x, flags=False):
    """Gradient of ``phi`` at interior points of its domain."""
    X, single = as_points(x, phi.dim)
    dom = phi.domain
    if dom is not None:
        inside = np.atleast_1d(dom.contains(X, tol=-1e-12))
        if not np.all(inside):
            raise DomainError("gradient requested outside the interior of dom(phi)")
    vals = phi._eval(X)
    if not np.all(np.isfinite(vals)):
        raise DomainError("gradient requested outside dom(phi)")
    return phi.gradient(X[0] if single and phi.dim > 1 else (X[0, 0] if single else X), flags=flags)


@dataclass(frozen=True)
class EnvelopeBound:
    """``f(x) <= A * exp(-c |x|)`` for all x."""

    A: float
    c: float

    def __post_init__(self):
        if not (self.A > 0 and self.c > 0):
            raise ValueError("envelope constants must be positive")

    def __call__(self, x):
        X = np.atleast_2d(np.asarray(x, dtype=float))
        return self.A * np.exp(-self.c * np.linalg.norm(X, axis=1))

    def tail_mass(self, R: float, n: int) -> float:
        """Upper bound on ``int_{|x| > R} f``."""
        from scipy.special import gammaincc
        from ..bodies import unit_sphere_area
        area = 2.0 if n == 1 else unit_sphere_area(n)
        return self.A * area * math.gamma(n) * gammaincc(n, self.c * R) / self.c ** n

    def truncation_radius(self, n: int, tail: float) -> float:
        """Smallest radius (to 1%) with ``tail_mass <= tail``."""
        R = 1.0
        while self.tail_mass(R, n) > tail:
            R *= 1.5
            if R > 1e7:
                raise IntegrabilityError("no truncation radius within budget")
        lo, hi = R / 1.5, R
        while hi - lo > 1e-2 * hi:
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if self.tail_mass(mid, n) > tail else (lo, mid)
        return hi


def _directions(n, count=64):
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        ang = np.linspace(0, 2 * np.pi, count, endpoint=False)
        return np.column_stack([np.cos(ang), np.sin(ang)])
    k = np.arange(count * 4) + 0.5
    z = 1 - 2 * k / (count * 4)
    th = np.pi * (1 + 5 ** 0.5) * k
    r = np.sqrt(1 - z * z)
    return np.column_stack([r * np.cos(th), r * np.sin(th), z])


def _ray_extent(f, x0, U, budget):
    dom = f.support
    if dom is None:
        return np.full(len(U), budget)
    # distance along each ray to the support boundary (capped by budget)
    hi = np.full(len(U), budget)
    lo = np.zeros(len(U))
    inside = np.atleast_1d(dom.contains(x0 + hi[:, None] * U))
    hi_done = inside.copy()
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        ok = np.atleast_1d(dom.contains(x0 + mid[:, None] * U))
        lo = np.where(hi_done, lo, np.where(ok, mid, lo))
        hi = np.where(hi_done, hi, np.where(ok, hi, mid))
    return np.where(hi_done, budget, lo)


def exponential_envelope(f: LogConcaveFn, budget=1e4, c_cap=1.0) -> EnvelopeBound:
    """Constants ``(A, c)`` with ``f(x) <= A exp(-c|x|)``.

    ``c`` is the smallest chord slope of ``phi`` along rays from an interior
    point (capped at ``c_cap``); by convexity ``-phi + c r`` is concave along
    each ray, so its maximum there is located by golden section.
    """
    phi = f.potential
    n = f.dim
    x0 = np.asarray(phi.center_hint(), dtype=float)
    phi0 = float(phi._eval(x0[None, :])[0])
    if not np.isfinite(phi0):
        raise IntegrabilityError("reference point outside the support")
    U = _directions(n)
    ext = _ray_extent(f, x0, U, budget)
    bounded_ray = ext < budget
    far = phi._eval(x0 + budget * U)
    with np.errstate(invalid="ignore"):
        slope = np.where(bounded_ray | ~np.isfinite(far), np.inf, (far - phi0) / budget)
    smin = float(np.min(slope))
    if not smin > 0:
        raise IntegrabilityError("no positive exponential decay rate within the search budget")
    c = min(c_cap, smin if n == 1 else 0.9 * smin)
    rmax = np.minimum(ext, budget)

    def neg(r):
        pts = x0 + r[:, None] * U
        return phi._eval(pts) - c * r

    _, best = golden_minimize(neg, np.zeros(len(U)), rmax * (1 - 1e-12))
    logA = float(np.max(-best)) + c * float(np.linalg.norm(x0))
    safety = 1.0 + 1e-9 if n == 1 else 2.0
    env = EnvelopeBound(math.exp(logA) * safety, c)
    _verify_envelope(f, env, x0, rmax)
    return env


def _verify_envelope(f, env, x0, rmax):
    n = f.dim
    rng = np.random.default_rng(12345)
    R = float(np.max(np.minimum(rmax, 50.0)))
    pts = x0 + rng.uniform(-R, R, size=(1000, n))
    vals = f(pts)
    if np.any(vals > env(pts) * (1 + 1e-9)):
        raise IntegrabilityError("exponential envelope failed verification")


def envelope_holds(f: LogConcaveFn, env: EnvelopeBound, points) -> bool:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if f.dim == 1:
        pts = pts.reshape(-1, 1)
    return bool(np.all(f(pts) <= env(pts) * (1 + 1e-12)))
