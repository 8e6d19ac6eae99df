"""Convex bodies: support functions, gauges, Minkowski sums, volumes.

Bodies are immutable. Support functions accept a single direction of shape
``(n,)`` or a batch ``(m, n)`` and return a scalar or an ``(m,)`` array.
Unbounded boxes (infinite bounds) stand in for polyhedral supports such as
the half-line or the positive quadrant; their support function is ``+inf``
in directions of recession.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.spatial import ConvexHull
from scipy.special import comb, gamma

from .discrete import DiscreteMeasure
from .quadrature import adaptive_rule, golden_minimize


class GeometryError(ValueError):
    pass


def _as_batch(theta, n):
    theta = np.asarray(theta, dtype=float)
    single = theta.ndim == 1
    theta = theta.reshape(-1, n)
    return theta, single


def _unbatch(values, single):
    return float(values[0]) if single else values


def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / gamma(n / 2 + 1)


def unit_sphere_area(n: int) -> float:
    """(n-1)-dimensional measure of the unit sphere in R^n."""
    return n * unit_ball_volume(n)


@dataclass(frozen=True)
class Facet:
    """A flat piece of the boundary.

    Points are ``origin + sum_k s_k * axes[k]`` with ``s_k`` ranging over
    ``[lo_k, hi_k]``; bounds may be infinite. ``area`` is the facet's
    (n-1)-measure (``inf`` for unbounded facets). In 3D, ``polygon`` holds
    the ordered facet vertices instead of an axis parametrization.
    """

    normal: np.ndarray
    origin: np.ndarray
    axes: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    area: float
    polygon: np.ndarray | None = None


class ConvexBody:
    dim: int

    def support(self, theta):
        raise NotImplementedError

    def support_point(self, theta):
        """A maximizer of <x, theta> over the body (batched)."""
        raise NotImplementedError

    def translate(self, a) -> "ConvexBody":
        raise NotImplementedError

    def scale(self, t: float) -> "ConvexBody":
        raise NotImplementedError

    def bbox(self):
        eye = np.eye(self.dim)
        hi = self.support(eye)
        lo = -self.support(-eye)
        return np.atleast_1d(lo), np.atleast_1d(hi)

    @property
    def is_bounded(self) -> bool:
        lo, hi = self.bbox()
        return bool(np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)))

    def contains(self, x, tol=1e-12):
        raise NotImplementedError

    def volume(self) -> float:
        raise NotImplementedError

    def facets(self) -> list[Facet]:
        raise NotImplementedError(f"{type(self).__name__} has no flat facets")

    def interior_point(self) -> np.ndarray:
        lo, hi = self.bbox()
        lo = np.where(np.isfinite(lo), lo, np.where(np.isfinite(hi), hi - 1.0, 0.0))
        hi = np.where(np.isfinite(hi), hi, lo + 2.0)
        return 0.5 * (lo + hi)

    @property
    def contains_origin_interior(self) -> bool:
        eye = np.vstack([np.eye(self.dim), -np.eye(self.dim)])
        # necessary test on axes plus a dense check in 2D
        if self.dim == 2:
            ang = np.linspace(0, 2 * np.pi, 721)[:-1]
            eye = np.column_stack([np.cos(ang), np.sin(ang)])
        return bool(np.all(np.asarray(self.support(eye)) > 1e-12))

    def diameter_bound(self) -> float:
        lo, hi = self.bbox()
        return float(np.linalg.norm(hi - lo))

    def radius_bound(self) -> float:
        """max |x| over the body."""
        lo, hi = self.bbox()
        return float(np.linalg.norm(np.maximum(np.abs(lo), np.abs(hi))))


# --------------------------------------------------------------------------
# Polytopes


def _hull_2d(points):
    """Counter-clockwise extreme points, starting at the lexicographic minimum."""
    pts = np.unique(np.round(points, 15), axis=0)
    if len(pts) <= 2:
        return pts
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    scale = max(np.ptp(pts[:, 0]), np.ptp(pts[:, 1]), 1e-300)
    eps = 1e-12 * scale * scale
    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= eps:
            lower.pop()
        lower.append(p)
    for p in pts[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= eps:
            upper.pop()
        upper.append(p)
    hull = np.array(lower[:-1] + upper[:-1])
    if len(hull) < 3:
        # collinear: keep the two extreme points
        return np.array([pts[0], pts[-1]])
    return hull


class Polytope(ConvexBody):
    """Convex hull of finitely many points (n in {1, 2, 3}).

    Lower-dimensional hulls (a point, a segment) are allowed; they have zero
    volume and no surface area measure.
    """

    def __init__(self, vertices):
        v = np.asarray(vertices, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[0] == 0:
            raise GeometryError("polytope needs a nonempty (m, n) vertex array")
        self.dim = v.shape[1]
        if self.dim not in (1, 2, 3):
            raise GeometryError("polytopes are supported for n in {1, 2, 3}")
        if self.dim == 1:
            lo, hi = v.min(), v.max()
            v = np.array([[lo]]) if lo == hi else np.array([[lo], [hi]])
        elif self.dim == 2:
            v = _hull_2d(v)
        else:
            v = np.unique(v, axis=0)
            if len(v) >= 4 and np.linalg.matrix_rank(v[1:] - v[0], tol=1e-12) == 3:
                hull = ConvexHull(v)
                v = v[np.sort(hull.vertices)]
        self.vertices = v

    def __repr__(self):
        return f"Polytope({self.vertices.tolist()})"

    @property
    def full_dimensional(self) -> bool:
        if len(self.vertices) <= self.dim:
            return False
        return np.linalg.matrix_rank(self.vertices[1:] - self.vertices[0], tol=1e-12) == self.dim

    def support(self, theta):
        theta, single = _as_batch(theta, self.dim)
        return _unbatch(np.max(theta @ self.vertices.T, axis=1), single)

    def support_point(self, theta):
        theta, single = _as_batch(theta, self.dim)
        k = np.argmax(theta @ self.vertices.T, axis=1)
        pts = self.vertices[k]
        return pts[0] if single else pts

    def translate(self, a):
        return Polytope(self.vertices + np.asarray(a, dtype=float))

    def scale(self, t):
        return Polytope(self.vertices * float(t))

    @cached_property
    def halfspaces(self):
        """Outward unit normals ``A`` and offsets ``b`` with ``A x <= b``."""
        if not self.full_dimensional:
            raise GeometryError("degenerate polytope has no facet description")
        normals = np.array([f.normal for f in self.facets()])
        offsets = np.array([float(f.normal @ f.origin) for f in self.facets()])
        return normals, offsets

    def contains(self, x, tol=1e-12):
        x, single = _as_batch(x, self.dim)
        A, b = self.halfspaces
        inside = np.all(x @ A.T <= b + tol * (1 + np.abs(b)), axis=1)
        return _unbatch(inside, single) if not single else bool(inside[0])

    def volume(self):
        v = self.vertices
        if not self.full_dimensional:
            return 0.0
        if self.dim == 1:
            return float(v[1, 0] - v[0, 0])
        if self.dim == 2:
            x, y = v[:, 0], v[:, 1]
            return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))
        centroid = v.mean(axis=0)
        total = 0.0
        for f in self.facets():
            poly = f.polygon
            for i in range(1, len(poly) - 1):
                a, b, c = poly[0] - centroid, poly[i] - centroid, poly[i + 1] - centroid
                total += abs(np.dot(a, np.cross(b, c))) / 6.0
        return total

    @cached_property
    def _facets(self):
        v = self.vertices
        if not self.full_dimensional:
            raise GeometryError("degenerate (lower-dimensional) polytope")
        out = []
        if self.dim == 1:
            for x, nrm in ((v[0], -1.0), (v[1], 1.0)):
                out.append(Facet(np.array([nrm]), x.copy(), np.zeros((0, 1)),
                                 np.zeros(0), np.zeros(0), 1.0))
            return out
        if self.dim == 2:
            for i in range(len(v)):
                p, q = v[i], v[(i + 1) % len(v)]
                e = q - p
                length = float(np.hypot(*e))
                nrm = np.array([e[1], -e[0]]) / length
                out.append(Facet(nrm, p.copy(), (e / length)[None, :],
                                 np.zeros(1), np.array([length]), length))
            return out
        hull = ConvexHull(v)
        diam = float(np.max(np.ptp(v, axis=0)))
        groups: list[list[int]] = []
        keys: list[np.ndarray] = []
        for k, eq in enumerate(hull.equations):
            for g, key in zip(groups, keys):
                if np.linalg.norm(eq[:3] - key[:3]) < 1e-9 and abs(eq[3] - key[3]) < 1e-9 * diam:
                    g.append(k)
                    break
            else:
                groups.append([k])
                keys.append(eq)
        for g, key in zip(groups, keys):
            nrm = key[:3] / np.linalg.norm(key[:3])
            idx = np.unique(hull.simplices[g].ravel())
            pts = v[idx]
            c = pts.mean(axis=0)
            u = pts[0] - c
            u /= np.linalg.norm(u)
            w = np.cross(nrm, u)
            ang = np.arctan2((pts - c) @ w, (pts - c) @ u)
            poly = pts[np.argsort(ang)]
            area = 0.0
            for i in range(1, len(poly) - 1):
                area += 0.5 * abs(np.dot(nrm, np.cross(poly[i] - poly[0], poly[i + 1] - poly[0])))
            out.append(Facet(nrm, c, np.zeros((0, 3)), np.zeros(0), np.zeros(0), area, poly))
        # deterministic order: sort by normal
        out.sort(key=lambda f: tuple(np.round(f.normal, 12)))
        return out

    def facets(self):
        return list(self._facets)

    def edges_3d(self):
        """(length, exterior dihedral angle) pairs for a 3D polytope."""
        fs = self.facets()
        edges = {}
        for fi, f in enumerate(fs):
            poly = f.polygon
            for i in range(len(poly)):
                a, b = poly[i], poly[(i + 1) % len(poly)]
                key = tuple(sorted([tuple(np.round(a, 10)), tuple(np.round(b, 10))]))
                edges.setdefault(key, []).append(fi)
        out = []
        for key, faces in edges.items():
            if len(faces) != 2:
                continue
            a, b = np.array(key[0]), np.array(key[1])
            n1, n2 = fs[faces[0]].normal, fs[faces[1]].normal
            ext = math.acos(float(np.clip(n1 @ n2, -1.0, 1.0)))
            out.append((float(np.linalg.norm(b - a)), ext))
        return out


def Interval(lo, hi) -> Polytope:
    return Polytope(np.array([[lo], [hi]], dtype=float))


def Point(at) -> Polytope:
    return Polytope(np.atleast_2d(np.asarray(at, dtype=float)))


# --------------------------------------------------------------------------
# Closed-form bodies


class Ball(ConvexBody):
    def __init__(self, center, radius):
        self.center = np.atleast_1d(np.asarray(center, dtype=float))
        self.radius = float(radius)
        self.dim = self.center.size
        if not self.radius > 0:
            raise GeometryError("ball radius must be positive")

    def __repr__(self):
        return f"Ball({self.center.tolist()}, {self.radius})"

    def support(self, theta):
        theta, single = _as_batch(theta, self.dim)
        return _unbatch(theta @ self.center + self.radius * np.linalg.norm(theta, axis=1), single)

    def support_point(self, theta):
        theta, single = _as_batch(theta, self.dim)
        nrm = np.linalg.norm(theta, axis=1, keepdims=True)
        u = np.divide(theta, nrm, out=np.zeros_like(theta), where=nrm > 0)
        pts = self.center + self.radius * u
        return pts[0] if single else pts

    def translate(self, a):
        return Ball(self.center + np.asarray(a, dtype=float), self.radius)

    def scale(self, t):
        return Ball(self.center * t, self.radius * t)

    def contains(self, x, tol=1e-12):
        x, single = _as_batch(x, self.dim)
        ok = np.linalg.norm(x - self.center, axis=1) <= self.radius * (1 + tol)
        return bool(ok[0]) if single else ok

    def volume(self):
        return unit_ball_volume(self.dim) * self.radius ** self.dim

    def interior_point(self):
        return self.center.copy()


class Box(ConvexBody):
    """Axis-aligned box; bounds may be infinite (orthants, half-lines)."""

    def __init__(self, lo, hi):
        self.lo = np.atleast_1d(np.asarray(lo, dtype=float))
        self.hi = np.atleast_1d(np.asarray(hi, dtype=float))
        self.dim = self.lo.size
        if self.hi.shape != self.lo.shape or not np.all(self.lo < self.hi):
            raise GeometryError("box needs lo < hi componentwise")

    def __repr__(self):
        return f"Box({self.lo.tolist()}, {self.hi.tolist()})"

    def support(self, theta):
        theta, single = _as_batch(theta, self.dim)
        with np.errstate(invalid="ignore"):
            pos = np.where(theta > 0, theta * self.hi, 0.0)
            neg = np.where(theta < 0, theta * self.lo, 0.0)
        return _unbatch(np.sum(pos + neg, axis=1), single)

    def support_point(self, theta):
        theta, single = _as_batch(theta, self.dim)
        pts = np.where(theta > 0, self.hi, np.where(theta < 0, self.lo, self.interior_point()))
        return pts[0] if single else pts

    def translate(self, a):
        a = np.asarray(a, dtype=float)
        return Box(self.lo + a, self.hi + a)

    def scale(self, t):
        return Box(self.lo * t, self.hi * t)

    def bbox(self):
        return self.lo.copy(), self.hi.copy()

    def contains(self, x, tol=1e-12):
        x, single = _as_batch(x, self.dim)
        ok = np.all((x >= self.lo - tol) & (x <= self.hi + tol), axis=1)
        return bool(ok[0]) if single else ok

    def volume(self):
        return float(np.prod(self.hi - self.lo))

    def as_polytope(self) -> Polytope:
        if not self.is_bounded:
            raise GeometryError("unbounded box has no vertex description")
        corners = np.array(np.meshgrid(*zip(self.lo, self.hi), indexing="ij")).reshape(self.dim, -1).T
        return Polytope(corners)

    def facets(self):
        out = []
        n = self.dim
        for i in range(n):
            others = [j for j in range(n) if j != i]
            for bound, sign in ((self.lo[i], -1.0), (self.hi[i], 1.0)):
                if not np.isfinite(bound):
                    continue
                nrm = np.zeros(n)
                nrm[i] = sign
                origin = np.zeros(n)
                origin[i] = bound
                axes = np.eye(n)[others]
                lo = self.lo[others]
                hi = self.hi[others]
                area = float(np.prod(hi - lo)) if others else 1.0
                out.append(Facet(nrm, origin, axes, lo.copy(), hi.copy(), area))
        return out

    def interval(self, i):
        return self.lo[i], self.hi[i]


class Ellipsoid(ConvexBody):
    """``{x : (x - c)^T M (x - c) <= 1}`` with ``M`` symmetric positive definite."""

    def __init__(self, center, matrix):
        self.center = np.atleast_1d(np.asarray(center, dtype=float))
        M = np.atleast_2d(np.asarray(matrix, dtype=float))
        self.dim = self.center.size
        if M.shape != (self.dim, self.dim) or not np.allclose(M, M.T):
            raise GeometryError("ellipsoid matrix must be symmetric (n, n)")
        if np.min(np.linalg.eigvalsh(M)) <= 0:
            raise GeometryError("ellipsoid matrix must be positive definite")
        self.matrix = M
        self.inverse = np.linalg.inv(M)

    def __repr__(self):
        return f"Ellipsoid({self.center.tolist()}, {self.matrix.tolist()})"

    def support(self, theta):
        theta, single = _as_batch(theta, self.dim)
        q = np.einsum("ij,jk,ik->i", theta, self.inverse, theta)
        return _unbatch(theta @ self.center + np.sqrt(np.maximum(q, 0.0)), single)

    def support_point(self, theta):
        theta, single = _as_batch(theta, self.dim)
        y = theta @ self.inverse
        q = np.sqrt(np.maximum(np.sum(y * theta, axis=1), 0.0))[:, None]
        pts = self.center + np.divide(y, q, out=np.zeros_like(y), where=q > 0)
        return pts[0] if single else pts

    def translate(self, a):
        return Ellipsoid(self.center + np.asarray(a, dtype=float), self.matrix)

    def scale(self, t):
        return Ellipsoid(self.center * t, self.matrix / t ** 2)

    def contains(self, x, tol=1e-12):
        x, single = _as_batch(x, self.dim)
        d = x - self.center
        ok = np.einsum("ij,jk,ik->i", d, self.matrix, d) <= 1 + tol
        return bool(ok[0]) if single else ok

    def volume(self):
        return unit_ball_volume(self.dim) / math.sqrt(np.linalg.det(self.matrix))

    def interior_point(self):
        return self.center.copy()


class Sum(ConvexBody):
    """Lazy Minkowski sum; support functions add."""

    def __init__(self, parts):
        parts = list(parts)
        if not parts:
            raise GeometryError("empty Minkowski sum")
        dims = {p.dim for p in parts}
        if len(dims) != 1:
            raise GeometryError("dimension mismatch in Minkowski sum")
        self.parts = parts
        self.dim = dims.pop()

    def __repr__(self):
        return "Sum(" + ", ".join(map(repr, self.parts)) + ")"

    def support(self, theta):
        theta, single = _as_batch(theta, self.dim)
        return _unbatch(sum(np.atleast_1d(p.support(theta)) for p in self.parts), single)

    def support_point(self, theta):
        theta, single = _as_batch(theta, self.dim)
        pts = sum(np.atleast_2d(p.support_point(theta)) for p in self.parts)
        return pts[0] if single else pts

    def translate(self, a):
        return Sum([self.parts[0].translate(a)] + self.parts[1:])

    def scale(self, t):
        return Sum([p.scale(t) for p in self.parts])

    def interior_point(self):
        return sum(p.interior_point() for p in self.parts)

    def contains(self, x, tol=1e-9):
        x, single = _as_batch(x, self.dim)
        ok = gauge_norm(self.translate(-self.interior_point()), x - self.interior_point()) <= 1 + tol
        return bool(ok[0]) if single else ok

    def volume(self):
        if self.dim == 1:
            return float(self.support(np.array([1.0])) + self.support(np.array([-1.0])))
        if self.dim == 2:
            return _area_from_support(self)
        return _volume_sum_3d(self)


def _normal_angles(body):
    """Angles where the support point of a 2D body may jump."""
    if isinstance(body, Polytope):
        if len(body.vertices) < 2:
            return []
        if body.full_dimensional:
            return [math.atan2(f.normal[1], f.normal[0]) for f in body.facets()]
        e = body.vertices[1] - body.vertices[0]
        a = math.atan2(-e[0], e[1])
        return [a, a + math.pi]
    if isinstance(body, Box):
        return [0.0, math.pi / 2, math.pi, -math.pi / 2]
    if isinstance(body, Sum):
        return [a for p in body.parts for a in _normal_angles(p)]
    return []


def _area_from_support(body, rel_tol=1e-14):
    """Area of a planar body from its support function.

    Uses ``|K| = 1/2 * int (h^2 - h'^2) dtheta`` with ``h'`` from support
    points, integrated piecewise between the normal directions where the
    support point jumps.
    """
    angles = np.mod(np.array(_normal_angles(body) + [0.0]), 2 * math.pi)
    bps = np.unique(np.concatenate([angles, [0.0, 2 * math.pi]]))

    def integrand(th):
        u = np.column_stack([np.cos(th), np.sin(th)])
        du = np.column_stack([-np.sin(th), np.cos(th)])
        h = np.asarray(body.support(u))
        x = np.atleast_2d(body.support_point(u))
        dh = np.sum(x * du, axis=1)
        return 0.5 * (h * h - dh * dh)

    rule = adaptive_rule(integrand, bps, rel_tol=rel_tol, abs_tol=1e-300)
    return rule.value


def _volume_sum_3d(body: Sum):
    polys = [p for p in body.parts if isinstance(p, (Polytope, Box))]
    balls = [p for p in body.parts if isinstance(p, Ball)]
    if len(polys) + len(balls) != len(body.parts) or not balls:
        raise NotImplementedError("3D sums are supported for polytopes plus balls")
    if polys:
        P = polys[0] if isinstance(polys[0], Polytope) else polys[0].as_polytope()
        for q in polys[1:]:
            P = minkowski_sum(P, q)
        if not isinstance(P, Polytope):
            P = P.as_polytope()
    r = sum(b.radius for b in balls)
    if not polys:
        return unit_ball_volume(3) * r ** 3
    S = sum(f.area for f in P.facets())
    M = 0.5 * sum(length * ext for length, ext in P.edges_3d())
    return P.volume() + S * r + M * r ** 2 + unit_ball_volume(3) * r ** 3


# --------------------------------------------------------------------------
# Operations


def support_function_body(L: ConvexBody, theta):
    return L.support(theta)


def minkowski_sum(K: ConvexBody, L: ConvexBody) -> ConvexBody:
    if K.dim != L.dim:
        raise GeometryError("dimension mismatch")

    def verts(B):
        if isinstance(B, Polytope):
            return B.vertices
        if isinstance(B, Box) and B.is_bounded:
            return B.as_polytope().vertices
        return None

    if isinstance(K, Box) and isinstance(L, Box):
        return Box(K.lo + L.lo, K.hi + L.hi)
    if isinstance(K, Ball) and isinstance(L, Ball):
        return Ball(K.center + L.center, K.radius + L.radius)
    vk, vl = verts(K), verts(L)
    if vk is not None and vl is not None:
        return Polytope((vk[:, None, :] + vl[None, :, :]).reshape(-1, K.dim))
    parts = (K.parts if isinstance(K, Sum) else [K]) + (L.parts if isinstance(L, Sum) else [L])
    return Sum(parts)


def volume(K: ConvexBody) -> float:
    if not K.is_bounded:
        raise GeometryError("unbounded body has infinite volume")
    return K.volume()


def gauge_norm(L: ConvexBody, x):
    """Minkowski gauge ``inf{lam > 0 : x / lam in L}`` (batched)."""
    if not L.contains_origin_interior:
        raise GeometryError("gauge requires the origin in the interior of L")
    x, single = _as_batch(x, L.dim)
    if isinstance(L, (Ball, Ellipsoid)):
        M = np.eye(L.dim) / L.radius ** 2 if isinstance(L, Ball) else L.matrix
        c = L.center
        a = float(c @ M @ c) - 1.0
        xc = x @ M @ c
        xx = np.einsum("ij,jk,ik->i", x, M, x)
        val = (xc - np.sqrt(np.maximum(xc * xc - a * xx, 0.0))) / a
    elif isinstance(L, Box):
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(x > 0, x / L.hi, np.where(x < 0, x / L.lo, 0.0))
        val = np.max(np.nan_to_num(r, nan=0.0), axis=1)
    elif isinstance(L, Polytope):
        A, b = L.halfspaces
        val = np.max(x @ A.T / b, axis=1)
    else:
        val = _gauge_from_support(L, x)
    val = np.maximum(val, 0.0)
    return float(val[0]) if single else val


def _gauge_from_support(L, x):
    """Gauge as the support function of the polar: sup <x, u> / h_L(u)."""
    if L.dim == 1:
        hp, hm = L.support(np.array([1.0])), L.support(np.array([-1.0]))
        return np.where(x[:, 0] > 0, x[:, 0] / hp, -x[:, 0] / hm)
    if L.dim != 2:
        raise NotImplementedError("gauge of lazy sums is available for n <= 2")
    ang = np.linspace(0, 2 * np.pi, 1025)[:-1]
    U = np.column_stack([np.cos(ang), np.sin(ang)])
    hU = L.support(U)
    ratios = (x @ U.T) / hU[None, :]
    k = np.argmax(ratios, axis=1)
    step = ang[1] - ang[0]

    def neg_ratio(th, xs):
        u = np.column_stack([np.cos(th), np.sin(th)])
        return -np.sum(xs * u, axis=1) / L.support(u)

    _, best = golden_minimize(lambda th: neg_ratio(th, x), ang[k] - step, ang[k] + step)
    return np.maximum(-best, np.max(ratios, axis=1))


def surface_area_measure(K: ConvexBody) -> DiscreteMeasure:
    """Atoms at facet normals weighted by facet measures."""
    if isinstance(K, Box):
        if not K.is_bounded:
            raise GeometryError("surface area measure of an unbounded box is infinite")
        K = K.as_polytope()
    if not isinstance(K, Polytope):
        raise GeometryError("surface_area_measure expects a polytope")
    if not K.full_dimensional:
        raise GeometryError("degenerate (lower-dimensional) polytope")
    fs = K.facets()
    return DiscreteMeasure(np.array([f.normal for f in fs]), np.array([f.area for f in fs]),
                           domain="sphere", provenance="surface-area")


@dataclass(frozen=True)
class QuermassVector:
    """Relative quermassintegrals ``W_0..W_n`` of ``K`` with respect to ``L``."""

    coefficients: np.ndarray
    K: ConvexBody
    L: ConvexBody
    residual: float

    def __getitem__(self, k):
        return float(self.coefficients[k])

    def steiner(self, t):
        n = len(self.coefficients) - 1
        return sum(comb(n, k) * self.coefficients[k] * t ** k for k in range(n + 1))


def quermassintegrals(K: ConvexBody, L: ConvexBody, holdout=0.5, tol=1e-8) -> QuermassVector:
    """Fit the Steiner polynomial ``|K + tL|`` at ``t = 0..n``.

    The system is exactly determined, so the reported residual is the
    relative mismatch at the held-out parameter ``holdout``.
    """
    n = K.dim

    def vol(t):
        return volume(K) if t == 0 else volume(minkowski_sum(K, L.scale(t)))

    ts = np.arange(n + 1, dtype=float)
    vols = np.array([vol(t) for t in ts])
    V = np.vander(ts, n + 1, increasing=True)
    poly = np.linalg.solve(V, vols)
    W = np.array([poly[k] / comb(n, k) for k in range(n + 1)])
    qv = QuermassVector(W, K, L, 0.0)
    actual = vol(holdout)
    residual = abs(qv.steiner(holdout) - actual) / max(abs(actual), 1.0)
    if residual > tol:
        raise GeometryError(f"Steiner fit residual {residual:.3e} exceeds {tol:.1e}")
    return QuermassVector(W, K, L, residual)


def anisotropic_perimeter(F: ConvexBody, L: ConvexBody) -> float:
    """``Per_L(F) = int h_L dS_F = n W_1(F, L)``."""
    if isinstance(F, Polytope) or (isinstance(F, Box) and F.is_bounded):
        S = surface_area_measure(F)
        return S.integrate(L.support)
    if isinstance(F, Ball) and F.dim == 2:
        # scale of the unit-disk perimeter: smooth integrand on the circle
        return F.radius * _unit_disk_perimeter(L)
    return F.dim * quermassintegrals(F, L)[1]


def _unit_disk_perimeter(L):
    bps = np.mod(np.array(_normal_angles(L) + [0.0]), 2 * math.pi)
    bps = np.unique(np.concatenate([bps, [0.0, 2 * math.pi]]))

    def integrand(th):
        return L.support(np.column_stack([np.cos(th), np.sin(th)]))

    return adaptive_rule(integrand, bps, rel_tol=1e-14, abs_tol=1e-300).value
