"""Anisotropic total variation, level sets and the coarea formula."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .bodies import (Ball, Box, ConvexBody, Ellipsoid, GeometryError, Interval, Polytope,
                     anisotropic_perimeter, gauge_norm)
from .convex_core.integration import _clip_polygon, _split, _tri_nodes
from .convex_core.logconcave import LogConcaveFn
from .convex_core.potentials import (Linear, Quadratic, SumWithIndicator, _expand_bracket,
                                     _interval)
from .measures import build_mu, build_nu
from .quadrature import adaptive_rule, golden_minimize


# --------------------------------------------------------------------------
# Grid fields

@dataclass(frozen=True, eq=False)
class GridField:
    """Nonnegative samples on a uniform lattice with a zero margin.

    ``values[i, j]`` sits at ``origin + spacing * (i, j)``.
    """

    origin: np.ndarray
    spacing: float
    values: np.ndarray
    margin: int = 2

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "origin", np.atleast_1d(np.asarray(self.origin, dtype=float)))
        if v.ndim not in (1, 2) or v.ndim != self.origin.size:
            raise ValueError("grid fields are one- or two-dimensional")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ValueError("grid values must be finite and nonnegative")
        m = self.margin
        edge = np.ones(v.shape, dtype=bool)
        edge[(slice(m, -m),) * v.ndim] = False
        if np.any(v[edge] != 0):
            raise ValueError(f"support must stay {m} cells inside the lattice")

    @property
    def dim(self) -> int:
        return self.values.ndim

    @property
    def shape(self):
        return self.values.shape

    def axes(self):
        return [self.origin[i] + self.spacing * np.arange(s) for i, s in enumerate(self.shape)]

    def points(self):
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.column_stack([m.ravel() for m in mesh])

    @classmethod
    def sample(cls, f: LogConcaveFn, half_width: float, nodes: int, margin=2):
        """Sample ``f`` at ``-w + h k`` (``h = 2w / nodes``), so the origin is a node.

        The outer ``margin`` rings are set to zero.
        """
        n = f.dim
        h = 2.0 * half_width / nodes
        x = -half_width + h * np.arange(nodes)
        mesh = np.meshgrid(*([x] * n), indexing="ij")
        pts = np.column_stack([m.ravel() for m in mesh])
        vals = f(pts).reshape((nodes,) * n)
        edge = np.ones(vals.shape, dtype=bool)
        edge[(slice(margin, -margin),) * n] = False
        vals[edge] = 0.0
        return cls(np.full(n, -half_width), h, vals, margin)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        buf.write(f"# n={self.dim}\n")
        buf.write("# origin=" + ",".join(repr(float(v)) for v in self.origin) + "\n")
        buf.write(f"# spacing={float(self.spacing)!r}\n")
        buf.write("# shape=" + ",".join(str(s) for s in self.shape) + "\n")
        rows = self.values.reshape(self.shape[0], -1)
        for r in rows:
            buf.write(",".join(repr(float(v)) for v in r) + "\n")
        text = buf.getvalue()
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, text: str, margin=2):
        header, rows = {}, []
        for line in text.splitlines():
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                header[key.strip()] = val.strip()
            elif line.strip():
                rows.append([float(v) for v in line.split(",")])
        shape = tuple(int(s) for s in header["shape"].split(","))
        origin = [float(v) for v in header["origin"].split(",")]
        vals = np.array(rows).reshape(shape)
        return cls(np.array(origin), float(header["spacing"]), vals, margin)


def tv_grid(field: GridField, L: ConvexBody) -> float:
    """``sum_cells h_L(-D^+ f) h^n`` with forward differences."""
    if not L.contains_origin_interior:
        raise GeometryError("L must contain the origin in its interior")
    v, h, n = field.values, field.spacing, field.dim
    if n == 1:
        d = np.diff(v) / h
        return math.fsum(np.atleast_1d(L.support(-d[:, None])) * h)
    dx = (v[1:, :-1] - v[:-1, :-1]) / h
    dy = (v[:-1, 1:] - v[:-1, :-1]) / h
    G = -np.column_stack([dx.ravel(), dy.ravel()])
    return math.fsum(np.atleast_1d(L.support(G)) * h * h)


# --------------------------------------------------------------------------
# Level sets of closed-form functions

@lru_cache(maxsize=256)
def _minimize_1d(phi):
    lo, hi = _interval(phi.domain)
    guess = np.array([float(phi.center_hint()[0])])

    def objective(y, _):
        return phi._eval(y[:, None])

    lo_a, hi_a = _expand_bracket(objective, np.array([lo]), np.array([hi]), guess, guess)
    y, v = golden_minimize(lambda y: objective(y, None), lo_a, hi_a, iterations=120)
    return float(y[0]), float(v[0])


@lru_cache(maxsize=256)
def _radial(phi):
    return phi.as_radial()


def potential_minimum(f: LogConcaveFn) -> float:
    """``inf phi`` (so ``max f = exp(-inf phi)``)."""
    phi = f.potential
    c = phi.constant_value()
    if c is not None:
        return c
    if isinstance(phi, Quadratic) and phi.is_definite:
        return float(np.squeeze(phi(phi.minimizer)))
    if isinstance(phi, SumWithIndicator) and isinstance(phi.base, Linear):
        return float(-phi.body.support(-phi.base.b) + phi.base.c)
    if phi.dim == 1:
        return _minimize_1d(phi)[1]
    rad = _radial(phi)
    if rad is not None:
        return _minimize_1d(rad[0])[1]
    parts = phi.as_separable()
    if parts is not None:
        return sum(_minimize_1d(p)[1] for p in parts)
    x0 = np.asarray(phi.center_hint(), dtype=float)
    from scipy.optimize import minimize
    res = minimize(lambda x: float(phi(x)), x0, method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 20000})
    return float(res.fun)


def _sublevel_interval(phi, u):
    """``{phi <= u}`` for a 1D convex potential, by bisection from the minimizer."""
    m, vmin = _minimize_1d(phi)
    if vmin > u + 1e-12 * (1 + abs(u)):
        raise GeometryError("empty level set")
    if vmin >= u:
        return m, m
    lo_d, hi_d = _interval(phi.domain)
    ends = []
    for bound, sign in ((lo_d, -1.0), (hi_d, 1.0)):
        inner = m
        step = 1.0
        outer = m + sign * step
        while (sign * (bound - outer) > 0) and phi(outer) <= u:
            step *= 2
            outer = m + sign * step
            if step > 1e12:
                raise GeometryError("unbounded level set")
        if sign * (outer - bound) >= 0:
            outer = bound
            if np.isfinite(bound) and phi(bound) <= u:
                ends.append(bound)
                continue
        for _ in range(200):
            mid = 0.5 * (inner + outer)
            if mid == inner or mid == outer:
                break
            if phi(mid) <= u:
                inner = mid
            else:
                outer = mid
        ends.append(inner)
    return ends[0], ends[1]


def _halfplane_clip(poly, b, u):
    """Clip a CCW polygon to ``{<b, x> <= u}``."""
    out = []
    for i, cur in enumerate(poly):
        prev = poly[i - 1]
        cin, pin = cur @ b <= u, prev @ b <= u
        if cin != pin:
            s = (u - prev @ b) / ((cur - prev) @ b)
            out.append(prev + s * (cur - prev))
        if cin:
            out.append(cur)
    return np.array(out)


def level_set(f, s: float) -> ConvexBody:
    """``F_s = {f >= s}`` as a body (closed forms, or the hull of grid nodes)."""
    if isinstance(f, GridField):
        return _grid_level_set(f, s)
    if not s > 0:
        raise ValueError("level must be positive")
    phi = f.potential
    u = -math.log(s)
    c = phi.constant_value()
    if c is not None:
        if c > u + 1e-15:
            raise GeometryError("empty level set")
        return f.support
    if phi.dim == 1:
        lo, hi = _sublevel_interval(phi, u)
        return Interval(lo, hi) if hi > lo else Polytope([[lo]])
    rad = _radial(phi)
    if rad is not None:
        _, r = _sublevel_interval(rad[0], u)
        return Ball(rad[1], r) if r > 0 else Polytope(rad[1][None, :])
    if isinstance(phi, Quadratic) and phi.is_definite:
        m = phi.minimizer
        gap = u - float(phi(m))
        if gap <= 0:
            raise GeometryError("empty level set")
        return Ellipsoid(m, phi.A / (2 * gap))
    if isinstance(phi, SumWithIndicator) and isinstance(phi.base, Linear) and phi.dim == 2:
        b, c0 = phi.base.b, phi.base.c
        body = phi.body
        if isinstance(body, Box):
            R = (abs(u - c0) + 1.0) / max(np.min(np.abs(b)), 1e-12) + np.max(np.abs(
                np.where(np.isfinite(body.lo), body.lo, 0))) + np.max(np.abs(
                    np.where(np.isfinite(body.hi), body.hi, 0))) + 1.0
            lo = np.where(np.isfinite(body.lo), body.lo, -R)
            hi = np.where(np.isfinite(body.hi), body.hi, R)
            poly = np.array([[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]])
        else:
            poly = body.vertices
        clipped = _halfplane_clip(poly, b, u - c0)
        if len(clipped) < 3:
            raise GeometryError("empty or degenerate level set")
        return Polytope(clipped)
    raise NotImplementedError("level sets of this potential are outside the catalog")


def _edge_crossings(lo_vals, hi_vals, s):
    """Fraction along each lattice edge where the linear interpolant reaches ``s``."""
    with np.errstate(invalid="ignore", divide="ignore"):
        return (s - lo_vals) / (hi_vals - lo_vals)


def _grid_level_set(field: GridField, s: float) -> ConvexBody:
    """Hull of the interpolated lattice-edge crossings of the level ``s``.

    The crossings put the hull boundary within ``O(h^2)`` of the level line;
    bare node hulls sit inside it by ``O(h)``.
    """
    v = field.values
    mask = v >= s
    if not np.any(mask):
        raise GeometryError("empty level set")
    axes = field.axes()
    h = field.spacing
    if field.dim == 1:
        idx = np.nonzero(mask)[0]
        lo, hi = axes[0][idx[0]], axes[0][idx[-1]]
        if idx[0] > 0:
            lo -= h * (1 - _edge_crossings(v[idx[0] - 1], v[idx[0]], s))
        if idx[-1] < len(v) - 1:
            hi += h * _edge_crossings(v[idx[-1]], v[idx[-1] + 1], s)
        return Interval(lo, hi) if hi > lo else Polytope([[lo]])
    x, y = axes
    pts = []
    for axis in (0, 1):
        a = np.moveaxis(v, axis, 0)
        m = np.moveaxis(mask, axis, 0)
        cut = m[1:] != m[:-1]
        i, j = np.nonzero(cut)
        frac = _edge_crossings(a[i, j], a[i + 1, j], s)
        along = (x if axis == 0 else y)[i] + h * frac
        across = (y if axis == 0 else x)[j]
        pts.append(np.column_stack([along, across] if axis == 0 else [across, along]))
    # the zero margin puts every super-level node inside the crossings' hull
    return Polytope(np.vstack(pts))


def _perimeter(F: ConvexBody, L: ConvexBody, cache=None) -> float:
    """``Per_L``, extended to degenerate hulls (segments and points).

    ``cache`` (a dict) memoizes the unit-disk perimeter so discs only rescale it.
    """
    if isinstance(F, Ball) and F.dim == 2 and cache is not None:
        if "disk" not in cache:
            cache["disk"] = anisotropic_perimeter(Ball([0.0, 0.0], 1.0), L)
        return F.radius * cache["disk"]
    if isinstance(F, Polytope) and not F.full_dimensional:
        v = F.vertices
        if F.dim == 1 or len(v) == 1:
            return float(L.support(np.array([1.0])) + L.support(np.array([-1.0]))) \
                if F.dim == 1 else 0.0
        e = v[-1] - v[0]
        nu = np.array([e[1], -e[0]]) / np.linalg.norm(e)
        return float(np.linalg.norm(e) * (L.support(nu) + L.support(-nu)))
    return anisotropic_perimeter(F, L)


# --------------------------------------------------------------------------
# Representation and coarea

@dataclass(frozen=True)
class TVDecomposition:
    absolutely_continuous: float
    boundary: float

    @property
    def total(self) -> float:
        return self.absolutely_continuous + self.boundary


def tv_representation(f: LogConcaveFn, L: ConvexBody, seed=0) -> TVDecomposition:
    """``int h_L d mu_f`` and ``int h_L d nu_f``."""
    mu, nu = build_mu(f, seed=seed), build_nu(f)
    hL = lambda Y: np.atleast_1d(L.support(Y))  # noqa: E731
    return TVDecomposition(mu.integrate(hL), nu.integrate(hL) if len(nu) else 0.0)


def geometric_levels(smax: float, smin: float, count=256):
    """``count`` levels spaced uniformly in ``-log s`` (geometric in ``s``)."""
    return np.exp(np.linspace(math.log(smax), math.log(smin), count))


@dataclass(frozen=True)
class CoareaResult:
    tv: float
    levelset_integral: float
    levels: np.ndarray
    perimeters: np.ndarray

    @property
    def residual(self) -> float:
        return abs(self.tv - self.levelset_integral) / abs(self.tv)


def coarea_check(f, L: ConvexBody, levels=None, count=256) -> CoareaResult:
    """Total variation against ``int Per_L(F_s) ds``.

    Grid fields pair ``tv_grid`` with hulls of grid level sets, integrated by
    the trapezoid rule in ``s`` over geometric levels plus the slab
    ``[0, s_min]``. Closed-form functions pair the measure representation
    with analytic level sets integrated adaptively; ``levels`` then only
    feed the reported curve.
    """
    from .variation import delta_via_levelsets

    if isinstance(f, GridField):
        tv = tv_grid(f, L)
        vals = f.values[f.values > 0]
        smax, smin = float(vals.max()), float(vals.min())
    else:
        tv = tv_representation(f, L).total
        smax = math.exp(-potential_minimum(f))
        smin = smax * 1e-12
    s = geometric_levels(smax, smin, count) if levels is None else np.asarray(levels, dtype=float)
    cache = {}
    per = np.array([_perimeter(level_set(f, float(si)), L, cache) for si in s])
    if isinstance(f, GridField):
        total = math.fsum(0.5 * (per[1:] + per[:-1]) * -np.diff(s)) + per[-1] * s[-1]
    else:
        total = delta_via_levelsets(f, L)
    return CoareaResult(tv, total, s, per)


# --------------------------------------------------------------------------
# Divergence pairing with polynomial bump fields

@dataclass(frozen=True)
class BumpField:
    """``Phi(x) = b(x) (a + M x)`` with ``b(x) = prod_i (1 - ((x_i - c_i)/rho)^2)_+^k``.

    ``b`` is a polynomial on its box support and ``C^{k-1}`` across its edges.
    """

    center: np.ndarray
    rho: float
    a: np.ndarray
    M: np.ndarray
    power: int = 4

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, dtype=float))
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "a", np.atleast_1d(np.asarray(self.a, dtype=float)))
        object.__setattr__(self, "M", np.asarray(self.M, dtype=float).reshape(c.size, c.size))

    @property
    def dim(self):
        return self.center.size

    def _factors(self, X):
        z = (X - self.center) / self.rho
        base = np.clip(1 - z * z, 0.0, None)
        k = self.power
        val = base ** k
        der = np.where(np.abs(z) < 1, -2 * k * z * base ** (k - 1) / self.rho, 0.0)
        return val, der

    def bump(self, X):
        return np.prod(self._factors(X)[0], axis=1)

    def __call__(self, X):
        X = np.atleast_2d(X)
        return self.bump(X)[:, None] * (self.a + X @ self.M.T)

    def divergence(self, X):
        X = np.atleast_2d(X)
        val, der = self._factors(X)
        b = np.prod(val, axis=1)
        direction = self.a + X @ self.M.T
        grad_b = np.empty_like(X)
        for i in range(self.dim):
            others = np.prod(np.delete(val, i, axis=1), axis=1) if self.dim > 1 else 1.0
            grad_b[:, i] = der[:, i] * others
        return np.sum(grad_b * direction, axis=1) + b * np.trace(self.M)

    def box(self):
        return self.center - self.rho, self.center + self.rho


def field_catalog(n: int):
    """Five reference fields per dimension; the first two satisfy ``|Phi|_2 <= 1``."""
    if n == 1:
        return [
            BumpField([0.0], 1.5, [1.0], [[0.0]]),
            BumpField([0.3], 1.0, [-0.8], [[0.0]]),
            BumpField([0.0], 2.0, [0.0], [[1.0]]),
            BumpField([0.5], 1.2, [0.4], [[-0.7]]),
            BumpField([-0.2], 2.5, [1.5], [[0.3]], power=5),
        ]
    return [
        BumpField([0.0, 0.0], 1.5, [0.6, 0.8], np.zeros((2, 2))),
        BumpField([0.3, -0.2], 1.0, [-0.8, 0.0], np.zeros((2, 2))),
        BumpField([0.0, 0.0], 2.0, [0.0, 0.0], np.eye(2)),
        BumpField([0.5, 0.5], 1.2, [0.4, -0.3], [[0.0, 1.0], [-1.0, 0.5]]),
        BumpField([-0.2, 0.1], 2.5, [1.5, 0.2], [[0.3, 0.0], [0.1, -0.2]], power=5),
    ]


def _support_polygon(f: LogConcaveFn, lo, hi):
    dom = f.support
    if dom is None:
        return np.array([[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]])
    if isinstance(dom, Box):
        a, b = np.maximum(dom.lo, lo), np.minimum(dom.hi, hi)
        if np.any(a >= b):
            return np.empty((0, 2))
        return np.array([[a[0], a[1]], [b[0], a[1]], [b[0], b[1]], [a[0], b[1]]])
    if isinstance(dom, Polytope):
        return _clip_polygon(dom.vertices, lo, hi)
    raise NotImplementedError("divergence pairing needs a polygonal or full-space support")


def _area_integral(F, poly, apex, rel_tol=1e-14):
    if len(poly) < 3:
        return 0.0
    if not np.all(np.isfinite(apex)):
        apex = poly.mean(axis=0)
    tris = np.stack([np.stack([apex, poly[i], poly[(i + 1) % len(poly)]]) for i in range(len(poly))])
    prev = None
    for _ in range(6):
        nodes, w = _tri_nodes(tris)
        val = math.fsum(w * F(nodes))
        if prev is not None and abs(val - prev) <= rel_tol * max(abs(val), 1e-300):
            return val
        prev = val
        tris = _split(tris)
    return val


def divergence_pairing_check(f: LogConcaveFn, field: BumpField):
    """``(int f div Phi, int f <grad phi, Phi>, int_{boundary} f <Phi, n>)``.

    The identity reads: first = second + third (``-grad f = f grad phi``).
    """
    phi = f.potential
    lo, hi = field.box()
    if f.dim == 1:
        dlo, dhi = _interval(f.support)
        a, b = max(lo[0], dlo), min(hi[0], dhi)
        if a >= b:
            return 0.0, 0.0, 0.0
        breaks = sorted({a, b, *[k for k in phi.kinks() if a < k < b]})

        def cols(x):
            X = x[:, None]
            fx = f(X)
            G, _ = phi._grad(X)
            return np.column_stack([fx * field.divergence(X),
                                    fx * np.sum(G * field(X), axis=1)])

        rule = adaptive_rule(cols, breaks, rel_tol=1e-14, abs_tol=1e-15)
        vals = cols(rule.nodes)
        lhs = math.fsum(rule.weights * vals[:, 0])
        mid = math.fsum(rule.weights * vals[:, 1])
        bnd = 0.0
        for x, s in ((dlo, -1.0), (dhi, 1.0)):
            if np.isfinite(x) and lo[0] <= x <= hi[0]:
                bnd += f(np.array([[x]]))[0] * s * field(np.array([[x]]))[0, 0]
        return lhs, mid, bnd
    if f.dim != 2:
        raise NotImplementedError("divergence pairing is implemented for n <= 2")
    poly = _support_polygon(f, lo, hi)
    apex = np.asarray(phi.center_hint(), dtype=float)
    if len(poly) >= 3 and not _inside_polygon(apex, poly):
        apex = poly.mean(axis=0)
    lhs = _area_integral(lambda X: f(X) * field.divergence(X), poly, apex)

    def pairing(X):
        fx = f(X)
        out = np.zeros(len(X))
        live = fx > 0
        if np.any(live):
            G, _ = phi._grad(X[live])
            out[live] = fx[live] * np.sum(G * field(X[live]), axis=1)
        return out

    mid = _area_integral(pairing, poly, apex)
    bnd = _boundary_flux(f, field, lo, hi)
    return lhs, mid, bnd


def _inside_polygon(p, poly):
    for i in range(len(poly)):
        a, b = poly[i], poly[(i + 1) % len(poly)]
        if (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) <= 0:
            return False
    return True


def _boundary_flux(f, field, lo, hi):
    dom = f.support
    if dom is None:
        return 0.0
    total = []
    for fc in dom.facets():
        a = fc.axes[0]
        s_lo, s_hi = float(fc.lo[0]), float(fc.hi[0])
        # clip the edge parameter range to the field's box
        for k in range(2):
            if abs(a[k]) > 1e-15:
                t1, t2 = (lo[k] - fc.origin[k]) / a[k], (hi[k] - fc.origin[k]) / a[k]
                s_lo, s_hi = max(s_lo, min(t1, t2)), min(s_hi, max(t1, t2))
            elif not (lo[k] <= fc.origin[k] <= hi[k]):
                s_hi = s_lo - 1
        if s_hi <= s_lo:
            continue

        def flux(s, fc=fc, a=a):
            X = fc.origin + s[:, None] * a
            return f(X) * (field(X) @ fc.normal)

        total.append(adaptive_rule(flux, [s_lo, s_hi], rel_tol=1e-14, abs_tol=1e-16).value)
    return math.fsum(total)


def dual_norm_bound(field: BumpField, L: ConvexBody, samples=4001) -> float:
    """``max ||Phi(x)||_L`` over a dense sample of the field's support box."""
    lo, hi = field.box()
    if field.dim == 1:
        X = np.linspace(lo[0], hi[0], samples)[:, None]
    else:
        m = int(math.sqrt(samples)) + 1
        g = np.meshgrid(np.linspace(lo[0], hi[0], m), np.linspace(lo[1], hi[1], m), indexing="ij")
        X = np.column_stack([g[0].ravel(), g[1].ravel()])
    V = field(X)
    return float(np.max(gauge_norm(L, V)))


__all__ = ["GridField", "tv_grid", "TVDecomposition", "tv_representation", "level_set",
           "potential_minimum", "geometric_levels", "CoareaResult", "coarea_check", "BumpField",
           "field_catalog", "divergence_pairing_check", "dual_norm_bound"]
