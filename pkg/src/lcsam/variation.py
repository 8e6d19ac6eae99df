"""First variation of ``t -> int f * (t . g)`` at ``t = 0+``.

Three routes:

* the limit of log-quotients along a geometric schedule (``delta_limit``),
* pairing the surface area measures with support functions
  (``delta_measure_formula``),
* integrating anisotropic perimeters of level sets (``delta_via_levelsets``).

``log I(t)`` is concave, so the log-quotients increase as ``t`` decreases
and their supremum is the limit; the monotonicity and concavity checks in
``IntegralCurve`` are therefore genuine consistency tests of the quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bodies import ConvexBody, anisotropic_perimeter
from .convex_core.conjugate import restrict_to_ball, support_function_of_function
from .convex_core.integration import integrate
from .convex_core.logconcave import LogConcaveFn
from .convex_core.supconv import sup_convolve
from .measures import build_mu, build_nu
from .quadrature import adaptive_rule

CURVE_TAIL_TOL = 1e-15
CURVE_REL_TOL = 1e-13
NOISE = 1e-6


def default_schedule(depth=12):
    return 2.0 ** -np.arange(depth + 1)


@dataclass(frozen=True)
class IntegralCurve:
    """Samples ``I(t_k) = int f * (t_k . g)`` on a decreasing schedule."""

    ts: np.ndarray
    values: np.ndarray
    base: float

    @property
    def quotients(self) -> np.ndarray:
        """``q_k = (log I(t_k) - log I(0)) / t_k``."""
        return (np.log(self.values) - math.log(self.base)) / self.ts

    def chord_slopes(self) -> np.ndarray:
        """Slopes of ``log I`` between consecutive samples, ending at ``t = 0``."""
        t = np.append(self.ts, 0.0)
        y = np.append(np.log(self.values), math.log(self.base))
        return (y[:-1] - y[1:]) / (t[:-1] - t[1:])

    def concavity_defects(self) -> np.ndarray:
        """``s_{k-1} - s_k``; concavity of ``log I`` makes these ``<= 0``."""
        s = self.chord_slopes()
        return s[:-1] - s[1:]

    def monotonicity_defects(self) -> np.ndarray:
        """``q_{k-1} - q_k``; nonpositive when quotients increase as ``t`` decreases."""
        q = self.quotients
        return q[:-1] - q[1:]


def integral_curve(f: LogConcaveFn, g: LogConcaveFn, schedule=None) -> IntegralCurve:
    ts = default_schedule() if schedule is None else np.asarray(schedule, dtype=float)
    if np.any(np.diff(ts) >= 0) or np.any(ts <= 0):
        raise ValueError("schedule must be strictly decreasing and positive")
    base = integrate(f, tail_tol=CURVE_TAIL_TOL, rel_tol=CURVE_REL_TOL)
    vals = np.array([integrate(sup_convolve(f, g, float(t)), tail_tol=CURVE_TAIL_TOL,
                               rel_tol=CURVE_REL_TOL) for t in ts])
    if not np.all(np.isfinite(vals)):
        raise ArithmeticError("sup-convolution integral diverged")
    return IntegralCurve(ts, vals, base)


@dataclass(frozen=True)
class LimitResult:
    value: float
    quotient_limit: float
    converged: bool
    divergent: bool
    monotone: bool
    concave: bool
    max_monotonicity_defect: float
    max_concavity_defect: float


def delta_limit(curve: IntegralCurve, rel_tol=1e-3, noise=NOISE) -> LimitResult:
    """``int f * lim q_k`` via one Richardson step on the last two quotients.

    Raises when quotients decrease beyond ``noise`` (quadrature inconsistency).
    Reports ``+inf`` (as suspected divergence) when the quotients grow by a
    factor of more than 1e3 across the schedule and are still growing.
    """
    q = curve.quotients
    mono = curve.monotonicity_defects()
    conc = curve.concavity_defects()
    scale = 1.0 + np.abs(q[1:])
    max_mono = float(np.max(mono / scale)) if mono.size else 0.0
    max_conc = float(np.max(conc / (1.0 + np.abs(curve.chord_slopes()[1:])))) if conc.size else 0.0
    if max_mono > noise:
        raise ArithmeticError(f"quotients not monotone (defect {max_mono:.2e})")
    growing = q.size > 1 and q[-1] > q[-2]
    # quotients at the noise level never count as growth
    if q.size > 1 and q[0] > 0 and q[-1] > 1e3 * max(q[0], noise) and growing:
        return LimitResult(math.inf, math.inf, False, True, True, max_conc <= noise,
                           max_mono, max_conc)
    if q.size == 1:
        qlim = float(q[0])
    else:
        t1, t2 = curve.ts[-2], curve.ts[-1]
        qlim = float((t1 * q[-1] - t2 * q[-2]) / (t1 - t2))
    converged = q.size > 1 and abs(q[-1] - q[-2]) <= rel_tol * max(abs(q[-1]), 1.0)
    return LimitResult(curve.base * qlim, qlim, bool(converged), False, max_mono <= noise,
                       max_conc <= noise, max_mono, max_conc)


@dataclass(frozen=True)
class MeasureSide:
    mu_part: float
    nu_part: float

    @property
    def total(self) -> float:
        return self.mu_part + self.nu_part


def _body_support(body: ConvexBody | None, n):
    if body is None:
        return lambda Y: np.where(np.all(Y == 0, axis=1), 0.0, np.inf)
    return lambda Y: np.atleast_1d(body.support(Y))


def delta_measure_formula(f: LogConcaveFn, g: LogConcaveFn, seed=0, mu=None, nu=None) -> MeasureSide:
    """``int h_g d mu_f + int h_{K_g} d nu_f`` with the two addends kept apart."""
    mu = build_mu(f, seed=seed) if mu is None else mu
    nu = build_nu(f) if nu is None else nu
    h = support_function_of_function(g)
    with np.errstate(invalid="ignore"):
        mu_part = mu.integrate(h.at)
        nu_part = nu.integrate(_body_support(g.support, f.dim)) if len(nu) else 0.0
    return MeasureSide(mu_part, nu_part)


@dataclass
class VariationReport:
    lhs: float
    mu_part: float
    nu_part: float
    rhs: float
    rel_error: float
    ts: list
    quotients: list
    diagnostics: dict = field(default_factory=dict)


def relative_error(lhs, rhs) -> float:
    if math.isinf(lhs) and math.isinf(rhs):
        return 0.0
    return abs(lhs - rhs) / max(abs(rhs), 1.0)


def variation_report(f: LogConcaveFn, g: LogConcaveFn, schedule=None, seed=0) -> VariationReport:
    curve = integral_curve(f, g, schedule)
    lim = delta_limit(curve)
    rhs = delta_measure_formula(f, g, seed=seed)
    return VariationReport(
        lhs=lim.value, mu_part=rhs.mu_part, nu_part=rhs.nu_part, rhs=rhs.total,
        rel_error=relative_error(lim.value, rhs.total),
        ts=[float(t) for t in curve.ts], quotients=[float(q) for q in curve.quotients],
        diagnostics={
            "integral": curve.base,
            "converged": lim.converged,
            "divergence_suspected": lim.divergent,
            "monotone": lim.monotone,
            "concave": lim.concave,
            "max_monotonicity_defect": lim.max_monotonicity_defect,
            "max_concavity_defect": lim.max_concavity_defect,
            "jitter_seed": seed,
        })


def delta_via_levelsets(f: LogConcaveFn, L: ConvexBody, rel_tol=1e-10, span=60.0) -> float:
    """``int_0^max f Per_L(F_s) ds`` in the variable ``u = -log s``.

    ``F_s`` has potential sublevel ``{phi <= u}``; the integrand becomes
    ``Per_L({phi <= u}) e^{-u}`` on ``[min phi, min phi + span]``. A further
    substitution ``u = min phi + v^2`` smooths the square-root growth of
    sublevel sets near the minimum.
    """
    from .anisotropic_tv import _perimeter, level_set, potential_minimum

    const = f.potential.constant_value()
    if const is not None:
        return math.exp(-const) * anisotropic_perimeter(f.support, L)
    u0 = potential_minimum(f)
    cache = {}

    def integrand(v):
        u = u0 + v * v
        s = np.exp(-u)
        per = np.array([_perimeter(level_set(f, float(si)), L, cache) for si in s])
        return per * s * 2 * v

    root = math.sqrt(span)
    breaks = [0.0, 0.1, 1.0, 3.0, root]
    return adaptive_rule(integrand, breaks, rel_tol=rel_tol, order=8).value


def scaling_shift_check(f, g, c, schedule=None):
    """``(delta(f, e^c g) - delta(f, g), c int f)`` via the limit route."""
    if c == 0:
        return 0.0, 0.0
    d0 = delta_limit(integral_curve(f, g, schedule)).value
    d1 = delta_limit(integral_curve(f, g.scale_value(c), schedule)).value
    return d1 - d0, c * integrate(f)


def pointwise_derivative_check(f, g, x, schedule=None):
    """Extrapolated ``(f * (t . g)(x) - f(x)) / t`` against ``h_g(grad phi(x)) f(x)``."""
    from .convex_core.potentials import DomainError
    ts = default_schedule() if schedule is None else np.asarray(schedule, dtype=float)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    fx = f(x[None, :])[0]
    grad, flagged = f.potential._grad(x[None, :])
    if flagged[0]:
        raise DomainError("point is a detected kink of the potential")
    vals = np.array([sup_convolve(f, g, float(t))(x[None, :])[0] for t in ts[-2:]])
    q = (vals - fx) / ts[-2:]
    t1, t2 = ts[-2], ts[-1]
    lhs = float((t1 * q[1] - t2 * q[0]) / (t1 - t2))
    h = support_function_of_function(g)
    return lhs, float(h.at(grad)[0] * fx)


def truncation_convergence(f, g, ms, seed=0):
    """``delta(f, g_m)`` for ``g_m = g 1_{|x| <= m}`` through the measure formula."""
    mu, nu = build_mu(f, seed=seed), build_nu(f)
    out = []
    for m in ms:
        gm = LogConcaveFn(restrict_to_ball(g.potential, float(m)))
        out.append(delta_measure_formula(f, gm, mu=mu, nu=nu).total)
    return out


__all__ = ["IntegralCurve", "LimitResult", "MeasureSide", "VariationReport", "default_schedule",
           "integral_curve", "delta_limit", "delta_measure_formula", "variation_report",
           "delta_via_levelsets", "scaling_shift_check", "pointwise_derivative_check",
           "truncation_convergence", "relative_error"]
