"""Scenario files, check dispatch and report emission."""

from __future__ import annotations

import copy
import csv
import io
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np
import yaml

from . import __version__
from .anisotropic_tv import (GridField, coarea_check, divergence_pairing_check, dual_norm_bound,
                             field_catalog, tv_representation)
from .bodies import Ball, Box, Ellipsoid, Interval, Point, Polytope, quermassintegrals
from .convex_core import IntegrabilityError, LogConcaveFn, integrate, quadrature_nodes
from .convex_core.potentials import (Barrier, DomainError, Linear, PowerNorm, Quadratic,
                                     ZeroFunction, indicator, restrict)
from .measures import build_mu, centering_defect, first_absolute_moment
from .variation import (default_schedule, delta_limit, delta_measure_formula, integral_curve,
                        pointwise_derivative_check, relative_error, scaling_shift_check,
                        truncation_convergence, variation_report)

SCHEMA_VERSION = "1.0"

DEFAULT_TOLERANCES = {
    "main-theorem": 1e-2,
    "coarea": None,  # 1e-2 in 1D, 3e-2 in 2D
    "quermass": 1e-8,
    "centering": 1e-6,
    "scaling": 1e-3,
    "pointwise": 1e-3,
    "truncation": 1e-2,
    "uniqueness-sanity": 1e-2,
    "divergence-pairing": 1e-6,
}

CATALOG = {
    "gaussian": "exp(-<A(x-m), x-m>/2); keys: dim, center, matrix",
    "laplace": "exp(-|x - m|); keys: dim, center",
    "power": "exp(-alpha |x - m|^p), p >= 1; keys: dim, alpha, p, center",
    "linear": "exp(-<b, x> - c) on a body; keys: slope, offset, restrict",
    "indicator": "exp(log_height) on a body; keys: body, log_height",
    "barrier": "exp(-alpha / (1 - |x - m|/r)) on the open ball; keys: alpha, radius, center",
    "zero": "the zero function (always rejected as a scenario input)",
}


class ScenarioError(ValueError):
    """A scenario document that does not describe a runnable scenario."""


# --------------------------------------------------------------------------
# Specs to objects

def _schema():
    text = resources.files("lcsam").joinpath("data/scenario.schema.json").read_text()
    return json.loads(text)


def _bound(values):
    arr = [np.inf if v is None else float(v) for v in values]
    return np.array(arr)


def build_body(spec: dict):
    kind = spec["type"]
    if kind == "interval":
        return Interval(spec["lo"], spec["hi"])
    if kind == "box":
        lo = -_bound([None if v is None else -v for v in spec["lo"]])
        return Box(lo, _bound(spec["hi"]))
    if kind == "ball":
        return Ball(spec["center"], spec["radius"])
    if kind == "polygon":
        return Polytope(spec["vertices"])
    if kind == "ellipsoid":
        return Ellipsoid(spec["center"], spec["matrix"])
    if kind == "point":
        return Point(spec["at"])
    raise ScenarioError(f"unknown body type {kind!r}")


def _dim_of(spec, default=None):
    for key in ("center", "slope"):
        if key in spec:
            return len(spec[key])
    for key in ("body", "restrict"):
        if key in spec:
            return build_body(spec[key]).dim
    return spec.get("dim", default)


def build_function(spec: dict) -> LogConcaveFn:
    form = spec["form"]
    n = _dim_of(spec, 1)
    center = np.asarray(spec.get("center", [0.0] * n), dtype=float)
    if form == "gaussian":
        A = np.asarray(spec.get("matrix", np.eye(n)), dtype=float)
        phi = Quadratic(A, -A @ center, 0.5 * float(center @ A @ center))
    elif form == "laplace":
        phi = PowerNorm(1.0, 1.0, center)
    elif form == "power":
        phi = PowerNorm(spec.get("alpha", 1.0), spec.get("p", 1.0), center)
    elif form == "linear":
        if "restrict" not in spec:
            raise ScenarioError("f.restrict: a linear potential needs a restricting body")
        phi = Linear(spec["slope"], spec.get("offset", 0.0))
    elif form == "indicator":
        if "body" not in spec:
            raise ScenarioError("indicator needs 'body'")
        phi = indicator(build_body(spec["body"]))
    elif form == "barrier":
        phi = Barrier(spec.get("alpha", 1.0), spec.get("radius", 1.0), center)
    elif form == "zero":
        phi = ZeroFunction(n)
    else:
        raise ScenarioError(f"unknown catalog form {form!r}")
    if "restrict" in spec:
        phi = restrict(phi, build_body(spec["restrict"]))
    if spec.get("log_height"):
        phi = phi.shift_value(-float(spec["log_height"]))
    return LogConcaveFn(phi, spec.get("label", form))


# --------------------------------------------------------------------------
# Scenarios

@dataclass
class Scenario:
    id: str
    raw: dict
    f: LogConcaveFn | None
    g: LogConcaveFn | None
    L: object
    K: object
    checks: list
    tolerances: dict
    seed: int
    depth: int
    options: dict = field(default_factory=dict)

    def tolerance(self, check):
        return self.tolerances[check]


def _format_error(err: jsonschema.ValidationError) -> str:
    where = "/".join(str(p) for p in err.absolute_path) or "<root>"
    return f"schema error at {where}: {err.message}"


def _validate(doc):
    validator = jsonschema.Draft202012Validator(_schema())
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        best = jsonschema.exceptions.best_match(errors)
        raise ScenarioError(_format_error(best))


def resolve_scenario(doc: dict, tol_override=None, depth_override=None,
                     seed_override=None) -> Scenario:
    """Validate a parsed document, apply defaults and build the objects."""
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a mapping")
    _validate(doc)
    raw = copy.deepcopy(doc)
    try:
        f = build_function(doc["f"]) if "f" in doc else None
        g = build_function(doc["g"]) if "g" in doc else None
        L = build_body(doc["L"]) if "L" in doc else None
        K = build_body(doc["K"]) if "K" in doc else None
    except (ValueError, TypeError) as exc:
        raise ScenarioError(f"cannot build scenario {doc['id']!r}: {exc}") from exc
    for name, fn in (("f", f), ("g", g)):
        if fn is None:
            continue
        if isinstance(fn.potential, ZeroFunction):
            raise ScenarioError(f"{name}: integral not in (0,inf)")
        try:
            integrate(fn)
        except IntegrabilityError as exc:
            raise ScenarioError(f"{name}: integral not in (0,inf) ({exc})") from exc
    checks = list(doc["checks"])
    needs = {"main-theorem": "fg", "centering": "f", "scaling": "fg", "pointwise": "fg",
             "truncation": "fg", "uniqueness-sanity": "f", "coarea": "f",
             "divergence-pairing": "f", "quermass": "K"}
    present = {"f": f, "g": g, "K": K}
    for c in checks:
        for key in needs[c]:
            if present[key] is None:
                raise ScenarioError(f"check {c!r} needs '{key}'")
    n = f.dim if f is not None else (K.dim if K is not None else 2)
    tols = {}
    for c in checks:
        default = DEFAULT_TOLERANCES[c]
        if default is None:
            default = 1e-2 if n == 1 else 3e-2
        tols[c] = float(doc.get("tolerances", {}).get(c, default))
        if tol_override is not None:
            tols[c] = float(tol_override)
    seed = doc.get("quadrature", {}).get("seed", 0) if seed_override is None else seed_override
    depth = doc.get("schedule", {}).get("depth", 12) if depth_override is None else depth_override
    options = {k: copy.deepcopy(doc[k]) for k in
               ("coarea", "scaling", "pointwise", "truncation", "uniqueness", "quermass", "expected")
               if k in doc}
    return Scenario(doc["id"], raw, f, g, L, K, checks, tols, int(seed), int(depth), options)


def load_scenario(path, **overrides) -> Scenario:
    text = Path(path).read_text()
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" (line {mark.line + 1}, column {mark.column + 1})" if mark else ""
        raise ScenarioError(f"{path}: parse error{where}: {exc}") from exc
    return resolve_scenario(doc, **overrides)


def corpus_paths():
    root = resources.files("lcsam").joinpath("data/corpus")
    return sorted((Path(str(root)) / p.name for p in root.iterdir() if p.name.endswith(".yaml")),
                  key=lambda p: p.name)


def load_corpus(**overrides) -> list[Scenario]:
    scenarios = [load_scenario(p, **overrides) for p in corpus_paths()]
    ids = [s.id for s in scenarios]
    if len(set(ids)) != len(ids):
        raise ScenarioError("scenario identifiers must be unique")
    return sorted(scenarios, key=lambda s: s.id)


# --------------------------------------------------------------------------
# Checks

@dataclass
class CheckRecord:
    name: str
    lhs: float
    rhs: float
    residual: float
    tolerance: float
    passed: bool
    diagnostics: dict = field(default_factory=dict)
    error: str | None = None


def _record(name, lhs, rhs, residual, tol, diagnostics=None, extra_ok=True):
    ok = bool(np.isfinite(residual) and residual <= tol and extra_ok)
    return CheckRecord(name, float(lhs), float(rhs), float(residual), tol, ok, diagnostics or {})


def _check_main(sc: Scenario):
    rep = variation_report(sc.f, sc.g, default_schedule(sc.depth), seed=sc.seed)
    diag = dict(rep.diagnostics)
    diag.update(mu_part=rep.mu_part, nu_part=rep.nu_part, ts=rep.ts, quotients=rep.quotients)
    expected = sc.options.get("expected", {}).get("delta")
    ok = True
    if expected is not None:
        diag["expected"] = expected
        diag["expected_error"] = relative_error(rep.rhs, expected)
        ok = diag["expected_error"] <= sc.tolerance("main-theorem")
    return _record("main-theorem", rep.lhs, rep.rhs, rep.rel_error, sc.tolerance("main-theorem"),
                   diag, ok)


def _check_centering(sc: Scenario):
    defect = centering_defect(sc.f, seed=sc.seed)
    scale = 1.0 + first_absolute_moment(build_mu(sc.f, seed=sc.seed))
    size = float(np.linalg.norm(defect))
    return _record("centering", size, 0.0, size / scale, sc.tolerance("centering"),
                   {"defect": defect.tolist(), "scale": scale})


def _check_scaling(sc: Scenario):
    factors = sc.options.get("scaling", {}).get("factors", [-2.0, 1.0])
    mass = integrate(sc.f)
    rows, worst = [], 0.0
    for c in factors:
        diff, expect = scaling_shift_check(sc.f, sc.g, c, default_schedule(sc.depth))
        res = abs(diff - expect) / (1.0 + abs(c) * mass)
        rows.append({"c": c, "difference": diff, "expected": expect, "residual": res})
        worst = max(worst, res)
    last = rows[-1]
    return _record("scaling", last["difference"], last["expected"], worst,
                   sc.tolerance("scaling"), {"factors": rows})


def _interior_points(f: LogConcaveFn, count, seed):
    """Seeded points of the support, drawn with probability ``~ w_i f(x_i)`` from quadrature nodes."""
    rng = np.random.default_rng(seed)
    n = f.dim
    dom = f.support
    rule = quadrature_nodes(f)
    if rule.exact is None and len(rule.nodes):
        p = rule.weights * f(rule.nodes)
        p = np.clip(p, 0, None) / np.sum(np.clip(p, 0, None))
        cand = rule.nodes[rng.choice(len(p), size=20 * count, p=p)]
    else:
        lo, hi = dom.bbox()
        cand = rng.uniform(lo, hi, size=(20 * count, n))
    scale = np.std(cand, axis=0).mean() if len(cand) > 1 else 1.0
    cand = cand + rng.normal(size=cand.shape) * 1e-3 * scale
    if n == 1:
        ring = np.array([[1.0], [-1.0]])
    else:
        ang = np.linspace(0, 2 * np.pi, 8, endpoint=False)
        ring = np.column_stack([np.cos(ang), np.sin(ang)])
    margin = 2e-2 * max(scale, 1e-3)
    out = []
    for x in cand:
        if not f(x[None, :])[0] > 1e-8:
            continue
        if dom is not None and not np.all(np.atleast_1d(dom.contains(x + margin * ring))):
            continue
        _, flagged = f.potential._grad(x[None, :])
        if flagged[0]:
            continue
        out.append(x)
        if len(out) == count:
            break
    return np.array(out)


def _check_pointwise(sc: Scenario):
    count = sc.options.get("pointwise", {}).get("points", 20)
    pts = _interior_points(sc.f, count, sc.seed)
    rows, worst = [], 0.0
    for x in pts:
        try:
            lhs, rhs = pointwise_derivative_check(sc.f, sc.g, x, default_schedule(sc.depth))
        except DomainError:
            continue
        a = abs(lhs - rhs)
        r = a / max(abs(rhs), 1e-300)
        # pass when within 1e-3 absolute or 1e-2 relative
        res = min(a, 0.1 * r)
        rows.append({"x": x.tolist(), "lhs": lhs, "rhs": rhs, "residual": res})
        worst = max(worst, res)
    ok = len(rows) == count
    last = rows[-1] if rows else {"lhs": math.nan, "rhs": math.nan}
    return _record("pointwise", last["lhs"], last["rhs"], worst if rows else math.inf,
                   sc.tolerance("pointwise"), {"points": rows}, ok)


def _check_truncation(sc: Scenario):
    opts = sc.options.get("truncation", {})
    radii = opts.get("radii", [0.5, 1.0, 2.0, 4.0, 8.0, 16.0])
    seq = truncation_convergence(sc.f, sc.g, radii, seed=sc.seed)
    direct = delta_measure_formula(sc.f, sc.g, seed=sc.seed).total
    target = opts.get("expected", direct)
    steps = np.diff(seq)
    monotone = bool(np.all(steps >= -1e-9 * (1 + np.abs(np.array(seq[1:])))))
    res = relative_error(seq[-1], target)
    diag = {"radii": radii, "values": [float(v) for v in seq], "direct": direct,
            "monotone": monotone}
    if "expected" in opts:
        diag["direct_error"] = relative_error(direct, target)
    return _record("truncation", seq[-1], target, res, sc.tolerance("truncation"), diag, monotone)


def _limit(f, g, depth):
    return delta_limit(integral_curve(f, g, default_schedule(depth))).value


def _check_uniqueness(sc: Scenario):
    shift = np.asarray(sc.options.get("uniqueness", {}).get("shift", [0.5] * sc.f.dim))
    f = sc.f
    g = f.translate(shift)
    d_fg, d_gg = _limit(f, g, sc.depth), _limit(g, g, sc.depth)
    d_gf, d_ff = _limit(g, f, sc.depth), _limit(f, f, sc.depth)
    r1, r2 = relative_error(d_fg, d_gg), relative_error(d_gf, d_ff)
    return _record("uniqueness-sanity", d_fg, d_gg, max(r1, r2), sc.tolerance("uniqueness-sanity"),
                   {"delta_fg": d_fg, "delta_gg": d_gg, "delta_gf": d_gf, "delta_ff": d_ff,
                    "shift": shift.tolist()})


def _check_coarea(sc: Scenario):
    opts = sc.options.get("coarea", {})
    L = sc.L if sc.L is not None else (Interval(-1, 1) if sc.f.dim == 1 else Ball([0, 0], 1))
    route = opts.get("route", "grid")
    levels = opts.get("levels", 256)
    if route == "grid":
        nodes = opts.get("nodes", 4096 if sc.f.dim == 1 else 256)
        field_ = GridField.sample(sc.f, opts.get("half_width", 20.0 if sc.f.dim == 1 else 12.0), nodes)
        res = coarea_check(field_, L, count=levels)
    else:
        res = coarea_check(sc.f, L, count=levels)
    curve = {"s": res.levels.tolist(), "perimeter": res.perimeters.tolist()}
    return _record("coarea", res.tv, res.levelset_integral, res.residual, sc.tolerance("coarea"),
                   {"route": route, "curve": curve})


def _check_divergence(sc: Scenario):
    L = sc.L if sc.L is not None else (Interval(-1, 1) if sc.f.dim == 1 else Ball([0, 0], 1))
    tv = tv_representation(sc.f, L, seed=sc.seed).total
    rows, worst, feasible_ok = [], 0.0, True
    for k, fld in enumerate(field_catalog(sc.f.dim)):
        a, b, c = divergence_pairing_check(sc.f, fld)
        res = abs(a - b - c) / (1.0 + abs(a))
        bound = dual_norm_bound(fld, L)
        row = {"field": k, "divergence": a, "pairing": b, "boundary": c, "residual": res,
               "dual_norm": bound}
        if bound <= 1.0:
            row["dual_feasible"] = bool(a <= tv + 1e-6)
            feasible_ok &= row["dual_feasible"]
        rows.append(row)
        worst = max(worst, res)
    return _record("divergence-pairing", rows[-1]["divergence"],
                   rows[-1]["pairing"] + rows[-1]["boundary"], worst,
                   sc.tolerance("divergence-pairing"), {"fields": rows, "tv": tv}, feasible_ok)


def _check_quermass(sc: Scenario):
    opts = sc.options.get("quermass", {})
    L = sc.L if sc.L is not None else Ball(np.zeros(sc.K.dim), 1.0)
    qv = quermassintegrals(sc.K, L, holdout=opts.get("holdout", 0.5), tol=np.inf)
    W = [float(w) for w in qv.coefficients]
    tol = sc.tolerance("quermass")
    res = qv.residual
    diag = {"W": W, "fit_residual": qv.residual}
    if "expected" in opts:
        err = max(abs(a - b) / max(abs(b), 1.0) for a, b in zip(W, opts["expected"]))
        diag["expected"] = opts["expected"]
        diag["expected_error"] = err
        res = max(res, err)
    return _record("quermass", W[1], W[1], res, tol, diag)


CHECKS = {
    "main-theorem": _check_main,
    "centering": _check_centering,
    "scaling": _check_scaling,
    "pointwise": _check_pointwise,
    "truncation": _check_truncation,
    "uniqueness-sanity": _check_uniqueness,
    "coarea": _check_coarea,
    "divergence-pairing": _check_divergence,
    "quermass": _check_quermass,
}


# --------------------------------------------------------------------------
# Suites and reports

@dataclass
class Report:
    scenario: str
    echo: dict
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def run_scenario(sc: Scenario) -> Report:
    records = []
    for name in sc.checks:
        try:
            with np.errstate(all="ignore"):
                records.append(CHECKS[name](sc))
        except Exception as exc:  # a failing check must not stop the suite
            records.append(CheckRecord(name, math.nan, math.nan, math.inf, sc.tolerance(name),
                                       False, {}, f"{type(exc).__name__}: {exc}"))
    return Report(sc.id, sc.raw, records)


def run_suite(scenarios) -> list[Report]:
    return [run_scenario(sc) for sc in sorted(scenarios, key=lambda s: s.id)]


def _clean(value):
    """JSON-safe copy: non-finite floats become strings, arrays become lists."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.ndarray):
        return _clean(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return value


def environment_stamp() -> dict:
    import platform
    return {"package": "lcsam", "version": __version__, "numpy": np.__version__,
            "python": ".".join(platform.python_version_tuple()[:2])}


def report_record(reports) -> dict:
    body = []
    for r in reports:
        body.append({
            "scenario": r.scenario,
            "passed": r.passed,
            "echo": r.echo,
            "checks": [{"name": c.name, "lhs": c.lhs, "rhs": c.rhs, "residual": c.residual,
                        "tolerance": c.tolerance, "passed": c.passed,
                        "diagnostics": c.diagnostics, "error": c.error} for c in r.checks],
        })
    return _clean({
        "schema_version": SCHEMA_VERSION,
        "environment": environment_stamp(),
        "summary": {"scenarios": len(reports),
                    "checks": sum(len(r.checks) for r in reports),
                    "passed": sum(c.passed for r in reports for c in r.checks)},
        "reports": body,
    })


def _csv_table(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["scenario", "check", "lhs", "rhs", "residual", "tolerance", "passed", "error"])
    for r in reports:
        for c in r.checks:
            w.writerow([r.scenario, c.name, repr(c.lhs), repr(c.rhs), repr(c.residual),
                        repr(c.tolerance), "pass" if c.passed else "fail", c.error or ""])
    return buf.getvalue()


def _plot_tables(reports) -> dict:
    quot = io.StringIO()
    qw = csv.writer(quot, lineterminator="\n")
    qw.writerow(["scenario", "k", "t", "q"])
    coarea = io.StringIO()
    cw = csv.writer(coarea, lineterminator="\n")
    cw.writerow(["scenario", "s", "perimeter"])
    for r in reports:
        for c in r.checks:
            if c.name == "main-theorem" and "ts" in c.diagnostics:
                for k, (t, q) in enumerate(zip(c.diagnostics["ts"], c.diagnostics["quotients"])):
                    qw.writerow([r.scenario, k, repr(t), repr(q)])
            if c.name == "coarea" and "curve" in c.diagnostics:
                cur = c.diagnostics["curve"]
                for s, p in zip(cur["s"], cur["perimeter"]):
                    cw.writerow([r.scenario, repr(s), repr(p)])
    return {"quotients.csv": quot.getvalue(), "coarea.csv": coarea.getvalue()}


FORMATS = ("json", "csv", "plot-table")


def render_report(reports, fmt="json") -> dict:
    """File name -> text for the requested format."""
    if fmt == "json":
        return {"report.json": json.dumps(report_record(reports), sort_keys=True, indent=2) + "\n"}
    if fmt == "csv":
        return {"report.csv": _csv_table(reports)}
    if fmt == "plot-table":
        return _plot_tables(reports)
    raise ValueError(f"unknown report format {fmt!r}; choose from {FORMATS}")


def emit_report(reports, fmt="json", out=None) -> dict:
    """Write the rendered files into directory ``out`` (or return them only)."""
    files = render_report(reports, fmt)
    if out is not None:
        dest = Path(out)
        try:
            dest.mkdir(parents=True, exist_ok=True)
            for name, text in files.items():
                (dest / name).write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write report to {dest}: {exc}") from exc
    return files


def load_report(path) -> dict:
    data = json.loads(Path(path).read_text())
    version = str(data.get("schema_version", ""))
    if version.split(".")[0] != SCHEMA_VERSION.split(".")[0]:
        raise ValueError(f"report schema version {version!r} is incompatible with {SCHEMA_VERSION}")
    return data


__all__ = ["ScenarioError", "Scenario", "CheckRecord", "Report", "CATALOG", "SCHEMA_VERSION",
           "build_body", "build_function", "resolve_scenario", "load_scenario", "corpus_paths",
           "load_corpus", "run_scenario", "run_suite", "report_record", "render_report",
           "emit_report", "load_report", "environment_stamp"]
