"""Command line front end: ``lcsam <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import yaml

from .harness import (CATALOG, CheckRecord, Report, ScenarioError, build_body, build_function,
                      corpus_paths, emit_report, load_scenario, run_suite)


def _spec(text: str) -> dict:
    """Inline YAML/JSON mapping, or ``@path`` to read one from a file."""
    if text.startswith("@"):
        text = Path(text[1:]).read_text()
    doc = yaml.safe_load(text)
    if not isinstance(doc, dict):
        raise ScenarioError(f"expected a mapping, got {text!r}")
    return doc


def _scenario_from_args(args, checks, **extra):
    doc = {"id": f"cli_{args.command}", "checks": checks, **extra}
    doc["quadrature"] = {"seed": args.seed}
    doc["schedule"] = {"depth": args.schedule_depth}
    from .harness import resolve_scenario
    return resolve_scenario(doc, tol_override=args.tol)


def _finish(reports, args) -> int:
    files = emit_report(reports, args.format, args.out)
    if args.out is None:
        for text in files.values():
            sys.stdout.write(text)
    return 0 if all(r.passed for r in reports) else 1


def cmd_delta(args):
    doc = {"f": _spec(args.f), "g": _spec(args.g)}
    sc = _scenario_from_args(args, ["main-theorem"], **doc)
    return _finish(run_suite([sc]), args)


def cmd_coarea(args):
    doc = {"f": _spec(args.f), "L": _spec(args.L)}
    opts = {"route": "closed-form" if args.closed_form else "grid", "levels": args.levels}
    if args.nodes:
        opts["nodes"] = args.nodes
    if args.half_width:
        opts["half_width"] = args.half_width
    sc = _scenario_from_args(args, ["coarea"], coarea=opts, **doc)
    return _finish(run_suite([sc]), args)


def cmd_quermass(args):
    doc = {"K": _spec(args.K), "L": _spec(args.L), "quermass": {"holdout": args.holdout}}
    sc = _scenario_from_args(args, ["quermass"], **doc)
    return _finish(run_suite([sc]), args)


def cmd_tv(args):
    from .anisotropic_tv import GridField, tv_grid, tv_representation
    f = build_function(_spec(args.f))
    L = build_body(_spec(args.L))
    dec = tv_representation(f, L, seed=args.seed)
    out = {"absolutely_continuous": dec.absolutely_continuous, "boundary": dec.boundary,
           "total": dec.total}
    if args.nodes:
        w = args.half_width or (20.0 if f.dim == 1 else 12.0)
        out["grid"] = tv_grid(GridField.sample(f, w, args.nodes), L)
    _write({"tv": out}, args)
    return 0


def cmd_measures(args):
    from .measures import build_mu, build_nu, centering_defect
    f = build_function(_spec(args.f))
    mu, nu = build_mu(f, seed=args.seed), build_nu(f)
    if args.out is not None:
        dest = Path(args.out)
        dest.mkdir(parents=True, exist_ok=True)
        mu.to_csv(dest / "mu.csv")
        nu.to_csv(dest / "nu.csv")
    out = {"mu": {"atoms": len(mu), "mass": mu.total_mass},
           "nu": {"atoms": len(nu), "mass": nu.total_mass},
           "centering_defect": centering_defect(f, seed=args.seed).tolist()}
    _write(out, args, to_stdout=True)
    return 0


def cmd_verify(args):
    paths = args.scenarios or corpus_paths()
    scenarios, broken = [], []
    for p in paths:
        try:
            scenarios.append(load_scenario(p, tol_override=args.tol,
                                           depth_override=args.schedule_depth_set,
                                           seed_override=args.seed_set))
        except ScenarioError as exc:
            broken.append(Report(Path(p).stem, {"path": str(p)},
                                 [CheckRecord("load", float("nan"), float("nan"), float("inf"),
                                              0.0, False, {}, str(exc))]))
    reports = run_suite(scenarios) + broken
    return _finish(sorted(reports, key=lambda r: r.scenario), args)


def cmd_catalog(args):
    bodies = ["interval(lo, hi)", "box(lo, hi; null = unbounded)", "ball(center, radius)",
              "polygon(vertices)", "ellipsoid(center, matrix)", "point(at)"]
    _write({"functions": CATALOG, "bodies": bodies}, args, to_stdout=True)
    return 0


def _write(obj, args, to_stdout=False):
    text = json.dumps(obj, sort_keys=True, indent=2) + "\n"
    if args.out is not None and not to_stdout:
        dest = Path(args.out)
        dest.mkdir(parents=True, exist_ok=True)
        (dest / f"{args.command}.json").write_text(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lcsam", description=__doc__)
    p.add_argument("--seed", type=int, default=None, help="jitter seed (default: scenario or 0)")
    p.add_argument("--tol", type=float, default=None, help="override every check tolerance")
    p.add_argument("--schedule-depth", type=int, default=None,
                   help="schedule t_k = 2^-k for k = 0..depth (default 12)")
    p.add_argument("--out", default=None, help="output directory (default: stdout)")
    p.add_argument("--format", choices=["json", "csv", "plot-table"], default="json")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("delta", help="first variation by both routes")
    s.add_argument("--f", required=True, help="function spec (inline YAML or @file)")
    s.add_argument("--g", required=True, help="function spec (inline YAML or @file)")
    s.set_defaults(run=cmd_delta)

    s = sub.add_parser("tv", help="anisotropic total variation")
    s.add_argument("--f", required=True)
    s.add_argument("--L", required=True, help="body spec")
    s.add_argument("--nodes", type=int, default=0, help="also sample on a grid with this many nodes")
    s.add_argument("--half-width", type=float, default=None)
    s.set_defaults(run=cmd_tv)

    s = sub.add_parser("coarea", help="total variation against the level-set integral")
    s.add_argument("--f", required=True)
    s.add_argument("--L", required=True)
    s.add_argument("--closed-form", action="store_true", help="analytic level sets instead of a grid")
    s.add_argument("--nodes", type=int, default=None)
    s.add_argument("--half-width", type=float, default=None)
    s.add_argument("--levels", type=int, default=256)
    s.set_defaults(run=cmd_coarea)

    s = sub.add_parser("quermass", help="relative quermassintegrals by Steiner fit")
    s.add_argument("--K", required=True)
    s.add_argument("--L", required=True)
    s.add_argument("--holdout", type=float, default=0.5)
    s.set_defaults(run=cmd_quermass)

    s = sub.add_parser("measures", help="surface area measures mu_f and nu_f")
    s.add_argument("--f", required=True)
    s.set_defaults(run=cmd_measures)

    s = sub.add_parser("verify", help="run scenario files (default: the shipped corpus)")
    s.add_argument("scenarios", nargs="*")
    s.set_defaults(run=cmd_verify)

    s = sub.add_parser("catalog", help="list closed-form functions and bodies")
    s.set_defaults(run=cmd_catalog)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    # verify keeps scenario values unless a flag is given explicitly
    args.seed_set, args.schedule_depth_set = args.seed, args.schedule_depth
    args.seed = 0 if args.seed is None else args.seed
    args.schedule_depth = 12 if args.schedule_depth is None else args.schedule_depth
    try:
        return args.run(args)
    except ScenarioError as exc:
        print(f"lcsam: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
