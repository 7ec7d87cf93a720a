"""``solitonlab`` command-line front end.

Exit codes: 0 success (or GRADIENT), 1 verification failure, 2 usage or
config error, 3 NOT_GRADIENT.  Errors are reported on stderr, never as a
traceback.
"""

import argparse
import os
import sys
import warnings

import numpy as np

from . import output, verify
from .config import Config, build_field, build_metric, build_patch, build_potential, load_config
from .equivalence import Kind, certify_proposition, decide, demonstrate_surface_gap, potential_on_grid
from .errors import ConfigError, SolitonLabError
from .hypersurfaces import rotational_profile, soliton_residuals
from .weyl import integrate_weyl_geodesic, soliton_connection, unparam_residual

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NOT_GRADIENT = 0, 1, 2, 3
DEFAULT_OUT = "solitonlab-out"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # argparse exits with 2 already; keep the message short and on stderr
        self.print_usage(sys.stderr)
        print(f"{self.prog}: usage error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="run config file, or the name of a shipped preset")
    p.add_argument("--out", default=DEFAULT_OUT, help=f"output directory (default {DEFAULT_OUT})")
    p.add_argument("--seed", type=int, default=None, help="base seed for sampled runs")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers (output is unaffected)")
    p.add_argument("--tol", type=float, default=None, help="override the run tolerance")
    p.add_argument("--format", choices=("csv", "json", "svg"), default=None)
    return p


def build_parser():
    parser = _Parser(prog="solitonlab", description="Soliton curves, Weyl geodesics and gradient checks")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True
    common = [_common()]
    sub.add_parser("trace-soliton", parents=common, help="integrate soliton curves")
    sub.add_parser("trace-weyl", parents=common, help="integrate a Weyl-connection geodesic")
    sub.add_parser("gradient-check", parents=common, help="decide whether X is a gradient")
    sub.add_parser("certify", parents=common, help="paired soliton / minimality residuals")
    sub.add_parser("surface-gap", parents=common, help="Weyl residuals for a non-gradient field")
    sub.add_parser("profile", parents=common, help="rotationally symmetric soliton profile")
    v = sub.add_parser("verify", parents=common, help="run the acceptance suites")
    v.add_argument("--suite", action="append", default=None,
                   help=f"suite to run (repeatable): {', '.join(verify.SUITES)}")
    v.add_argument("--tol-scale", type=float, default=1.0, help="multiply every tolerance")
    r = sub.add_parser("render", parents=common, help="SVG of curve CSV files (or of a config)")
    r.add_argument("csv", nargs="*", help="curve CSV files")
    r.add_argument("--caption", default=None)
    return parser


# -- helpers ---------------------------------------------------------------------


def _prepare(args, need_config=True, default_config=None):
    if args.jobs < 1:
        raise ConfigError("--jobs must be at least 1")
    if args.tol is not None and not args.tol > 0:
        raise ConfigError("--tol must be strictly positive")
    source = args.config or default_config
    if source is None:
        if need_config:
            raise ConfigError("--config is required for this command")
        cfg = Config()
    else:
        cfg = load_config(source)
    tol = cfg.get("run", "tol")
    if tol is not None and not (isinstance(tol, (int, float)) and tol > 0):
        raise ConfigError("tol must be a strictly positive number", line=cfg.line("run", "tol"))
    if args.tol is not None:
        cfg.set("run", "tol", args.tol)
    if args.seed is not None:
        cfg.set("run", "seed", args.seed)
    os.makedirs(args.out, exist_ok=True)
    if not os.access(args.out, os.W_OK):
        raise ConfigError(f"output directory {args.out!r} is not writable")
    return cfg


def _meta(args, cfg):
    return {"command": args.command, "config": cfg.resolved()}


def _path(args, name):
    return os.path.join(args.out, name)


def _report(lines):
    for line in lines:
        print(line)


# -- commands -------------------------------------------------------------------


def cmd_trace_soliton(args):
    cfg = _prepare(args)
    metric, X, curves = verify.trace_from_config(cfg)
    meta = _meta(args, cfg)
    fmt = args.format or "csv"
    written = []
    for i, c in enumerate(curves):
        if fmt == "csv":
            written.append(_path(args, f"curve-{i}.csv"))
            output.write_curve_csv(written[-1], metric, X, c, meta)
        elif fmt == "json":
            header, rows = output.curve_rows(metric, X, c)
            written.append(_path(args, f"curve-{i}.json"))
            output.write_json(written[-1], dict(meta, columns=header, rows=rows, partial=c.partial))
    caption = f"soliton curves: {metric.name}, X = {X.name}"
    written.append(_path(args, "curves.svg"))
    output.write_svg(written[-1], [c.x for c in curves], caption, meta)
    for i, c in enumerate(curves):
        flag = " (left the chart)" if c.partial else ""
        print(f"curve-{i}: length {c.length:.6g}, {len(c.s)} samples{flag}")
    _report(f"wrote {p}" for p in written)
    return EXIT_OK


def cmd_trace_weyl(args):
    cfg = _prepare(args)
    metric = build_metric(cfg)
    X = build_field(cfg, metric.dim)
    conn = soliton_connection(metric, X)
    tol = float(cfg.get("run", "tol", 1e-10))
    x0 = np.asarray(cfg.get("run", "initial", [0.0] * metric.dim), dtype=float).ravel()
    v0 = np.asarray(cfg.get("run", "velocity", [1.0] + [0.0] * (metric.dim - 1)), dtype=float).ravel()
    if x0.shape != (metric.dim,) or v0.shape != (metric.dim,):
        raise ConfigError(f"initial and velocity need {metric.dim} components")
    length = float(cfg.get("run", "length", 1.0))
    max_step = float(cfg.get("run", "max_step", 0.01))
    geo = integrate_weyl_geodesic(conn, x0, v0, length, tol=tol, atol=tol * 1e-3, max_step=max_step)
    res = unparam_residual(conn, geo) if len(geo.t) >= 5 else None
    meta = dict(_meta(args, cfg), connection=conn.name, partial=geo.partial)
    n = metric.dim
    header = ["t"] + [f"x{i + 1}" for i in range(n)] + [f"v{i + 1}" for i in range(n)]
    rows = [[t, *x, *v] for t, x, v in zip(geo.t, geo.x, geo.v)]
    fmt = args.format or "csv"
    written = []
    if fmt == "csv":
        written.append(_path(args, "geodesic.csv"))
        output.write_csv(written[-1], header, rows, meta)
    elif fmt == "json":
        written.append(_path(args, "geodesic.json"))
        output.write_json(written[-1], dict(meta, columns=header, rows=rows,
                                            residual=None if res is None else res.to_dict()))
    if n == 2:
        written.append(_path(args, "geodesic.svg"))
        output.write_svg(written[-1], [geo.x], f"geodesic of {conn.name}", meta)
    if res is not None:
        print(f"unparametrised geodesic residual: sup {res.sup:.3e}, mean {res.mean:.3e}")
    _report(f"wrote {p}" for p in written)
    return EXIT_OK


def cmd_gradient_check(args):
    cfg = _prepare(args)
    metric = build_metric(cfg)
    X = build_field(cfg, metric.dim)
    grid = int(cfg.get("run", "grid", 33))
    tol = float(cfg.get("run", "tol", 1e-6))
    verdict = decide(metric, X, grid=grid, tol=tol)
    meta = _meta(args, cfg)
    report = dict(meta, verdict=verdict.to_dict(), field=X.name, metric=metric.name)
    written = []
    if verdict.kind is Kind.GRADIENT and metric.dim == 2:
        res = int(cfg.get("run", "potential_grid", 17))
        pts, vals = potential_on_grid(verdict, res)
        written.append(_path(args, "potential.csv"))
        output.write_csv(written[-1], ["x1", "x2", "u"], [[*p, v] for p, v in zip(pts, vals)], meta)
        report["potential_range"] = [float(vals.min()), float(vals.max())]
    written.append(_path(args, "gradient.json"))
    output.write_json(written[-1], report)
    w = verdict.witness
    print(f"{verdict.kind.value}: max |d(X_flat)| = {w.max_curl_residual:.6g} "
          f"(tolerance {w.tolerance:g}, grid {w.grid_resolution})")
    _report(f"wrote {p}" for p in written)
    return EXIT_OK if verdict.kind is Kind.GRADIENT else EXIT_NOT_GRADIENT


def _sampling(cfg, args):
    return {
        "n_samples": int(cfg.get("run", "n_samples", 5)),
        "seed": int(cfg.get("run", "seed", 0)),
        "length": float(cfg.get("run", "length", 4.0)),
        "tol": float(cfg.get("run", "tol", 1e-9)),
        "sample_box": cfg.get("run", "sample_box"),
        "jobs": args.jobs,
    }


def _write_report(args, name, rep, meta):
    path = _path(args, name)
    output.write_json(path, dict(rep.to_dict(), config=meta["config"], command=meta["command"]))
    for key, val in sorted(rep.summary.items()):
        print(f"{key}: {val:.6g}" if isinstance(val, float) else f"{key}: {val}")
    print(f"wrote {path}")


def cmd_certify(args):
    cfg = _prepare(args)
    metric = build_metric(cfg)
    u = build_potential(cfg, metric.dim)
    opts = _sampling(cfg, args)
    patches = [build_patch(cfg, metric.dim)] if cfg.section("patch") else None
    rep = certify_proposition(metric, u, patches=patches, grid=int(cfg.get("run", "grid", 9)), **opts)
    _write_report(args, "certify.json", rep, _meta(args, cfg))
    return EXIT_OK


def cmd_surface_gap(args):
    cfg = _prepare(args)
    metric = build_metric(cfg)
    X = build_field(cfg, metric.dim)
    opts = _sampling(cfg, args)
    rep = demonstrate_surface_gap(metric, X, grid=int(cfg.get("run", "grid", 33)), **opts)
    _write_report(args, "surface-gap.json", rep, _meta(args, cfg))
    return EXIT_OK


def cmd_profile(args):
    cfg = _prepare(args)
    n = int(cfg.get("run", "n", 2))
    X = build_field(cfg, n + 1)
    initial = cfg.get("run", "initial")
    if initial is None or len(initial) != 3:
        raise ConfigError("[run] initial = [r, z, alpha] is required", line=cfg.line("run", "initial"))
    length = float(cfg.get("run", "length", 1.0))
    tol = float(cfg.get("run", "tol", 1e-9))
    prof, patch = rotational_profile(X, n, initial, length, tol=tol)
    metric = build_metric(cfg) if cfg.section("metric") else None
    if metric is None or metric.dim != n + 1:
        from .chart import euclidean

        metric = euclidean(n + 1)
    vals = soliton_residuals(metric, X, patch, grid=int(cfg.get("run", "grid", 9)))
    meta = _meta(args, cfg)
    written = []
    if (args.format or "csv") == "csv":
        written.append(_path(args, "profile.csv"))
        rows = [[s, r, z, a] for s, r, z, a in zip(prof.s, prof.r, prof.z, prof.alpha)]
        output.write_csv(written[-1], ["s", "r", "z", "alpha"], rows, meta)
    summary = {"max_soliton_residual": float(np.max(vals)), "mean_soliton_residual": float(np.mean(vals)),
               "samples": int(vals.size), "profile_length": float(prof.s[-1])}
    written.append(_path(args, "profile.json"))
    output.write_json(written[-1], dict(meta, summary=summary, field=X.name, n=n))
    written.append(_path(args, "profile.svg"))
    output.write_svg(written[-1], [np.stack([prof.r, prof.z], axis=1)], f"profile (r, z), X = {X.name}", meta)
    print(f"max soliton residual on the patch: {summary['max_soliton_residual']:.3e}")
    _report(f"wrote {p}" for p in written)
    return EXIT_OK


def cmd_verify(args):
    if args.jobs < 1:
        raise ConfigError("--jobs must be at least 1")
    if not args.tol_scale > 0:
        raise ConfigError("--tol-scale must be strictly positive")
    unknown = [s for s in args.suite or [] if s not in verify.SUITES]
    if unknown:
        raise ConfigError(f"unknown suite(s) {unknown}; choose from {sorted(verify.SUITES)}")
    seed = 0 if args.seed is None else args.seed
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        result = verify.run_suites(args.suite, tol_scale=args.tol_scale, seed=seed, jobs=args.jobs)
    os.makedirs(args.out, exist_ok=True)
    path = _path(args, "verify.json")
    output.write_json(path, result)
    if args.format == "json":
        sys.stdout.write(output.dumps(result))
    else:
        _report(verify.summary_lines(result))
        n = sum(len(rows) for rows in result["suites"].values())
        bad = sum(not r["pass"] for rows in result["suites"].values() for r in rows)
        print(f"{n - bad}/{n} checks passed; wrote {path}")
    return EXIT_OK if result["all_pass"] else EXIT_FAIL


def cmd_render(args):
    if args.csv:
        polylines, metas = [], []
        for path in args.csv:
            _, pts = output.read_curve_csv(path)
            polylines.append(pts)
            metas.append(os.path.basename(path))
        meta = {"command": "render", "inputs": metas}
        caption = args.caption or ", ".join(metas)
    else:
        cfg = _prepare(args, default_config="yinyang")
        metric, X, curves = verify.trace_from_config(cfg)
        polylines = [c.x for c in curves]
        meta = _meta(args, cfg)
        caption = args.caption or f"soliton curves: {metric.name}, X = {X.name}"
    if any(p.ndim != 2 or p.shape[1] < 2 or len(p) < 2 for p in polylines):
        raise ConfigError("render needs 2-dimensional curves with at least two points")
    os.makedirs(args.out, exist_ok=True)
    path = _path(args, "render.svg")
    output.write_svg(path, polylines, caption, meta)
    print(f"wrote {path}")
    return EXIT_OK


COMMANDS = {
    "trace-soliton": cmd_trace_soliton,
    "trace-weyl": cmd_trace_weyl,
    "gradient-check": cmd_gradient_check,
    "certify": cmd_certify,
    "surface-gap": cmd_surface_gap,
    "profile": cmd_profile,
    "verify": cmd_verify,
    "render": cmd_render,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        where = f"{args.config}: " if getattr(args, "config", None) else ""
        print(f"solitonlab {args.command}: config error: {where}{exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolitonLabError as exc:
        print(f"solitonlab {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError, TypeError, KeyError) as exc:
        print(f"solitonlab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
