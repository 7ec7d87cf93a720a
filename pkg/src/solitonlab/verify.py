"""Acceptance suites shared by ``solitonlab verify`` and the test-suite.

Every suite returns rows ``{"check", "value", "tolerance", "pass"}``; a
check passes when ``value <= tolerance * tol_scale``.  Boolean checks use
``value`` 0 (holds) or 1 (violated) with tolerance 0.
"""

import warnings

import numpy as np

from . import chart, fields
from .config import build_field, build_metric, load_config
from .curves import (
    CurveState,
    SolitonCurve,
    count_intersections,
    grim_reaper,
    integrate_soliton,
    integrate_soliton_both_ways,
    measured_soliton_residual,
    stationarity_check,
)
from .equivalence import Kind, certify_proposition, decide, demonstrate_surface_gap, sample_rng
from .hypersurfaces import conformal_mean_curvature, soliton_residual, sphere

SCHEMA = "solitonlab.verify/1"


def _row(check, value, tolerance, tol_scale, exact=False):
    limit = tolerance if exact else tolerance * tol_scale
    return {
        "check": check,
        "value": float(value),
        "tolerance": float(limit),
        "pass": bool(value <= limit),
    }


def _flag(check, ok):
    return {"check": check, "value": 0.0 if ok else 1.0, "tolerance": 0.0, "pass": bool(ok)}


def _box(dim, lo=-1.0, hi=1.0):
    return np.array([[lo, hi]] * dim)


def _potential_error(verdict, dim, stride):
    """Max deviation from |p|^2/2 after aligning constants, on a sub-grid of the test grid."""
    res = verdict.witness.grid_resolution
    dom = verdict.rescaled_metric.domain
    margin = 2 * chart.fd_step(dom.max(axis=1))
    axes = [np.linspace(lo + margin, hi - margin, res)[::stride] for lo, hi in dom]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    diff = np.array([verdict.potential(p) - 0.5 * p @ p for p in pts])
    return float(np.max(np.abs(diff - diff.mean()))) if diff.size else 0.0


def suite_gradient(tol_scale=1.0, seed=0, jobs=1, dim=2, grid=65, stride=4):
    m = chart.euclidean(dim, _box(dim))
    rot = decide(m, fields.rotation(dim), grid=grid)
    rad = decide(m, fields.radial(dim), grid=grid)
    rows = [
        _flag(f"dim{dim}: rotation classified NOT_GRADIENT", rot.kind is Kind.NOT_GRADIENT),
        _row(f"dim{dim}: rotation witness |residual - 2|",
             abs(rot.witness.max_curl_residual - 2.0), 1e-5, tol_scale),
        _flag(f"dim{dim}: radial classified GRADIENT", rad.kind is Kind.GRADIENT),
    ]
    if rad.kind is Kind.GRADIENT:
        rows.append(_row(f"dim{dim}: potential vs |p|^2/2 (constant aligned)",
                         _potential_error(rad, dim, stride), 1e-6, tol_scale))
    return rows


def _circle_curve(n=2001):
    th = np.linspace(0.0, 2 * np.pi, n)
    x = np.stack([np.cos(th), np.sin(th)], axis=1)
    T = np.stack([-np.sin(th), np.cos(th)], axis=1)
    return SolitonCurve(th, x, T, x.copy(), -np.ones(n), "radial", "euclidean")


def suite_sign(tol_scale=1.0, seed=0, jobs=1, dim=3):
    e2 = chart.euclidean(2, _box(2, -5, 5))
    X2 = fields.radial(2)
    circle = float(np.max(measured_soliton_residual(e2, X2, _circle_curve())))
    traced = integrate_soliton(e2, X2, CurveState.from_direction(e2, [1, 0], [0, 1]), 2 * np.pi)
    drift = float(np.max(np.abs(np.hypot(*traced.x.T) - 1.0)))
    m = chart.euclidean(dim, _box(dim, -5, 5))
    X = fields.radial(dim)
    return [
        _row("unit circle soliton residual (X = p)", circle, 1e-6, tol_scale),
        _row("integrated circle stays on |p| = 1", drift, 1e-6, tol_scale),
        _row(f"unit sphere in R^{dim} soliton residual (X = p)",
             soliton_residual(m, X, sphere(dim, 1.0), 5), 1e-6, tol_scale),
        _row(f"radius-2 sphere in R^{dim} |residual - 1.5|",
             abs(soliton_residual(m, X, sphere(dim, 2.0), 5) - 1.5), 1e-3, tol_scale),
    ]


def suite_grim_reaper(tol_scale=1.0, seed=0, jobs=1):
    m = chart.euclidean(2, _box(2, -20, 20))
    X = fields.translation([0.0, -1.0])
    start = CurveState.from_direction(m, [0.0, 0.0], [1.0, 0.0])
    curve = integrate_soliton_both_ways(m, X, start, 3.0, tol=1e-9)
    sel = np.abs(curve.x[:, 0]) <= 1.4
    x, y = curve.x[sel, 0], curve.x[sel, 1]
    # normal distance to the graph ~ vertical gap * cos(slope angle) = gap * cos(x)
    dist = float(np.max(np.abs(y - grim_reaper(x)) * np.cos(x)))
    span = float(min(-curve.x[:, 0].min(), curve.x[:, 0].max()))
    return [
        _row("sup distance to y = -log cos x on |x| <= 1.4", dist, 1e-6, tol_scale),
        _flag("traced curve covers |x| <= 1.4", span >= 1.4),
    ]


def suite_conformal_bridge(tol_scale=1.0, seed=0, jobs=1, dim=3):
    plane = chart.euclidean(2)
    u = chart.ConformalFactor(lambda p: -p[1], lambda p: np.array([0.0, -1.0]), name="-y")
    rep = certify_proposition(plane, u, n_samples=5, seed=seed, jobs=jobs, grid=0)
    rows = [
        _row(f"u = -y, {r['id']}: geodesic residual in exp(-2u) g", r["minimality_residual"],
             1e-5, tol_scale)
        for r in rep.rows
    ]
    rows.append(_flag("u = -y: all 5 samples kept", len(rep.rows) == 5))
    m = chart.euclidean(dim, _box(dim, -5, 5))
    uq = chart.ConformalFactor(lambda p: 0.5 * p @ p, lambda p: np.asarray(p, float), name="|p|^2/2")
    patch = sphere(dim, 1.0)
    hbar = max(abs(conformal_mean_curvature(m, uq, patch, t)) for t in patch.grid(5))
    rows.append(_row(f"u = |p|^2/2: unit sphere |H| in exp(-2u) g (R^{dim})", hbar, 1e-6, tol_scale))
    return rows


def suite_weyl(tol_scale=1.0, seed=0, jobs=1):
    plane = chart.euclidean(2)
    rot = fields.rotation(2)
    flat_rep = demonstrate_surface_gap(plane, rot, n_samples=5, seed=seed, jobs=jobs, grid=17)
    rows = [
        _row(f"plane {r['id']}: Weyl residual", r["weyl_residual"], 1e-5, tol_scale)
        for r in flat_rep.rows
    ]
    rows.append(_flag("plane: all 5 samples kept", len(flat_rep.rows) == 5))
    rows.append(_row("plane: witness |residual - 2|",
                     abs(flat_rep.summary["witness_residual"] - 2.0), 1e-5, tol_scale))
    sph = chart.sphere_stereographic(2)
    sph_rep = demonstrate_surface_gap(sph, rot, n_samples=5, seed=seed, jobs=jobs, grid=17,
                                      length=2.0)
    rows += [
        _row(f"sphere chart {r['id']}: Weyl residual", r["weyl_residual"], 1e-4, tol_scale)
        for r in sph_rep.rows
    ]
    rows.append(_flag("sphere chart: all 5 samples kept", len(sph_rep.rows) == 5))
    return rows


def yinyang_curves(cfg=None):
    """The two yin-yang curves of the shipped ``yinyang`` preset."""
    cfg = load_config("yinyang") if cfg is None else cfg
    return trace_from_config(cfg)


def trace_from_config(cfg, overrides=None):
    overrides = overrides or {}
    metric = build_metric(cfg)
    X = build_field(cfg, metric.dim)
    run = lambda key, default=None: overrides.get(key, cfg.get("run", key, default))
    initial = np.atleast_2d(np.asarray(run("initial", [[0.0, 0.0]]), dtype=float))
    direction = np.atleast_2d(np.asarray(run("direction", [[1.0, 0.0]]), dtype=float))
    length = float(run("length", 1.0))
    tol = float(run("tol", 1e-9))
    max_step = float(run("max_step", np.inf))
    resample = run("resample")
    curves = []
    for x0, d0 in zip(initial, direction):
        state = CurveState.from_direction(metric, x0, d0)
        if run("both_ways", False):
            c = integrate_soliton_both_ways(metric, X, state, length, tol=tol, max_step=max_step)
        else:
            c = integrate_soliton(metric, X, state, length, tol=tol, max_step=max_step)
        if resample:
            c = c.resample(float(resample))
        curves.append(c)
    return metric, X, curves


def suite_intersections(tol_scale=1.0, seed=0, jobs=1, pairs=20, length=12.0):
    _, _, (a, b) = yinyang_curves()
    shipped = count_intersections(a, b).count
    m = chart.euclidean(2)
    X = fields.rotation(2)

    def pair_count(i):
        rng = sample_rng(seed, i, pairs)
        cs = []
        for _ in range(2):
            x = rng.uniform(-1.5, 1.5, 2)
            ang = rng.uniform(-np.pi, np.pi)
            st = CurveState.from_direction(m, x, [np.cos(ang), np.sin(ang)])
            cs.append(integrate_soliton(m, X, st, length).resample(0.005))
        return count_intersections(*cs).count

    from .equivalence import _run

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        counts = _run(pair_count, pairs, jobs)
    return [
        _row("shipped yinyang pair: |count - 1|", abs(shipped - 1), 0.0, tol_scale, exact=True),
        _row(f"max intersections over {pairs} seeded pairs (<= 1)", max(counts), 1.0, tol_scale,
             exact=True),
    ]


def suite_stationarity(tol_scale=1.0, seed=0, jobs=1, dt=1e-4):
    m = chart.euclidean(2, _box(2, -20, 20))
    rot = fields.rotation(2)
    yy = integrate_soliton(m, rot, CurveState.from_direction(m, [1, 0], [0, 1]), 12.0)
    tr = fields.translation([0.0, -1.0])
    gr = integrate_soliton_both_ways(m, tr, CurveState.from_direction(m, [0, 0], [1, 0]), 3.0)
    return [
        _row("yin-yang under the rotation flow", stationarity_check(m, rot, yy, dt), 1e-5, tol_scale),
        _row("grim reaper under the translation flow", stationarity_check(m, tr, gr, dt), 1e-5,
             tol_scale),
    ]


def suite_dim4(tol_scale=1.0, seed=0, jobs=1):
    rows = suite_gradient(tol_scale, seed, jobs, dim=4, grid=9, stride=2)
    rows += suite_sign(tol_scale, seed, jobs, dim=4)
    m = chart.euclidean(4, _box(4, -5, 5))
    uq = chart.ConformalFactor(lambda p: 0.5 * p @ p, lambda p: np.asarray(p, float), name="|p|^2/2")
    patch = sphere(4, 1.0)
    hbar = max(abs(conformal_mean_curvature(m, uq, patch, t)) for t in patch.grid(3))
    rows.append(_row("u = |p|^2/2: unit 3-sphere |H| in exp(-2u) g", hbar, 1e-6, tol_scale))
    return rows


SUITES = {
    "gradient": suite_gradient,
    "sign": suite_sign,
    "grim-reaper": suite_grim_reaper,
    "conformal-bridge": suite_conformal_bridge,
    "weyl": suite_weyl,
    "intersections": suite_intersections,
    "stationarity": suite_stationarity,
    "dim4": suite_dim4,
}


def run_suites(names=None, tol_scale=1.0, seed=0, jobs=1):
    names = list(SUITES) if not names else list(names)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise KeyError(f"unknown suite(s) {unknown}; choose from {sorted(SUITES)}")
    results = {name: SUITES[name](tol_scale=tol_scale, seed=seed, jobs=jobs) for name in names}
    return {
        "schema": SCHEMA,
        "seed": seed,
        "tol_scale": tol_scale,
        "suites": results,
        "all_pass": all(r["pass"] for rows in results.values() for r in rows),
    }


def summary_lines(result):
    lines = []
    for name, rows in result["suites"].items():
        for r in rows:
            status = "pass" if r["pass"] else "FAIL"
            lines.append(
                f"{status}  {name:<13} {r['check']}: {r['value']:.3e} <= {r['tolerance']:.1e}"
            )
    return lines
