"""Gradient criterion, conformal equivalence and certification runs.

``decide`` turns the gradient criterion into a verdict: a closed ``X_flat``
yields a potential ``u`` and the rescaled metric ``exp(-2u) g`` in which the
X-solitons are minimal.  ``certify_proposition`` checks that claim on seeded
samples and ``demonstrate_surface_gap`` shows that, on surfaces, soliton curves
of a non-gradient field are still geodesics of a Weyl connection.

Seeded sampling: sample ``i`` of a run with seed ``s`` draws from
``numpy.random.Generator(PCG64(SeedSequence(s).spawn(N)[i]))``; the stream of
each sample is independent of the job count and of the platform.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .chart import ConformalFactor, MetricChart, conformal_rescale
from .curves import CurveState, integrate_soliton, measured_soliton_residual
from .errors import CertificationError, DimensionMismatchError, RefusalError, SolitonLabError
from .fields import CLOSED_TOL, ClosednessReport, closedness_test, gradient_field, recover_potential
from .hypersurfaces import shape_data, soliton_residuals, sphere
from .weyl import levi_civita, soliton_connection, unparam_residual

SCHEMA = "solitonlab.certification/1"
RESIDUAL_STEP = 0.01
MAX_DROP_FRACTION = 0.5


class Kind(str, Enum):
    GRADIENT = "GRADIENT"
    NOT_GRADIENT = "NOT_GRADIENT"


@dataclass(frozen=True)
class EquivalenceVerdict:
    kind: Kind
    witness: ClosednessReport
    potential: Optional[ConformalFactor] = None
    rescaled_metric: Optional[MetricChart] = None
    dim: int = 0

    @property
    def label(self):
        # the iff only holds from ambient dimension 3 on
        return "equivalence verdict" if self.dim >= 3 else "criterion value"

    def to_dict(self):
        return {
            "kind": self.kind.value,
            "label": self.label,
            "witness": self.witness.to_dict(),
            "rescaled_metric": None if self.rescaled_metric is None else self.rescaled_metric.name,
        }


def decide(metric, X, grid=33, tol=CLOSED_TOL, base_point=None):
    """Classify ``X`` as a gradient field of ``metric`` (or not) on the chart box."""
    if metric.dim != X.dim:
        raise DimensionMismatchError("field and metric dimensions differ")
    report = closedness_test(metric, X, grid, tol)
    if not report.is_closed:
        return EquivalenceVerdict(Kind.NOT_GRADIENT, report, dim=metric.dim)
    base = metric.domain.mean(axis=1) if base_point is None else np.asarray(base_point, float)
    u = recover_potential(metric, X, base, report=report)
    return EquivalenceVerdict(
        Kind.GRADIENT, report, potential=u, rescaled_metric=conformal_rescale(metric, u),
        dim=metric.dim,
    )


@dataclass
class CertificationReport:
    procedure: str
    inputs: dict
    rows: list
    dropped: int
    verdict: Optional[EquivalenceVerdict] = None
    extra: dict = field(default_factory=dict)

    @property
    def summary(self):
        out = {"samples": len(self.rows), "dropped": self.dropped}
        for key in ("soliton_residual", "minimality_residual", "weyl_residual"):
            vals = [r[key] for r in self.rows if key in r]
            if vals:
                out[f"max_{key}"] = float(np.max(vals))
                out[f"mean_{key}"] = float(np.mean(vals))
        out.update(self.extra)
        return out

    def to_dict(self):
        return {
            "schema": SCHEMA,
            "procedure": self.procedure,
            "inputs": self.inputs,
            "verdict": None if self.verdict is None else self.verdict.to_dict(),
            "rows": self.rows,
            "summary": self.summary,
        }


def sample_rng(seed, index, count):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed).spawn(count)[index]))


def _sample_box(metric, sample_box):
    if sample_box is not None:
        return np.asarray(sample_box, dtype=float).reshape(metric.dim, 2)
    lo, hi = metric.domain[:, 0], metric.domain[:, 1]
    mid = 0.5 * (lo + hi)
    half = np.minimum(0.25 * (hi - lo), 1.0)
    return np.stack([mid - half, mid + half], axis=1)


def _initial_state(metric, rng, box):
    x = box[:, 0] + rng.random(metric.dim) * (box[:, 1] - box[:, 0])
    a = rng.uniform(-np.pi, np.pi)
    return CurveState.from_direction(metric, x, [np.cos(a), np.sin(a)])


def _run(fn, count, jobs):
    if jobs <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, range(count)))


def _finish(report, count):
    if report.dropped > MAX_DROP_FRACTION * count:
        raise CertificationError(
            f"{report.dropped} of {count} samples left the domain (limit 50%)"
        )
    return report


def _curve_row(i, state, curve, soliton_res, other_key, other_res):
    return {
        "id": f"curve-{i}",
        "initial_point": [float(v) for v in state.x],
        "initial_tangent": [float(v) for v in state.T],
        "length": curve.length,
        "soliton_residual": soliton_res,
        other_key: other_res,
    }


def certify_proposition(
    metric, u, n_samples=5, seed=0, length=4.0, tol=1e-9, sample_box=None,
    patches=None, jobs=1, grid=9,
):
    """Pair soliton residuals for ``X = grad u`` with minimality residuals in ``exp(-2u) g``.

    Surfaces: seeded soliton curves, minimality = unparametrised Levi-Civita
    geodesic defect in the rescaled metric.  Higher dimensions: each patch in
    ``patches`` (default: the unit sphere) is evaluated at ``n_samples``
    seeded parameter points; minimality = sup of ``|H|`` recomputed in the
    rescaled metric.
    """
    X = gradient_field(metric, u)
    gbar = conformal_rescale(metric, u)
    inputs = {
        "metric": metric.name, "potential": u.name, "field": X.name,
        "n_samples": n_samples, "seed": seed, "tol": tol,
    }
    verdict = decide(metric, X, grid=grid) if grid else None
    if metric.dim == 2:
        conn = levi_civita(gbar)
        box = _sample_box(metric, sample_box)

        def one(i):
            state = _initial_state(metric, sample_rng(seed, i, n_samples), box)
            curve = integrate_soliton(metric, X, state, length, tol=tol, max_step=RESIDUAL_STEP)
            if curve.partial:
                return None
            sol = float(np.max(measured_soliton_residual(metric, X, curve)))
            return _curve_row(i, state, curve, sol, "minimality_residual",
                              unparam_residual(conn, curve).sup)

        inputs.update(length=length, sample_box=box.tolist())
        rows = _run(one, n_samples, jobs)
    else:
        patches = [sphere(metric.dim, 1.0)] if patches is None else patches
        rows = []
        for j, patch in enumerate(patches):
            rng = sample_rng(seed, j, len(patches))
            box = patch.param_box
            margin = 4 * patch.step
            pts = box[:, 0] + margin + rng.random((n_samples, patch.n)) * (box[:, 1] - box[:, 0] - 2 * margin)

            def hbar(t):
                return abs(shape_data(gbar, patch, t).H)

            sol = soliton_residuals(metric, X, patch, pts)
            mins = _run(lambda k: hbar(pts[k]), len(pts), jobs)
            rows.append({
                "id": f"patch-{j}:{patch.name}",
                "points": int(len(pts)),
                "soliton_residual": float(np.max(sol)),
                "minimality_residual": float(np.max(mins)),
            })
        inputs.update(patches=[p.name for p in patches])
    kept = [r for r in rows if r is not None]
    report = CertificationReport(
        "certify_proposition", inputs, kept, len(rows) - len(kept), verdict,
    )
    return _finish(report, len(rows))


def demonstrate_surface_gap(
    metric, X, n_samples=5, seed=0, length=4.0, tol=1e-9, sample_box=None, jobs=1, grid=33,
):
    """Weyl-geodesic residuals of soliton curves for a non-gradient field on a surface."""
    if metric.dim != 2:
        raise DimensionMismatchError("the surface case needs a 2-dimensional chart")
    verdict = decide(metric, X, grid=grid)
    if verdict.kind is Kind.GRADIENT:
        raise RefusalError(
            f"field {X.name} is a gradient; use certify_proposition instead"
        )
    conn = soliton_connection(metric, X)
    box = _sample_box(metric, sample_box)

    def one(i):
        state = _initial_state(metric, sample_rng(seed, i, n_samples), box)
        curve = integrate_soliton(metric, X, state, length, tol=tol, max_step=RESIDUAL_STEP)
        if curve.partial:
            return None
        sol = float(np.max(measured_soliton_residual(metric, X, curve)))
        return _curve_row(i, state, curve, sol, "weyl_residual", unparam_residual(conn, curve).sup)

    rows = _run(one, n_samples, jobs)
    kept = [r for r in rows if r is not None]
    inputs = {
        "metric": metric.name, "field": X.name, "n_samples": n_samples, "seed": seed,
        "tol": tol, "length": length, "sample_box": box.tolist(),
    }
    report = CertificationReport(
        "demonstrate_surface_gap", inputs, kept, len(rows) - len(kept), verdict,
        extra={"witness_residual": verdict.witness.max_curl_residual},
    )
    return _finish(report, len(rows))


def potential_on_grid(verdict, resolution=17):
    """Tabulate the recovered potential on an interior grid of a 2-dimensional chart."""
    if verdict.kind is not Kind.GRADIENT:
        raise SolitonLabError("no potential for a non-gradient verdict")
    metric = verdict.rescaled_metric
    lo, hi = metric.domain[:, 0], metric.domain[:, 1]
    axes = [np.linspace(a + 1e-3 * (b - a), b - 1e-3 * (b - a), resolution) for a, b in zip(lo, hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    return pts, np.array([verdict.potential(p) for p in pts])
