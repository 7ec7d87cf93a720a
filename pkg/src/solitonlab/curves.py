"""Soliton curves on surfaces (the hypersurface equation with n = 1).

Sign convention
---------------
The chart-level soliton equation is ``SIGMA * H + g(X, nu) = 0`` with ``H``
the mean curvature taken against the oriented unit normal ``nu`` (for a curve,
``H`` is the geodesic curvature ``kappa`` with ``D_s T = kappa * nu``).  The
unit normal follows the Gauss-lift orientation: ``(nu, T)`` is a positively
oriented frame, so a counterclockwise circle has its normal pointing out.

``SIGMA = +1`` is pinned by requiring the unit circle to solve the equation
for ``X(p) = p``; the unit sphere with the same field then solves it too.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.spatial import cKDTree

from .chart import christoffel_from, fd_step
from .errors import DegenerateInputError, DimensionMismatchError, InsufficientDataError
from .fields import flow
from .ode import dopri5

SIGMA = 1.0
RTOL = 1e-9
ATOL = 1e-12
MERGE_TOL = 1e-6


@dataclass(frozen=True)
class CurveState:
    x: np.ndarray
    T: np.ndarray
    s: float = 0.0

    @classmethod
    def from_direction(cls, metric, x, direction, s=0.0):
        x = np.asarray(x, dtype=float)
        d = np.asarray(direction, dtype=float)
        return cls(x, d / np.sqrt(d @ metric.at(x) @ d), s)

    def reversed(self):
        return CurveState(self.x, -self.T, self.s)


def unit_normal(gx, T):
    """g-unit normal with ``(nu, T)`` positively oriented (2-dimensional charts)."""
    c = np.array([T[1], -T[0]])
    w = np.linalg.solve(gx, c)
    return w / np.sqrt(c @ w)


@dataclass
class SolitonCurve:
    """Densely sampled curve: every accepted integrator step is kept."""

    s: np.ndarray
    x: np.ndarray
    T: np.ndarray
    nu: np.ndarray
    kappa: np.ndarray
    field_name: str
    metric_name: str
    partial: bool = False
    tol: float = RTOL
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.s)

    @property
    def length(self):
        return float(self.s[-1] - self.s[0])

    def reversed(self):
        return SolitonCurve(
            -self.s[::-1], self.x[::-1], -self.T[::-1], -self.nu[::-1], -self.kappa[::-1],
            self.field_name, self.metric_name, self.partial, self.tol, dict(self.meta),
        )

    def resample(self, ds):
        """Cubic Hermite resampling at (approximately) uniform arclength spacing.

        Uses the stored tangents as derivative data.  ``T`` is the spline
        derivative; ``nu`` and ``kappa`` are linearly interpolated and
        therefore approximate.
        """
        n = max(2, int(np.ceil(self.length / ds)) + 1)
        s_new = np.linspace(self.s[0], self.s[-1], n)
        spline = CubicHermiteSpline(self.s, self.x, self.T, axis=0)
        lin = lambda arr: np.stack(
            [np.interp(s_new, self.s, arr[:, k]) for k in range(arr.shape[1])], axis=1
        )
        return SolitonCurve(
            s_new, spline(s_new), spline(s_new, 1), lin(self.nu), np.interp(s_new, self.s, self.kappa),
            self.field_name, self.metric_name, self.partial, self.tol, dict(self.meta),
        )


def _soliton_parts(metric, X, x, T):
    gx = metric.at(x)
    if metric.meta.get("constant"):
        gam = np.zeros((2, 2, 2))
    else:
        gam = christoffel_from(gx, metric.derivatives(x))
    nu = unit_normal(gx, T)
    kappa = -SIGMA * float(X(x) @ gx @ nu)
    return gam, nu, kappa


def soliton_rhs(metric, X, state):
    """Derivative of ``(x, T)`` along arclength: ``x' = T``, ``T' = -Gamma(T, T) + kappa nu``."""
    if metric.dim != 2 or X.dim != 2:
        raise DimensionMismatchError("soliton curves live on 2-dimensional charts")
    x, T = np.asarray(state.x, dtype=float), np.asarray(state.T, dtype=float)
    gam, nu, kappa = _soliton_parts(metric, X, x, T)
    return T.copy(), -(gam @ T) @ T + kappa * nu


def integrate_soliton(metric, X, initial, length, tol=RTOL, atol=ATOL, max_step=np.inf):
    """Integrate the soliton curve through ``initial`` for arclength ``length``.

    The tangent is renormalised to unit g-length after every accepted step.
    Leaving the chart ends the run early with ``partial=True``.
    """
    if metric.dim != 2 or X.dim != 2:
        raise DimensionMismatchError("soliton curves live on 2-dimensional charts")

    def rhs(s, y):
        x, T = y[:2], y[2:]
        metric.require(x)
        gam, nu, kappa = _soliton_parts(metric, X, x, T)
        return np.concatenate([T, -(gam @ T) @ T + kappa * nu])

    def project(y):
        x, T = y[:2], y[2:]
        return np.concatenate([x, T / np.sqrt(T @ metric.at(x) @ T)])

    def inside(y):
        return metric.contains(y[:2], fd_step(y[:2], metric.step))

    y0 = np.concatenate([initial.x, initial.T])
    sol = dopri5(
        rhs, (initial.s, initial.s + length), y0, rtol=tol, atol=atol,
        max_step=max_step, inside=inside, project=project,
        first_step=None if np.isinf(max_step) else max_step,
    )
    xs, Ts = sol.y[:, :2], sol.y[:, 2:]
    nus = np.empty_like(xs)
    kappas = np.empty(len(xs))
    for i, (x, T) in enumerate(zip(xs, Ts)):
        _, nus[i], kappas[i] = _soliton_parts(metric, X, x, T)
    return SolitonCurve(
        sol.t, xs, Ts, nus, kappas, X.name, metric.name, partial=sol.exited, tol=tol,
    )


def integrate_soliton_both_ways(metric, X, initial, length_each_way, **kwargs):
    """Soliton curve through ``initial`` extended in both directions."""
    fwd = integrate_soliton(metric, X, initial, length_each_way, **kwargs)
    bwd = integrate_soliton(metric, X, initial.reversed(), length_each_way, **kwargs).reversed()
    return SolitonCurve(
        np.concatenate([bwd.s[:-1], fwd.s]),
        np.concatenate([bwd.x[:-1], fwd.x]),
        np.concatenate([bwd.T[:-1], fwd.T]),
        np.concatenate([bwd.nu[:-1], fwd.nu]),
        np.concatenate([bwd.kappa[:-1], fwd.kappa]),
        X.name, metric.name, partial=fwd.partial or bwd.partial, tol=fwd.tol,
    )


# -- sampled-curve differential quantities ------------------------------------


def sample_derivatives(param, points, width=2):
    """First and second derivatives at interior samples of a non-uniform grid.

    Finite-difference weights on the ``2*width + 1`` surrounding parameter
    values (Fornberg-style, from the local Taylor system).  The default
    five-point stencil stays accurate when an adaptive integrator changes its
    step abruptly; ``width=1`` gives the classical three-point stencil.
    Returns values for samples ``width .. N - width - 1``.
    """
    t = np.asarray(param, dtype=float)
    c = np.asarray(points, dtype=float)
    if len(t) < max(5, 2 * width + 1):
        raise InsufficientDataError(f"need at least {max(5, 2 * width + 1)} samples, got {len(t)}")
    m = 2 * width + 1
    centre = np.arange(width, len(t) - width)
    offsets = t[centre[:, None] + np.arange(-width, width + 1)[None]] - t[centre][:, None]
    scale = np.max(np.abs(offsets), axis=1, keepdims=True)
    z = offsets / scale
    # vander[b, k, j] = z_j^k / k!
    fact = np.cumprod(np.concatenate([[1.0], np.arange(1, m)]))
    vander = z[:, None, :] ** np.arange(m)[None, :, None] / fact[None, :, None]
    rhs = np.zeros((len(centre), m, 2))
    rhs[:, 1, 0] = 1.0
    rhs[:, 2, 1] = 1.0
    w = np.linalg.solve(vander, rhs)
    win = c[centre[:, None] + np.arange(-width, width + 1)[None]]
    d1 = np.einsum("bj,bjd->bd", w[:, :, 0], win) / scale
    d2 = np.einsum("bj,bjd->bd", w[:, :, 1], win) / scale**2
    return d1, d2


def measured_soliton_residual(metric, X, curve):
    """Per-sample ``|SIGMA * kappa + g(X, nu)|`` with ``kappa`` measured from the samples.

    The curvature is recomputed from the sampled positions by finite
    differences, independently of the integrator's curvature column; the
    samples within the stencil half-width of either end copy
    the nearest interior value.
    """
    width = 2
    d1, d2 = sample_derivatives(curve.s, curve.x, width)
    res = np.empty(len(curve.s))
    for j, (v, a) in enumerate(zip(d1, d2)):
        i = j + width
        x = curve.x[i]
        gx = metric.at(x)
        gam = christoffel_from(gx, metric.derivatives(x))
        acc = a + (gam @ v) @ v
        speed2 = v @ gx @ v
        nu = unit_normal(gx, v)
        kappa = float(acc @ gx @ nu) / speed2
        res[i] = abs(SIGMA * kappa + float(X(x) @ gx @ nu))
    res[:width] = res[width]
    res[-width:] = res[-width - 1]
    return res


# -- intersections ------------------------------------------------------------


@dataclass(frozen=True)
class IntersectionResult:
    count: int
    points: np.ndarray


def _cross(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _merge(points, tol):
    merged = []
    for p in sorted(map(tuple, points)):
        if not any(np.hypot(p[0] - q[0], p[1] - q[1]) < tol for q in merged):
            merged.append(p)
    return np.array(merged).reshape(-1, 2)


def _points(curve):
    return np.asarray(curve.x if hasattr(curve, "x") else curve, dtype=float)


def _sagitta_warning(curve, tol, label):
    pts = _points(curve)
    seg = np.diff(pts, axis=0)
    lengths = np.hypot(seg[:, 0], seg[:, 1])
    if len(lengths) < 2:
        return
    turn = np.abs(np.arctan2(_cross(seg[:-1], seg[1:]), np.sum(seg[:-1] * seg[1:], axis=1)))
    # chord deviation ~ L * turning angle / 8
    sag = float(np.max(0.5 * (lengths[:-1] + lengths[1:]) * turn / 8))
    if sag > 10 * tol:
        warnings.warn(
            f"curve {label} is coarsely sampled: chord deviation ~{sag:.2e} > 10*tol",
            stacklevel=3,
        )


def count_intersections(a, b, tol=MERGE_TOL, chunk=256):
    """Transversal crossings of two polylines.

    Accepts :class:`SolitonCurve` objects or ``(N, 2)`` point arrays.
    Crossings closer than ``tol`` are merged, which also deduplicates a
    crossing located at a shared vertex.
    """
    pa, pb = _points(a), _points(b)
    if pa.shape[1] != 2 or pb.shape[1] != 2:
        raise DimensionMismatchError("intersection counting is planar")
    da, _ = cKDTree(pb).query(pa)
    db, _ = cKDTree(pa).query(pb)
    if max(da.max(), db.max()) < tol:
        raise DegenerateInputError("the two curves coincide to within tol")
    _sagitta_warning(pa, tol, "a")
    _sagitta_warning(pb, tol, "b")

    q0, s = pb[:-1], np.diff(pb, axis=0)
    bmin, bmax = np.minimum(pb[:-1], pb[1:]), np.maximum(pb[:-1], pb[1:])
    eps = 1e-12
    hits = []
    for start in range(0, len(pa) - 1, chunk):
        p0 = pa[start:start + chunk + 1][:-1] if start + chunk + 1 <= len(pa) else pa[start:-1]
        r = np.diff(pa[start:start + len(p0) + 1], axis=0)
        amin = np.minimum(p0, p0 + r)[:, None]
        amax = np.maximum(p0, p0 + r)[:, None]
        box = np.all((amin <= bmax[None] + tol) & (bmin[None] <= amax + tol), axis=2)
        ia, ib = np.nonzero(box)
        if ia.size == 0:
            continue
        rr, ss = r[ia], s[ib]
        qp = q0[ib] - p0[ia]
        denom = _cross(rr, ss)
        ok = np.abs(denom) > 1e-300
        t = np.where(ok, _cross(qp, ss) / np.where(ok, denom, 1), -1)
        u = np.where(ok, _cross(qp, rr) / np.where(ok, denom, 1), -1)
        sel = ok & (t >= -eps) & (t <= 1 + eps) & (u >= -eps) & (u <= 1 + eps)
        hits.extend(p0[ia[sel]] + t[sel, None] * rr[sel])
    pts = _merge(hits, tol) if hits else np.empty((0, 2))
    return IntersectionResult(len(pts), pts)


# -- stationarity -------------------------------------------------------------


def stationarity_check(metric, X, curve, dt=1e-4, max_samples=200, tol=1e-12):
    """Sup over samples of ``|normal displacement under the X-flow + SIGMA*kappa*dt| / dt``.

    The displacement is the symmetric difference ``(phi(p, dt) - phi(p, -dt)) / 2``
    projected on ``nu`` with ``g_p``; for a soliton it equals ``-SIGMA*kappa*dt``
    up to ``O(dt^3)``.
    """
    stride = max(1, len(curve.s) // max_samples)
    worst = 0.0
    for i in range(0, len(curve.s), stride):
        p = curve.x[i]
        fwd = flow(X, p, dt, tol=tol, domain=metric.domain)
        bwd = flow(X, p, -dt, tol=tol, domain=metric.domain)
        disp = float(0.5 * (fwd - bwd) @ metric.at(p) @ curve.nu[i])
        worst = max(worst, abs(disp + SIGMA * curve.kappa[i] * dt) / dt)
    return worst


# -- closed forms used as oracles and presets ---------------------------------


def grim_reaper(x):
    """Translating soliton ``y = -log(cos x)`` for ``X = (0, -1)`` under ``SIGMA``."""
    return -np.log(np.cos(x))
