"""Vector fields on charts, the flat operator and the gradient test.

On a box chart a 1-form is exact iff it is closed, so deciding whether ``X``
is a gradient reduces to checking ``d(X_flat) = 0``.  Potentials are then
recovered by integrating ``X_flat`` along an axis-ordered staircase path.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import simpson

from .chart import FD_STEP, ConformalFactor, fd_step
from .errors import (
    ConfigError,
    DimensionMismatchError,
    DomainError,
    FlowExitError,
    NotClosedError,
    SolitonLabError,
)
from .ode import dopri5

CLOSED_TOL = 1e-6
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True)
class VectorFieldSpec:
    """Vector field ``X`` given by its chart components."""

    dim: int
    X: Callable
    name: str = "X"
    meta: dict = field(default_factory=dict, compare=False)

    def __call__(self, p):
        v = np.asarray(self.X(np.asarray(p, dtype=float)), dtype=float)
        if v.shape != (self.dim,):
            raise DimensionMismatchError(f"field {self.name} returned shape {v.shape}")
        return v

    def scaled(self, c, name=None):
        f = self.X
        return VectorFieldSpec(
            self.dim, lambda p: c * np.asarray(f(p), dtype=float),
            name or f"{c:g}*{self.name}", dict(self.meta),
        )

    def __add__(self, other):
        if other.dim != self.dim:
            raise DimensionMismatchError("cannot add fields of different dimension")
        f, h = self.X, other.X
        return VectorFieldSpec(
            self.dim,
            lambda p: np.asarray(f(p), dtype=float) + np.asarray(h(p), dtype=float),
            f"{self.name}+{other.name}",
        )


@dataclass(frozen=True)
class Covector:
    """A 1-form given pointwise by its chart components."""

    dim: int
    components: Callable
    name: str = "omega"

    def __call__(self, p):
        return np.asarray(self.components(np.asarray(p, dtype=float)), dtype=float)


@dataclass(frozen=True)
class ClosednessReport:
    max_curl_residual: float
    worst_point: np.ndarray
    loop_integrals: list
    tolerance: float
    grid_resolution: int

    @property
    def is_closed(self):
        return self.max_curl_residual <= self.tolerance

    def to_dict(self):
        return {
            "max_curl_residual": self.max_curl_residual,
            "worst_point": [float(v) for v in self.worst_point],
            "is_closed": self.is_closed,
            "tolerance": self.tolerance,
            "grid_resolution": self.grid_resolution,
            "loop_integrals": self.loop_integrals,
        }


def _check_dims(metric, X):
    if metric.dim != X.dim:
        raise DimensionMismatchError(
            f"field {X.name} has dimension {X.dim}, metric {metric.name} has {metric.dim}"
        )


def flat(metric, X):
    """The g-dual 1-form ``(X_flat)_j = g_ij X^i``."""
    _check_dims(metric, X)
    return Covector(metric.dim, lambda p: metric.at(p) @ X(p), name=f"{X.name}_flat")


def sharp(metric, omega):
    """Inverse of :func:`flat`."""
    return VectorFieldSpec(
        metric.dim, lambda p: np.linalg.solve(metric.at(p), omega(p)), name=f"{omega.name}_sharp"
    )


def exterior_derivative(omega, p, step=FD_STEP):
    """``C[i, j] = d_i omega_j - d_j omega_i`` at ``p`` by central differences."""
    p = np.asarray(p, dtype=float)
    n = p.size
    h = fd_step(p, step)
    jac = np.empty((n, n))
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        jac[i] = (omega(p + e) - omega(p - e)) / (2 * h)
    return jac - jac.T


def _grid_axes(metric, resolution):
    margin = 2 * fd_step(metric.domain.max(axis=1), FD_STEP)
    return [np.linspace(lo + margin, hi - margin, resolution) for lo, hi in metric.domain]


def _gl_line(fun, a, b, panel=0.5, max_panels=32):
    """Composite 16-point Gauss-Legendre integral of ``fun`` over ``[a, b]``."""
    if a == b:
        return 0.0
    n = min(max_panels, max(1, int(np.ceil(abs(b - a) / panel))))
    edges = np.linspace(a, b, n + 1)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        total += half * sum(w * fun(mid + half * s) for s, w in zip(_GL_NODES, _GL_WEIGHTS))
    return total


def circulation(omega, base, i, j, lo, hi):
    """Line integral of ``omega`` around the rectangle ``lo..hi`` in the (i, j) plane.

    Counterclockwise in the (x_i, x_j) orientation; other coordinates are taken
    from ``base``.
    """
    base = np.asarray(base, dtype=float)

    def point(a, b):
        p = base.copy()
        p[i], p[j] = a, b
        return p

    (a0, b0), (a1, b1) = lo, hi
    bottom = _gl_line(lambda a: omega(point(a, b0))[i], a0, a1)
    right = _gl_line(lambda b: omega(point(a1, b))[j], b0, b1)
    top = _gl_line(lambda a: omega(point(a, b1))[i], a1, a0)
    left = _gl_line(lambda b: omega(point(a0, b))[j], b1, b0)
    return bottom + right + top + left


def closedness_test(metric, X, grid_resolution=33, tol=CLOSED_TOL, loops=True):
    """Sup-norm of ``d(X_flat)`` over a grid, plus circulation witnesses.

    Each loop witness is an axis-aligned rectangle through the grid centre;
    its circulation is paired with the Simpson-summed grid flux of the
    matching ``d(X_flat)`` component (Green's theorem).
    """
    _check_dims(metric, X)
    if int(grid_resolution) < 3:
        raise ConfigError("grid_resolution must be at least 3 per axis")
    n = metric.dim
    if n < 2:
        raise ConfigError("closedness needs dimension >= 2")
    omega = flat(metric, X)
    axes = _grid_axes(metric, grid_resolution)
    shape = (grid_resolution,) * n
    curls = np.empty(shape + (n, n))
    for idx in np.ndindex(*shape):
        p = np.array([axes[k][idx[k]] for k in range(n)])
        curls[idx] = exterior_derivative(omega, p, metric.step)
    iu = np.triu_indices(n, 1)
    comps = np.abs(curls[..., iu[0], iu[1]])
    flat_idx = int(np.argmax(comps))
    worst = np.unravel_index(flat_idx, comps.shape)
    worst_point = np.array([axes[k][worst[k]] for k in range(n)])
    residual = float(comps[worst])

    loop_records = []
    if loops:
        mid = grid_resolution // 2
        centre = np.array([axes[k][mid] for k in range(n)])
        quarter = max(1, grid_resolution // 4)
        for i, j in zip(*iu):
            sl = [mid] * n
            sl[i] = slice(None)
            sl[j] = slice(None)
            plane = curls[tuple(sl)][..., i, j]
            for a, b in ((0, grid_resolution - 1), (mid - quarter, mid + quarter)):
                xi, xj = axes[i][a:b + 1], axes[j][a:b + 1]
                flux = float(simpson(simpson(plane[a:b + 1, a:b + 1], x=xj, axis=1), x=xi))
                circ = circulation(
                    omega, centre, i, j, (axes[i][a], axes[j][a]), (axes[i][b], axes[j][b])
                )
                loop_records.append({
                    "plane": [int(i), int(j)],
                    "lower": [float(axes[i][a]), float(axes[j][a])],
                    "upper": [float(axes[i][b]), float(axes[j][b])],
                    "circulation": float(circ),
                    "flux": flux,
                })
    return ClosednessReport(residual, worst_point, loop_records, float(tol), int(grid_resolution))


def staircase_integral(omega, base, x):
    """Integral of ``omega`` along the axis-ordered path from ``base`` to ``x``."""
    base = np.asarray(base, dtype=float)
    x = np.asarray(x, dtype=float)
    p = base.copy()
    total = 0.0
    for k in range(base.size):
        start = p.copy()

        def comp(s, start=start, k=k):
            q = start.copy()
            q[k] = s
            return omega(q)[k]

        total += _gl_line(comp, base[k], x[k])
        p[k] = x[k]
    return total


def recover_potential(metric, X, base_point, report=None, tol=CLOSED_TOL, check_points=5):
    """Potential ``u`` with ``du = X_flat`` and ``u(base_point) = 0``.

    Refuses (``NotClosedError``) unless the closedness test passes; ``report``
    may carry an already computed test.  The returned factor is checked at a
    few deterministic points: its finite-difference gradient must reproduce
    ``X_flat`` to ``10 * tol``.
    """
    _check_dims(metric, X)
    if report is None:
        report = closedness_test(metric, X, tol=tol, loops=False)
    if not report.is_closed:
        raise NotClosedError(
            f"field {X.name} is not closed: max |d(X_flat)| = {report.max_curl_residual:.3e}"
            f" > {report.tolerance:g}",
            report,
        )
    base = metric.require(base_point)
    omega = flat(metric, X)

    def u(x):
        x = np.asarray(x, dtype=float)
        if not metric.contains(x):
            raise DomainError(f"potential requested outside the chart at {x.tolist()}")
        return staircase_integral(omega, base, x)

    factor = ConformalFactor(u=u, grad_u=omega, name=f"u[{X.name}]")

    lo, hi = metric.domain[:, 0], metric.domain[:, 1]
    for s in np.linspace(0.2, 0.8, check_points):
        p = lo + s * (hi - lo)
        fd = ConformalFactor(u).gradient(p, metric.step)
        err = float(np.max(np.abs(fd - omega(p))))
        if err > 10 * report.tolerance:
            raise SolitonLabError(
                f"recovered potential fails its gradient check at {p.tolist()} (error {err:.3e})"
            )
    return factor


def flow(X, p, t, tol=1e-10, domain=None):
    """Time-``t`` flow of ``X`` starting at ``p``.

    With a ``domain`` box (``(dim, 2)`` array) a trajectory that leaves it
    raises :class:`FlowExitError` carrying the exit time and last point.
    """
    p = np.asarray(p, dtype=float)
    if t == 0:
        return p.copy()
    inside = None
    if domain is not None:
        dom = np.asarray(domain, dtype=float)

        def inside(y):
            return bool(np.all(y > dom[:, 0]) and np.all(y < dom[:, 1]))

    sol = dopri5(lambda s, y: X(y), (0.0, t), p, rtol=tol, atol=tol * 1e-2, inside=inside)
    if sol.exited:
        raise FlowExitError(
            f"flow of {X.name} left the domain at time {sol.t[-1]:.6g}", sol.t[-1], sol.y[-1]
        )
    return sol.y[-1]


# -- presets -----------------------------------------------------------------


def rotation(dim=2, omega=1.0):
    """Infinitesimal rotation ``omega * (-x2, x1, 0, ...)``."""

    def X(p):
        v = np.zeros(dim)
        v[0], v[1] = -omega * p[1], omega * p[0]
        return v

    return VectorFieldSpec(dim, X, name=f"rotation(omega={omega:g})", meta={"killing": True})


def translation(direction):
    d = np.asarray(direction, dtype=float)
    return VectorFieldSpec(
        d.size, lambda p: d, name=f"translation({','.join(f'{v:g}' for v in d)})",
        meta={"killing": True},
    )


def radial(dim=2, scale=1.0):
    return VectorFieldSpec(dim, lambda p: scale * np.asarray(p, dtype=float), name=f"radial({scale:g})")


def zero(dim=2):
    z = np.zeros(dim)
    return VectorFieldSpec(dim, lambda p: z, name="zero", meta={"killing": True})


def gradient_field(metric, u):
    """``X = grad_g u``, using the analytic chart gradient of ``u`` when present."""
    return VectorFieldSpec(
        metric.dim,
        lambda p: np.linalg.solve(metric.at(p), u.gradient(p, metric.step)),
        name=f"grad({u.name})",
    )


FIELD_PRESETS = {
    "rotation": lambda dim=2, omega=1.0, **_: rotation(dim, omega),
    "translation": lambda dim=2, direction=None, **_: translation(
        direction if direction is not None else np.eye(dim)[-1]
    ),
    "radial": lambda dim=2, scale=1.0, **_: radial(dim, scale),
    "zero": lambda dim=2, **_: zero(dim),
}


def field_preset(name, dim=2, **params):
    try:
        factory = FIELD_PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown field preset {name!r}; choose from {sorted(FIELD_PRESETS)}") from None
    return factory(dim=dim, **params)
