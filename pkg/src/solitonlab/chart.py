"""Riemannian metrics on coordinate boxes.

A :class:`MetricChart` is a single chart: an axis-aligned box together with a
callable returning the metric matrix at a point.  Derivatives of the metric
come from an optional analytic callable or from central differences.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (
    DegenerateMetricError,
    DimensionMismatchError,
    DomainError,
    UnsupportedDimensionError,
)

FD_STEP = 1e-5
FD_STEP2 = 1e-4
SYMMETRY_TOL = 1e-12


def fd_step(x, base=FD_STEP):
    return base * max(1.0, float(np.max(np.abs(x))))


@dataclass(frozen=True)
class MetricChart:
    """Riemannian metric ``g`` on the box ``domain`` (shape ``(dim, 2)``).

    ``dg(x)`` (optional) returns ``D`` with ``D[k, i, j] = d g_ij / d x_k``.
    """

    dim: int
    domain: np.ndarray
    g: Callable
    dg: Optional[Callable] = None
    name: str = "metric"
    step: float = FD_STEP
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        dom = np.asarray(self.domain, dtype=float).reshape(self.dim, 2)
        if np.any(dom[:, 0] >= dom[:, 1]):
            raise ValueError(f"empty domain box {dom.tolist()}")
        object.__setattr__(self, "domain", dom)

    def contains(self, x, margin=0.0):
        x = np.asarray(x, dtype=float)
        return bool(
            np.all(x > self.domain[:, 0] + margin) and np.all(x < self.domain[:, 1] - margin)
        )

    def require(self, x, margin=None):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise DimensionMismatchError(f"point of shape {x.shape} in a {self.dim}-dimensional chart")
        if margin is None:
            margin = fd_step(x, self.step)
        if not self.contains(x, margin):
            raise DomainError(f"point {x.tolist()} outside {self.name} domain (margin {margin:g})")
        return x

    def at(self, x):
        """Metric matrix at ``x``; raises unless symmetric positive definite."""
        m = np.asarray(self.g(np.asarray(x, dtype=float)), dtype=float)
        if m.shape != (self.dim, self.dim):
            raise DimensionMismatchError(f"metric returned shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise DegenerateMetricError(f"non-finite metric at {np.asarray(x).tolist()}")
        if np.max(np.abs(m - m.T)) > SYMMETRY_TOL * max(1.0, np.max(np.abs(m))):
            raise DegenerateMetricError(f"asymmetric metric at {np.asarray(x).tolist()}")
        try:
            np.linalg.cholesky(m)
        except np.linalg.LinAlgError:
            raise DegenerateMetricError(
                f"metric not positive definite at {np.asarray(x).tolist()}"
            ) from None
        return m

    def derivatives(self, x):
        """``D[k, i, j] = d g_ij / d x_k`` at ``x``."""
        x = np.asarray(x, dtype=float)
        if self.dg is not None:
            return np.asarray(self.dg(x), dtype=float)
        h = fd_step(x, self.step)
        out = np.empty((self.dim, self.dim, self.dim))
        for k in range(self.dim):
            e = np.zeros(self.dim)
            e[k] = h
            out[k] = (self.at(x + e) - self.at(x - e)) / (2 * h)
        return out

    def second_derivatives(self, x):
        """``D2[k, l, i, j] = d^2 g_ij / d x_k d x_l`` by central differences."""
        x = np.asarray(x, dtype=float)
        n = self.dim
        h = fd_step(x, FD_STEP2)
        out = np.empty((n, n, n, n))
        if self.dg is not None:
            for l in range(n):
                e = np.zeros(n)
                e[l] = h
                out[:, l] = (self.derivatives(x + e) - self.derivatives(x - e)) / (2 * h)
            return 0.5 * (out + out.transpose(1, 0, 2, 3))
        g0 = self.at(x)
        for k in range(n):
            ek = np.zeros(n)
            ek[k] = h
            out[k, k] = (self.at(x + ek) - 2 * g0 + self.at(x - ek)) / h**2
            for l in range(k + 1, n):
                el = np.zeros(n)
                el[l] = h
                v = (
                    self.at(x + ek + el) - self.at(x + ek - el)
                    - self.at(x - ek + el) + self.at(x - ek - el)
                ) / (4 * h**2)
                out[k, l] = out[l, k] = v
        return out


@dataclass(frozen=True)
class ConformalFactor:
    """Scalar field ``u`` with optional analytic chart gradient ``grad_u``."""

    u: Callable
    grad_u: Optional[Callable] = None
    name: str = "u"

    def __call__(self, x):
        return float(self.u(np.asarray(x, dtype=float)))

    def gradient(self, x, step=FD_STEP):
        x = np.asarray(x, dtype=float)
        if self.grad_u is not None:
            return np.asarray(self.grad_u(x), dtype=float)
        h = fd_step(x, step)
        out = np.empty(x.size)
        for k in range(x.size):
            e = np.zeros(x.size)
            e[k] = h
            out[k] = (self.u(x + e) - self.u(x - e)) / (2 * h)
        return out


def inner(metric, x, v, w):
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    if v.shape != (metric.dim,) or w.shape != (metric.dim,):
        raise DimensionMismatchError(
            f"vectors of shapes {v.shape}, {w.shape} in a {metric.dim}-dimensional chart"
        )
    return float(v @ metric.at(x) @ w)


def norm(metric, x, v):
    return float(np.sqrt(max(inner(metric, x, v, v), 0.0)))


def christoffel_from(gx, dgx):
    """Christoffel symbols ``G[i, j, k]`` (upper ``i``) from ``g`` and its partials."""
    try:
        ginv = np.linalg.inv(gx)
    except np.linalg.LinAlgError:
        raise DegenerateMetricError("metric is not invertible") from None
    # lowered[l, j, k] = 1/2 (d_j g_lk + d_k g_lj - d_l g_jk)
    lowered = 0.5 * (
        np.transpose(dgx, (1, 0, 2)) + np.transpose(dgx, (1, 2, 0)) - dgx
    )
    gam = np.tensordot(ginv, lowered, axes=1)
    return 0.5 * (gam + np.transpose(gam, (0, 2, 1)))


def christoffel(metric, x):
    """Levi-Civita Christoffel symbols ``Gamma^i_{jk}`` at ``x``."""
    x = metric.require(x)
    return christoffel_from(metric.at(x), metric.derivatives(x))


def gauss_curvature(metric, x):
    """Gaussian curvature of a 2-dimensional chart via the Brioschi formula."""
    if metric.dim != 2:
        raise UnsupportedDimensionError("Gaussian curvature needs a 2-dimensional chart")
    x = metric.require(x, margin=2 * fd_step(x, FD_STEP2))
    g = metric.at(x)
    d = metric.derivatives(x)
    d2 = metric.second_derivatives(x)
    E, F, G = g[0, 0], g[0, 1], g[1, 1]
    Eu, Ev = d[0, 0, 0], d[1, 0, 0]
    Fu, Fv = d[0, 0, 1], d[1, 0, 1]
    Gu, Gv = d[0, 1, 1], d[1, 1, 1]
    Evv, Fuv, Guu = d2[1, 1, 0, 0], d2[0, 1, 0, 1], d2[0, 0, 1, 1]
    a = np.array([
        [-0.5 * Evv + Fuv - 0.5 * Guu, 0.5 * Eu, Fu - 0.5 * Ev],
        [Fv - 0.5 * Gu, E, F],
        [0.5 * Gv, F, G],
    ])
    b = np.array([
        [0.0, 0.5 * Ev, 0.5 * Gu],
        [0.5 * Ev, E, F],
        [0.5 * Gu, F, G],
    ])
    return float((np.linalg.det(a) - np.linalg.det(b)) / (E * G - F * F) ** 2)


def conformal_rescale(metric, u):
    """Return the chart for ``exp(-2u) g``.

    Analytic derivatives are composed when both ``metric.dg`` and ``u.grad_u``
    exist; otherwise the new chart falls back to finite differences.
    """
    g0 = metric.g

    def g(x):
        return np.exp(-2.0 * u.u(x)) * np.asarray(g0(x), dtype=float)

    dg = None
    if metric.dg is not None and u.grad_u is not None:
        dg0 = metric.dg

        def dg(x):
            s = np.exp(-2.0 * u.u(x))
            gx = np.asarray(g0(x), dtype=float)
            du = np.asarray(u.grad_u(x), dtype=float)
            return s * (np.asarray(dg0(x), dtype=float) - 2.0 * du[:, None, None] * gx[None])

    return MetricChart(
        dim=metric.dim,
        domain=metric.domain,
        g=g,
        dg=dg,
        name=f"exp(-2*{u.name})*{metric.name}",
        step=metric.step,
    )


# -- presets -----------------------------------------------------------------


def _box(dim, lo, hi):
    return np.array([[lo, hi]] * dim, dtype=float)


def euclidean(dim=2, domain=None):
    eye = np.eye(dim)
    zero = np.zeros((dim, dim, dim))
    return MetricChart(
        dim, _box(dim, -100.0, 100.0) if domain is None else domain,
        g=lambda x: eye, dg=lambda x: zero, name="euclidean", meta={"constant": True},
    )


def polar(domain=None):
    """Flat plane in polar coordinates ``(r, theta)``: ``diag(1, r^2)``."""

    def g(x):
        return np.diag([1.0, x[0] ** 2])

    def dg(x):
        d = np.zeros((2, 2, 2))
        d[0, 1, 1] = 2 * x[0]
        return d

    dom = np.array([[1e-3, 100.0], [-np.pi, np.pi]]) if domain is None else domain
    return MetricChart(2, dom, g=g, dg=dg, name="polar")


def half_plane(domain=None):
    """Poincare upper half-plane ``(dx^2 + dy^2) / y^2``."""

    def g(x):
        return np.eye(2) / x[1] ** 2

    def dg(x):
        d = np.zeros((2, 2, 2))
        d[1] = -2.0 * np.eye(2) / x[1] ** 3
        return d

    dom = np.array([[-100.0, 100.0], [1e-3, 100.0]]) if domain is None else domain
    return MetricChart(2, dom, g=g, dg=dg, name="half-plane")


def sphere_stereographic(dim=2, domain=None):
    """Round unit sphere in stereographic coordinates ``4 delta / (1 + |x|^2)^2``."""
    eye = np.eye(dim)

    def g(x):
        return 4.0 / (1.0 + x @ x) ** 2 * eye

    def dg(x):
        c = -16.0 / (1.0 + x @ x) ** 3
        return c * x[:, None, None] * eye[None]

    return MetricChart(
        dim, _box(dim, -10.0, 10.0) if domain is None else domain,
        g=g, dg=dg, name="sphere-stereographic",
    )


def _planar(factory):
    def make(dim=2, domain=None):
        if dim != 2:
            raise UnsupportedDimensionError(f"{factory.__name__} is a 2-dimensional chart")
        return factory(domain)

    return make


METRIC_PRESETS = {
    "euclidean": euclidean,
    "polar": _planar(polar),
    "half-plane": _planar(half_plane),
    "sphere-stereographic": sphere_stereographic,
}


def metric_preset(name, dim=2, domain=None):
    try:
        factory = METRIC_PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown metric preset {name!r}; choose from {sorted(METRIC_PRESETS)}") from None
    return factory(dim=dim, domain=domain)
