"""Weyl connections and their (unparametrised) geodesics.

For a metric ``g`` and a field ``Y`` the connection is

    nabla_A B = D_A B - g(A, B) Y + g(Y, A) B + g(Y, B) A

with ``D`` the Levi-Civita connection of ``g``.  Its unparametrised
geodesics on a surface are the curves with ``kappa = g(Y, nu)``.  Under the
soliton sign convention of :mod:`solitonlab.curves` the X-soliton curves are
therefore the geodesics of the connection built from ``Y = -SIGMA * X``; use
:func:`soliton_connection` to get it.
"""

from dataclasses import dataclass

import numpy as np

from .chart import christoffel_from, fd_step
from .curves import SIGMA, sample_derivatives
from .errors import DimensionMismatchError
from .fields import VectorFieldSpec, zero
from .ode import dopri5


@dataclass(frozen=True)
class AffineConnection:
    base_metric: object
    X: VectorFieldSpec
    name: str = ""

    def coefficients(self, x):
        """``W[i, j, k]`` such that ``nabla_v w = dw + W(v, w)``."""
        x = self.base_metric.require(x)
        gx = self.base_metric.at(x)
        gam = christoffel_from(gx, self.base_metric.derivatives(x))
        Xv = self.X(x)
        Xf = gx @ Xv
        eye = np.eye(len(x))
        return (
            gam
            - Xv[:, None, None] * gx[None]
            + eye[:, None, :] * Xf[None, :, None]
            + eye[:, :, None] * Xf[None, None, :]
        )


def levi_civita(metric):
    return AffineConnection(metric, zero(metric.dim), name=f"LC[{metric.name}]")


def weyl_connection(metric, X):
    if X.dim != metric.dim:
        raise DimensionMismatchError("field and metric dimensions differ")
    return AffineConnection(metric, X, name=f"Weyl[{metric.name},{X.name}]")


def soliton_connection(metric, X):
    """Weyl connection whose unparametrised geodesics are the X-soliton curves."""
    return AffineConnection(
        metric, X.scaled(-SIGMA, name=f"{-SIGMA:+g}*{X.name}"),
        name=f"Weyl[{metric.name},soliton({X.name})]",
    )


def weyl_apply(conn, x, v, w):
    """Non-derivative part ``Gamma(v, w) - g(v, w) X + g(X, v) w + g(X, w) v``."""
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    return np.einsum("ijk,j,k->i", conn.coefficients(x), v, w)


@dataclass
class GeodesicCurve:
    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    connection: str
    partial: bool = False


def integrate_weyl_geodesic(conn, x0, v0, length, tol=1e-10, atol=1e-13, max_step=np.inf):
    """Affinely parametrised geodesic ``c'' = -W(c', c')`` for parameter span ``length``."""
    metric = conn.base_metric
    n = metric.dim

    def rhs(t, y):
        x, v = y[:n], y[n:]
        return np.concatenate([v, -(conn.coefficients(x) @ v) @ v])

    def inside(y):
        return metric.contains(y[:n], fd_step(y[:n], metric.step))

    y0 = np.concatenate([np.asarray(x0, dtype=float), np.asarray(v0, dtype=float)])
    sol = dopri5(
        rhs, (0.0, length), y0, rtol=tol, atol=atol, max_step=max_step, inside=inside,
        first_step=None if np.isinf(max_step) else max_step,
    )
    return GeodesicCurve(sol.t, sol.y[:, :n], sol.y[:, n:], conn.name, partial=sol.exited)


@dataclass(frozen=True)
class ResidualReport:
    sup: float
    mean: float
    argmax: np.ndarray
    values: np.ndarray

    def to_dict(self):
        return {
            "sup": self.sup,
            "mean": self.mean,
            "argmax": [float(v) for v in self.argmax],
            "samples": int(len(self.values)),
        }


def _param_and_points(curve):
    if hasattr(curve, "s"):
        return curve.s, curve.x
    if hasattr(curve, "t"):
        return curve.t, curve.x
    t, x = curve
    return np.asarray(t, dtype=float), np.asarray(x, dtype=float)


def unparam_residual(conn, curve):
    """Transverse geodesic defect ``|a - (g(a,c')/g(c',c')) c'| / |c'|^2``.

    ``a = c'' + W(c', c')`` with derivatives from a five-point stencil on the
    (possibly non-uniform) sample parameters.  Zero exactly for unparametrised geodesics.
    Accepts a curve object or a ``(param, points)`` pair.
    """
    metric = conn.base_metric
    t, x = _param_and_points(curve)
    width = 2
    d1, d2 = sample_derivatives(t, x, width)
    vals = np.empty(len(d1))
    for i, (p, v, acc) in enumerate(zip(x[width:len(x) - width], d1, d2)):
        gx = metric.at(p)
        a = acc + (conn.coefficients(p) @ v) @ v
        vv = v @ gx @ v
        perp = a - (a @ gx @ v) / vv * v
        vals[i] = np.sqrt(max(perp @ gx @ perp, 0.0)) / vv
    k = int(np.argmax(vals))
    return ResidualReport(float(vals[k]), float(np.mean(vals)), x[k + width].copy(), vals)
