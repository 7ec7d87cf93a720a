"""Parametric hypersurface patches: fundamental forms, mean curvature, soliton residual."""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .chart import FD_STEP2, christoffel_from, conformal_rescale, euclidean
from .curves import SIGMA
from .errors import (
    DimensionMismatchError,
    ImmersionError,
    RefusalError,
    SolitonLabError,
    UnsupportedDimensionError,
)
from .ode import dopri5

RANK_TOL = 1e-10


class CoordinateSingularityError(SolitonLabError):
    """A rotational profile reached the axis of symmetry."""

    def __init__(self, message, profile=None):
        self.profile = profile
        super().__init__(message)


@dataclass(frozen=True)
class ImmersedPatch:
    """Map ``f`` from the parameter box ``param_box`` (shape ``(n, 2)``) into a chart.

    ``orientation(t)`` returns a reference vector; the unit normal is chosen
    with positive g-inner product against it.  Without it the normal makes
    ``(nu, df/dt_1, ..., df/dt_n)`` positively oriented.  ``jet(t)`` may
    return ``(f, J, D2)`` analytically, bypassing finite differences.
    """

    n: int
    f: Callable
    param_box: np.ndarray
    orientation: Optional[Callable] = None
    jet: Optional[Callable] = None
    name: str = "patch"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "param_box", np.asarray(self.param_box, dtype=float).reshape(self.n, 2))

    @property
    def step(self):
        return FD_STEP2 * float(np.max(self.param_box[:, 1] - self.param_box[:, 0]))

    def derivatives(self, t):
        """Point, Jacobian ``J[:, a]`` and second derivatives ``D2[:, a, b]``."""
        t = np.asarray(t, dtype=float)
        if self.jet is not None:
            x, J, D2 = self.jet(t)
            return np.asarray(x, float), np.asarray(J, float), np.asarray(D2, float)
        n, h = self.n, self.step
        f0 = np.asarray(self.f(t), dtype=float)
        m = f0.size
        J = np.empty((m, n))
        D2 = np.empty((m, n, n))
        for a in range(n):
            ea = np.zeros(n)
            ea[a] = h
            fp, fm = np.asarray(self.f(t + ea)), np.asarray(self.f(t - ea))
            J[:, a] = (fp - fm) / (2 * h)
            D2[:, a, a] = (fp - 2 * f0 + fm) / h**2
            for b in range(a + 1, n):
                eb = np.zeros(n)
                eb[b] = h
                v = (
                    np.asarray(self.f(t + ea + eb)) - np.asarray(self.f(t + ea - eb))
                    - np.asarray(self.f(t - ea + eb)) + np.asarray(self.f(t - ea - eb))
                ) / (4 * h**2)
                D2[:, a, b] = D2[:, b, a] = v
        return f0, J, D2

    def grid(self, resolution):
        """Interior parameter points, ``resolution`` per axis."""
        margin = 2 * self.step
        axes = [np.linspace(lo + margin, hi - margin, resolution) for lo, hi in self.param_box]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)


@dataclass(frozen=True)
class ShapeData:
    point: np.ndarray
    tangents: np.ndarray
    normal: np.ndarray
    first_form: np.ndarray
    second_form: np.ndarray
    H: float


def _unit_normal(gx, J):
    """Modified Gram-Schmidt in the g-inner product against the tangent columns."""
    m, n = J.shape
    q = []
    for a in range(n):
        w = J[:, a].copy()
        for _ in range(2):
            for v in q:
                w -= (v @ gx @ w) * v
        q.append(w / np.sqrt(w @ gx @ w))
    best, best_norm = None, -1.0
    for k in range(m):
        w = np.zeros(m)
        w[k] = 1.0
        for _ in range(2):
            for v in q:
                w -= (v @ gx @ w) * v
        nrm = np.sqrt(max(w @ gx @ w, 0.0))
        if nrm > best_norm:
            best, best_norm = w, nrm
    return best / best_norm


def shape_data(metric, patch, t):
    """First and second fundamental forms and mean curvature at parameter ``t``.

    ``h_ab = g(D_{df_a} df_b, nu)`` with the ambient Levi-Civita connection;
    ``H = trace(I^-1 h) / n``.
    """
    x, J, D2 = patch.derivatives(t)
    if x.size != metric.dim or J.shape[1] != patch.n or metric.dim != patch.n + 1:
        raise DimensionMismatchError(
            f"patch of dimension {patch.n} into a {metric.dim}-dimensional chart"
        )
    metric.require(x)
    gx = metric.at(x)
    first = J.T @ gx @ J
    ev = np.linalg.eigvalsh(first)
    if ev[0] <= RANK_TOL * max(1.0, ev[-1]):
        raise ImmersionError(f"patch {patch.name} is not immersive at t={np.asarray(t).tolist()}")
    nu = _unit_normal(gx, J)
    if patch.orientation is not None:
        if nu @ gx @ np.asarray(patch.orientation(np.asarray(t, float)), float) < 0:
            nu = -nu
    elif np.linalg.det(np.column_stack([nu, J])) < 0:
        nu = -nu
    gam = christoffel_from(gx, metric.derivatives(x))
    cov = D2 + np.einsum("ijk,ja,kb->iab", gam, J, J)
    h = np.einsum("iab,ij,j->ab", cov, gx, nu)
    h = 0.5 * (h + h.T)
    H = float(np.trace(np.linalg.solve(first, h)) / patch.n)
    return ShapeData(x, J, nu, first, h, H)


def _param_points(patch, grid):
    if np.isscalar(grid):
        return patch.grid(int(grid))
    return np.atleast_2d(np.asarray(grid, dtype=float))


def soliton_residuals(metric, X, patch, grid=9):
    """``|SIGMA * H + g(X(f), nu)|`` at each parameter point of ``grid``."""
    pts = _param_points(patch, grid)
    out = np.empty(len(pts))
    for i, t in enumerate(pts):
        sd = shape_data(metric, patch, t)
        out[i] = abs(SIGMA * sd.H + float(X(sd.point) @ metric.at(sd.point) @ sd.normal))
    return out


def soliton_residual(metric, X, patch, grid=9):
    """Sup over the grid of the soliton defect."""
    return float(np.max(soliton_residuals(metric, X, patch, grid)))


def conformal_mean_curvature(metric, u, patch, t):
    """Mean curvature of ``patch`` recomputed from scratch in ``exp(-2u) g``."""
    return shape_data(conformal_rescale(metric, u), patch, t).H


# -- patch presets ------------------------------------------------------------


def _sphere_coords(angles):
    """Hyperspherical unit vector from ``len(angles)`` angles (last one azimuthal)."""
    k = len(angles)
    out = np.empty(k + 1)
    s = 1.0
    for i, a in enumerate(angles):
        out[i] = s * np.cos(a)
        s *= np.sin(a)
    out[k] = s
    return out


def sphere(dim=3, radius=1.0, center=None, param_box=None):
    """Round sphere of ``radius`` in a ``dim``-dimensional chart, outward normal."""
    n = dim - 1
    c = np.zeros(dim) if center is None else np.asarray(center, dtype=float)
    if param_box is None:
        param_box = [[0.3, np.pi - 0.3]] * (n - 1) + [[-2.8, 2.8]]

    def f(t):
        return c + radius * _sphere_coords(t)

    return ImmersedPatch(
        n, f, param_box, orientation=lambda t: f(t) - c, name=f"sphere(r={radius:g})"
    )


def plane(point, basis, extent=1.0):
    """Affine plane ``point + sum t_a basis_a`` over ``[-extent, extent]^n``."""
    p0 = np.asarray(point, dtype=float)
    B = np.atleast_2d(np.asarray(basis, dtype=float))
    n = B.shape[0]
    return ImmersedPatch(n, lambda t: p0 + t @ B, [[-extent, extent]] * n, name="plane")


def cylinder(dim=3, radius=1.0, height=1.0):
    """``S^1(radius) x R^(dim-2)`` around the last ``dim - 2`` axes, outward normal."""
    n = dim - 1

    def f(t):
        return np.concatenate([[radius * np.cos(t[0]), radius * np.sin(t[0])], t[1:]])

    def ref(t):
        return np.concatenate([[np.cos(t[0]), np.sin(t[0])], np.zeros(n - 1)])

    box = [[-2.8, 2.8]] + [[-height, height]] * (n - 1)
    return ImmersedPatch(n, f, box, orientation=ref, name=f"cylinder(r={radius:g})")


def graph(fn, param_box, name="graph"):
    """Graph ``x_{n+1} = fn(t)`` over the parameter box, normal with positive last component."""
    box = np.asarray(param_box, dtype=float)
    n = box.shape[0]

    def ref(t):
        e = np.zeros(n + 1)
        e[-1] = 1.0
        return e

    return ImmersedPatch(
        n, lambda t: np.concatenate([t, [fn(t)]]), box, orientation=ref, name=name
    )


def grim_reaper_cylinder(dim=3, width=1.4, height=1.0):
    """Grim reaper ``(x, -log cos x)`` times ``R^(dim-2)``.

    Its mean curvature is the curve's curvature divided by ``n = dim - 1``,
    so it is a soliton for the translation field of speed ``1/n`` returned by
    :func:`grim_reaper_cylinder_speed`.
    """
    n = dim - 1

    def f(t):
        return np.concatenate([[t[0], -np.log(np.cos(t[0]))], t[1:]])

    def ref(t):
        return np.concatenate([[-np.sin(t[0]), -np.cos(t[0])], np.zeros(n - 1)])

    box = [[-width, width]] + [[-height, height]] * (n - 1)
    return ImmersedPatch(n, f, box, orientation=ref, name="grim-reaper-cylinder")


def grim_reaper_cylinder_speed(dim=3):
    """Translation speed (along ``-e_2``) making :func:`grim_reaper_cylinder` a soliton."""
    return 1.0 / (dim - 1)


PATCH_PRESETS = {
    "sphere": sphere,
    "cylinder": cylinder,
    "plane": lambda dim=3, **kw: plane(np.zeros(dim), np.eye(dim)[: dim - 1], **kw),
    "grim-reaper-cylinder": grim_reaper_cylinder,
}


# -- rotationally symmetric solitons -----------------------------------------


@dataclass
class Profile:
    """Profile curve ``(r(s), z(s))`` with tangent angle ``alpha(s)``."""

    s: np.ndarray
    r: np.ndarray
    z: np.ndarray
    alpha: np.ndarray
    n: int
    partial: bool = False


def _profile_field(X, n):
    """Components ``(X_r, X_z)`` of an axially symmetric field in the profile half-plane."""

    def comps(r, z):
        p = np.zeros(n + 1)
        p[0], p[-1] = r, z
        v = X(p)
        if n > 1 and np.max(np.abs(v[1:-1])) > 1e-12 * max(1.0, np.max(np.abs(v))):
            raise RefusalError(f"field {X.name} is not axially symmetric about the last axis")
        return v[0], v[-1]

    return comps


def _profile_rhs(X, n):
    comps = _profile_field(X, n)

    def rhs(s, y):
        r, z, a = y
        xr, xz = comps(r, z)
        xnu = xr * np.sin(a) - xz * np.cos(a)
        return np.array([np.cos(a), np.sin(a), -(n - 1) * np.sin(a) / r + n * xnu / SIGMA])

    return rhs


def _angle_jet(phi):
    """Unit vector in R^n from n-1 angles with first and second derivatives."""
    k = len(phi)
    if k == 1:
        c, s = np.cos(phi[0]), np.sin(phi[0])
        return np.array([c, s]), np.array([[-s], [c]]), np.array([[[-c]], [[-s]]])
    if k == 2:
        c1, s1, c2, s2 = np.cos(phi[0]), np.sin(phi[0]), np.cos(phi[1]), np.sin(phi[1])
        w = np.array([c1, s1 * c2, s1 * s2])
        dw = np.array([[-s1, 0.0], [c1 * c2, -s1 * s2], [c1 * s2, s1 * c2]])
        d2 = np.array([
            [[-c1, 0.0], [0.0, 0.0]],
            [[-s1 * c2, -c1 * s2], [-c1 * s2, -s1 * c2]],
            [[-s1 * s2, c1 * c2], [c1 * c2, -s1 * s2]],
        ])
        return w, dw, d2
    raise UnsupportedDimensionError("rotational profiles support n = 2 or 3")


def rotational_profile(X, n, initial, length, tol=1e-9, axis_margin=1e-3):
    """Integrate the profile of a rotationally symmetric X-soliton in Euclidean R^(n+1).

    The axis of symmetry is the last coordinate; ``initial = (r, z, alpha)``
    with ``alpha`` the angle of the profile tangent in the ``(r, z)`` plane.
    The normal is the tangent rotated by -90 degrees.  Returns the profile and
    the reconstructed patch over ``(s, angles)``.
    """
    if n not in (2, 3):
        raise UnsupportedDimensionError("rotational profiles support n = 2 or 3")
    if X.dim != n + 1:
        raise DimensionMismatchError("field dimension must be n + 1")
    rhs = _profile_rhs(X, n)
    sol = dopri5(
        rhs, (0.0, length), np.asarray(initial, dtype=float), rtol=tol, atol=tol * 1e-3,
        inside=lambda y: y[0] > axis_margin,
    )
    prof = Profile(sol.t, sol.y[:, 0], sol.y[:, 1], sol.y[:, 2], n, partial=sol.exited)
    if sol.exited:
        raise CoordinateSingularityError(
            f"profile reached the axis margin at s={sol.t[-1]:.6g}", prof
        )

    def state(s):
        i = int(np.clip(np.searchsorted(prof.s, s), 0, len(prof.s) - 1))
        if i > 0 and abs(prof.s[i - 1] - s) < abs(prof.s[i] - s):
            i -= 1
        y0 = np.array([prof.r[i], prof.z[i], prof.alpha[i]])
        if prof.s[i] == s:
            return y0
        return dopri5(rhs, (prof.s[i], s), y0, rtol=tol, atol=tol * 1e-3).y[-1]

    def jet(t):
        r, z, a = state(t[0])
        da = rhs(t[0], np.array([r, z, a]))[2]
        w, dw, d2w = _angle_jet(t[1:])
        m = n + 1
        x = np.concatenate([r * w, [z]])
        J = np.zeros((m, n))
        D2 = np.zeros((m, n, n))
        J[:n, 0], J[n, 0] = np.cos(a) * w, np.sin(a)
        J[:n, 1:] = r * dw
        D2[:n, 0, 0], D2[n, 0, 0] = -np.sin(a) * da * w, np.cos(a) * da
        D2[:n, 0, 1:] = np.cos(a) * dw
        D2[:n, 1:, 0] = np.cos(a) * dw
        D2[:n, 1:, 1:] = r * d2w
        return x, J, D2

    def f(t):
        return jet(t)[0]

    def ref(t):
        a = state(t[0])[2]
        w = _angle_jet(t[1:])[0]
        return np.concatenate([np.sin(a) * w, [-np.cos(a)]])

    ang = [[-2.8, 2.8]] if n == 2 else [[0.3, np.pi - 0.3], [-2.8, 2.8]]
    patch = ImmersedPatch(
        n, f, [[prof.s[0], prof.s[-1]]] + ang, orientation=ref, jet=jet,
        name=f"rotational[{X.name}]",
    )
    return prof, patch


def profile_patch_from_samples(r, z, n=2):
    """Surface of revolution through sampled profile points (e.g. a profile CSV).

    Uses a cubic spline in the sample index; curvatures then come from
    finite differences.
    """
    from scipy.interpolate import CubicSpline

    r = np.asarray(r, dtype=float)
    z = np.asarray(z, dtype=float)
    seg = np.hypot(np.diff(r), np.diff(z))
    s = np.concatenate([[0.0], np.cumsum(seg)])
    cr, cz = CubicSpline(s, r), CubicSpline(s, z)

    def f(t):
        w = _angle_jet(t[1:])[0]
        return np.concatenate([cr(t[0]) * w, [cz(t[0])]])

    def ref(t):
        w = _angle_jet(t[1:])[0]
        return np.concatenate([cz(t[0], 1) * w, [-cr(t[0], 1)]])

    ang = [[-2.8, 2.8]] if n == 2 else [[0.3, np.pi - 0.3], [-2.8, 2.8]]
    return ImmersedPatch(n, f, [[s[0], s[-1]]] + ang, orientation=ref, name="profile-csv")


def euclidean_space(dim):
    return euclidean(dim)
