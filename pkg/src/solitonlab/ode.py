"""Adaptive Dormand-Prince 5(4) integrator.

Kept in-house rather than delegating to ``scipy.integrate.solve_ivp`` because
the geometric integrators need a projection hook after every accepted step
(unit-tangent renormalisation) and a clean stop at the chart boundary that
keeps the last good state.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, StiffnessError

# Dormand & Prince (1980) coefficients
C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
E = B5 - B4

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0


@dataclass
class Solution:
    t: np.ndarray
    y: np.ndarray
    status: str  # "done" or "exit"
    message: str = ""

    @property
    def exited(self):
        return self.status == "exit"


def _error_norm(err, y0, y1, rtol, atol):
    scale = atol + rtol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def _initial_step(rhs, t0, y0, f0, direction, rtol, atol):
    scale = atol + rtol * np.abs(y0)
    d0 = np.sqrt(np.mean((y0 / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    try:
        f1 = rhs(t0 + direction * h0, y0 + direction * h0 * f0)
    except DomainError:
        return h0
    d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1)


def dopri5(
    rhs,
    t_span,
    y0,
    rtol=1e-9,
    atol=1e-12,
    max_step=np.inf,
    inside=None,
    project=None,
    first_step=None,
    max_steps=1_000_000,
):
    """Integrate ``y' = rhs(t, y)`` over ``t_span = (t0, t1)``.

    ``inside(y)`` marks admissible states; a step that would leave the
    admissible set (or a ``DomainError`` raised by ``rhs``) is retried with a
    smaller step, and once the step shrinks below resolution the run stops
    with ``status="exit"`` at the last admissible state.  ``project(y)`` is
    applied to every accepted state.  ``first_step`` overrides the automatic
    initial step guess.

    Every accepted step is stored.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    y = np.array(y0, dtype=float)
    if project is not None:
        y = project(y)
    ts = [t0]
    ys = [y.copy()]
    if t1 == t0:
        return Solution(np.array(ts), np.array(ys), "done")
    direction = 1.0 if t1 > t0 else -1.0
    span = abs(t1 - t0)
    min_step = 1e-13 * max(1.0, abs(t0), abs(t1))
    boundary_step = 1e-10 * max(1.0, span)

    t = t0
    f = rhs(t, y)
    if first_step is None:
        first_step = _initial_step(rhs, t, y, f, direction, rtol, atol)
    h = min(first_step, max_step, span)
    near_boundary = False

    for _ in range(max_steps):
        if direction * (t1 - t) <= 0:
            break
        remaining = abs(t1 - t)
        h = min(h, max_step, remaining)
        last = h >= remaining
        if last:
            h = remaining
        elif remaining < 1.5 * h:
            # split the tail evenly instead of ending on a sliver step
            h = 0.5 * remaining
        k = np.empty((7, y.size))
        k[0] = f
        left = False
        try:
            # overflowing trial steps are rejected through a non-finite error norm
            with np.errstate(over="ignore", invalid="ignore"):
                for s in range(1, 7):
                    ys_ = y + direction * h * (np.asarray(A[s]) @ k[:s])
                    k[s] = rhs(t + direction * C[s] * h, ys_)
                y_new = y + direction * h * (B5 @ k)
                err = _error_norm(direction * h * (E @ k), y, y_new, rtol, atol)
            if not np.isfinite(err):
                err = np.inf
            elif inside is not None and not inside(y_new):
                left = True
        except DomainError:
            left = True
        if left:
            near_boundary = True
            if h < boundary_step:
                return Solution(np.array(ts), np.array(ys), "exit", "left the chart domain")
            h *= 0.25
            continue

        if err <= 1.0:
            t_new = t1 if last else t + direction * h
            f_new = k[6]
            if project is not None:
                # the projection moves y by roughly the local error, so the
                # FSAL stage stays accurate enough to reuse
                y_new = project(y_new)
            t, y, f = t_new, y_new, f_new
            ts.append(t)
            ys.append(y.copy())
            factor = MAX_FACTOR if err == 0 else min(MAX_FACTOR, SAFETY * err ** -0.2)
            if near_boundary:
                factor = min(factor, 1.0)
                near_boundary = False
            h *= factor
        else:
            h *= max(MIN_FACTOR, SAFETY * err ** -0.2)
            if h < min_step:
                raise StiffnessError(f"step size underflow at t={t:.17g}", t, y.copy())
    else:
        raise StiffnessError(f"exceeded {max_steps} steps at t={t:.17g}", t, y.copy())
    return Solution(np.array(ts), np.array(ys), "done")
