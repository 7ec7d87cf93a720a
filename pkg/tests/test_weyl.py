import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from solitonlab import chart, fields
from solitonlab.chart import ConformalFactor, christoffel, conformal_rescale
from solitonlab.curves import CurveState, integrate_soliton
from solitonlab.equivalence import RESIDUAL_STEP
from solitonlab.errors import DimensionMismatchError
from solitonlab.fields import VectorFieldSpec
from solitonlab.weyl import (
    integrate_weyl_geodesic,
    levi_civita,
    soliton_connection,
    unparam_residual,
    weyl_apply,
    weyl_connection,
)

PLANE = chart.euclidean(2)


def test_zero_field_flat_apply_vanishes():
    conn = weyl_connection(PLANE, fields.zero(2))
    assert np.all(weyl_apply(conn, [0.3, 0.2], [1.0, 2.0], [-3.0, 0.5]) == 0.0)


def test_apply_hand_example():
    conn = weyl_connection(PLANE, fields.rotation(2))
    # -g(v,w) X + g(X,v) w + g(X,w) v with X(1,0) = (0,1), v = w = (1,0)
    assert np.allclose(weyl_apply(conn, [1.0, 0.0], [1.0, 0.0], [1.0, 0.0]), [0.0, -1.0])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=4, max_size=4))
def test_apply_symmetric(vw):
    conn = weyl_connection(chart.sphere_stereographic(2), fields.rotation(2))
    v, w = np.array(vw[:2]), np.array(vw[2:])
    x = [0.4, -0.3]
    assert np.allclose(weyl_apply(conn, x, v, w), weyl_apply(conn, x, w, v), atol=1e-10)


def test_zero_field_reduces_to_christoffel():
    m = chart.sphere_stereographic(3)
    x = np.array([0.2, -0.5, 0.1])
    assert np.allclose(levi_civita(m).coefficients(x), christoffel(m, x), atol=1e-14)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        weyl_connection(PLANE, fields.rotation(3))


def test_flat_zero_field_straight_line():
    geo = integrate_weyl_geodesic(levi_civita(PLANE), [0.5, 0.5], [1.0, -2.0], 1.5)
    assert np.allclose(geo.x[-1], [2.0, -2.5], atol=1e-10)


def test_great_circle_through_origin():
    m = chart.sphere_stereographic(2)
    v = np.array([0.6, 0.8])
    geo = integrate_weyl_geodesic(levi_civita(m), [0.0, 0.0], v, 1.2)
    # g-speed is 2|v|; the point at angle theta from the south pole has chart radius tan(theta/2)
    for t, x in zip(geo.t, geo.x):
        expected = np.tan(np.linalg.norm(v) * t) * v / np.linalg.norm(v)
        assert np.allclose(x, expected, atol=1e-6)


def test_great_circle_off_origin_lies_in_a_plane():
    m = chart.sphere_stereographic(2)
    geo = integrate_weyl_geodesic(levi_civita(m), [0.3, -0.2], [0.4, 1.0], 2.0)
    x = geo.x
    r2 = np.sum(x**2, axis=1)
    P = np.column_stack([2 * x, r2 - 1]) / (1 + r2)[:, None]
    assert np.linalg.svd(P, compute_uv=False)[-1] < 1e-8


def test_radial_field_keeps_ray():
    geo = integrate_weyl_geodesic(weyl_connection(PLANE, fields.radial(2)), [1.0, 0.0], [1.0, 0.0], 0.4)
    assert np.max(np.abs(geo.x[:, 1])) == 0.0


def test_geodesic_fed_back_has_small_residual():
    conn = weyl_connection(chart.sphere_stereographic(2), fields.rotation(2).scaled(0.5))
    # stays within |x| < 2, where the chart stretch keeps the stencil error small
    geo = integrate_weyl_geodesic(conn, [0.2, 0.1], [1.0, 0.3], 1.0, max_step=0.01)
    assert not geo.partial
    assert unparam_residual(conn, geo).sup <= 1e-6


def test_straight_line_levi_civita_residual_zero():
    t = np.linspace(0, 1, 50)
    pts = np.column_stack([t, 2 * t + 1])
    assert unparam_residual(levi_civita(PLANE), (t, pts)).sup < 1e-12


def test_yinyang_is_unparametrised_weyl_geodesic():
    rot = fields.rotation(2)
    c = integrate_soliton(PLANE, rot, CurveState.from_direction(PLANE, [1, 0], [0, 1]), 6.0, max_step=RESIDUAL_STEP)
    assert unparam_residual(soliton_connection(PLANE, rot), c).sup <= 1e-5
    # with the opposite sign of the field the curve is far from a geodesic
    assert unparam_residual(weyl_connection(PLANE, rot), c).sup > 0.1


def test_residual_reparametrisation_invariant():
    rot = fields.rotation(2)
    conn = soliton_connection(PLANE, rot)
    c = integrate_soliton(PLANE, rot, CurveState.from_direction(PLANE, [1, 0], [0, 1]), 3.0, max_step=RESIDUAL_STEP)
    s = c.s
    tau = s + 0.3 * s**2
    a = unparam_residual(conn, (s, c.x)).sup
    b = unparam_residual(conn, (tau, c.x)).sup
    assert a <= 1e-5 and b <= 1e-5


def test_soliton_connection_of_gradient_is_rescaled_levi_civita():
    base = chart.sphere_stereographic(2)
    u = ConformalFactor(lambda p: 0.3 * p[0] - p[1] ** 2, lambda p: np.array([0.3, -2 * p[1]]))
    grad = VectorFieldSpec(2, lambda p: np.linalg.solve(base.at(p), u.gradient(p)))
    x = np.array([0.4, 0.7])
    lhs = soliton_connection(base, grad).coefficients(x)
    rhs = christoffel(conformal_rescale(base, u), x)
    assert np.allclose(lhs, rhs, atol=1e-12)
