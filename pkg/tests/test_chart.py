import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from solitonlab import chart
from solitonlab.chart import (
    ConformalFactor,
    MetricChart,
    christoffel,
    conformal_rescale,
    gauss_curvature,
    inner,
    norm,
)
from solitonlab.errors import DegenerateMetricError, DomainError, UnsupportedDimensionError


def _fd_only(metric):
    """Same metric with the analytic derivative removed."""
    return MetricChart(metric.dim, metric.domain, metric.g, name=metric.name + "-fd")


def test_euclidean_christoffel_vanishes():
    m = chart.euclidean(3)
    assert np.all(christoffel(m, [0.3, -1.2, 4.0]) == 0.0)


@pytest.mark.parametrize("analytic", [True, False])
def test_polar_christoffel(analytic):
    m = chart.polar()
    m = m if analytic else _fd_only(m)
    G = christoffel(m, [2.0, 0.4])
    expected = np.zeros((2, 2, 2))
    # Koszul by hand for diag(1, r^2): Gamma^r_tt = -r, Gamma^t_rt = Gamma^t_tr = 1/r
    expected[0, 1, 1] = -2.0
    expected[1, 0, 1] = expected[1, 1, 0] = 0.5
    assert np.allclose(G, expected, atol=1e-12 if analytic else 1e-8)


@pytest.mark.parametrize("analytic", [True, False])
def test_half_plane_christoffel(analytic):
    m = chart.half_plane()
    m = m if analytic else _fd_only(m)
    G = christoffel(m, [0.0, 1.0])
    expected = np.zeros((2, 2, 2))
    expected[0, 0, 1] = expected[0, 1, 0] = -1.0
    expected[1, 0, 0] = 1.0
    expected[1, 1, 1] = -1.0
    assert np.allclose(G, expected, atol=1e-12 if analytic else 1e-8)


def test_christoffel_symmetric_in_lower_indices():
    G = christoffel(chart.sphere_stereographic(2), [0.7, -0.4])
    assert np.allclose(G, G.transpose(0, 2, 1), atol=1e-14)


def test_gauss_curvature_examples():
    assert abs(gauss_curvature(chart.euclidean(2), [3.0, -1.0])) < 1e-8
    assert abs(gauss_curvature(chart.half_plane(), [0.0, 1.0]) + 1.0) < 1e-6
    assert abs(gauss_curvature(chart.sphere_stereographic(2), [0.3, -0.2]) - 1.0) < 1e-6


def test_gauss_curvature_without_analytic_derivatives():
    m = _fd_only(chart.sphere_stereographic(2))
    assert abs(gauss_curvature(m, [0.3, -0.2]) - 1.0) < 1e-4


def test_gauss_curvature_of_conformal_plane():
    # exp(2v) * delta has K = -exp(-2v) * laplacian(v); with v = x^2 + y^2 that is -4 exp(-2v)
    m = MetricChart(2, [[-2, 2], [-2, 2]], lambda x: np.exp(2 * (x @ x)) * np.eye(2))
    x = np.array([0.3, 0.1])
    assert abs(gauss_curvature(m, x) + 4.0 * np.exp(-2 * (x @ x))) < 1e-5


def test_gauss_curvature_needs_dimension_two():
    with pytest.raises(UnsupportedDimensionError):
        gauss_curvature(chart.euclidean(3), [0, 0, 0])


def test_rescale_examples():
    e = chart.euclidean(2)
    zero = ConformalFactor(lambda p: 0.0, lambda p: np.zeros(2))
    assert np.array_equal(conformal_rescale(e, zero).at([0.4, 0.2]), np.eye(2))
    lin = ConformalFactor(lambda p: -p[1], lambda p: np.array([0.0, -1.0]))
    assert np.allclose(conformal_rescale(e, lin).at([0.0, 1.0]), np.e**2 * np.eye(2), rtol=1e-14)
    quad = ConformalFactor(lambda p: 0.5 * p @ p)
    assert np.allclose(conformal_rescale(e, quad).at([1.0, 0.0]), np.exp(-1) * np.eye(2), rtol=1e-14)


def test_rescale_derivatives_analytic_vs_fd():
    base = chart.sphere_stereographic(2)
    u = ConformalFactor(lambda p: np.sin(p[0]) * p[1], lambda p: np.array([np.cos(p[0]) * p[1], np.sin(p[0])]))
    analytic = conformal_rescale(base, u)
    fd = _fd_only(analytic)
    x = [0.2, 0.5]
    assert analytic.dg is not None
    assert np.allclose(analytic.derivatives(x), fd.derivatives(x), atol=1e-8)


def test_supplied_dg_matches_finite_differences():
    for m in (chart.polar(), chart.half_plane(), chart.sphere_stereographic(3)):
        x = m.domain.mean(axis=1) * 0.1 + np.array([0.6] + [0.3] * (m.dim - 1))
        assert np.allclose(m.derivatives(x), _fd_only(m).derivatives(x), atol=1e-7)


def test_norm_examples():
    assert norm(chart.euclidean(2), [0, 0], [3, 4]) == pytest.approx(5.0)
    assert norm(chart.half_plane(), [0, 2], [1, 0]) == pytest.approx(0.5)


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.floats(-3, 3), min_size=2, max_size=2),
    st.lists(st.floats(-10, 10), min_size=2, max_size=2),
    st.lists(st.floats(-10, 10), min_size=2, max_size=2),
)
def test_inner_symmetric(x, v, w):
    m = chart.sphere_stereographic(2)
    assert inner(m, x, v, w) == pytest.approx(inner(m, x, w, v), rel=1e-12, abs=1e-300)


def test_metric_checks():
    bad = MetricChart(2, [[-1, 1], [-1, 1]], lambda x: np.array([[1.0, 0.0], [0.0, -1.0]]))
    with pytest.raises(DegenerateMetricError):
        bad.at([0, 0])
    skew = MetricChart(2, [[-1, 1], [-1, 1]], lambda x: np.array([[1.0, 0.1], [0.0, 1.0]]))
    with pytest.raises(DegenerateMetricError):
        skew.at([0, 0])
    with pytest.raises(DomainError):
        christoffel(chart.half_plane(), [0.0, -1.0])


def test_empty_domain_rejected():
    with pytest.raises(ValueError):
        MetricChart(2, [[1, 1], [0, 1]], lambda x: np.eye(2))


def test_presets_by_name():
    assert chart.metric_preset("sphere-stereographic", dim=3).dim == 3
    with pytest.raises(KeyError):
        chart.metric_preset("torus")
    with pytest.raises(UnsupportedDimensionError):
        chart.metric_preset("polar", dim=3)


def test_conformal_factor_gradient_fd():
    u = ConformalFactor(lambda p: p[0] ** 2 * p[1])
    assert np.allclose(u.gradient([1.5, -2.0]), [2 * 1.5 * -2.0, 1.5**2], atol=1e-8)
