"""Numerical toolkit for mean-curvature-flow solitons on Riemannian charts."""

from .chart import (
    ConformalFactor,
    MetricChart,
    christoffel,
    conformal_rescale,
    gauss_curvature,
    metric_preset,
)
from .curves import (
    SIGMA,
    CurveState,
    SolitonCurve,
    count_intersections,
    integrate_soliton,
    integrate_soliton_both_ways,
    measured_soliton_residual,
    stationarity_check,
)
from .equivalence import Kind, certify_proposition, decide, demonstrate_surface_gap
from .errors import *  # noqa: F401,F403
from .fields import VectorFieldSpec, closedness_test, field_preset, flat, recover_potential, sharp
from .hypersurfaces import ImmersedPatch, rotational_profile, shape_data, soliton_residual
from .weyl import integrate_weyl_geodesic, soliton_connection, unparam_residual, weyl_connection

__version__ = "0.1.0"
