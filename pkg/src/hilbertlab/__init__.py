"""Numerical laboratory for Hilbert geometries on bounded convex bodies.

Distances, Finsler norms, the canonical measure, horoballs, separated nets
with proximity graphs, random-walk spectra, and empirical amenability
indicators, over polytopes, ellipsoids, superellipses, and user-supplied
convex functions.
"""

from .backend import BACKEND, set_workers
from .body import (ConvexBody, body_from_spec, make_ball, make_ellipsoid,
                   make_polygon, make_regular_polygon, make_simplex,
                   make_sublevel, make_superellipse, projective_transform)
from .errors import ConvergenceError
from .measure import (GrowthCurve, MeasureEstimate, ball_measure, curve_length,
                      density, folner_ratio, growth_curve, measure, omega,
                      radial_shells, sphere_area_sandwich_check,
                      unit_ball_volume)
from .metric import (BallSpec, HoroballSpec, ball_boundary_polyline,
                     ball_contains, busemann, cross_ratio, distance,
                     finsler_dual_norm, finsler_norm, horoball_contains,
                     horosphere_polyline, metric_ball_radial)
from .nets import (DiscretizationGraph, Net, build_graph, build_net,
                   cardinality_bound_check, certify_net,
                   export_graph_adjacency, export_graph_dot, export_net_csv,
                   graph_distance, quasi_isometry_report)
from .spectral import (MarkovSystem, RayleighReport, SpectralReport,
                       amenability_verdict, cheeger_graph_exact,
                       cheeger_graph_sweep, dirichlet_by_radius,
                       inverse_cheeger_check, lambda1_upper_estimate,
                       markov_system, rayleigh_quotient,
                       return_probability_rho, smoothing, spectral_radius)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
