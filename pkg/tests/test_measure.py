"""Measure-layer oracles: densities against polygon unit-ball areas from an
independent halfspace-intersection construction, ball volumes against
closed forms, growth fits and boundary/volume ratios."""

import math

import numpy as np
import pytest
from scipy.spatial import ConvexHull, HalfspaceIntersection

from hilbertlab.body import (body_from_spec, make_ball, make_ellipsoid,
                             make_polygon, make_regular_polygon)
from hilbertlab.measure import (ball_measure, curve_length, density,
                                folner_ratio, growth_curve, omega,
                                radial_shells, sphere_area_sandwich_check,
                                unit_ball_volume)
from hilbertlab.metric import BallSpec, ball_boundary_polyline

DISK = make_ball(2)
TRI = make_regular_polygon(3, name="triangle")
HEX = make_regular_polygon(6, name="hexagon")
SQUARE = make_polygon([(1, 1), (-1, 1), (-1, -1), (1, -1)])
ORIGIN = np.zeros(2)


def _polygon_unit_ball_area(body, p):
    """Independent construction of the Finsler unit ball at p: halfspace
    intersection of <(g_i - g_j)/2, w> <= 1 resolved by qhull."""
    slack = body.v - body.M @ p
    g = body.M / slack[:, None]
    C = 0.5 * (g[:, None, :] - g[None, :, :]).reshape(-1, 2)
    C = C[np.linalg.norm(C, axis=1) > 1e-300]
    halfspaces = np.hstack([C, -np.ones((len(C), 1))])
    hs = HalfspaceIntersection(halfspaces, np.zeros(2))
    return ConvexHull(hs.intersections).volume


def test_omega_closed_forms():
    assert omega(1) == pytest.approx(2.0, abs=1e-15)
    assert omega(2) == pytest.approx(math.pi, abs=1e-15)
    assert omega(3) == pytest.approx(4.0 * math.pi / 3.0, abs=1e-15)


def test_density_disk_closed_form():
    for r in (0.0, 0.3, 0.6, 0.9):
        expected = (1.0 - r * r) ** -1.5
        assert density(DISK, np.array([r, 0.0])) == \
            pytest.approx(expected, rel=1e-9)


def test_unit_ball_volume_disk():
    assert unit_ball_volume(DISK, ORIGIN) == pytest.approx(math.pi, rel=1e-12)
    vol = unit_ball_volume(DISK, np.array([0.5, 0.0]))
    assert vol == pytest.approx(math.pi * 0.75 ** 1.5, rel=1e-9)


def test_density_square_center_exact():
    # centered unit ball of the square is the square itself, area 4
    assert density(SQUARE, ORIGIN) == pytest.approx(math.pi / 4.0, abs=1e-12)


def test_polygon_density_matches_halfspace_oracle():
    rng = np.random.default_rng(2)
    for body in (TRI, HEX, SQUARE):
        pts = []
        while len(pts) < 8:
            cand = rng.random(2) * 2 - 1
            if body.contains(0.9 * cand):
                pts.append(0.9 * cand)
        for p in pts:
            oracle = math.pi / _polygon_unit_ball_area(body, p)
            assert density(body, p) == pytest.approx(oracle, rel=1e-9)


def test_polygon_density_near_corner_and_edge():
    # eccentric unit balls that defeat uniform direction grids
    corner = (1.0 - 1e-6) * np.array([0.0, 1.0])  # triangle vertex
    edge = np.array([0.0, -0.5 + 1e-5])  # mid-edge of the triangle
    for p in (corner, edge):
        oracle = math.pi / _polygon_unit_ball_area(TRI, p)
        assert density(TRI, p) == pytest.approx(oracle, rel=1e-8)


def test_disk_ball_measure_hyperbolic():
    for R in (1.0, 3.0, 6.0):
        est = ball_measure(DISK, ORIGIN, R)
        truth = 2.0 * math.pi * (math.cosh(R) - 1.0)
        assert est.value == pytest.approx(truth, rel=1e-3)
        assert est.std_error < 0.01 * truth


def test_disk_ball_measure_is_center_independent():
    est = ball_measure(DISK, np.array([0.3, 0.1]), 1.5)
    assert est.value == pytest.approx(2 * math.pi * (math.cosh(1.5) - 1),
                                      rel=1e-3)


def test_ellipsoid_ball_measure_matches_disk():
    ell = make_ellipsoid(np.diag([1.0, 4.0]))
    est = ball_measure(ell, ORIGIN, 2.0)
    assert est.value == pytest.approx(2 * math.pi * (math.cosh(2.0) - 1),
                                      rel=1e-3)


def test_triangle_ball_measure_is_quadratic():
    # simplex geometry is isometric to a normed plane, so balls measure
    # exactly pi R^2 under the volume normalization used here
    for R in (3.0, 6.0):
        est = ball_measure(TRI, ORIGIN, R)
        assert est.value == pytest.approx(math.pi * R * R, rel=1e-3)


def test_monte_carlo_agrees_with_quadrature():
    quad = ball_measure(HEX, ORIGIN, 2.0)
    mc = ball_measure(HEX, ORIGIN, 2.0, method="monte_carlo",
                      n_samples=200_000, seed=3)
    assert abs(mc.value - quad.value) <= 4 * mc.std_error + 0.01 * quad.value


def test_radial_shells_disk_closed_form():
    t, s = radial_shells(DISK, ORIGIN, 3.0)
    assert np.allclose(s, 2.0 * math.pi * np.sinh(t), rtol=1e-9)


def test_curve_length_disk_circumference():
    poly = ball_boundary_polyline(DISK, BallSpec(ORIGIN, 2.0), 4096)
    assert curve_length(DISK, poly) == \
        pytest.approx(2 * math.pi * math.sinh(2.0), rel=5e-4)


def test_growth_curve_classifications():
    radii = np.linspace(5.0, 15.0, 11)
    gt = growth_curve(TRI, ORIGIN, radii)
    assert gt.classification == "polynomial"
    assert gt.fit_poly_exponent == pytest.approx(2.0, abs=0.1)
    gd = growth_curve(DISK, ORIGIN, radii)
    assert gd.classification == "exponential"
    assert gd.fit_exp_rate == pytest.approx(1.0, abs=0.05)


def test_folner_ratio_oracles():
    # disk: boundary/area = sinh R / (cosh R - 1) = coth(R/2)
    got = folner_ratio(DISK, ORIGIN, 8.0)
    assert got == pytest.approx(1.0 / math.tanh(4.0), rel=0.01)
    # triangle: 6R boundary over pi R^2 area
    got = folner_ratio(TRI, ORIGIN, 10.0)
    assert got == pytest.approx(6.0 / (math.pi * 10.0), rel=0.01)


def test_sphere_length_spread_is_bounded():
    centers = 0.3 * np.stack([np.cos(np.arange(6) * np.pi / 3),
                              np.sin(np.arange(6) * np.pi / 3)], 1)
    rep = sphere_area_sandwich_check(DISK, centers, 1.0)
    assert rep["within_cap"]
    assert rep["ratio"] == pytest.approx(1.0, abs=0.05)


def test_superellipse_ball_measure_is_finite_and_growing():
    se = body_from_spec("superellipse")
    small = ball_measure(se, ORIGIN, 1.0, m_dir=256)
    big = ball_measure(se, ORIGIN, 2.0, m_dir=256)
    assert 0 < small.value < big.value < np.inf
