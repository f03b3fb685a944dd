"""Metric-layer oracles: cross ratios, closed-form distances, Finsler
norms, Busemann functions and horospheres on bodies where every value
has an independent formula."""

import math

import numpy as np
import pytest

from hilbertlab.body import make_ball, make_ellipsoid, make_polygon, make_regular_polygon
from hilbertlab.metric import (BallSpec, HoroballSpec, ball_boundary_polyline,
                               ball_contains, busemann, cross_ratio, distance,
                               finsler_dual_norm, finsler_norm,
                               horoball_contains, horosphere_polyline,
                               metric_ball_radial)

DISK = make_ball(2)
SQUARE = make_polygon([(1, 1), (-1, 1), (-1, -1), (1, -1)], name="square")
HEX = make_regular_polygon(6)
ORIGIN = np.zeros(2)


def test_cross_ratio_even_spacing():
    a, p, q, b = (np.array([float(t), 0.0]) for t in (0, 1, 2, 3))
    # [a,p,q,b] = (|aq| |pb|) / (|ap| |qb|) = (2*2)/(1*1)
    assert cross_ratio(a, p, q, b) == pytest.approx(4.0, abs=1e-14)


def test_chord_thirds_is_log_two():
    p = np.array([-1.0 / 3.0, 0.0])
    q = np.array([1.0 / 3.0, 0.0])
    assert distance(SQUARE, p, q) == pytest.approx(math.log(2.0), abs=1e-12)


def test_disk_distance_is_artanh():
    for t in (0.1, 0.25, 0.5, 0.75, 0.9):
        d = distance(DISK, ORIGIN, np.array([t, 0.0]))
        assert d == pytest.approx(math.atanh(t), abs=1e-12)
    # direction independence
    d = distance(DISK, ORIGIN, np.array([0.3, 0.4]))
    assert d == pytest.approx(0.5493061443340549, abs=1e-12)


def test_disk_general_pair_matches_chart_formula():
    x = np.array([0.2, 0.1])
    y = np.array([-0.3, 0.4])
    ch = (1.0 - x @ y) / math.sqrt((1.0 - x @ x) * (1.0 - y @ y))
    assert distance(DISK, x, y) == pytest.approx(math.acosh(ch), abs=1e-10)


def test_distance_symmetry_and_triangle_inequality():
    rng = np.random.default_rng(7)
    for _ in range(200):
        p, q, r = 0.8 * (rng.random((3, 2)) * 2 - 1)
        keep = HEX.contains_batch(np.stack([p, q, r]))
        if not keep.all():
            continue
        dpq = distance(HEX, p, q)
        assert dpq == pytest.approx(distance(HEX, q, p), abs=1e-12)
        assert dpq + distance(HEX, q, r) >= distance(HEX, p, r) - 1e-12


def test_distance_rejects_exterior_points():
    with pytest.raises(ValueError):
        distance(DISK, ORIGIN, np.array([1.5, 0.0]))


def test_finsler_norm_disk_closed_form():
    r = 0.5
    p = np.array([r, 0.0])
    assert finsler_norm(DISK, p, np.array([1.0, 0.0])) == \
        pytest.approx(1.0 / (1 - r * r), abs=1e-12)
    assert finsler_norm(DISK, p, np.array([0.0, 1.0])) == \
        pytest.approx(1.0 / math.sqrt(1 - r * r), abs=1e-12)


def test_finsler_norm_square_center():
    assert finsler_norm(SQUARE, ORIGIN, np.array([1.0, 0.0])) == \
        pytest.approx(1.0, abs=1e-12)
    diag = np.array([1.0, 1.0]) / math.sqrt(2.0)
    assert finsler_norm(SQUARE, ORIGIN, diag) == \
        pytest.approx(1.0 / math.sqrt(2.0), abs=1e-12)


def test_finsler_norm_scales_linearly():
    p = np.array([0.2, -0.3])
    v = np.array([0.4, 1.1])
    f1 = finsler_norm(HEX, p, v)
    assert finsler_norm(HEX, p, 2.5 * v) == pytest.approx(2.5 * f1, rel=1e-12)


def test_dual_norm_disk_center_is_euclidean():
    w = np.array([0.6, -0.8])
    # unit Finsler ball at the disk center is the Euclidean disk
    assert finsler_dual_norm(DISK, ORIGIN, w, m_dir=512) == \
        pytest.approx(1.0, rel=5e-4)


def test_dual_norm_pairing_inequality():
    rng = np.random.default_rng(3)
    p = np.array([0.1, 0.2])
    for _ in range(25):
        v = rng.standard_normal(2)
        w = rng.standard_normal(2)
        lhs = abs(w @ v)
        rhs = finsler_dual_norm(HEX, p, w, m_dir=512) * finsler_norm(HEX, p, v)
        assert lhs <= rhs * (1 + 1e-3)


def test_ball_boundary_points_sit_at_radius():
    spec = BallSpec(np.array([0.2, 0.0]), 1.5)
    poly = ball_boundary_polyline(DISK, spec, m=64)
    for x in poly:
        assert distance(DISK, spec.center, x) == pytest.approx(1.5, abs=1e-9)
    assert ball_contains(DISK, spec, np.array([0.2, 0.1]))
    assert not ball_contains(DISK, spec, np.array([-0.9, 0.0]))


def test_metric_ball_radial_matches_distance():
    U = np.array([[1.0, 0.0], [0.0, 1.0], [-0.6, 0.8]])
    s = metric_ball_radial(HEX, ORIGIN, U, 2.0)
    for si, u in zip(s, U):
        assert distance(HEX, ORIGIN, si * u) == pytest.approx(2.0, abs=1e-9)


def test_busemann_disk_along_axis():
    base = np.array([1.0, 0.0])
    for t in (-0.4, 0.0, 0.3, 0.6):
        b = busemann(DISK, base, ORIGIN, np.array([t, 0.0]))
        assert b == pytest.approx(-math.atanh(t), abs=1e-6)


def test_horoball_membership():
    spec = HoroballSpec(base=np.array([1.0, 0.0]), anchor=ORIGIN)
    assert horoball_contains(DISK, spec, np.array([0.5, 0.0]))
    assert not horoball_contains(DISK, spec, np.array([-0.2, 0.0]))


def test_horosphere_disk_is_an_ellipse():
    # zero level set through the origin based at (1,0): the chart image is
    # the ellipse (x - 1/2)^2 + y^2 / 2 = 1/4
    spec = HoroballSpec(base=np.array([1.0, 0.0]), anchor=ORIGIN)
    poly = horosphere_polyline(DISK, spec, m=128)
    res = (poly[:, 0] - 0.5) ** 2 + poly[:, 1] ** 2 / 2.0 - 0.25
    assert np.max(np.abs(res)) < 1e-6


def test_ellipsoid_matches_disk_through_linear_map():
    ell = make_ellipsoid(np.diag([1.0, 4.0]))  # semi-axes 1 and 1/2
    A = np.diag([1.0, 0.5])
    rng = np.random.default_rng(11)
    for _ in range(20):
        p, q = rng.random((2, 2)) * 1.2 - 0.6
        if not (DISK.contains(p) and DISK.contains(q)):
            continue
        assert distance(ell, A @ p, A @ q) == \
            pytest.approx(distance(DISK, p, q), abs=1e-11)
