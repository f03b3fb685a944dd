"""Body constructors, membership, spec parsing and projective maps."""

import json

import numpy as np
import pytest

from hilbertlab.body import (body_from_spec, make_ball, make_ellipsoid,
                             make_polygon, make_regular_polygon, make_simplex,
                             make_superellipse, projective_transform)
from hilbertlab.metric import distance


def test_polygon_membership_and_box():
    sq = make_polygon([(1, 1), (-1, 1), (-1, -1), (1, -1)])
    assert sq.contains(np.array([0.9, -0.9]))
    assert not sq.contains(np.array([1.1, 0.0]))
    lo, hi = sq.bounding_box()
    assert np.allclose(lo, [-1, -1]) and np.allclose(hi, [1, 1])


def test_regular_polygon_vertices_on_circle():
    hexagon = make_regular_polygon(6, circumradius=2.0)
    assert hexagon.vertices.shape == (6, 2)
    assert np.allclose(np.linalg.norm(hexagon.vertices, axis=1), 2.0)
    assert hexagon.contains(np.zeros(2))


def test_ellipsoid_membership():
    ell = make_ellipsoid(np.diag([1.0, 4.0]), center=np.array([0.5, 0.0]))
    assert ell.contains(np.array([0.5, 0.0]))
    assert ell.contains(np.array([1.3, 0.0]))
    assert not ell.contains(np.array([0.5, 0.6]))


def test_superellipse_membership():
    se = make_superellipse(4.0, 1.1)
    assert se.contains(np.zeros(2))
    assert not se.contains(np.array([1.0, 1.0]))


def test_simplex_dimensions():
    s3 = make_simplex(3)
    assert s3.dim == 3
    c = s3.interior_point if hasattr(s3, "interior_point") else np.full(3, 0.0)
    assert s3.contains_batch(np.atleast_2d(np.asarray(c, float))).all()


def test_body_from_spec_names_and_dicts():
    assert body_from_spec("triangle").vertices.shape == (3, 2)
    assert body_from_spec("disk").dim == 2
    b = body_from_spec({"kind": "regular_polygon", "k": 5})
    assert b.vertices.shape == (5, 2)
    with pytest.raises(ValueError):
        body_from_spec({"kind": "moebius"})
    with pytest.raises(ValueError):
        body_from_spec({"kind": "ball", "n": 2, "bogus": 1})


def test_body_from_spec_json_file(tmp_path):
    path = tmp_path / "body.json"
    path.write_text(json.dumps({"kind": "polygon",
                                "vertices": [[1, 0], [0, 1], [-1, -1]]}))
    assert body_from_spec(str(path)).vertices.shape == (3, 2)


def test_projective_transform_preserves_distances():
    tri = body_from_spec("triangle")
    H = np.array([[1.0, 0.2, 0.1],
                  [-0.1, 0.9, 0.0],
                  [0.05, -0.02, 1.0]])
    image = projective_transform(tri, H)

    def apply(x):
        y = H @ np.append(x, 1.0)
        return y[:2] / y[2]

    rng = np.random.default_rng(5)
    for _ in range(30):
        p, q = 0.6 * (rng.random((2, 2)) * 2 - 1)
        if not (tri.contains(p) and tri.contains(q)):
            continue
        assert distance(image, apply(p), apply(q)) == \
            pytest.approx(distance(tri, p, q), abs=1e-10)


def test_projective_transform_rejects_unbounded_image():
    sq = make_polygon([(1, 1), (-1, 1), (-1, -1), (1, -1)])
    # sends the vertex (1,1) to infinity
    H = np.array([[1.0, 0.0, 0.0],
                  [0.0, 1.0, 0.0],
                  [-0.5, -0.5, 1.0]])
    with pytest.raises(ValueError):
        projective_transform(sq, H)


def test_ellipsoid_projective_image_stays_exact():
    disk = make_ball(2)
    H = np.array([[1.0, 0.0, 0.3],
                  [0.0, 1.0, -0.1],
                  [0.1, 0.0, 1.0]])
    image = projective_transform(disk, H)

    def apply(x):
        y = H @ np.append(x, 1.0)
        return y[:2] / y[2]

    rng = np.random.default_rng(9)
    for _ in range(20):
        p, q = 0.7 * (rng.random((2, 2)) * 2 - 1)
        assert distance(image, apply(p), apply(q)) == \
            pytest.approx(distance(disk, p, q), abs=1e-10)
