"""Separated nets and their proximity graphs: separation, covering,
cardinality, connectivity and quasi-isometry properties on small domains."""

import numpy as np
import pytest

from hilbertlab.body import make_ball, make_regular_polygon
from hilbertlab.nets import (build_graph, build_net, cardinality_bound_check,
                             certify_net, export_graph_adjacency,
                             export_graph_dot, export_net_csv, graph_distance,
                             quasi_isometry_report)

DISK = make_ball(2)
TRI = make_regular_polygon(3, name="triangle")
ORIGIN = np.zeros(2)


@pytest.fixture(scope="module")
def disk_net():
    return build_net(DISK, ORIGIN, 3.0, 0.5, seed=0)


@pytest.fixture(scope="module")
def tri_net():
    return build_net(TRI, ORIGIN, 3.0, 0.5, seed=0)


def test_disk_net_certificate(disk_net):
    graph = build_graph(disk_net)
    rep = certify_net(disk_net, graph)
    assert rep["separation_ok"]
    assert rep["covering_ok"]
    assert rep["covering_max"] <= 0.5 + 1e-6
    assert rep["cardinality_ok"]
    assert rep["connected_ok"]
    assert rep["degree_ok"]


def test_triangle_net_certificate(tri_net):
    graph = build_graph(tri_net)
    rep = certify_net(tri_net, graph)
    assert all(v for k, v in rep.items() if k.endswith("_ok"))


def test_net_separation_explicit(disk_net):
    pts = disk_net.points
    ops = DISK.ops()
    rng = np.random.default_rng(1)
    idx = rng.choice(len(pts), size=min(80, len(pts)), replace=False)
    for i in idx:
        d = ops.dist_point_set(pts[i], np.ascontiguousarray(pts))
        d[i] = np.inf
        assert d.min() >= 0.5 - 1e-9


def test_net_center_is_first_point(disk_net):
    assert np.allclose(disk_net.points[0], ORIGIN)
    assert disk_net.s[0] == 0.0


def test_tiny_domain_collapses_to_center():
    net = build_net(DISK, ORIGIN, 0.3, 0.5, seed=0)
    assert len(net) == 1
    rep = certify_net(net)
    assert rep["separation_ok"] and rep["covering_ok"]


def test_cardinality_bound(disk_net):
    assert cardinality_bound_check(disk_net, ORIGIN, 1.0)
    with pytest.raises(ValueError):
        cardinality_bound_check(disk_net, np.array([2.0, 0.0]), 1.0)


def test_graph_edges_within_three_rho(disk_net):
    graph = build_graph(disk_net)
    ops = DISK.ops()
    for i in range(0, graph.n_vertices, 7):
        nbrs = graph.indices[graph.indptr[i]:graph.indptr[i + 1]]
        if len(nbrs):
            d = ops.dist_point_set(disk_net.points[i],
                                   np.ascontiguousarray(disk_net.points[nbrs]))
            assert d.max() <= 3.0 * graph.rho + 1e-9


def test_graph_distance_symmetry(disk_net):
    graph = build_graph(disk_net)
    n = graph.n_vertices
    assert graph_distance(graph, 0, n - 1) == graph_distance(graph, n - 1, 0)
    assert graph_distance(graph, 3, 3) == 0


def test_quasi_isometry_report(disk_net):
    rep = quasi_isometry_report(build_graph(disk_net), n_pairs=200, seed=2)
    assert rep["three_rho_ok"]
    assert rep["a_lower"] > 0
    assert rep["a_upper"] > 0


def test_exports(tmp_path, disk_net):
    graph = build_graph(disk_net)
    export_net_csv(disk_net, tmp_path / "net.csv")
    export_graph_adjacency(graph, tmp_path / "adj.csv")
    export_graph_dot(graph, tmp_path / "g.dot")
    lines = (tmp_path / "net.csv").read_text().strip().splitlines()
    assert len(lines) == len(disk_net) + 1
    assert (tmp_path / "g.dot").read_text().startswith("graph")


def test_determinism_same_seed(disk_net):
    again = build_net(DISK, ORIGIN, 3.0, 0.5, seed=0)
    assert np.array_equal(again.points, disk_net.points)
