"""Spectral layer: walk operators against closed-form eigenvalues,
Cheeger constants against brute enumeration, Rayleigh quotients and
vertex-value smoothing."""

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from hilbertlab.body import make_ball
from hilbertlab.nets import build_graph, build_net
from hilbertlab.spectral import (cheeger_graph_exact, cheeger_graph_sweep,
                                 dirichlet_by_radius, inverse_cheeger_check,
                                 markov_system, rayleigh_quotient,
                                 return_probability_rho, smoothing,
                                 spectral_radius)

DISK = make_ball(2)
ORIGIN = np.zeros(2)


def _path(m):
    """Path with m interior vertices and absorbing endpoints 0 and m+1."""
    return [[1]] + [[i - 1, i + 1] for i in range(1, m + 1)] + [[m]]


def _cycle(n):
    return [[(i - 1) % n, (i + 1) % n] for i in range(n)]


def _enumeration_cheeger(adj, interior):
    sets = [set(a) for a in adj]
    if len(interior) == 1:
        v = interior[0]
        return float(len(sets[v] - {v}))
    best = None
    for size in range(1, len(interior) // 2 + 1):
        for F in itertools.combinations(interior, size):
            fs = set(F)
            q = Fraction(len(set().union(*(sets[v] for v in F)) - fs), len(F))
            if best is None or q < best:
                best = q
    return best.numerator / best.denominator


def test_path_walk_matches_cosine():
    for m in (3, 10, 50):
        rep = spectral_radius(markov_system(_path(m), (0, m + 1)))
        assert rep.converged
        assert rep.rho == pytest.approx(math.cos(math.pi / (m + 1)), abs=1e-8)


def test_unrestricted_walk_has_radius_one():
    rep = spectral_radius(markov_system(_cycle(12)))
    assert rep.rho == pytest.approx(1.0, abs=1e-9)


def test_dirichlet_monotone_in_absorbing_set():
    small = spectral_radius(markov_system(_cycle(12), (0,))).rho
    large = spectral_radius(markov_system(_cycle(12), (0, 6))).rho
    assert large <= small + 1e-12


def test_return_probability_below_power_iteration():
    system = markov_system(_path(10), (0, 11))
    rho = spectral_radius(system).rho
    est = return_probability_rho(system, 200, 5)
    assert 0 < est <= rho + 1e-12


def test_markov_operator_is_self_adjoint():
    rng = np.random.default_rng(4)
    adj = [[1, 2, 3], [0, 2], [0, 1, 3], [0, 2, 4], [3]]
    system = markov_system(adj)
    deg = system.degree_weights.astype(float)
    n = len(adj)

    def T(f):
        out = np.zeros(n)
        for i, nbrs in enumerate(adj):
            out[i] = sum(f[j] for j in nbrs) / deg[i]
        return out

    for _ in range(10):
        f, g = rng.standard_normal((2, n))
        assert abs(np.sum(deg * f * T(g)) - np.sum(deg * T(f) * g)) <= 1e-12


def test_cheeger_closed_forms():
    star = [[1, 2, 3], [0], [0], [0]]
    assert cheeger_graph_exact(star) == pytest.approx(0.5, abs=0)
    assert cheeger_graph_exact(_cycle(12)) == pytest.approx(1.0 / 3.0, abs=0)
    k5 = [[j for j in range(5) if j != i] for i in range(5)]
    assert cheeger_graph_exact(k5) == pytest.approx(1.5, abs=0)


def test_cheeger_exact_matches_enumeration():
    rng = np.random.default_rng(8)
    done = 0
    while done < 10:
        n = int(rng.integers(5, 12))
        A = np.triu(rng.random((n, n)) < 0.45, 1)
        A = A | A.T
        adj = [np.flatnonzero(A[i]).tolist() for i in range(n)]
        if any(not a for a in adj):
            continue
        interior = list(range(n))
        exact = cheeger_graph_exact(adj)
        assert exact == _enumeration_cheeger(adj, interior)
        assert cheeger_graph_sweep(adj) >= exact
        done += 1


def test_cheeger_single_interior_vertex():
    assert cheeger_graph_exact(_path(1), (0, 2)) == 2.0


def test_inverse_check_requires_regularity():
    star = [[1, 2, 3], [0], [0], [0]]
    with pytest.raises(ValueError):
        inverse_cheeger_check(star)


def test_inverse_check_on_cycle():
    rep = inverse_cheeger_check(_cycle(12))
    assert rep["degree"] == 2
    assert rep["holds"] == (rep["cheeger"] >= rep["lower_bound"])


def test_rayleigh_quotient_tent():
    def tent(x):
        from hilbertlab.metric import distance
        d = distance(DISK, ORIGIN, x)
        return max(0.0, 1.0 - d / 2.0)

    q = {"n_samples": 4000, "seed": 1}
    val = rayleigh_quotient(DISK, tent, support_radius=2.0, quadrature=q)
    assert 0.05 < val < 3.0
    # scale invariance of the quotient
    val2 = rayleigh_quotient(DISK, lambda x: 2.5 * tent(x),
                             support_radius=2.0, quadrature=q)
    assert val2 == pytest.approx(val, rel=1e-10)


def test_rayleigh_quotient_rejects_unsupported_f():
    with pytest.raises(ValueError):
        rayleigh_quotient(DISK, lambda x: 1.0, support_radius=1.0,
                          quadrature={"n_samples": 500, "seed": 0})


def test_dirichlet_radius_grows_spectral_radius():
    net = build_net(DISK, ORIGIN, 4.0, 0.5, seed=0)
    graph = build_graph(net)
    rhos = [spectral_radius(markov_system(graph, dirichlet_by_radius(net, r))).rho
            for r in (2.0, 3.0)]
    assert rhos[0] < rhos[1] <= 1.0


def test_smoothing_partition_of_unity():
    net = build_net(DISK, ORIGIN, 2.0, 0.5, seed=0)
    rho = max(net.covering_radius_est, 1e-3)
    f = smoothing(net, rho, np.ones(len(net)))
    rng = np.random.default_rng(6)
    probes = 0.5 * (rng.random((40, 2)) * 2 - 1)
    vals = f(probes)
    assert np.allclose(vals, 1.0, atol=1e-12)
    with pytest.raises(ValueError):
        f(np.array([0.999999, 0.0]))
