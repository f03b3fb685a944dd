"""Both kernel lanes must agree on identical inputs. The compiled lane is
the default; HILBERTLAB_BACKEND=numpy selects the fallback at import time,
so the lanes are compared here by importing both modules directly."""

import os
import subprocess
import sys

import numpy as np
import pytest

from hilbertlab.body import make_ball, make_regular_polygon, make_superellipse
from hilbertlab.kernels import numba_impl as NB
from hilbertlab.kernels import numpy_impl as NP

DISK = make_ball(2)
TRI = make_regular_polygon(3)
HEX = make_regular_polygon(6)
SE = make_superellipse(4.0, 1.1)


def _dirs(m):
    th = 2 * np.pi * np.arange(m) / m
    return np.ascontiguousarray(np.stack([np.cos(th), np.sin(th)], 1))


def _interior(body, k, seed):
    rng = np.random.default_rng(seed)
    pts = []
    while len(pts) < k:
        c = rng.random(2) * 2 - 1
        if body.contains_batch(np.atleast_2d(0.85 * c))[0]:
            pts.append(0.85 * c)
    return np.ascontiguousarray(pts)


@pytest.mark.parametrize("body", [TRI, HEX, DISK, SE], ids=lambda b: b.name)
def test_chord_and_distance_agree(body):
    P = _interior(body, 12, 1)
    Q = _interior(body, 12, 2)
    U = _dirs(12)
    args = (body.kind, body.M, body.v)
    tnb = NB.chord_tvals(*args, P, U, body.reach)
    tnp = NP.chord_tvals(*args, P, U, body.reach)
    assert np.allclose(tnb, tnp, rtol=1e-12, atol=1e-14)
    dnb = NB.dist_rows(*args, P, Q, body.reach)
    dnp = NP.dist_rows(*args, P, Q, body.reach)
    assert np.allclose(dnb, dnp, rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("body", [TRI, HEX, DISK, SE], ids=lambda b: b.name)
def test_rpow_mean_agrees(body):
    P = _interior(body, 10, 3)
    U = _dirs(64)
    rnb, wnb = NB.rpow_mean(body.kind, body.M, body.v, P, U, body.reach)
    rnp, wnp = NP.rpow_mean(body.kind, body.M, body.v, P, U, body.reach)
    assert np.allclose(rnb, rnp, rtol=1e-12)
    assert np.allclose(wnb, wnp, rtol=1e-12)


def test_polygon_rpow_mean_agrees_at_extreme_eccentricity():
    # near-vertex and near-edge points exercise the closed-form polygon path
    probes = np.ascontiguousarray([
        (1.0 - 1e-7) * np.array([0.0, 1.0]),
        np.array([0.0, -0.5 + 1e-6]),
        np.array([0.3, 0.2]),
    ])
    U = _dirs(8)
    rnb, wnb = NB.rpow_mean(TRI.kind, TRI.M, TRI.v, probes, U, TRI.reach)
    rnp, wnp = NP.rpow_mean(TRI.kind, TRI.M, TRI.v, probes, U, TRI.reach)
    assert np.all(rnb > 0)
    assert np.allclose(rnb, rnp, rtol=1e-12)
    assert np.allclose(wnb, wnp, rtol=1e-12)


def test_finsler_and_profile_agree():
    P = _interior(HEX, 15, 5)
    V = np.ascontiguousarray(np.random.default_rng(6).standard_normal((15, 2)))
    fnb = NB.finsler_rows(HEX.kind, HEX.M, HEX.v, P, V, HEX.reach)
    fnp = NP.finsler_rows(HEX.kind, HEX.M, HEX.v, P, V, HEX.reach)
    assert np.allclose(fnb, fnp, rtol=1e-12)
    U = _dirs(16)
    anb, bnb = NB.profile_tvals(DISK.kind, DISK.M, DISK.v, np.zeros(2), U,
                                DISK.reach)
    anp, bnp = NP.profile_tvals(DISK.kind, DISK.M, DISK.v, np.zeros(2), U,
                                DISK.reach)
    assert np.allclose(anb, anp, rtol=1e-13)
    assert np.allclose(bnb, bnp, rtol=1e-13)


def test_sparse_matvec_agrees_exactly():
    rng = np.random.default_rng(7)
    n = 60
    A = np.triu(rng.random((n, n)) < 0.1, 1)
    A = A | A.T
    indptr = np.zeros(n + 1, np.int64)
    indptr[1:] = np.cumsum(A.sum(1))
    indices = np.concatenate([np.flatnonzero(A[i]) for i in range(n)]).astype(np.int64)
    vals = rng.standard_normal(len(indices))
    x = rng.standard_normal(n)
    ynb = NB.csr_matvec(indptr, indices, vals, x)
    ynp = NP.csr_matvec(indptr, indices, vals, x)
    assert np.array_equal(ynb, ynp)
    assert NB.vdot(x, x) == NP.vdot(x, x)


def test_cheeger_kernel_agrees():
    rng = np.random.default_rng(8)
    n = 9
    A = np.triu(rng.random((n, n)) < 0.5, 1)
    A = (A | A.T)
    adj = np.zeros((n, n), bool)
    adj[A] = True
    vmap = np.arange(n, dtype=np.int64)
    assert NB.cheeger_exact(adj, vmap, n // 2) == NP.cheeger_exact(adj, vmap, n // 2)


def test_numpy_backend_env_flag():
    code = ("import hilbertlab as hl, numpy as np; "
            "print(hl.BACKEND); "
            "print(repr(hl.distance(hl.make_ball(2), np.zeros(2), "
            "np.array([0.5, 0.0]))))")
    env = dict(os.environ, HILBERTLAB_BACKEND="numpy")
    res = subprocess.run([sys.executable, "-c", code], capture_output=True,
                         text=True, env=env, check=True)
    lane, value = res.stdout.split()
    assert lane == "numpy"
    assert float(value) == float(np.arctanh(0.5))
