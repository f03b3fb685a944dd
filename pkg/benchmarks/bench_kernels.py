"""Timing comparison of the two kernel lanes on the hot paths.

Run:  python3 benchmarks/bench_kernels.py [--points N] [--dirs M]

Both lanes are imported directly (the HILBERTLAB_BACKEND flag only picks
the default lane at package import), timed on identical inputs, and
checked for agreement as they are timed.
"""

import argparse
import time

import numpy as np

from hilbertlab.body import make_ball, make_regular_polygon, make_superellipse
from hilbertlab.kernels import numba_impl as NB
from hilbertlab.kernels import numpy_impl as NP


def _dirs(m):
    th = 2 * np.pi * np.arange(m) / m
    return np.ascontiguousarray(np.stack([np.cos(th), np.sin(th)], 1))


def _interior(body, k, seed=0):
    rng = np.random.default_rng(seed)
    lo, hi = body.bounding_box()
    pts = np.empty((0, 2))
    while len(pts) < k:
        cand = 0.9 * rng.uniform(lo, hi, size=(4 * k, 2))
        pts = np.vstack([pts, cand[body.contains_batch(cand)]])
    return np.ascontiguousarray(pts[:k])


def _time(fn, *args, repeat=3):
    fn(*args)  # warm (and, for the compiled lane, trigger the jit)
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def _row(label, tnb, tnp, agree):
    speedup = tnp / tnb if tnb > 0 else float("inf")
    print(f"{label:<38} {tnb * 1e3:>9.2f} {tnp * 1e3:>9.2f} "
          f"{speedup:>7.1f}x   {agree}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--points", type=int, default=20_000)
    ap.add_argument("--dirs", type=int, default=256)
    args = ap.parse_args()

    print(f"{'kernel':<38} {'numba ms':>9} {'numpy ms':>9} {'speedup':>8}   agree")

    hexa = make_regular_polygon(6)
    disk = make_ball(2)
    se = make_superellipse(4.0, 1.1)
    U = _dirs(args.dirs)

    for body, label in ((hexa, "hexagon"), (disk, "disk"), (se, "superellipse")):
        P = _interior(body, args.points)
        a = (body.kind, body.M, body.v, P, U, body.reach)
        tnb, rnb = _time(NB.rpow_mean, *a)
        tnp, rnp = _time(NP.rpow_mean, *a)
        ok = np.allclose(rnb[0], rnp[0], rtol=1e-10)
        _row(f"rpow_mean {label} ({args.points} pts)", tnb, tnp, ok)

    P = _interior(disk, args.points, 1)
    Q = _interior(disk, args.points, 2)
    a = (disk.kind, disk.M, disk.v, P, Q, disk.reach)
    tnb, dnb = _time(NB.dist_rows, *a)
    tnp, dnp = _time(NP.dist_rows, *a)
    _row(f"dist_rows disk ({args.points} pairs)", tnb, tnp,
         np.allclose(dnb, dnp, rtol=1e-12))

    rng = np.random.default_rng(3)
    n = 200_000
    deg = 8
    indices = rng.integers(0, n, n * deg).astype(np.int64)
    indptr = np.arange(0, n * deg + 1, deg, dtype=np.int64)
    vals = rng.standard_normal(n * deg)
    x = rng.standard_normal(n)
    tnb, ynb = _time(NB.csr_matvec, indptr, indices, vals, x)
    tnp, ynp = _time(NP.csr_matvec, indptr, indices, vals, x)
    _row(f"csr_matvec ({n} rows, deg {deg})", tnb, tnp,
         bool(np.array_equal(ynb, ynp)))


if __name__ == "__main__":
    main()
