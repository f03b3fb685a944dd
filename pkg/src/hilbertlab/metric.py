"""Hilbert distance, Finsler norms, metric balls, Busemann functions and
horoballs on a convex body."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError

TOL_BUSEMANN = 1e-6


@dataclass(frozen=True, eq=False)
class BallSpec:
    center: np.ndarray
    radius: float


@dataclass(frozen=True, eq=False)
class HoroballSpec:
    base: np.ndarray  # boundary point
    anchor: np.ndarray  # interior point the horosphere passes through
    approach_parameter: float | None = None  # fixed t for single-shot eval


def cross_ratio(a, p, q, b):
    """Cross ratio of four collinear points ordered a, p, q, b.

    Returns (|q-a|/|p-a|) * (|p-b|/|q-b|), the projective invariant whose
    half-log is the Hilbert distance.
    """
    a, p, q, b = (np.asarray(x, float) for x in (a, p, q, b))
    u = b - a
    L = np.linalg.norm(u)
    if L == 0:
        raise ValueError("a and b coincide")
    u = u / L
    scale = max(L, 1.0)
    for name, x in (("p", p), ("q", q)):
        off = (x - a) - ((x - a) @ u) * u
        if np.linalg.norm(off) > 1e-9 * scale:
            raise ValueError(f"point {name} not collinear with a, b")
    tp = (p - a) @ u
    tq = (q - a) @ u
    if abs(tq - tp) <= 1e-15 * scale:
        raise ValueError("p = q (degenerate cross ratio)")
    if not (0.0 < tp < tq < L):
        raise ValueError("points not ordered a, p, q, b along the line")
    return (tq / tp) * ((L - tp) / (L - tq))


def distance(body, p, q, return_error=False):
    """Hilbert distance, half the log of the chord cross ratio."""
    p = np.asarray(p, float)
    q = np.asarray(q, float)
    for x in (p, q):
        if not body.contains(x):
            raise ValueError("distance arguments must be interior points")
    d = float(body.ops().dist_rows(p[None, :], q[None, :])[0])
    if not return_error:
        return d
    # boundary error eps_b perturbs each log endpoint by eps_b / endpoint gap
    s = np.linalg.norm(q - p)
    if s == 0:
        return 0.0, 0.0
    tm, tp = body.ops().chord_tvals(p[None, :], ((q - p) / s)[None, :])
    err = body.tol_boundary * 0.5 * (1.0 / tm[0] + 1.0 / (tp[0] - s))
    return d, float(err)


def finsler_norm(body, p, v):
    p = np.asarray(p, float)
    if not body.contains(p):
        raise ValueError("base point must be interior")
    return float(body.ops().finsler_rows(p[None, :], np.asarray(v, float)[None, :])[0])


def finsler_dual_norm(body, p, w, m_dir=256, return_error=False):
    """Dual norm F*(p, w) = max{ w.v : F(p, v) <= 1 }.

    Maximizes (w.u) / F(p,u) over directions: a coarse scan followed by
    golden-section refinement in 2D, or local simplex refinement in nD.
    """
    p = np.asarray(p, float)
    w = np.asarray(w, float)
    if not body.contains(p):
        raise ValueError("base point must be interior")
    nw = np.linalg.norm(w)
    if nw == 0.0:
        return (0.0, 0.0) if return_error else 0.0
    ops = body.ops()
    n = body.dim

    def radial(U):
        tm, tp = ops.profile_tvals(p, U)
        return 2.0 * tm * tp / (tm + tp)  # 1/F(p, u) for unit u

    if n == 2:
        th = 2 * np.pi * np.arange(m_dir) / m_dir
        U = np.stack([np.cos(th), np.sin(th)], 1)
        vals = (U @ w) * radial(U)
        k = int(np.argmax(vals))
        coarse = vals[k]

        def f(t):
            u = np.array([[math.cos(t), math.sin(t)]])
            return float((u @ w)[0] * radial(u)[0])

        lo = th[k] - 2 * np.pi / m_dir
        hi = th[k] + 2 * np.pi / m_dir
        gr = (math.sqrt(5.0) - 1.0) / 2.0
        c = hi - gr * (hi - lo)
        d = lo + gr * (hi - lo)
        fc, fd = f(c), f(d)
        for _ in range(60):
            if fc > fd:
                hi, d, fd = d, c, fc
                c = hi - gr * (hi - lo)
                fc = f(c)
            else:
                lo, c, fc = c, d, fd
                d = lo + gr * (hi - lo)
                fd = f(d)
        best = max(fc, fd, coarse)
        err = abs(best - coarse) + 1e-12 * best
    else:
        U = sphere_directions(n, 2000)
        vals = (U @ w) * radial(U)
        k = int(np.argmax(vals))
        coarse = float(vals[k])
        from scipy.optimize import minimize

        def negf(x):
            u = U[k] + x
            u = u / np.linalg.norm(u)
            return -float((u @ w) * radial(u[None, :])[0])

        res = minimize(negf, np.zeros(n), method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 400})
        best = max(coarse, -float(res.fun))
        err = abs(best - coarse) + 1e-9 * best
    return (best, float(err)) if return_error else best


def sphere_directions(n, m):
    """Deterministic quasi-uniform unit directions (Halton through the
    inverse normal map; exact uniform angles in 2D)."""
    if n == 2:
        th = 2 * np.pi * np.arange(m) / m
        return np.stack([np.cos(th), np.sin(th)], 1)
    from scipy.special import ndtri
    from scipy.stats import qmc

    h = qmc.Halton(d=n, scramble=False).random(m + 1)[1:]  # drop the zero point
    U = ndtri(np.clip(h, 1e-12, 1 - 1e-12))
    return U / np.linalg.norm(U, axis=1, keepdims=True)


# ---------------------------------------------------------------------------
# metric balls


def metric_ball_radial(body, center, U, radius):
    """Euclidean ray parameters s(u) with d(center, center + s u) = radius.

    Closed form: with chord parameters (tm, tp) out of the center and
    E = e^{2 radius}, s = (E-1) tm tp / (tp + E tm).
    """
    tm, tp = body.ops().profile_tvals(center, U)
    E = math.exp(2.0 * radius)
    return (E - 1.0) * tm * tp / (tp + E * tm)


def ball_contains(body, spec, x):
    x = np.asarray(x, float)
    if not body.contains(np.asarray(spec.center, float)):
        raise ValueError("ball center must be interior")
    if not body.contains(x):
        return False
    return distance(body, spec.center, x) <= spec.radius


def ball_boundary_polyline(body, spec, m=256):
    """Vertices of the Hilbert sphere of the given spec, 2D bodies only.

    m is a vertex-count target. For bodies with corner features the angles
    are graded toward the feature directions (where the sphere concentrates
    its length, see the angular module), so the count may differ from m.
    """
    if body.dim != 2:
        raise ValueError("polylines are 2D only")
    if m < 8:
        raise ValueError("need m >= 8 vertices")
    c = np.asarray(spec.center, float)
    if not body.contains(c):
        raise ValueError("ball center must be interior")
    from .angular import theta_nodes

    th = theta_nodes(body, c, m, spec.radius)
    U = np.stack([np.cos(th), np.sin(th)], 1)
    if spec.radius == 0.0:
        return np.repeat(c[None, :], len(th), axis=0)
    s = metric_ball_radial(body, c, U, spec.radius)
    return c[None, :] + s[:, None] * U


# ---------------------------------------------------------------------------
# Busemann functions and horoballs


def _boundary_snap(body, anchor, base):
    """Exact boundary point along the ray anchor -> base; validates base."""
    anchor = np.asarray(anchor, float)
    base = np.asarray(base, float)
    d = base - anchor
    L = np.linalg.norm(d)
    if L == 0:
        raise ValueError("base and anchor coincide")
    u = d / L
    _, tp = body.ops().profile_tvals(anchor, u[None, :])
    if abs(tp[0] - L) > 1e-6 * body.bounding_radius:
        raise ValueError("base point is not on the boundary (within tolerance)")
    return anchor, anchor + tp[0] * u, u, float(tp[0])


def busemann_batch(body, base, anchor, X, tol=TOL_BUSEMANN, max_depth=40):
    """Busemann values lim d(x, z) - d(anchor, z) for z -> base along the ray.

    Approach points z_k = anchor + (1 - 2^{-k})(base - anchor); the sequence
    is non-increasing by the triangle inequality, which is asserted up to the
    rounding floor of deep-approach chords (evaluation points near the body
    boundary see distance noise far above machine epsilon), and iteration
    stops when successive values differ by < tol.
    """
    anchor, base, u, L = _boundary_snap(body, anchor, base)
    X = np.atleast_2d(np.asarray(X, float))
    if not np.all(body.contains_batch(X)):
        raise ValueError("Busemann evaluation points must be interior")
    ops = body.ops()
    tm0, _ = ops.profile_tvals(anchor, u[None, :])
    tm0 = float(tm0[0])
    prev = None
    for k in range(1, max_depth + 1):
        dz = (1.0 - 0.5**k) * L
        z = anchor + dz * u
        # d(anchor, z) in closed form on the shared chord: the forward
        # endpoint is at L, the backward one at -tm0
        danchor = 0.5 * math.log(((dz + tm0) / tm0) * (L / (L - dz)))
        Z = np.ascontiguousarray(np.broadcast_to(z, X.shape))
        vals = ops.dist_rows(X, Z) - danchor
        if prev is not None:
            if np.any(vals > prev + 1e-6):
                raise AssertionError("Busemann approach sequence increased")
            if np.max(np.abs(vals - prev)) < tol:
                return vals, True
        prev = vals
    return prev, False


def busemann(body, base, anchor, x, tol=TOL_BUSEMANN):
    vals, ok = busemann_batch(body, base, anchor, np.asarray(x, float)[None, :], tol)
    if not ok:
        raise ConvergenceError("Busemann limit did not stabilize (boundary degeneracy?)",
                               estimate=float(vals[0]))
    return float(vals[0])


def horoball_contains(body, spec, x):
    """Membership in the closed horoball: busemann(x) <= 0."""
    return busemann(body, spec.base, spec.anchor, x) <= 0.0


def horosphere_polyline(body, spec, m=256, tol=1e-9):
    """Vertices tracing the zero Busemann level set, 2D bodies only.

    Rays are cast from a seed inside the horoball; directions whose crossing
    hugs the body boundary closer than the chord tolerance are skipped (the
    horoball touches the boundary at its base point).
    """
    if body.dim != 2:
        raise ValueError("polylines are 2D only")
    anchor, base, u, L = _boundary_snap(body, spec.anchor, spec.base)
    seed = anchor + 0.5 * L * u
    ops = body.ops()
    th = 2 * np.pi * np.arange(m) / m
    U = np.stack([np.cos(th), np.sin(th)], 1)
    _, tp = ops.profile_tvals(seed, U)
    hi = (1.0 - 1e-9) * tp  # deeper probes drown in chord rounding noise
    lo = np.zeros(m)

    def bus(S):
        P = seed[None, :] + S[:, None] * U
        vals, _ = busemann_batch(body, base, anchor, P)
        return vals

    inside_hi = bus(hi) <= 0.0  # rays escaping through the cusp at the base
    keep = ~inside_hi
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        b = bus(mid)
        below = b <= 0.0
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.max(hi - lo) < tol * body.bounding_radius:
            break
    s = 0.5 * (lo + hi)
    return seed[None, :] + s[keep, None] * U[keep]
