"""Pure-numpy reference kernels.

Every public function here has a numba twin with identical semantics.
Bodies reach the kernels as a (kind, M, v) triple of plain arrays:

  kind 0  polytope      M = facet normals A (k, n), unit rows; v = offsets b,
                        interior is A @ x < b
  kind 1  ellipsoid     M = quadric Q (n, n) SPD; v = center c,
                        interior is (x-c) @ Q @ (x-c) < 1
  kind 2  superellipse  M unused; v = (p, q), interior |x|^p + |y|^q < 1

`reach` is a per-body scalar with p + reach*u guaranteed outside the body
for every interior p and unit u.
"""

import math

import numpy as np

POLYTOPE, ELLIPSOID, SUPERELLIPSE = 0, 1, 2

_TINY = 1e-300
_PAR = 1e-14  # |direction . normal| below this counts as facet-parallel


def chord_tvals(kind, M, v, P, U, reach):
    """Chord parameters of the line t -> P + t*U through the body.

    P, U are (m, n) with unit direction rows and strictly interior points.
    Returns (tm, tp), both positive: the boundary is hit at -tm and +tp.
    """
    P = np.atleast_2d(np.asarray(P, float))
    U = np.atleast_2d(np.asarray(U, float))
    if kind == POLYTOPE:
        r = v[None, :] - P @ M.T  # slack per facet, > 0 inside
        s = U @ M.T
        np.maximum(r, _TINY, out=r)
        with np.errstate(divide="ignore", over="ignore"):
            q = r / np.where(np.abs(s) < _PAR, _PAR, s)
        tp = np.min(np.where(s > _PAR, q, np.inf), axis=1)
        tm = np.min(np.where(s < -_PAR, -q, np.inf), axis=1)
        return tm, tp
    if kind == ELLIPSOID:
        Y = P - v[None, :]
        a = np.einsum("ij,jk,ik->i", U, M, U)
        b = np.einsum("ij,jk,ik->i", Y, M, U)
        c = np.einsum("ij,jk,ik->i", Y, M, Y) - 1.0
        disc = np.sqrt(np.maximum(b * b - a * c, 0.0))
        tp = (disc - b) / a
        tm = (disc + b) / a
        return np.maximum(tm, _TINY), np.maximum(tp, _TINY)
    if kind == SUPERELLIPSE:
        p, q = v[0], v[1]

        def root(sign):
            lo = np.zeros(len(P))
            hi = np.full(len(P), reach)
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                x = P + (sign * mid)[:, None] * U
                g = np.abs(x[:, 0]) ** p + np.abs(x[:, 1]) ** q
                inside = g < 1.0
                lo = np.where(inside, mid, lo)
                hi = np.where(inside, hi, mid)
            return np.maximum(0.5 * (lo + hi), _TINY)

        return root(-1.0), root(+1.0)
    raise ValueError(f"unknown body kind {kind}")


def dist_rows(kind, M, v, P, Q, reach):
    """Hilbert distance between paired rows of P and Q."""
    P = np.atleast_2d(np.asarray(P, float))
    Q = np.atleast_2d(np.asarray(Q, float))
    D = Q - P
    s = np.linalg.norm(D, axis=1)
    out = np.zeros(len(P))
    live = s > 0.0
    if np.any(live):
        U = D[live] / s[live, None]
        tm, tp = chord_tvals(kind, M, v, P[live], U, reach)
        ss = s[live]
        out[live] = 0.5 * np.log(((ss + tm) / tm) * (tp / (tp - ss)))
    return out


def dist_point_set(kind, M, v, x, P, reach):
    X = np.broadcast_to(np.asarray(x, float), np.atleast_2d(P).shape)
    return dist_rows(kind, M, v, X, P, reach)


def finsler_rows(kind, M, v, P, V, reach):
    """Finsler norms of tangent rows V at base rows P."""
    V = np.atleast_2d(np.asarray(V, float))
    s = np.linalg.norm(V, axis=1)
    out = np.zeros(len(V))
    live = s > 0.0
    if np.any(live):
        U = V[live] / s[live, None]
        tm, tp = chord_tvals(kind, M, v, np.atleast_2d(P)[live], U, reach)
        out[live] = 0.5 * s[live] * (1.0 / tm + 1.0 / tp)
    return out


def _poly_rpm2(M, v, P):
    """Exact mean of r(u)^2 for 2D polytopes, vectorized over point rows.

    The Finsler unit ball at p is B = {w : <(g_i - g_j)/2, w> <= 1} with
    g_i = a_i / slack_i, and mean r^2 over uniform directions equals
    area(B)/pi. The area is summed face by face (fan from the origin,
    each face clipped to a 1D interval on its own support line), which
    stays well conditioned at the extreme eccentricities near polygon
    corners. Also returns the exact boundary distance min_i slack_i/|a_i|.
    """
    m = M.shape[0]
    I, J = np.nonzero(~np.eye(m, dtype=bool))
    K = len(I)
    offdiag = ~np.eye(K, dtype=bool)[None, :, :]
    rownorm = np.linalg.norm(M, axis=1)
    acc = np.empty(len(P))
    tmin = np.empty(len(P))
    step = max(1, 4_000_000 // (K * K))
    for lo in range(0, len(P), step):
        Pc = P[lo:lo + step]
        d = v[None, :] - Pc @ M.T
        bad = np.min(d, axis=1) <= 0.0
        ds = np.where(d > 0.0, d, 1.0)
        g = M[None, :, :] / ds[:, :, None]
        C = 0.5 * (g[:, I, :] - g[:, J, :])
        # faces duplicated by an exactly equal earlier constraint count once
        eq = (C[:, :, None, 0] == C[:, None, :, 0]) \
            & (C[:, :, None, 1] == C[:, None, :, 1])
        dup = np.any(np.tril(eq, -1), axis=2)
        n2 = C[..., 0] ** 2 + C[..., 1] ** 2
        dead = n2 <= 0.0
        n2s = np.where(dead, 1.0, n2)
        nrm = np.sqrt(n2s)
        F = C / n2s[:, :, None]                      # foot points
        T = np.stack((-C[..., 1], C[..., 0]), -1) / nrm[:, :, None]
        den = np.einsum("cbd,cad->cab", C, T)        # clip slopes on face a
        num = 1.0 - np.einsum("cbd,cad->cab", C, F)
        pos = offdiag & (den > 0.0)
        neg = offdiag & (den < 0.0)
        zer = offdiag & (den == 0.0) & (num < 0.0)
        dens = np.where(den != 0.0, den, 1.0)
        r = num / dens
        s_hi = np.min(np.where(pos, r, 1e300), axis=2)
        s_lo = np.max(np.where(neg, r, -1e300), axis=2)
        ell = np.where(np.any(zer, axis=2) | dup | dead, 0.0,
                       np.maximum(s_hi - s_lo, 0.0))
        area = 0.5 * np.sum(ell / nrm, axis=1)
        acc[lo:lo + step] = np.where(bad, 0.0, area / np.pi)
        bdist = np.min(ds / rownorm[None, :], axis=1)
        tmin[lo:lo + step] = np.where(bad, 0.0, bdist)
    return acc, tmin


def rpow_mean(kind, M, v, P, U, reach):
    """Mean of r(u)^n over directions, per point.

    r(u) = 1/F(p, u) is the unit-ball radial function; the Hilbert-measure
    density is 1/mean and the ball volume omega_n * mean. For 2D polytopes
    the mean is computed exactly from the Finsler unit-ball polygon (the
    direction table is only a quadrature device and cannot resolve the
    eccentric balls near corners); other bodies average over the table.
    Also returns the smallest boundary gap per point (exact boundary
    distance on the polygon path, chord endpoint proxy otherwise).
    """
    P = np.atleast_2d(np.asarray(P, float))
    U = np.asarray(U, float)
    m, n = P.shape
    if kind == POLYTOPE and n == 2:
        return _poly_rpm2(M, v, P)
    acc = np.zeros(m)
    tmin = np.full(m, np.inf)
    for j in range(len(U)):
        Uj = np.broadcast_to(U[j], (m, n))
        tm, tp = chord_tvals(kind, M, v, P, Uj, reach)
        r = 2.0 * tm * tp / (tm + tp)
        acc += r**n
        np.minimum(tmin, np.minimum(tm, tp), out=tmin)
    return acc / len(U), tmin


def profile_tvals(kind, M, v, x0, U, reach):
    """(tm, tp) for every direction row of U out of the single point x0."""
    U = np.asarray(U, float)
    X = np.broadcast_to(np.asarray(x0, float), U.shape)
    return chord_tvals(kind, M, v, X, U, reach)


# ---------------------------------------------------------------------------
# sparse linear algebra


def csr_matvec(indptr, indices, vals, x):
    import scipy.sparse as sp

    n = len(indptr) - 1
    A = sp.csr_matrix((vals, indices, indptr), shape=(n, n))
    return A @ x


def vdot(a, b):
    return float(np.sum(a * b))


def bfs_levels(indptr, indices, src, n):
    """Unweighted BFS levels from src; -1 for unreachable."""
    lev = np.full(n, -1, np.int64)
    lev[src] = 0
    frontier = np.array([src], np.int64)
    d = 0
    while len(frontier):
        d += 1
        nxt = []
        for u in frontier:
            nbrs = indices[indptr[u]:indptr[u + 1]]
            fresh = nbrs[lev[nbrs] < 0]
            lev[fresh] = d
            nxt.append(fresh)
        frontier = np.unique(np.concatenate(nxt)) if nxt else np.empty(0, np.int64)
    return lev


# ---------------------------------------------------------------------------
# net packing / range search
#
# Points live in radial coordinates about the net center: s = Hilbert
# distance to the center, and for constant-curvature bodies ("hyp" mode)
# also a polar angle th with the exact law
#     cosh d = cosh s1 cosh s2 - sinh s1 sinh s2 cos(th1 - th2).
# Frozen annuli are theta-sorted; a conflict at distance <= thr from a
# point at radius s can only sit within |dtheta| <= asin(sinh thr/sinh s).


def _ang_win(s, thr):
    if s <= thr:
        return math.pi
    x = math.sinh(thr) / math.sinh(s)
    return math.asin(min(1.0, x))


def _hyp_le(ch1, sh1, th1, ch2, sh2, th2, cosh_thr):
    return ch1 * ch2 - sh1 * sh2 * np.cos(th1 - th2) <= cosh_thr


def _window_ranges(fth, lo, hi):
    """Index ranges of sorted fth within [lo, hi], wrapping at +-pi."""
    out = []
    if hi - lo >= 2.0 * math.pi:
        out.append((0, len(fth)))
        return out
    for a, b in ((lo, hi), (lo + 2 * math.pi, hi + 2 * math.pi), (lo - 2 * math.pi, hi - 2 * math.pi)):
        i = np.searchsorted(fth, a, "left")
        j = np.searchsorted(fth, b, "right")
        if j > i:
            out.append((int(i), int(j)))
    return out


def pack_annulus_hyp(cs, cth, fs, fth, fptr, cosh_eps, eps):
    """Greedy packing of one annulus against frozen annuli, hyp mode.

    Candidates are taken in stream order; a candidate is accepted when no
    frozen point and no earlier-accepted candidate lies within eps.
    Returns the boolean accept mask.
    """
    m = len(cs)
    keep = np.zeros(m, bool)
    cch, csh = np.cosh(cs), np.sinh(cs)
    fch, fsh = np.cosh(fs), np.sinh(fs)
    acc_th = []
    acc_ch = []
    acc_sh = []
    for i in range(m):
        w = _ang_win(cs[i], eps)
        bad = False
        for a in range(len(fptr) - 1):
            seg_th = fth[fptr[a]:fptr[a + 1]]
            if not len(seg_th):
                continue
            for lo, hi in _window_ranges(seg_th, cth[i] - w, cth[i] + w):
                sl = slice(fptr[a] + lo, fptr[a] + hi)
                if np.any(_hyp_le(cch[i], csh[i], cth[i], fch[sl], fsh[sl], fth[sl], cosh_eps)):
                    bad = True
                    break
            if bad:
                break
        if not bad and acc_th:
            ath = np.array(acc_th)
            ach = np.array(acc_ch)
            ash = np.array(acc_sh)
            if np.any(_hyp_le(cch[i], csh[i], cth[i], ach, ash, ath, cosh_eps)):
                bad = True
        if not bad:
            keep[i] = True
            acc_th.append(cth[i])
            acc_ch.append(cch[i])
            acc_sh.append(csh[i])
    return keep


def pack_annulus_gen(kind, M, v, reach, cxy, fxy, eps):
    """Greedy packing, generic mode: exact chord distances, full window scan."""
    m = len(cxy)
    keep = np.zeros(m, bool)
    acc = []
    for i in range(m):
        bad = False
        if len(fxy):
            d = dist_point_set(kind, M, v, cxy[i], fxy, reach)
            bad = bool(np.any(d <= eps))
        if not bad and acc:
            d = dist_point_set(kind, M, v, cxy[i], np.array(acc), reach)
            bad = bool(np.any(d <= eps))
        if not bad:
            keep[i] = True
            acc.append(cxy[i])
    return keep


def _ann_span(s, thr, h, n_ann):
    # annuli overlapping the radial band [s - thr, s + thr]
    if h <= 0.0:
        return 0, n_ann - 1
    lo = int(max(s - thr, 0.0) / h)
    hi = min(int((s + thr) / h), n_ann - 1)
    return lo, hi


def query_hyp(qs, qth, fs, fth, fptr, gidx, cosh_thr, thr, strict, h=0.0):
    """Range search: frozen-structure points within thr of each query.

    Returns (indptr, hits) CSR over queries with global point ids, each row
    sorted. strict=True keeps d <= thr with d > 0 (drops exact self-hits).
    h > 0 is the annulus width of fptr; it prunes to radially feasible annuli.
    """
    qch, qsh = np.cosh(qs), np.sinh(qs)
    fch, fsh = np.cosh(fs), np.sinh(fs)
    n_ann = len(fptr) - 1
    rows = []
    for i in range(len(qs)):
        w = _ang_win(qs[i], thr)
        a_lo, a_hi = _ann_span(qs[i], thr, h, n_ann)
        ids = []
        for a in range(a_lo, a_hi + 1):
            seg = slice(fptr[a], fptr[a + 1])
            seg_th = fth[seg]
            if not len(seg_th):
                continue
            for lo, hi in _window_ranges(seg_th, qth[i] - w, qth[i] + w):
                sl = slice(fptr[a] + lo, fptr[a] + hi)
                cd = qch[i] * fch[sl] - qsh[i] * fsh[sl] * np.cos(qth[i] - fth[sl])
                ok = cd <= cosh_thr
                if strict:
                    ok &= cd > 1.0
                if np.any(ok):
                    ids.append(gidx[sl][ok])
        hits = np.sort(np.concatenate(ids)) if ids else np.empty(0, np.int64)
        rows.append(hits)
    indptr = np.zeros(len(qs) + 1, np.int64)
    indptr[1:] = np.cumsum([len(r) for r in rows])
    flat = np.concatenate(rows) if rows else np.empty(0, np.int64)
    return indptr, flat


def query_gen(kind, M, v, reach, qxy, fxy, gidx, thr, strict):
    rows = []
    for i in range(len(qxy)):
        d = dist_point_set(kind, M, v, qxy[i], fxy, reach)
        ok = d <= thr
        if strict:
            ok &= d > 0.0
        rows.append(np.sort(gidx[ok]))
    indptr = np.zeros(len(qxy) + 1, np.int64)
    indptr[1:] = np.cumsum([len(r) for r in rows])
    flat = np.concatenate(rows) if rows else np.empty(0, np.int64)
    return indptr, flat


def nearest_hyp(qs, qth, fs, fth, fptr, thr, h=0.0):
    """Distance to the nearest structure point, inf when none within thr."""
    qch, qsh = np.cosh(qs), np.sinh(qs)
    fch, fsh = np.cosh(fs), np.sinh(fs)
    n_ann = len(fptr) - 1
    out = np.full(len(qs), np.inf)
    for i in range(len(qs)):
        w = _ang_win(qs[i], thr)
        a_lo, a_hi = _ann_span(qs[i], thr, h, n_ann)
        best = np.inf
        for a in range(a_lo, a_hi + 1):
            seg_th = fth[fptr[a]:fptr[a + 1]]
            if not len(seg_th):
                continue
            for lo, hi in _window_ranges(seg_th, qth[i] - w, qth[i] + w):
                sl = slice(fptr[a] + lo, fptr[a] + hi)
                cd = qch[i] * fch[sl] - qsh[i] * fsh[sl] * np.cos(qth[i] - fth[sl])
                m = float(np.min(cd)) if cd.size else np.inf
                best = min(best, m)
        out[i] = math.acosh(max(best, 1.0)) if np.isfinite(best) else np.inf
    return out


def nearest_gen(kind, M, v, reach, qxy, fxy):
    out = np.full(len(qxy), np.inf)
    for i in range(len(qxy)):
        if len(fxy):
            d = dist_point_set(kind, M, v, qxy[i], fxy, reach)
            out[i] = float(np.min(d))
    return out


# ---------------------------------------------------------------------------
# exact Cheeger by subset enumeration (chunked)


def cheeger_exact(adj, vmap, cap):
    """Minimum |boundary F| / |F| over interior subsets F, |F| <= cap.

    adj is the dense bool (n_int, V) adjacency of interior vertices against
    all graph vertices; vmap maps interior index -> V index. The boundary of
    F is the set of vertices outside F adjacent to F.
    """
    n, V = adj.shape
    A = adj.astype(np.float64)
    best_num, best_den = -1, 1
    chunk = 1 << 16
    bitcols = np.arange(n, dtype=np.uint64)
    for start in range(0, 1 << n, chunk):
        idx = np.arange(start, min(start + chunk, 1 << n), dtype=np.uint64)
        bits = ((idx[:, None] >> bitcols[None, :]) & 1).astype(np.float64)
        size = bits.sum(1)
        ok = (size >= 1) & (size <= cap)
        if not np.any(ok):
            continue
        bits = bits[ok]
        size = size[ok].astype(np.int64)
        nbr = bits @ A  # counts of F-neighbours per V vertex
        mem = np.zeros((len(bits), V))
        mem[:, vmap] = bits
        bnd = ((nbr > 0.5) & (mem < 0.5)).sum(1)
        for num, den in zip(bnd.tolist(), size.tolist()):
            if best_num < 0 or num * best_den < best_num * den:
                best_num, best_den = num, den
    return best_num, best_den
