"""Numba twins of the reference kernels in numpy_impl.

Same public names and semantics; scalar cores are jitted and the batch
entry points parallelise over points. Parallel loops only ever write to
their own index, and in-loop reductions run sequentially per index, so
results do not depend on the thread count.
"""

import math

import numpy as np
from numba import njit, prange

POLYTOPE, ELLIPSOID, SUPERELLIPSE = 0, 1, 2

_TINY = 1e-300
_PAR = 1e-14


@njit(cache=True, inline="always")
def _se_root(pw, qw, x, y, ux, uy, reach):
    # first positive root of |x+t*ux|^p + |y+t*uy|^q = 1, safeguarded Newton
    lo, hi = 0.0, reach
    t = 0.5 * reach
    for _ in range(100):
        ax = x + t * ux
        ay = y + t * uy
        sx = abs(ax)
        sy = abs(ay)
        g = sx**pw + sy**qw - 1.0
        if g < 0.0:
            lo = t
        else:
            hi = t
        if hi - lo < 1e-15 * (1.0 + hi):
            break
        dg = 0.0
        if sx > 0.0:
            dg += pw * sx ** (pw - 1.0) * (ux if ax >= 0.0 else -ux)
        if sy > 0.0:
            dg += qw * sy ** (qw - 1.0) * (uy if ay >= 0.0 else -uy)
        tn = -1.0
        if dg != 0.0:
            tn = t - g / dg
        if not (lo < tn < hi):
            tn = 0.5 * (lo + hi)
        t = tn
    return max(0.5 * (lo + hi), _TINY)


@njit(cache=True, inline="always")
def _tvals1(kind, M, v, p, u, reach):
    if kind == POLYTOPE:
        tp = 1e308
        tm = 1e308
        for i in range(M.shape[0]):
            s = 0.0
            r = v[i]
            for j in range(M.shape[1]):
                s += M[i, j] * u[j]
                r -= M[i, j] * p[j]
            if r < _TINY:
                r = _TINY
            if s > _PAR:
                q = r / s
                if q < tp:
                    tp = q
            elif s < -_PAR:
                q = -r / s
                if q < tm:
                    tm = q
        return tm, tp
    elif kind == ELLIPSOID:
        n = M.shape[0]
        a = 0.0
        b = 0.0
        c = -1.0
        for i in range(n):
            yi = p[i] - v[i]
            mu = 0.0
            my = 0.0
            for j in range(n):
                mu += M[i, j] * u[j]
                my += M[i, j] * (p[j] - v[j])
            a += u[i] * mu
            b += yi * mu
            c += yi * my
        disc = b * b - a * c
        if disc < 0.0:
            disc = 0.0
        disc = math.sqrt(disc)
        tp = (disc - b) / a
        tm = (disc + b) / a
        if tp < _TINY:
            tp = _TINY
        if tm < _TINY:
            tm = _TINY
        return tm, tp
    else:
        pw = v[0]
        qw = v[1]
        tp = _se_root(pw, qw, p[0], p[1], u[0], u[1], reach)
        tm = _se_root(pw, qw, p[0], p[1], -u[0], -u[1], reach)
        return tm, tp


@njit(cache=True, parallel=True)
def chord_tvals(kind, M, v, P, U, reach):
    m = P.shape[0]
    tm = np.empty(m)
    tp = np.empty(m)
    for i in prange(m):
        a, b = _tvals1(kind, M, v, P[i], U[i], reach)
        tm[i] = a
        tp[i] = b
    return tm, tp


@njit(cache=True, inline="always")
def _dist1(kind, M, v, p, q, reach, buf):
    n = p.shape[0]
    s = 0.0
    for j in range(n):
        d = q[j] - p[j]
        buf[j] = d
        s += d * d
    s = math.sqrt(s)
    if s == 0.0:
        return 0.0
    for j in range(n):
        buf[j] /= s
    tm, tp = _tvals1(kind, M, v, p, buf, reach)
    return 0.5 * math.log(((s + tm) / tm) * (tp / (tp - s)))


@njit(cache=True, parallel=True)
def dist_rows(kind, M, v, P, Q, reach):
    m = P.shape[0]
    out = np.empty(m)
    for i in prange(m):
        buf = np.empty(P.shape[1])
        out[i] = _dist1(kind, M, v, P[i], Q[i], reach, buf)
    return out


@njit(cache=True, parallel=True)
def dist_point_set(kind, M, v, x, P, reach):
    m = P.shape[0]
    out = np.empty(m)
    for i in prange(m):
        buf = np.empty(P.shape[1])
        out[i] = _dist1(kind, M, v, x, P[i], reach, buf)
    return out


@njit(cache=True, parallel=True)
def finsler_rows(kind, M, v, P, V, reach):
    m = P.shape[0]
    out = np.empty(m)
    for i in prange(m):
        n = P.shape[1]
        s = 0.0
        for j in range(n):
            s += V[i, j] * V[i, j]
        s = math.sqrt(s)
        if s == 0.0:
            out[i] = 0.0
            continue
        u = np.empty(n)
        for j in range(n):
            u[j] = V[i, j] / s
        tm, tp = _tvals1(kind, M, v, P[i], u, reach)
        out[i] = 0.5 * s * (1.0 / tm + 1.0 / tp)
    return out


@njit(cache=True)
def _poly_rpm1(M, v, p):
    """Exact mean of r(u)^2 at one interior point of a 2D polytope.

    The Finsler unit ball is B = {w : <(g_i - g_j)/2, w> <= 1, i != j}
    with g_i = a_i / slack_i, and mean r^2 over uniform directions is
    area(B)/pi. The area is summed face by face (fan from the origin,
    each face clipped to a 1D interval on its own support line), which
    stays well conditioned at the extreme eccentricities near polygon
    corners. Also returns the exact Euclidean boundary distance.
    """
    m = M.shape[0]
    g = np.empty((m, 2))
    worst = 1e308
    for i in range(m):
        d = v[i] - (M[i, 0] * p[0] + M[i, 1] * p[1])
        if d <= 0.0:
            return 0.0, 0.0
        g[i, 0] = M[i, 0] / d
        g[i, 1] = M[i, 1] / d
        bd = d / math.sqrt(M[i, 0] * M[i, 0] + M[i, 1] * M[i, 1])
        if bd < worst:
            worst = bd
    K = m * (m - 1)
    C = np.empty((K, 2))
    k = 0
    for i in range(m):
        for j in range(m):
            if i != j:
                C[k, 0] = 0.5 * (g[i, 0] - g[j, 0])
                C[k, 1] = 0.5 * (g[i, 1] - g[j, 1])
                k += 1
    area = 0.0
    for a in range(K):
        cx, cy = C[a, 0], C[a, 1]
        n2 = cx * cx + cy * cy
        if n2 <= 0.0:
            continue
        dup = False
        for b in range(a):
            if C[b, 0] == cx and C[b, 1] == cy:
                dup = True
                break
        if dup:
            continue
        nrm = math.sqrt(n2)
        fx, fy = cx / n2, cy / n2        # foot of perpendicular from 0
        tx, ty = -cy / nrm, cx / nrm     # unit tangent of the face line
        s_lo, s_hi = -1e300, 1e300
        empty = False
        for b in range(K):
            if b == a:
                continue
            den = C[b, 0] * tx + C[b, 1] * ty
            num = 1.0 - (C[b, 0] * fx + C[b, 1] * fy)
            if den > 0.0:
                r = num / den
                if r < s_hi:
                    s_hi = r
            elif den < 0.0:
                r = num / den
                if r > s_lo:
                    s_lo = r
            elif num < 0.0:
                empty = True
                break
        if not empty and s_hi > s_lo:
            area += 0.5 * (s_hi - s_lo) / nrm
    return area / math.pi, worst


@njit(cache=True, parallel=True)
def rpow_mean(kind, M, v, P, U, reach):
    m = P.shape[0]
    n = P.shape[1]
    md = U.shape[0]
    acc = np.empty(m)
    tmin = np.empty(m)
    if kind == POLYTOPE and n == 2:
        # exact closed form; the direction table is only a quadrature device
        # and cannot resolve the eccentric unit balls near polygon corners
        for i in prange(m):
            acc[i], tmin[i] = _poly_rpm1(M, v, P[i])
        return acc, tmin
    for i in prange(m):
        a = 0.0
        best = 1e308
        for j in range(md):
            tm, tp = _tvals1(kind, M, v, P[i], U[j], reach)
            r = 2.0 * tm * tp / (tm + tp)
            w = r
            for _ in range(n - 1):
                w *= r
            a += w
            if tm < best:
                best = tm
            if tp < best:
                best = tp
        acc[i] = a / md
        tmin[i] = best
    return acc, tmin


@njit(cache=True, parallel=True)
def profile_tvals(kind, M, v, x0, U, reach):
    m = U.shape[0]
    tm = np.empty(m)
    tp = np.empty(m)
    for i in prange(m):
        a, b = _tvals1(kind, M, v, x0, U[i], reach)
        tm[i] = a
        tp[i] = b
    return tm, tp


# ---------------------------------------------------------------------------
# sparse linear algebra


@njit(cache=True, parallel=True)
def csr_matvec(indptr, indices, vals, x):
    n = len(indptr) - 1
    y = np.empty(n)
    for i in prange(n):
        s = 0.0
        for k in range(indptr[i], indptr[i + 1]):
            s += vals[k] * x[indices[k]]
        y[i] = s
    return y


@njit(cache=True)
def vdot(a, b):
    # Kahan, single-threaded: exact same result for every pool size
    s = 0.0
    c = 0.0
    for i in range(len(a)):
        y = a[i] * b[i] - c
        t = s + y
        c = (t - s) - y
        s = t
    return s


@njit(cache=True)
def bfs_levels(indptr, indices, src, n):
    lev = np.full(n, -1, np.int64)
    queue = np.empty(n, np.int64)
    lev[src] = 0
    queue[0] = src
    head, tail = 0, 1
    while head < tail:
        u = queue[head]
        head += 1
        for k in range(indptr[u], indptr[u + 1]):
            w = indices[k]
            if lev[w] < 0:
                lev[w] = lev[u] + 1
                queue[tail] = w
                tail += 1
    return lev


# ---------------------------------------------------------------------------
# net packing / range search (see numpy_impl for the coordinate conventions)


@njit(cache=True, inline="always")
def _ang_win(s, thr):
    if s <= thr:
        return math.pi
    x = math.sinh(thr) / math.sinh(s)
    if x > 1.0:
        x = 1.0
    return math.asin(x)


@njit(cache=True, inline="always")
def _seg_conflict(ch, sh, th, fch, fsh, fth, a0, a1, lo, hi, cosh_thr):
    # scan the theta-sorted block [a0, a1) restricted to fth in [lo, hi]
    i = np.searchsorted(fth[a0:a1], lo) + a0
    j = np.searchsorted(fth[a0:a1], hi, side="right") + a0
    for k in range(i, j):
        if ch * fch[k] - sh * fsh[k] * math.cos(th - fth[k]) <= cosh_thr:
            return True
    return False


@njit(cache=True)
def pack_annulus_hyp(cs, cth, fs, fth, fptr, cosh_eps, eps):
    m = len(cs)
    keep = np.zeros(m, np.bool_)
    cch = np.cosh(cs)
    csh = np.sinh(cs)
    fch = np.cosh(fs)
    fsh = np.sinh(fs)
    # cell list over the current annulus, sized by the widest search window
    wmax = 0.0
    for i in range(m):
        w = _ang_win(cs[i], eps)
        if w > wmax:
            wmax = w
    ncells = 1
    if wmax < math.pi:
        ncells = int(2.0 * math.pi / wmax)
        if ncells < 1:
            ncells = 1
        if ncells > m + 1:
            ncells = m + 1
    cellw = 2.0 * math.pi / ncells
    head = np.full(ncells, -1, np.int64)
    nxt = np.full(m, -1, np.int64)
    na = len(fptr) - 1
    for i in range(m):
        w = _ang_win(cs[i], eps)
        lo = cth[i] - w
        hi = cth[i] + w
        bad = False
        for a in range(na):
            a0 = fptr[a]
            a1 = fptr[a + 1]
            if a1 == a0:
                continue
            if hi - lo >= 2.0 * math.pi:
                if _seg_conflict(cch[i], csh[i], cth[i], fch, fsh, fth, a0, a1, -4.0, 4.0, cosh_eps):
                    bad = True
                    break
            else:
                if _seg_conflict(cch[i], csh[i], cth[i], fch, fsh, fth, a0, a1, lo, hi, cosh_eps):
                    bad = True
                    break
                if lo < -math.pi and _seg_conflict(
                    cch[i], csh[i], cth[i], fch, fsh, fth, a0, a1, lo + 2 * math.pi, 4.0, cosh_eps
                ):
                    bad = True
                    break
                if hi > math.pi and _seg_conflict(
                    cch[i], csh[i], cth[i], fch, fsh, fth, a0, a1, -4.0, hi - 2 * math.pi, cosh_eps
                ):
                    bad = True
                    break
        if not bad:
            c0 = int(math.floor((lo + math.pi) / cellw))
            c1 = int(math.floor((hi + math.pi) / cellw))
            if c1 - c0 + 1 >= ncells:
                c0, c1 = 0, ncells - 1
            for cc in range(c0, c1 + 1):
                c = cc % ncells
                if c < 0:
                    c += ncells
                k = head[c]
                while k >= 0:
                    if cch[i] * cch[k] - csh[i] * csh[k] * math.cos(cth[i] - cth[k]) <= cosh_eps:
                        bad = True
                        break
                    k = nxt[k]
                if bad:
                    break
        if not bad:
            keep[i] = True
            c = int((cth[i] + math.pi) / cellw)
            if c >= ncells:
                c = ncells - 1
            nxt[i] = head[c]
            head[c] = i
    return keep


@njit(cache=True)
def pack_annulus_gen(kind, M, v, reach, cxy, fxy, eps):
    m = cxy.shape[0]
    n = cxy.shape[1]
    keep = np.zeros(m, np.bool_)
    acc = np.empty((m, n))
    nacc = 0
    buf = np.empty(n)
    for i in range(m):
        bad = False
        for k in range(fxy.shape[0]):
            if _dist1(kind, M, v, cxy[i], fxy[k], reach, buf) <= eps:
                bad = True
                break
        if not bad:
            for k in range(nacc):
                if _dist1(kind, M, v, cxy[i], acc[k], reach, buf) <= eps:
                    bad = True
                    break
        if not bad:
            keep[i] = True
            for j in range(n):
                acc[nacc, j] = cxy[i, j]
            nacc += 1
    return keep


@njit(cache=True, inline="always")
def _ann_span(s, thr, h, n_ann):
    # annuli overlapping the radial band [s - thr, s + thr]
    if h <= 0.0 or n_ann <= 0:
        return 0, n_ann - 1
    lo = int(max(s - thr, 0.0) / h)
    hi = int((s + thr) / h)
    if hi > n_ann - 1:
        hi = n_ann - 1
    return lo, hi


@njit(cache=True, inline="always")
def _hyp_row(i, qch, qsh, qth, w, fch, fsh, fth, fptr, gidx, cosh_thr, strict, out, cap, a_lo, a_hi):
    # collect hits for query i into out[:cap]; returns count (may exceed cap
    # in counting mode where out is a dummy of size 0 and cap < 0)
    cnt = 0
    lo = qth - w
    hi = qth + w
    for a in range(a_lo, a_hi + 1):
        a0 = fptr[a]
        a1 = fptr[a + 1]
        if a1 == a0:
            continue
        full = hi - lo >= 2.0 * math.pi
        for part in range(3):
            if full and part > 0:
                break
            if part == 0:
                pl, ph = (-4.0, 4.0) if full else (lo, hi)
            elif part == 1:
                if lo >= -math.pi:
                    continue
                pl, ph = lo + 2 * math.pi, 4.0
            else:
                if hi <= math.pi:
                    continue
                pl, ph = -4.0, hi - 2 * math.pi
            i0 = np.searchsorted(fth[a0:a1], pl) + a0
            i1 = np.searchsorted(fth[a0:a1], ph, side="right") + a0
            for k in range(i0, i1):
                cd = qch * fch[k] - qsh * fsh[k] * math.cos(qth - fth[k])
                if cd <= cosh_thr and ((not strict) or cd > 1.0):
                    if cap >= 0:
                        out[cnt] = gidx[k]
                    cnt += 1
    return cnt


@njit(cache=True, parallel=True)
def query_hyp(qs, qth, fs, fth, fptr, gidx, cosh_thr, thr, strict, h=0.0):
    nq = len(qs)
    na = len(fptr) - 1
    qch = np.cosh(qs)
    qsh = np.sinh(qs)
    fch = np.cosh(fs)
    fsh = np.sinh(fs)
    counts = np.zeros(nq, np.int64)
    dummy = np.empty(0, np.int64)
    for i in prange(nq):
        w = _ang_win(qs[i], thr)
        a_lo, a_hi = _ann_span(qs[i], thr, h, na)
        counts[i] = _hyp_row(i, qch[i], qsh[i], qth[i], w, fch, fsh, fth, fptr, gidx, cosh_thr, strict, dummy, -1, a_lo, a_hi)
    indptr = np.zeros(nq + 1, np.int64)
    for i in range(nq):
        indptr[i + 1] = indptr[i] + counts[i]
    flat = np.empty(indptr[nq], np.int64)
    for i in prange(nq):
        w = _ang_win(qs[i], thr)
        a_lo, a_hi = _ann_span(qs[i], thr, h, na)
        row = np.empty(counts[i], np.int64)
        _hyp_row(i, qch[i], qsh[i], qth[i], w, fch, fsh, fth, fptr, gidx, cosh_thr, strict, row, counts[i], a_lo, a_hi)
        row = np.sort(row)
        for k in range(counts[i]):
            flat[indptr[i] + k] = row[k]
    return indptr, flat


@njit(cache=True, parallel=True)
def query_gen(kind, M, v, reach, qxy, fxy, gidx, thr, strict):
    nq = qxy.shape[0]
    counts = np.zeros(nq, np.int64)
    for i in prange(nq):
        buf = np.empty(qxy.shape[1])
        c = 0
        for k in range(fxy.shape[0]):
            d = _dist1(kind, M, v, qxy[i], fxy[k], reach, buf)
            if d <= thr and ((not strict) or d > 0.0):
                c += 1
        counts[i] = c
    indptr = np.zeros(nq + 1, np.int64)
    for i in range(nq):
        indptr[i + 1] = indptr[i] + counts[i]
    flat = np.empty(indptr[nq], np.int64)
    for i in prange(nq):
        buf = np.empty(qxy.shape[1])
        c = indptr[i]
        for k in range(fxy.shape[0]):
            d = _dist1(kind, M, v, qxy[i], fxy[k], reach, buf)
            if d <= thr and ((not strict) or d > 0.0):
                flat[c] = gidx[k]
                c += 1
        row = np.sort(flat[indptr[i]:indptr[i + 1]])
        for k in range(len(row)):
            flat[indptr[i] + k] = row[k]
    return indptr, flat


@njit(cache=True, parallel=True)
def nearest_hyp(qs, qth, fs, fth, fptr, thr, h=0.0):
    nq = len(qs)
    qch = np.cosh(qs)
    qsh = np.sinh(qs)
    fch = np.cosh(fs)
    fsh = np.sinh(fs)
    out = np.full(nq, np.inf)
    na = len(fptr) - 1
    for i in prange(nq):
        w = _ang_win(qs[i], thr)
        lo = qth[i] - w
        hi = qth[i] + w
        a_lo, a_hi = _ann_span(qs[i], thr, h, na)
        best = 1e308
        for a in range(a_lo, a_hi + 1):
            a0 = fptr[a]
            a1 = fptr[a + 1]
            if a1 == a0:
                continue
            full = hi - lo >= 2.0 * math.pi
            for part in range(3):
                if full and part > 0:
                    break
                if part == 0:
                    pl, ph = (-4.0, 4.0) if full else (lo, hi)
                elif part == 1:
                    if lo >= -math.pi:
                        continue
                    pl, ph = lo + 2 * math.pi, 4.0
                else:
                    if hi <= math.pi:
                        continue
                    pl, ph = -4.0, hi - 2 * math.pi
                i0 = np.searchsorted(fth[a0:a1], pl) + a0
                i1 = np.searchsorted(fth[a0:a1], ph, side="right") + a0
                for k in range(i0, i1):
                    cd = qch[i] * fch[k] - qsh[i] * fsh[k] * math.cos(qth[i] - fth[k])
                    if cd < best:
                        best = cd
        if best < 1e308:
            if best < 1.0:
                best = 1.0
            out[i] = math.acosh(best)
    return out


@njit(cache=True, parallel=True)
def nearest_gen(kind, M, v, reach, qxy, fxy):
    nq = qxy.shape[0]
    out = np.full(nq, np.inf)
    for i in prange(nq):
        buf = np.empty(qxy.shape[1])
        best = np.inf
        for k in range(fxy.shape[0]):
            d = _dist1(kind, M, v, qxy[i], fxy[k], reach, buf)
            if d < best:
                best = d
        out[i] = best
    return out


# ---------------------------------------------------------------------------
# exact Cheeger via Gray-code enumeration


@njit(cache=True)
def cheeger_exact(adj, vmap, cap):
    n, V = adj.shape
    deg = np.zeros(n, np.int64)
    for i in range(n):
        for j in range(V):
            if adj[i, j]:
                deg[i] += 1
    ptr = np.zeros(n + 1, np.int64)
    for i in range(n):
        ptr[i + 1] = ptr[i] + deg[i]
    col = np.empty(ptr[n], np.int64)
    for i in range(n):
        c = ptr[i]
        for j in range(V):
            if adj[i, j]:
                col[c] = j
                c += 1
    inF = np.zeros(n, np.uint8)
    inFV = np.zeros(V, np.uint8)
    cnt = np.zeros(V, np.int64)
    size = 0
    B = 0
    best_num = np.int64(-1)
    best_den = np.int64(1)
    total = np.int64(1) << n
    i = np.int64(1)
    while i < total:
        ii = i
        b = 0
        while ii & 1 == 0:
            ii >>= 1
            b += 1
        vb = vmap[b]
        if inF[b]:
            inF[b] = 0
            inFV[vb] = 0
            size -= 1
            if cnt[vb] > 0:
                B += 1
            for k in range(ptr[b], ptr[b + 1]):
                w = col[k]
                cnt[w] -= 1
                if cnt[w] == 0 and inFV[w] == 0:
                    B -= 1
        else:
            inF[b] = 1
            inFV[vb] = 1
            size += 1
            if cnt[vb] > 0:
                B -= 1
            for k in range(ptr[b], ptr[b + 1]):
                w = col[k]
                cnt[w] += 1
                if cnt[w] == 1 and inFV[w] == 0:
                    B += 1
        if 1 <= size <= cap:
            if best_num < 0 or B * best_den < best_num * size:
                best_num = B
                best_den = size
        i += 1
    return best_num, best_den
