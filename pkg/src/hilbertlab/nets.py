"""Epsilon-separated nets inside Hilbert balls and their proximity graphs.

Construction is randomized-greedy over low-discrepancy candidate streams,
annulus by annulus (annulus width eps/2, so separation conflicts reach back
at most three frozen annuli). Maximality is certified statistically: rounds
of probe points check the covering radius, any probe farther than eps from
the net is inserted as a net point (such a probe is automatically
eps-separated from everything), and the certificate restarts until two
consecutive clean rounds.

Query backends:

* "hyp" (2D ellipsoids): the body is affinely a Klein disk, so points get
  exact polar coordinates (s, theta) about the center via a hyperboloid
  boost, and all range searches use the hyperbolic law of cosines with
  theta-windowed annulus scans. This is what makes half-million-point disk
  nets tractable.
* "gen" (polytopes, superellipses): direct chord distances through the
  jitted kernels, brute-force scans. Polygon nets stay small (polynomial
  growth), so this is enough.
* oracle bodies fall back to the same brute-force logic in plain numpy.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels as K
from .angular import sliver_cutoff
from .body import GENERIC
from .measure import omega, radial_shells

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

_log = logging.getLogger(__name__)


def _vdc(idx):
    """Van der Corput radical inverse base 2 for nonnegative int indices."""
    idx = np.asarray(idx, np.uint64).copy()
    out = np.zeros(len(idx), float)
    f = 0.5
    while np.any(idx):
        out += f * (idx & 1)
        idx >>= 1
        f *= 0.5
    return out


# ---------------------------------------------------------------------------
# exact polar coordinates for ellipsoid bodies (Klein chart + boost)


class _HypChart:
    """Maps body points to hyperbolic polar coordinates centered at x0.

    y = A(x - c) sends the ellipsoid to the unit Klein disk (an isometry of
    Hilbert metrics); a Lorentz boost on the hyperboloid moves y0 to the
    origin, after which s is the exact Hilbert distance to x0 and theta the
    exact angle, satisfying cosh d = ch1 ch2 - sh1 sh2 cos(dtheta).
    """

    def __init__(self, body, x0):
        Q = np.asarray(body.M, float)
        c = np.asarray(body.v, float)
        L = np.linalg.cholesky(Q)
        self.A = L.T
        self.Ainv = np.linalg.inv(L.T)
        self.c = c
        y0 = self.A @ (np.asarray(x0, float) - c)
        self.c0 = 1.0 / math.sqrt(1.0 - float(y0 @ y0))
        self.b = self.c0 * y0

    def to_polar(self, X):
        Y = (np.atleast_2d(X) - self.c) @ self.A.T
        r2 = np.einsum("ij,ij->i", Y, Y)
        xt = 1.0 / np.sqrt(np.maximum(1.0 - r2, 1e-300))
        xs = Y * xt[:, None]
        dot = xs @ self.b
        Xt = self.c0 * xt - dot
        Xs = xs - self.b[None, :] * (xt - dot / (1.0 + self.c0))[:, None]
        s = np.arccosh(np.maximum(Xt, 1.0))
        th = np.mod(np.arctan2(Xs[:, 1], Xs[:, 0]) + np.pi, 2 * np.pi) - np.pi
        return s, th

    def to_xy(self, s, th):
        Xt = np.cosh(s)
        Xs = np.stack([np.sinh(s) * np.cos(th), np.sinh(s) * np.sin(th)], 1)
        dot = Xs @ self.b
        xt = self.c0 * Xt + dot
        xs = Xs + self.b[None, :] * (Xt + dot / (1.0 + self.c0))[:, None]
        return self.c + (xs / xt[:, None]) @ self.Ainv.T


# ---------------------------------------------------------------------------
# brute-force fallbacks for oracle bodies (kernels cover the other kinds)


def _pack_oracle(ops, cxy, fxy, eps):
    keep = np.zeros(len(cxy), bool)
    acc = list(fxy)
    for i in range(len(cxy)):
        ok = True
        if acc:
            d = ops.dist_point_set(cxy[i], np.asarray(acc))
            ok = not np.any(d <= eps)
        if ok:
            keep[i] = True
            acc.append(cxy[i])
    return keep


def _query_oracle(ops, qxy, fxy, thr):
    rows = [np.sort(np.flatnonzero(ops.dist_point_set(q, fxy) <= thr)) for q in qxy]
    indptr = np.zeros(len(qxy) + 1, np.int64)
    indptr[1:] = np.cumsum([len(r) for r in rows])
    flat = np.concatenate(rows) if rows else np.empty(0, np.int64)
    return indptr, flat.astype(np.int64)


def _nearest_oracle(ops, qxy, fxy):
    return np.array([float(np.min(ops.dist_point_set(q, fxy))) for q in qxy])


# ---------------------------------------------------------------------------
# net container


@dataclass(frozen=True, eq=False)
class Net:
    body: object
    domain_center: np.ndarray
    domain_radius: float
    epsilon: float
    seed: int
    points: np.ndarray  # (N, n), points[0] == domain_center
    s: np.ndarray  # Hilbert distances to the center
    mode: str  # "hyp" | "gen"
    covering_radius_est: float
    certificate: dict = field(default_factory=dict)
    theta: np.ndarray | None = None
    chart: object = None
    _index: list = field(default_factory=list, repr=False)

    def __len__(self):
        return len(self.points)

    def _ann(self):
        """(fs, fth, fptr, gidx) theta-sorted annulus structure, hyp mode."""
        if not self._index:
            h = 0.5 * self.epsilon
            n_ann = max(1, int(math.ceil(self.domain_radius / h)) + 1)
            ann = np.minimum((self.s / h).astype(np.int64), n_ann - 1)
            order = np.lexsort((self.theta, ann))
            counts = np.bincount(ann[order], minlength=n_ann)
            fptr = np.zeros(n_ann + 1, np.int64)
            fptr[1:] = np.cumsum(counts)
            self._index.append((np.ascontiguousarray(self.s[order]),
                                np.ascontiguousarray(self.theta[order]),
                                fptr, order.astype(np.int64)))
        return self._index[0]

    def query(self, X, thr, exclude_self=False):
        """CSR (indptr, hits) of net indices within Hilbert distance thr of
        each query row; rows sorted ascending."""
        X = np.atleast_2d(np.asarray(X, float))
        if self.mode == "hyp":
            if X is self.points:
                qs, qth = self.s, self.theta
            else:
                qs, qth = self.chart.to_polar(X)
            fs, fth, fptr, gidx = self._ann()
            indptr, flat = K.query_hyp(np.ascontiguousarray(qs), np.ascontiguousarray(qth),
                                       fs, fth, fptr, gidx, math.cosh(thr), thr, False,
                                       0.5 * self.epsilon)
        elif self.body.kind != GENERIC:
            o = self.body.ops()
            indptr, flat = K.query_gen(o.k, o.M, o.v, o.reach,
                                       np.ascontiguousarray(X),
                                       np.ascontiguousarray(self.points),
                                       np.arange(len(self.points), dtype=np.int64),
                                       thr, False)
        else:
            indptr, flat = _query_oracle(self.body.ops(), X, self.points, thr)
        if exclude_self:
            rows = np.repeat(np.arange(len(X), dtype=np.int64), np.diff(indptr))
            keep = flat != rows
            counts = np.zeros(len(X) + 1, np.int64)
            np.add.at(counts[1:], rows[keep], 1)
            return np.cumsum(counts), flat[keep]
        return indptr, flat

    def nearest(self, X, window=None):
        """Distance to the nearest net point per query row. In hyp mode the
        scan is theta-windowed: inf means farther than `window`."""
        X = np.atleast_2d(np.asarray(X, float))
        if self.mode == "hyp":
            qs, qth = self.chart.to_polar(X)
            fs, fth, fptr, _ = self._ann()
            w = window if window is not None else 2.0 * self.epsilon
            return K.nearest_hyp(qs, qth, fs, fth, fptr, w, 0.5 * self.epsilon)
        if self.body.kind != GENERIC:
            o = self.body.ops()
            return K.nearest_gen(o.k, o.M, o.v, o.reach,
                                 np.ascontiguousarray(X),
                                 np.ascontiguousarray(self.points))
        return _nearest_oracle(self.body.ops(), X, self.points)


# ---------------------------------------------------------------------------
# candidate / probe streams


class _GenSampler:
    """Low-discrepancy (t, theta) stream matched to where the measure sits.

    Half the stream is uniform in angle; for bodies with corner features
    the other half descends the slivers log-uniformly (matching their
    roughly constant mass per octave of angular depth) down to the cutoff
    at the stream's outer radius. Radial positions use the closed-form ray
    parameter, so every sample knows its exact Hilbert distance s = t.
    """

    def __init__(self, body, x0, R):
        self.body = body
        self.x0 = np.asarray(x0, float)
        self.dim = body.dim
        self.feats = body.feature_directions(self.x0) if body.dim == 2 else None
        t, shells = radial_shells(body, x0, max(R, 0.25), t_per_unit=8,
                                  m_theta=512, m_dir=128)
        self.t_grid = t
        self.cum = np.concatenate([[0.0], np.cumsum(0.5 * np.diff(t) * (shells[1:] + shells[:-1]))])

    def mass(self, ta, tb):
        lo, hi = np.interp([ta, tb], self.t_grid, self.cum)
        return float(hi - lo)

    def _mix_angles(self, corner, u_lane, u_pos, t_hi):
        th = 2 * np.pi * u_pos - np.pi
        if self.feats is None:
            return th
        k = len(self.feats)
        lane = np.minimum((u_lane * 2 * k).astype(np.int64), 2 * k - 1)
        wedge = np.diff(np.concatenate([self.feats, [self.feats[0] + 2 * np.pi]]))
        half = np.maximum(0.5 * wedge[lane % k], 1e-8)
        lo = sliver_cutoff(t_hi)
        phi = lo * (np.maximum(half, 2 * lo) / lo) ** u_pos
        sgn = np.where(lane < k, 1.0, -1.0)
        th_c = self.feats[lane % k] + sgn * np.minimum(phi, half)
        out = np.where(corner, th_c, th)
        return np.mod(out + np.pi, 2 * np.pi) - np.pi

    def _positions(self, t, th_or_u):
        if self.dim == 2:
            U = np.stack([np.cos(th_or_u), np.sin(th_or_u)], 1)
        else:
            U = th_or_u
        tm, tp = self.body.ops().profile_tvals(self.x0, U)
        E = np.exp(2.0 * t)
        tau = (E - 1.0) * tm * tp / (tp + E * tm)
        return self.x0[None, :] + tau[:, None] * U

    def band(self, idx, offs, ta, tb):
        """Candidate stream for one annulus: stratified t, mixed angles."""
        t = ta + (tb - ta) * _vdc(idx + 1)
        if self.dim != 2:
            U = _nd_dirs(len(idx), self.dim, offs[0])
            return self._positions(t, U), t
        u_lane = np.mod(idx * GOLDEN + offs[0], 1.0)
        u_pos = np.mod(idx * GOLDEN * GOLDEN + offs[1], 1.0)
        th = self._mix_angles(idx % 2 == 1, u_lane, u_pos, tb)
        return self._positions(t, th), t

    def probe(self, n, rng):
        """Fresh probes over the whole domain, measure-weighted in t."""
        t = np.interp(rng.random(n) * self.cum[-1], self.cum, self.t_grid)
        if self.dim != 2:
            U = _nd_dirs(n, self.dim, float(rng.random()))
            return self._positions(t, U), t
        th = self._mix_angles(rng.random(n) < 0.5, rng.random(n), rng.random(n),
                              float(self.t_grid[-1]))
        return self._positions(t, th), t


def _nd_dirs(m, n, off):
    from scipy.special import ndtri
    from scipy.stats import qmc

    h = qmc.Halton(d=n, scramble=False).random(m + 17)[17:]
    U = ndtri(np.clip(np.mod(h + off, 1.0), 1e-12, 1 - 1e-12))
    return U / np.linalg.norm(U, axis=1, keepdims=True)


# ---------------------------------------------------------------------------
# build


def build_net(body, x0, domain_radius, epsilon, seed=0, oversample=12.0,
              n_build_probes=None, max_rounds=300):
    """Greedy maximal packing of B(x0, domain_radius) at separation epsilon.

    Candidate order is fixed by the low-discrepancy streams (reproducible
    tie-breaking); oversample scales stream density relative to one
    candidate per (eps/2)-ball of Hilbert measure. x0 is always the first
    net point. Returns a Net whose covering_radius_est <= epsilon is
    certified on the final probe rounds. n_build_probes defaults to six
    probes per (eps/2)-ball so the certification effort tracks the domain
    measure.
    """
    x0 = np.asarray(x0, float)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if domain_radius < 0:
        raise ValueError("domain_radius must be nonnegative")
    if not body.contains(x0):
        raise ValueError("net center must be interior")
    rng = np.random.default_rng(seed)
    hyp = body.kind == K.ELLIPSOID and body.dim == 2
    chart = _HypChart(body, x0) if hyp else None
    h = 0.5 * epsilon
    n_ann = max(1, int(math.ceil(domain_radius / h)))
    area_ref = omega(body.dim) * (0.5 * epsilon) ** body.dim
    sampler = None if hyp else _GenSampler(body, x0, domain_radius)
    cosh_eps = math.cosh(epsilon)
    o = body.ops()
    oracle = body.kind == GENERIC
    if n_build_probes is None:
        # per-round budget ~ 8 probes per (eps/2)-ball keeps the expected
        # number of certification rounds roughly independent of domain size
        total = 2 * np.pi * (math.cosh(domain_radius) - 1.0) if hyp \
            else sampler.mass(0.0, domain_radius)
        n_build_probes = int(min(max(100_000, 8.0 * total / area_ref), 20_000_000))

    # accepted points grouped by annulus; x0 seeds annulus 0
    acc_xy = [[] for _ in range(n_ann)]
    acc_s = [[] for _ in range(n_ann)]
    acc_th = [[] for _ in range(n_ann)]
    stream_pos = 0
    for a in range(n_ann):
        ta, tb = a * h, min((a + 1) * h, domain_radius)
        if tb <= ta and a > 0:
            continue
        if hyp:
            mass = 2 * np.pi * (math.cosh(tb) - math.cosh(ta))
        else:
            mass = sampler.mass(ta, tb)
        n_c = int(math.ceil(oversample * mass / area_ref)) + 4
        idx = np.arange(stream_pos, stream_pos + n_c, dtype=np.int64)
        stream_pos += n_c
        offs = rng.random(2)
        lo_a = max(0, a - 3)
        if hyp:
            cs = np.arccosh(np.cosh(ta) + _vdc(idx + 1) * (math.cosh(tb) - math.cosh(ta)))
            cth = 2 * np.pi * np.mod(idx * GOLDEN + offs[0], 1.0) - np.pi
            if a == 0:
                cs = np.concatenate([[0.0], cs])
                cth = np.concatenate([[0.0], cth])
            fs, fth, fptr = _freeze(acc_s, acc_th, lo_a, a)
            keep = K.pack_annulus_hyp(np.ascontiguousarray(cs), np.ascontiguousarray(cth),
                                      fs, fth, fptr, cosh_eps, epsilon)
            if np.any(keep):
                acc_s[a].append(cs[keep])
                acc_th[a].append(cth[keep])
                acc_xy[a].append(chart.to_xy(cs[keep], cth[keep]))
        else:
            cxy, ct = sampler.band(idx, offs, ta, tb)
            if a == 0:
                cxy = np.concatenate([x0[None, :], cxy])
                ct = np.concatenate([[0.0], ct])
            fxy = _frozen_xy(acc_xy, lo_a, a, body.dim)
            cxy = np.ascontiguousarray(cxy)
            if oracle:
                keep = _pack_oracle(o, cxy, fxy, epsilon)
            else:
                keep = K.pack_annulus_gen(o.k, o.M, o.v, o.reach, cxy, fxy, epsilon)
            if np.any(keep):
                acc_xy[a].append(cxy[keep])
                acc_s[a].append(ct[keep])
                acc_th[a].append(np.zeros(int(np.sum(keep))))

    points = np.concatenate([p for ann in acc_xy for p in ann])
    s_all = np.concatenate([p for ann in acc_s for p in ann])
    th_all = np.concatenate([p for ann in acc_th for p in ann])

    net = Net(body=body, domain_center=x0, domain_radius=domain_radius,
              epsilon=epsilon, seed=seed, points=points, s=s_all,
              mode="hyp" if hyp else "gen", covering_radius_est=0.0,
              theta=th_all if hyp else None, chart=chart)

    # deterministic hole elimination before the random certification: geodesic
    # Delaunay circumcenters catch every interior hole directly, a rim sweep
    # catches gaps along the domain boundary circle
    n_refined = n_rim = 0
    if hyp:
        net, n_refined = _refine_hyp(net, cosh_eps, epsilon, o)
        net, n_rim = _rim_sweep(net, cosh_eps, epsilon, o)

    # covering certification with insert-restart; rounds are chunked so the
    # probe arrays stay bounded in memory at large domain radii
    chunk = 2_000_000
    clean, rounds, inserted, cov = 0, 0, 0, 0.0
    while rounds < max_rounds:
        rounds += 1
        round_clean = True
        round_max = 0.0
        left = n_build_probes
        while left > 0:
            m = min(left, chunk)
            left -= m
            if hyp:
                ps = np.arccosh(1.0 + rng.random(m) * (math.cosh(domain_radius) - 1.0))
                pth = 2 * np.pi * rng.random(m) - np.pi
                P = chart.to_xy(ps, pth)
                d = net.nearest(P, window=2.0 * epsilon)
            else:
                ps = pth = None
                P, _ = sampler.probe(m, rng)
                d = net.nearest(P)
            bad = ~(d <= epsilon)
            if np.any(bad):
                round_clean = False
                n_new, net = _insert(net, P[bad],
                                     ps[bad] if hyp else None,
                                     pth[bad] if hyp else None,
                                     cosh_eps, epsilon, o, oracle)
                inserted += n_new
            elif len(d):
                round_max = max(round_max, float(np.max(d)))
        _log.debug("certify round %d: n=%d inserted=%d clean=%s",
                   rounds, len(net), inserted, round_clean)
        if round_clean:
            cov = round_max
            clean += 1
            if clean >= 2:
                break
        else:
            clean = 0
    else:
        raise RuntimeError("covering certification did not converge")

    cert = {"probe_rounds": rounds, "inserted": inserted,
            "probes_per_round": n_build_probes,
            "refined": n_refined, "rim_inserted": n_rim}
    return Net(body=body, domain_center=x0, domain_radius=domain_radius,
               epsilon=epsilon, seed=seed, points=net.points, s=net.s,
               mode=net.mode, covering_radius_est=cov, certificate=cert,
               theta=net.theta, chart=chart)


def _freeze(acc_s, acc_th, lo_a, a):
    """Theta-sorted per-annulus frozen arrays over annuli [lo_a, a)."""
    s_parts, th_parts, fptr = [], [], [0]
    for aa in range(lo_a, a):
        if acc_s[aa]:
            cs = np.concatenate(acc_s[aa])
            cth = np.concatenate(acc_th[aa])
            order = np.argsort(cth)
            s_parts.append(cs[order])
            th_parts.append(cth[order])
            fptr.append(fptr[-1] + len(cs))
        else:
            fptr.append(fptr[-1])
    if s_parts:
        return (np.ascontiguousarray(np.concatenate(s_parts)),
                np.ascontiguousarray(np.concatenate(th_parts)),
                np.array(fptr, np.int64))
    return np.empty(0), np.empty(0), np.array(fptr, np.int64)


def _frozen_xy(acc_xy, lo_a, a, dim):
    parts = [p for aa in range(lo_a, a) for p in acc_xy[aa]]
    if parts:
        return np.ascontiguousarray(np.concatenate(parts))
    return np.empty((0, dim))


def _refine_hyp(net, cosh_eps, epsilon, ops, max_passes=40):
    """Insert the deepest point of every interior hole until none remain.

    Net points are exact hyperbolic points in the chart, so the Euclidean
    Delaunay triangulation of their Poincare coordinates is the geodesic
    triangulation and every circumdisk is empty of net points: a triangle
    whose circumradius exceeds epsilon is an uncovered hole whose deepest
    point is the circumcenter, which consequently inserts without violating
    the separation guarantee. Repeating until all circumradii are at most
    epsilon certifies covering over the convex hull of the net.
    """
    from scipy.spatial import Delaunay, QhullError

    eta = np.array([1.0, -1.0, -1.0])
    ce2 = math.cosh(epsilon) ** 2
    total = 0
    for _ in range(max_passes):
        if len(net) < 4:
            break
        s, th = net.s, net.theta
        r = np.tanh(0.5 * s)
        try:
            tri = Delaunay(np.column_stack([r * np.cos(th), r * np.sin(th)]))
        except QhullError:
            break
        V = np.column_stack([np.cosh(s),
                             np.sinh(s) * np.cos(th),
                             np.sinh(s) * np.sin(th)])
        T = V[tri.simplices]
        G = np.einsum("tik,k,tjk->tij", T, eta, T)
        a00, a01, a02 = G[:, 0, 0], G[:, 0, 1], G[:, 0, 2]
        a11, a12, a22 = G[:, 1, 1], G[:, 1, 2], G[:, 2, 2]
        # adjugate row sums: G u = det * ones without per-triangle solves
        c00 = a11 * a22 - a12 * a12
        c01 = a02 * a12 - a01 * a22
        c02 = a01 * a12 - a02 * a11
        c11 = a00 * a22 - a02 * a02
        c12 = a01 * a02 - a00 * a12
        c22 = a00 * a11 - a01 * a01
        det = a00 * c00 + a01 * c01 + a02 * c02
        u0, u1, u2 = c00 + c01 + c02, c01 + c11 + c12, c02 + c12 + c22
        ssum = u0 + u1 + u2
        # cosh(circumradius)^2 = det/ssum for a compact circumcircle
        hole = (det > 0) & (ssum > 0) & (det > ssum * ce2)
        if not np.any(hole):
            break
        w = (u0[hole, None] * T[hole, 0] + u1[hole, None] * T[hole, 1]
             + u2[hole, None] * T[hole, 2]) / np.sqrt(det[hole] * ssum[hole])[:, None]
        s_z = np.arccosh(np.maximum(w[:, 0], 1.0))
        th_z = np.arctan2(w[:, 2], w[:, 1])
        keep = s_z <= net.domain_radius
        if not np.any(keep):
            break
        xy = net.chart.to_xy(s_z[keep], th_z[keep])
        n_new, net = _insert(net, xy, s_z[keep], th_z[keep],
                             cosh_eps, epsilon, ops, False)
        total += n_new
        if not n_new:
            break
    return net, total


def _rim_sweep(net, cosh_eps, epsilon, ops, max_passes=20):
    """Insert rim-circle points left uncovered between the hull and the rim.

    The circumradius certificate only reaches the convex hull of the net in
    the chart; slivers between the hull and the domain circle are swept by a
    dense deterministic rim grid, golden-offset per pass."""
    R = net.domain_radius
    m = int(min(max(2.0 * np.pi * math.sinh(R) / (0.1 * epsilon), 1024), 40_000_000))
    chunk = 2_000_000
    total = 0
    for p in range(max_passes):
        inserted = 0
        for lo in range(0, m, chunk):
            idx = np.arange(lo, min(lo + chunk, m))
            th = 2.0 * np.pi * np.mod((idx + 0.5 + p * GOLDEN) / m, 1.0) - np.pi
            ps = np.full(len(th), float(R))
            P = net.chart.to_xy(ps, th)
            d = net.nearest(P, window=2.0 * epsilon)
            bad = ~(d <= epsilon)
            if np.any(bad):
                n_new, net = _insert(net, P[bad], ps[bad], th[bad],
                                     cosh_eps, epsilon, ops, False)
                inserted += n_new
        total += inserted
        if not inserted:
            break
    return net, total


def _insert(net, P, ps, pth, cosh_eps, epsilon, o, oracle):
    """Append probe points (each > eps from the net) after filtering them
    against each other for mutual separation."""
    if net.mode == "hyp":
        fs, fth, fptr, _ = net._ann()
        keep = K.pack_annulus_hyp(np.ascontiguousarray(ps), np.ascontiguousarray(pth),
                                  fs, fth, fptr, cosh_eps, epsilon)
        newP, new_s, new_th = P[keep], ps[keep], pth[keep]
    else:
        P = np.ascontiguousarray(P)
        fxy = np.ascontiguousarray(net.points)
        if oracle:
            keep = _pack_oracle(o, P, fxy, epsilon)
        else:
            keep = K.pack_annulus_gen(o.k, o.M, o.v, o.reach, P, fxy, epsilon)
        newP = P[keep]
        new_s = o.dist_point_set(net.domain_center, np.ascontiguousarray(newP)) \
            if len(newP) else np.empty(0)
        new_th = np.zeros(len(newP))
    if not len(newP):
        return 0, net
    return len(newP), Net(
        body=net.body, domain_center=net.domain_center,
        domain_radius=net.domain_radius, epsilon=net.epsilon, seed=net.seed,
        points=np.concatenate([net.points, newP]),
        s=np.concatenate([net.s, new_s]),
        mode=net.mode, covering_radius_est=net.covering_radius_est,
        certificate=net.certificate,
        theta=np.concatenate([net.theta, new_th]) if net.theta is not None else None,
        chart=net.chart,
    )


# ---------------------------------------------------------------------------
# graph


@dataclass(frozen=True, eq=False)
class DiscretizationGraph:
    net: Net
    rho: float
    indptr: np.ndarray
    indices: np.ndarray
    degrees: np.ndarray

    @property
    def n_vertices(self):
        return len(self.indptr) - 1

    def neighbors(self, i):
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    @property
    def adjacency(self):
        return [self.neighbors(i) for i in range(self.n_vertices)]


def build_graph(net, rho=None):
    """Proximity graph: i ~ j iff 0 < d(x_i, x_j) <= 3 rho.

    rho defaults to the covering radius estimate rounded up to epsilon
    (so identical nets give identical graphs whatever the probe draws).
    Connectivity is asserted by BFS from vertex 0.
    """
    if rho is None:
        rho = net.epsilon * max(1, math.ceil(net.covering_radius_est / net.epsilon - 1e-12))
    if rho < net.covering_radius_est:
        raise ValueError("rho below the covering radius estimate")
    indptr, flat = net.query(net.points, 3.0 * rho, exclude_self=True)
    degrees = np.diff(indptr)
    lev = K.bfs_levels(indptr, flat, 0, len(net.points))
    if np.any(lev < 0):
        raise ValueError("graph is disconnected; increase rho or the probe budget")
    return DiscretizationGraph(net=net, rho=float(rho), indptr=indptr,
                               indices=flat, degrees=degrees)


def graph_distance(graph, i, j):
    """BFS hop count between vertices."""
    n = graph.n_vertices
    if not (0 <= i < n and 0 <= j < n):
        raise ValueError("vertex index out of range")
    if i == j:
        return 0
    lev = K.bfs_levels(graph.indptr, graph.indices, i, n)
    return int(lev[j])


def quasi_isometry_report(graph, n_pairs=100, seed=0):
    """Empirical quasi-isometry constants between d_C and hop distance.

    Fits the minimal a_lower with d_C <= a_lower * d_G and, fixing b = 1,
    the minimal a_upper with d_G <= a_upper * d_C + b. The per-hop bound
    d_C <= 3 rho d_G is asserted (every edge spans at most 3 rho). Whether
    the stronger d_C <= rho d_G happens to hold is reported but cannot be
    guaranteed: a single edge may legitimately span up to 3 rho.
    """
    if n_pairs < 10:
        raise ValueError("need n_pairs >= 10")
    n = graph.n_vertices
    if n < 2:
        return {"a_lower": 1.0, "a_upper": 1.0, "b": 0.0, "n_pairs": 0,
                "rho_inequality_holds": True, "three_rho_ok": True}
    rng = np.random.default_rng(seed)
    I = rng.integers(0, n, n_pairs)
    J = rng.integers(0, n, n_pairs)
    m = I != J
    I, J = I[m], J[m]
    o = graph.net.body.ops()
    dC = o.dist_rows(np.ascontiguousarray(graph.net.points[I]),
                     np.ascontiguousarray(graph.net.points[J]))
    dG = np.empty(len(I))
    for src in np.unique(I):
        lev = K.bfs_levels(graph.indptr, graph.indices, int(src), n)
        sel = I == src
        dG[sel] = lev[J[sel]]
    three_rho_ok = bool(np.all(dC <= 3.0 * graph.rho * dG + 1e-9))
    assert three_rho_ok, "some pair violates d_C <= 3 rho d_G"
    return {
        "a_lower": float(np.max(dC / dG)),
        "a_upper": float(np.max(np.maximum(dG - 1.0, 0.0) / dC)),
        "b": 1.0,
        "n_pairs": int(len(I)),
        "rho_inequality_holds": bool(np.all(dC <= graph.rho * dG + 1e-9)),
        "three_rho_ok": three_rho_ok,
    }


def cardinality_bound_check(net, x, r):
    """Count of net points in B(x, r) against the separated-set bound
    e^{n eps} 2^n ((e^{8r+2eps}-1)(e^{eps+2}-1)/(e^eps-1))^n, compared in
    logs since the bound overflows floats for moderate r."""
    x = np.asarray(x, float)
    if not net.body.contains(x):
        raise ValueError("query center must be interior")
    indptr, _ = net.query(x[None, :], r)
    count = int(indptr[1])
    n, eps = net.body.dim, net.epsilon
    log_bound = n * eps + n * math.log(2.0) + n * (
        _log_em1(8.0 * r + 2.0 * eps) + _log_em1(eps + 2.0) - _log_em1(eps)
    )
    return count == 0 or math.log(count) <= log_bound


def _log_em1(z):
    # log(e^z - 1) without overflow
    return z + math.log1p(-math.exp(-z)) if z > 1e-8 else math.log(math.expm1(z))


def certify_net(net, graph=None, n_probes=10_000, seed=1):
    """Separation / covering / cardinality checks, plus connectivity and
    degree-bound checks when a graph is supplied.

    Covering re-probes with fresh points independent of the build's rounds.
    Returns a dict of booleans and measured extremes.
    """
    eps = net.epsilon
    indptr, flat = net.query(net.points, eps - 1e-9, exclude_self=True)
    rng = np.random.default_rng(seed)
    body, x0, R = net.body, net.domain_center, net.domain_radius
    if net.mode == "hyp":
        ps = np.arccosh(1.0 + rng.random(n_probes) * (math.cosh(R) - 1.0))
        pth = 2 * np.pi * rng.random(n_probes) - np.pi
        P = net.chart.to_xy(ps, pth)
        d = net.nearest(P, window=2.0 * eps)
    else:
        sampler = _GenSampler(body, x0, max(R, 0.25))
        P, _ = sampler.probe(n_probes, rng)
        d = net.nearest(P)
    d = np.where(np.isfinite(d), d, 2.0 * eps)
    covering_max = float(np.max(d)) if len(d) else 0.0
    out = {
        "separation_ok": bool(len(flat) == 0),
        "covering_ok": bool(covering_max <= eps + 1e-6),
        "covering_max": covering_max,
        "n_probes": int(n_probes),
        "cardinality_ok": True,
    }
    for _ in range(8):
        i = int(rng.integers(0, len(net.points)))
        r = float(rng.uniform(0.3, 3.0))
        out["cardinality_ok"] &= cardinality_bound_check(net, net.points[i], r)
    if graph is not None:
        lev = K.bfs_levels(graph.indptr, graph.indices, 0, graph.n_vertices)
        out["connected_ok"] = bool(np.all(lev >= 0))
        r3 = 3.0 * graph.rho
        n = body.dim
        log_bound = n * eps + n * math.log(2.0) + n * (
            _log_em1(8.0 * r3 + 2.0 * eps) + _log_em1(eps + 2.0) - _log_em1(eps)
        )
        dmax = int(np.max(graph.degrees)) if graph.n_vertices else 0
        out["degree_ok"] = bool(dmax == 0 or math.log(dmax) <= log_bound)
        out["max_degree"] = dmax
    return out


# ---------------------------------------------------------------------------
# exports


def export_net_csv(net, path):
    cols = ",".join(f"x{i}" for i in range(net.points.shape[1]))
    lines = [cols]
    for row in net.points:
        lines.append(",".join(repr(float(c)) for c in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def export_graph_adjacency(graph, path):
    lines = [f"{i}: " + " ".join(str(int(j)) for j in graph.neighbors(i))
             for i in range(graph.n_vertices)]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def export_graph_dot(graph, path):
    lines = ["graph net {"]
    for i in range(graph.n_vertices):
        for j in graph.neighbors(i):
            if i < j:
                lines.append(f"  {i} -- {int(j)};")
    lines.append("}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
