"""Self-certification checks for the shipped package.

Thirteen independent criteria, each a callable returning (passed, detail).
run_acceptance executes a selection in index order, sharing the expensive
net builds between criteria, and returns one record per criterion. The CLI
``selftest`` subcommand and the acceptance test module both consume these
records; neither weakens a failing check.
"""

import contextlib
import io
import itertools
import math
import os
import tempfile
import time
from fractions import Fraction

import numpy as np

from .body import body_from_spec, projective_transform
from .measure import ball_measure, curve_length, folner_ratio, growth_curve, omega
from .metric import BallSpec, ball_boundary_polyline, distance
from .nets import build_graph, build_net, certify_net
from .spectral import (cheeger_graph_exact, cheeger_graph_sweep,
                       dirichlet_by_radius, inverse_cheeger_check,
                       lambda1_upper_estimate, markov_system, spectral_radius)


class _Shared:
    """Caches reused across criteria within one acceptance run."""

    def __init__(self):
        self.bodies = {}
        self.nets = {}
        self.graphs = {}
        self.rhos = {}

    def body(self, name):
        if name not in self.bodies:
            self.bodies[name] = body_from_spec(name)
        return self.bodies[name]

    def net(self, name, domain, eps=0.5):
        key = (name, domain, eps)
        if key not in self.nets:
            self.nets[key] = build_net(self.body(name), np.zeros(2), domain,
                                       eps, seed=0)
        return self.nets[key]

    def graph(self, name, domain, eps=0.5):
        key = (name, domain, eps)
        if key not in self.graphs:
            self.graphs[key] = build_graph(self.net(name, domain, eps))
        return self.graphs[key]

    def rho(self, name, r_interior, domain=11.5):
        key = (name, r_interior, domain)
        if key not in self.rhos:
            system = markov_system(self.graph(name, domain),
                                   dirichlet_by_radius(self.net(name, domain),
                                                       r_interior))
            self.rhos[key] = float(spectral_radius(system).rho)
        return self.rhos[key]


def _interior_points(body, rng, k, shrink=0.97):
    """k points sampled inside body, pulled slightly toward the origin so
    they stay numerically interior after projective maps."""
    lo, hi = body.bounding_box()
    out = np.empty((k, body.dim))
    have = 0
    while have < k:
        cand = shrink * rng.uniform(lo, hi, size=(max(64, 4 * k), body.dim))
        cand = cand[body.contains_batch(cand)]
        take = min(k - have, len(cand))
        out[have:have + take] = cand[:take]
        have += take
    return out


def _apply_homography(H, P):
    Ph = np.concatenate([P, np.ones((len(P), 1))], axis=1) @ H.T
    return Ph[:, :-1] / Ph[:, -1:]


def _warm(ctx):
    # compile every kernel family once so timed criteria measure compute
    disk, tri = ctx.body("disk"), ctx.body("triangle")
    for b in (disk, tri):
        distance(b, np.zeros(2), np.array([0.25, 0.1]))
        ball_measure(b, np.zeros(2), 0.5)
        ball_measure(b, np.zeros(2), 0.5, method="monte_carlo",
                     n_samples=2000, seed=0)
    poly = ball_boundary_polyline(disk, BallSpec(np.zeros(2), 0.5), 64)
    curve_length(disk, poly)
    net = build_net(disk, np.zeros(2), 1.5, 0.5, seed=0)
    system = markov_system(build_graph(net), dirichlet_by_radius(net, 1.0))
    spectral_radius(system)


def _c01_distance_oracle(ctx):
    """Unit disk distances against artanh, all nine checks under a second."""
    disk = ctx.body("disk")
    origin = np.zeros(2)
    ts = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
    distance(disk, origin, np.array([0.5, 0.0]))
    t0 = time.perf_counter()
    errs = [abs(distance(disk, origin, np.array([t, 0.0])) - math.atanh(t))
            for t in ts]
    dt = time.perf_counter() - t0
    ok = max(errs) <= 1e-9 and dt < 1.0
    return ok, f"max |d - artanh t| = {max(errs):.2e} over 9 points, {dt:.3f}s"


def _c02_projective_invariance(ctx):
    """d(Hp, Hq) == d(p, q) for random bounded homographies."""
    rng = np.random.default_rng(2)
    worst, used = 0.0, 0
    for name in ("triangle", "disk"):
        body = ctx.body(name)
        P = _interior_points(body, rng, 1000)
        Q = _interior_points(body, rng, 1000)
        d0 = body.ops().dist_rows(P, Q)
        accepted, attempts = 0, 0
        while accepted < 10 and attempts < 400:
            attempts += 1
            H = np.eye(3) + 0.12 * rng.standard_normal((3, 3))
            try:
                image = projective_transform(body, H)
            except (ValueError, np.linalg.LinAlgError):
                continue
            accepted += 1
            d1 = image.ops().dist_rows(_apply_homography(H, P),
                                       _apply_homography(H, Q))
            worst = max(worst, float(np.max(np.abs(d1 - d0))))
        used += accepted
    ok = worst <= 1e-6 and used == 20
    return ok, f"max |d(Hp,Hq) - d(p,q)| = {worst:.2e}, {used} maps x 1000 pairs"


def _c03_constant_curvature_measure(ctx):
    """Disk ball areas vs 2 pi (cosh R - 1) and circumferences vs 2 pi sinh R."""
    disk = ctx.body("disk")
    origin = np.zeros(2)
    parts, ok = [], True
    for i, R in enumerate((1.0, 2.0, 3.0)):
        est = ball_measure(disk, origin, R, method="monte_carlo",
                           n_samples=1_000_000, seed=30 + i)
        rel = abs(est.value - 2 * math.pi * (math.cosh(R) - 1)) \
            / (2 * math.pi * (math.cosh(R) - 1))
        ok = ok and rel <= 0.02
        parts.append(f"area R={R:.0f} rel {rel:.4f}")
    for R in (1.0, 2.0, 3.0):
        poly = ball_boundary_polyline(disk, BallSpec(origin, R), 8192)
        rel = abs(curve_length(disk, poly) - 2 * math.pi * math.sinh(R)) \
            / (2 * math.pi * math.sinh(R))
        ok = ok and rel <= 0.005
        parts.append(f"length R={R:.0f} rel {rel:.4f}")
    return ok, "; ".join(parts)


def _c04_measure_sandwich(ctx):
    """100 random ball measures land inside the two-sided volume bound."""
    bodies = [ctx.body(n) for n in ("triangle", "hexagon", "disk", "superellipse")]
    rng = np.random.default_rng(4)
    t0, inside = time.perf_counter(), 0
    for k in range(100):
        body = bodies[k % 4]
        x = _interior_points(body, rng, 1)[0]
        r = float(rng.uniform(0.25, 3.0))
        est = ball_measure(body, x, r, method="monte_carlo",
                           n_samples=10_000, m_dir=192, seed=400 + k)
        n = body.dim
        lo = omega(n) / (4.0 ** n * math.exp(2 * n * r)) \
            * ((math.exp(2 * r) - 1) / (math.exp(2 * (r + 1)) - 1)) ** n
        hi = ((math.exp(4 * r) - 1) / 2) ** n * omega(n)
        ci = 2.0 * est.std_error
        inside += (est.value - ci >= lo) and (est.value + ci <= hi)
    dt = time.perf_counter() - t0
    ok = inside == 100 and dt < 300.0
    return ok, f"{inside}/100 inside the bounds, {dt:.0f}s"


def _c05_growth_dichotomy(ctx):
    """Polygons grow polynomially with exponent near 2, the disk
    exponentially with rate near 1."""
    radii = np.linspace(5.0, 15.0, 11)
    origin = np.zeros(2)
    gt = growth_curve(ctx.body("triangle"), origin, radii)
    gh = growth_curve(ctx.body("hexagon"), origin, radii)
    gd = growth_curve(ctx.body("disk"), origin, radii)
    ok = (gt.classification == "polynomial" and 1.7 <= gt.fit_poly_exponent <= 2.3
          and gh.classification == "polynomial"
          and 1.7 <= gh.fit_poly_exponent <= 2.3
          and gd.classification == "exponential" and 0.9 <= gd.fit_exp_rate <= 1.1)
    return ok, (f"triangle {gt.classification} exp {gt.fit_poly_exponent:.3f}; "
                f"hexagon {gh.classification} exp {gh.fit_poly_exponent:.3f}; "
                f"disk {gd.classification} rate {gd.fit_exp_rate:.3f}")


def _c06_sphere_edge_growth(ctx):
    """Triangle sphere length grows linearly: length(S(R)) / 2R near 3."""
    tri = ctx.body("triangle")
    poly = ball_boundary_polyline(tri, BallSpec(np.zeros(2), 12.0), 4096)
    ratio = curve_length(tri, poly) / 24.0
    return 2.6 <= ratio <= 3.4, f"length(S(12)) / 24 = {ratio:.4f}"


def _c07_lambda1_bounds(ctx):
    """Disk estimate brackets 1/4; triangle estimates decay toward zero."""
    disk_rep = lambda1_upper_estimate(ctx.body("disk"))
    tri = ctx.body("triangle")
    vals = [lambda1_upper_estimate(tri, R_grid=(R,)).lambda_estimate
            for R in (4.0, 8.0, 12.0)]
    ok = (0.23 <= disk_rep.lambda_estimate <= 0.33
          and vals[0] > vals[1] > vals[2] and vals[2] <= 0.10)
    return ok, (f"disk {disk_rep.lambda_estimate:.4f}; triangle R=4,8,12: "
                + ", ".join(f"{v:.4f}" for v in vals))


def _c08_spectral_dichotomy(ctx):
    """Dirichlet walk radius rho(R): triangle climbs toward 1, disk plateaus
    below 0.95 with spread under 0.02."""
    tri = [ctx.rho("triangle", R) for R in (4.0, 6.0, 8.0, 10.0)]
    dsk = [ctx.rho("disk", R) for R in (6.0, 8.0, 10.0)]
    tri_ok = all(b > a for a, b in zip(tri, tri[1:])) and tri[-1] > 0.95
    spread = max(dsk) - min(dsk)
    disk_ok = max(dsk) <= 0.95 and spread < 0.02
    detail = ("triangle rho " + ", ".join(f"{r:.4f}" for r in tri)
              + f"; disk rho " + ", ".join(f"{r:.4f}" for r in dsk)
              + f", spread {spread:.4f}")
    return tri_ok and disk_ok, detail


def _c09_walk_eigenvalue_oracle(ctx):
    """Absorbing path walks: rho equals cos(pi / (m + 1)) exactly."""
    worst = 0.0
    for m in (3, 10, 50):
        adj = [[1]] + [[i - 1, i + 1] for i in range(1, m + 1)] + [[m]]
        rho = spectral_radius(markov_system(adj, (0, m + 1))).rho
        worst = max(worst, abs(rho - math.cos(math.pi / (m + 1))))
    return worst <= 1e-8, f"max |rho - cos(pi/(m+1))| = {worst:.2e}, m=3,10,50"


def _enumeration_cheeger(adj_sets, interior):
    # independent oracle: plain subset enumeration with Fraction arithmetic
    if len(interior) == 1:
        v = interior[0]
        return float(len(adj_sets[v] - {v}))
    best = None
    for size in range(1, len(interior) // 2 + 1):
        for F in itertools.combinations(interior, size):
            fs = set(F)
            boundary = set().union(*(adj_sets[v] for v in F)) - fs
            q = Fraction(len(boundary), len(F))
            if best is None or q < best:
                best = q
    return best.numerator / best.denominator


def _connected(adj):
    seen, stack = {0}, [0]
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(adj)


def _connected_within(adj, interior):
    # the sweep bound needs the interior-induced subgraph connected
    keep = set(interior)
    seen, stack = {interior[0]}, [interior[0]]
    while stack:
        for w in adj[stack.pop()]:
            if w in keep and w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(interior)


def _ternary_tree(depth):
    """Rooted tree, 3 edges at the root, 2 below; returns (adjacency, leaves)."""
    adj, level = [[]], [0]
    for d in range(depth):
        nxt = []
        for v in level:
            for _ in range(3 if d == 0 else 2):
                w = len(adj)
                adj.append([v])
                adj[v].append(w)
                nxt.append(w)
        level = nxt
    return adj, level


def _c10_cheeger_consistency(ctx):
    """Exact constant matches an independent enumeration on 50 random
    graphs, the sweep never undercuts it, and the regular-tree inverse
    bound holds."""
    rng = np.random.default_rng(10)
    checked = 0
    while checked < 50:
        n = int(rng.integers(5, 15))
        A = np.triu(rng.random((n, n)) < min(1.0, 2.8 / n), 1)
        A = A | A.T
        adj = [np.flatnonzero(A[i]).tolist() for i in range(n)]
        if any(not a for a in adj) or not _connected(adj):
            continue
        n_diri = int(rng.integers(0, n // 3 + 1))
        diri = sorted(rng.choice(n, n_diri, replace=False).tolist())
        interior = [v for v in range(n) if v not in set(diri)]
        if not interior or not _connected_within(adj, interior):
            continue
        exact = cheeger_graph_exact(adj, diri)
        oracle = _enumeration_cheeger([set(a) for a in adj], interior)
        if exact != oracle:
            return False, (f"graph {checked}: exact {exact!r} != "
                           f"enumeration {oracle!r}")
        sweep = cheeger_graph_sweep(adj, diri)
        if not sweep >= exact:
            return False, f"graph {checked}: sweep {sweep} < exact {exact}"
        checked += 1
    trees = []
    for depth in (3, 4):
        adj, leaves = _ternary_tree(depth)
        rep = inverse_cheeger_check(adj, leaves)
        trees.append((depth, rep))
    ok = all(bool(rep["holds"]) for _, rep in trees)
    return ok, ("50 graphs exact == enumeration, sweep >= exact; tree "
                "truncations " + ", ".join(
                    f"depth {d}: {r['cheeger']:.4f} >= {r['lower_bound']:.4f}"
                    for d, r in trees))


def _c11_folner_trend(ctx):
    """Triangle boundary/area ratios decay to zero, the disk ratio does not."""
    origin = np.zeros(2)
    tri = ctx.body("triangle")
    vals = [folner_ratio(tri, origin, float(R)) for R in (2, 4, 6, 8, 10)]
    decreasing = all(b < a for a, b in zip(vals, vals[1:]))
    disk_val = folner_ratio(ctx.body("disk"), origin, 8.0)
    ok = decreasing and vals[-1] <= 0.5 and 0.8 <= disk_val <= 1.2
    return ok, ("triangle " + ", ".join(f"{v:.4f}" for v in vals)
                + f"; disk at R=8: {disk_val:.4f}")


def _c12_net_certificates(ctx):
    """Every net built for the spectral runs passes its full certificate."""
    reports = {}
    for name in ("triangle", "disk"):
        reports[f"{name}@11.5"] = certify_net(ctx.net(name, 11.5),
                                              ctx.graph(name, 11.5))
    for name in ("hexagon", "superellipse"):
        net = build_net(ctx.body(name), np.zeros(2), 4.0, 0.5, seed=0)
        reports[f"{name}@4.0"] = certify_net(net, build_graph(net))
    bad = [k for k, rep in reports.items()
           if not all(v for kk, v in rep.items() if kk.endswith("_ok"))]
    if bad:
        return False, f"failing certificates: {bad}"
    return True, (f"{len(reports)} nets pass separation, covering, "
                  "cardinality, connectivity and degree checks")


def _c13_cli_determinism(ctx):
    """Identical verdict trend files across repeat runs and worker pools."""
    from . import cli

    blobs = []
    for workers in (8, 8, 1):
        out = tempfile.mkdtemp(prefix="hilbertlab_accept_")
        buf = io.StringIO()
        with contextlib.redirect_stdout(buf):
            rc = cli.main(["verdict", "--body", "triangle", "--radii", "4,8",
                           "--seed", "0", "--workers", str(workers),
                           "--out", out])
        if rc != 0:
            return False, f"verdict run exited {rc}"
        with open(os.path.join(out, "verdict_trends.csv"), "rb") as fh:
            blobs.append(fh.read())
    ok = blobs[0] == blobs[1] == blobs[2]
    return ok, ("verdict_trends.csv byte-identical across two runs and "
                "worker pools 8 and 1" if ok else
                "verdict_trends.csv differs between runs")


_CRITERIA = (
    (1, "distance_oracle", _c01_distance_oracle),
    (2, "projective_invariance", _c02_projective_invariance),
    (3, "constant_curvature_measure", _c03_constant_curvature_measure),
    (4, "measure_sandwich", _c04_measure_sandwich),
    (5, "growth_dichotomy", _c05_growth_dichotomy),
    (6, "sphere_edge_growth", _c06_sphere_edge_growth),
    (7, "lambda1_bounds", _c07_lambda1_bounds),
    (8, "spectral_dichotomy", _c08_spectral_dichotomy),
    (9, "walk_eigenvalue_oracle", _c09_walk_eigenvalue_oracle),
    (10, "cheeger_consistency", _c10_cheeger_consistency),
    (11, "folner_trend", _c11_folner_trend),
    (12, "net_certificates", _c12_net_certificates),
    (13, "cli_determinism", _c13_cli_determinism),
)


def run_acceptance(indices=None):
    """Run the numbered acceptance checks and return one record each.

    indices selects a subset (1-based); default runs all thirteen. Records
    are dicts with index, name, passed, detail and elapsed seconds. A
    criterion that raises is recorded as failed, never skipped.
    """
    known = {i for i, _, _ in _CRITERIA}
    wanted = known if indices is None else set(indices)
    if not wanted <= known:
        raise ValueError(f"unknown criteria: {sorted(wanted - known)}")
    ctx = _Shared()
    _warm(ctx)
    records = []
    for index, name, fn in _CRITERIA:
        if index not in wanted:
            continue
        t0 = time.perf_counter()
        try:
            passed, detail = fn(ctx)
        except Exception as exc:
            passed, detail = False, f"raised {type(exc).__name__}: {exc}"
        records.append({"index": index, "name": name, "passed": bool(passed),
                        "detail": detail,
                        "elapsed": time.perf_counter() - t0})
    return records
