"""Random-walk spectra on discretization graphs and variational bounds.

The simple random walk (Th)(x) = (1/deg x) sum_{y~x} h(y) is truncated to
the vertices inside a ball with absorbing (Dirichlet) complement: the lazy
operator (I+T)/2 restricted to the interior is power-iterated in the
degree-weighted inner product, and its top eigenvalue maps back affinely to
the walk's spectral radius. Dirichlet truncations increase toward the
infinite-graph value as the ball grows, which is what the amenability
indicators track.

Also here: graph Cheeger constants (exact enumeration for tiny interiors, a
spectral sweep upper bound otherwise), the inverse spectral-gap bound for
regular graphs, continuum Rayleigh quotients for the Finsler energy, the
exponential test family giving upper estimates of the bottom of the
spectrum, a partition-of-unity smoothing operator, and the combined
amenability verdict.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels as K
from .errors import ConvergenceError
from .measure import folner_ratio, growth_curve, radial_shells

# ---------------------------------------------------------------------------
# Markov systems


@dataclass(frozen=True, eq=False)
class MarkovSystem:
    """Simple random walk on a graph with an absorbing vertex set.

    indptr/indices give the full-graph CSR adjacency; degree_weights are
    the full-graph degrees (the walk at x picks among all deg(x) neighbors
    and dies when it steps into dirichlet_set). interior is sorted.
    """

    indptr: np.ndarray
    indices: np.ndarray
    dirichlet_set: np.ndarray
    degree_weights: np.ndarray
    interior: np.ndarray
    graph: object = None


@dataclass(frozen=True)
class SpectralReport:
    rho: float
    iterations: int
    residual: float
    method: str
    converged: bool = True


@dataclass(frozen=True, eq=False)
class RayleighReport:
    lambda_estimate: float
    parameters: tuple  # (eps, R) attaining the minimum
    quadrature_error: float
    table: tuple = ()  # rows (eps, R, estimate) over the whole grid


def _as_csr(graph):
    """Accept a DiscretizationGraph, MarkovSystem, (indptr, indices) pair,
    or adjacency lists; return (indptr, indices, n_vertices)."""
    if hasattr(graph, "indptr") and hasattr(graph, "indices"):
        indptr = np.asarray(graph.indptr, np.int64)
        return indptr, np.asarray(graph.indices, np.int64), len(indptr) - 1
    if isinstance(graph, tuple) and len(graph) == 2:
        indptr = np.asarray(graph[0], np.int64)
        return indptr, np.asarray(graph[1], np.int64), len(indptr) - 1
    adj = [np.asarray(row, np.int64) for row in graph]
    indptr = np.zeros(len(adj) + 1, np.int64)
    indptr[1:] = np.cumsum([len(r) for r in adj])
    flat = np.concatenate(adj) if adj else np.empty(0, np.int64)
    return indptr, flat, len(adj)


def markov_system(graph, dirichlet_set=(), degree_weights=None):
    """Build a MarkovSystem from a graph and absorbing vertex set.

    Every interior vertex must have at least one neighbor in the full
    graph (its row may still be empty after truncation, meaning the walk
    there dies in one step).
    """
    indptr, indices, n = _as_csr(graph)
    diri = np.unique(np.asarray(list(dirichlet_set), np.int64)) \
        if len(list(dirichlet_set)) else np.empty(0, np.int64)
    if len(diri) and (diri.min() < 0 or diri.max() >= n):
        raise ValueError("dirichlet vertex out of range")
    mask = np.ones(n, bool)
    mask[diri] = False
    interior = np.flatnonzero(mask)
    if not len(interior):
        raise ValueError("interior vertex set is empty")
    deg = np.diff(indptr).astype(float) if degree_weights is None \
        else np.asarray(degree_weights, float)
    if np.any(deg[interior] <= 0):
        raise ValueError("every interior vertex needs at least one neighbor")
    g = graph if hasattr(graph, "net") else None
    return MarkovSystem(indptr=indptr, indices=indices, dirichlet_set=diri,
                        degree_weights=deg, interior=interior, graph=g)


def dirichlet_by_radius(net, r_interior):
    """Vertex ids of a net farther than r_interior from its center; the
    absorbing set for the ball-truncated walk."""
    return np.flatnonzero(net.s > r_interior)


def _interior_csr(system):
    """Restrict the adjacency to interior x interior, returning the CSR
    plus symmetric-walk values 1/sqrt(deg_x deg_y) and row-stochastic
    values 1/deg_x."""
    indptr, indices = system.indptr, system.indices
    interior, deg = system.interior, system.degree_weights
    n_int = len(interior)
    pos = np.full(len(indptr) - 1, -1, np.int64)
    pos[interior] = np.arange(n_int)
    starts, ends = indptr[interior], indptr[interior + 1]
    lens = ends - starts
    total = int(lens.sum())
    if total:
        base = np.repeat(starts, lens)
        step = np.arange(total) - np.repeat(np.cumsum(lens) - lens, lens)
        cols = indices[base + step]
        rows = np.repeat(np.arange(n_int), lens)
        keep = pos[cols] >= 0
        rows, cols = rows[keep], cols[keep]
        vals_m = 1.0 / np.sqrt(deg[interior[rows]] * deg[cols])
        vals_t = 1.0 / deg[interior[rows]]
        cols = pos[cols]
    else:
        rows = cols = np.empty(0, np.int64)
        vals_m = vals_t = np.empty(0)
    iptr = np.zeros(n_int + 1, np.int64)
    np.add.at(iptr[1:], rows, 1)
    iptr = np.cumsum(iptr)
    return iptr, cols.astype(np.int64), vals_m, vals_t, n_int


def spectral_radius(system, tol=1e-10, max_iter=100_000):
    """Walk spectral radius of the Dirichlet truncation.

    Power iteration on the lazy operator (I+T)/2, symmetrized by the
    degree weights; rho = 2 lambda_lazy - 1. The lazy shift makes the top
    eigenvalue also the largest in modulus, so plain power iteration
    converges without deflation. Stops when the Rayleigh residual
    ||Sv - lambda v|| drops below tol; a non-converged run returns the
    best estimate with converged=False.
    """
    iptr, idx, vals_m, _, n_int = _interior_csr(system)
    v = np.full(n_int, 1.0 / math.sqrt(n_int))
    lam, res = 0.5, math.inf
    it = 0
    for it in range(1, int(max_iter) + 1):
        w = 0.5 * (v + K.csr_matvec(iptr, idx, vals_m, v))
        lam = K.vdot(v, w)
        ww = K.vdot(w, w)
        res = math.sqrt(max(ww - lam * lam, 0.0))
        v = w / math.sqrt(ww)
        if res <= tol:
            break
    rho = 2.0 * lam - 1.0
    if -1e-12 <= rho < 0.0:
        rho = 0.0
    if not (0.0 <= rho <= 1.0 + 1e-9):
        raise ConvergenceError(f"spectral radius {rho} outside [0, 1]", rho)
    return SpectralReport(rho=float(min(rho, 1.0)), iterations=it,
                          residual=float(res), method="power_lazy",
                          converged=bool(res <= tol))


def return_probability_rho(system, steps, x):
    """Walk spectral-radius estimate p^(2k)(x,x)^(1/2k) at the largest
    even step count 2k <= steps; never exceeds the power-iteration value."""
    if steps < 10:
        raise ValueError("need steps >= 10")
    iptr, idx, _, vals_t, n_int = _interior_csr(system)
    pos = np.full(len(system.indptr) - 1, -1, np.int64)
    pos[system.interior] = np.arange(n_int)
    xi = int(pos[x])
    if xi < 0:
        raise ValueError("x must be an interior vertex")
    k = int(steps) // 2
    w = np.zeros(n_int)
    w[xi] = 1.0
    for _ in range(2 * k):
        w = K.csr_matvec(iptr, idx, vals_t, w)
    p = float(w[xi])
    return p ** (1.0 / (2 * k)) if p > 0.0 else 0.0


# ---------------------------------------------------------------------------
# graph Cheeger constants


def _resolve_dirichlet(graph, dirichlet_set):
    if dirichlet_set is None:
        if isinstance(graph, MarkovSystem):
            return graph.dirichlet_set
        return np.empty(0, np.int64)
    ds = list(dirichlet_set)
    return np.unique(np.asarray(ds, np.int64)) if ds else np.empty(0, np.int64)


def _interior_of(graph, dirichlet_set):
    indptr, indices, n = _as_csr(graph)
    diri = _resolve_dirichlet(graph, dirichlet_set)
    mask = np.ones(n, bool)
    if len(diri):
        mask[diri] = False
    return indptr, indices, n, np.flatnonzero(mask)


def cheeger_graph_exact(graph, dirichlet_set=None):
    """min |boundary F| / |F| by enumeration over interior subsets F with
    |F| <= |interior|/2; the boundary counts all vertices outside F (the
    absorbing ring included) adjacent to F. Interior capped at 22 vertices.

    A single-vertex interior has no subset under the half cap, so the
    forced F = {v} value is returned directly.
    """
    indptr, indices, n, interior = _interior_of(graph, dirichlet_set)
    n_int = len(interior)
    if n_int == 0:
        raise ValueError("interior vertex set is empty")
    if n_int > 22:
        raise ValueError("interior too large for enumeration (max 22)")
    if n_int == 1:
        v = interior[0]
        nbrs = np.unique(indices[indptr[v]:indptr[v + 1]])
        return float(len(nbrs[nbrs != v]))
    adj = np.zeros((n_int, n), bool)
    for i, v in enumerate(interior):
        adj[i, indices[indptr[v]:indptr[v + 1]]] = True
        adj[i, v] = False
    num, den = K.cheeger_exact(adj, interior.astype(np.int64), n_int // 2)
    return float(num) / float(den)


def _interior_induced(indptr, indices, interior, n):
    pos = np.full(n, -1, np.int64)
    pos[interior] = np.arange(len(interior))
    sub = []
    for v in interior:
        nb = indices[indptr[v]:indptr[v + 1]]
        sub.append(pos[nb[pos[nb] >= 0]])
    iptr = np.zeros(len(interior) + 1, np.int64)
    iptr[1:] = np.cumsum([len(r) for r in sub])
    flat = np.concatenate(sub) if sub else np.empty(0, np.int64)
    return iptr, flat.astype(np.int64)


def _lazy_dense(iptr, idx, deg_int):
    n_int = len(iptr) - 1
    S = np.zeros((n_int, n_int))
    for i in range(n_int):
        cols = idx[iptr[i]:iptr[i + 1]]
        S[i, cols] += 0.5 / np.sqrt(deg_int[i] * deg_int[cols])
    S[np.diag_indices(n_int)] += 0.5
    return S


def _second_vector(graph, dirichlet_set):
    """(second eigenvalue, its eigenvector) of the lazy symmetrized
    interior operator, plus the pieces needed by callers."""
    indptr, indices, n, interior = _interior_of(graph, dirichlet_set)
    n_int = len(interior)
    iptr, idx = _interior_induced(indptr, indices, interior, n)
    lev = K.bfs_levels(iptr, idx, 0, n_int)
    if np.any(lev < 0):
        raise ValueError("interior subgraph is disconnected")
    deg_full = np.diff(indptr).astype(float)
    deg_int = deg_full[interior]
    if n_int <= 800:
        S = _lazy_dense(iptr, idx, deg_int)
        w, Q = np.linalg.eigh(S)
        lam2, vec = float(w[-2]), Q[:, -2]
    else:
        import scipy.sparse as sp
        from scipy.sparse.linalg import ArpackNoConvergence, eigsh

        rows = np.repeat(np.arange(n_int), np.diff(iptr))
        vals = 0.5 / np.sqrt(deg_int[rows] * deg_int[idx])
        S = sp.csr_matrix((vals, idx, iptr), shape=(n_int, n_int)) \
            + 0.5 * sp.eye(n_int, format="csr")
        try:
            w, Q = eigsh(S, k=2, which="LA", tol=1e-8)
        except ArpackNoConvergence as exc:
            raise ConvergenceError("eigen-solver did not converge") from exc
        o = np.argsort(w)
        lam2, vec = float(w[o[-2]]), Q[:, o[-2]]
    return lam2, vec, indptr, indices, n, interior


def _prefix_ratios(indptr, indices, order, cap, n):
    """Boundary/size ratios of the prefix sets of `order` (full vertex
    ids), sizes 1..cap; boundary counted against the whole graph."""
    nbr = np.zeros(n, np.int64)
    in_f = np.zeros(n, bool)
    b = 0
    out = []
    for k, v in enumerate(order[:cap], 1):
        nb = indices[indptr[v]:indptr[v + 1]]
        nb = nb[nb != v]
        fresh = nb[(nbr[nb] == 0) & ~in_f[nb]]
        b += len(fresh)
        nbr[nb] += 1
        in_f[v] = True
        if nbr[v] > 0:
            b -= 1
        out.append(b / k)
    return out


def cheeger_graph_sweep(graph, dirichlet_set=None):
    """Upper bound for the exact constant: sweep cuts along the second
    eigenvector of the lazy symmetrized interior operator, both
    orientations, ratios over prefix sets up to the half cap."""
    indptr, indices, n, interior = _interior_of(graph, dirichlet_set)
    n_int = len(interior)
    if n_int == 0:
        raise ValueError("interior vertex set is empty")
    if n_int == 1:
        v = interior[0]
        nbrs = np.unique(indices[indptr[v]:indptr[v + 1]])
        return float(len(nbrs[nbrs != v]))
    _, vec, indptr, indices, n, interior = _second_vector(graph, dirichlet_set)
    cap = max(1, n_int // 2)
    order = interior[np.argsort(vec, kind="stable")]
    ratios = _prefix_ratios(indptr, indices, order, cap, n)
    ratios += _prefix_ratios(indptr, indices, order[::-1], cap, n)
    return float(min(ratios))


def inverse_cheeger_check(graph, dirichlet_set=None):
    """For regular walks, check cheeger >= 4 (1 - rho) / rho.

    Regularity means all interior vertices share one full-graph degree.
    With an absorbing set, rho comes from the Dirichlet power iteration;
    without one the proxy is the second eigenvalue of the lazy operator
    (the top is the trivial 1). Finite truncations can fail the infinite
    -graph inequality, so the status is reported, not asserted.
    """
    indptr, indices, n, interior = _interior_of(graph, dirichlet_set)
    deg_full = np.diff(indptr)
    degs = np.unique(deg_full[interior])
    if len(degs) != 1:
        raise ValueError("inverse bound requires a regular graph")
    d = int(degs[0])
    if d < 2:
        raise ValueError("requires degree >= 2")
    n_int = len(interior)
    cheeger = cheeger_graph_exact(graph, dirichlet_set) if n_int <= 22 \
        else cheeger_graph_sweep(graph, dirichlet_set)
    diri = _resolve_dirichlet(graph, dirichlet_set)
    if len(diri):
        rho = spectral_radius(markov_system(graph, diri)).rho
        source = "dirichlet_power"
    else:
        lam2, *_ = _second_vector(graph, dirichlet_set)
        rho = lam2
        source = "lazy_second_eigenvalue"
    rhs = math.inf if rho <= 0 else 4.0 * (1.0 - rho) / rho
    return {
        "cheeger": float(cheeger),
        "rho": float(rho),
        "rho_source": source,
        "lower_bound": float(rhs),
        "holds": bool(cheeger >= rhs - 1e-12),
        "degree": d,
        "caveat": "finite truncation of an infinite-graph inequality",
    }


# ---------------------------------------------------------------------------
# continuum Rayleigh quotients


def _eval_rows(f, X):
    try:
        v = np.asarray(f(X), float)
        if v.shape == (len(X),):
            return v
    except Exception:
        pass
    return np.array([float(f(x)) for x in X])


def _dual_norm_rows(body, P, W, m_dir=192):
    """F*(p_i, w_i) per row: the Finsler unit ball at p is the star body
    {r(u) u}, so the dual norm is max_u (w . u) r(p, u) over a shared
    direction table."""
    n = body.dim
    if n == 2:
        th = 2 * np.pi * (np.arange(m_dir) + 0.5) / m_dir
        U = np.stack([np.cos(th), np.sin(th)], 1)
    else:
        U = _rayleigh_dirs(n, m_dir)
    m = len(U)
    P_rep = np.repeat(P, m, axis=0)
    U_til = np.tile(U, (len(P), 1))
    tm, tp = body.ops().chord_tvals(np.ascontiguousarray(P_rep),
                                    np.ascontiguousarray(U_til))
    r = (2.0 * tm * tp / (tm + tp)).reshape(len(P), m)
    proj = W @ U.T
    return np.max(proj * r, axis=1)


def _rayleigh_dirs(n, m):
    from scipy.special import ndtri
    from scipy.stats import qmc

    h = qmc.Halton(d=n, scramble=False).random(m + 11)[11:]
    U = ndtri(np.clip(h, 1e-12, 1 - 1e-12))
    return U / np.linalg.norm(U, axis=1, keepdims=True)


def rayleigh_quotient(body, f, grad_f=None, support_radius=None, x0=None,
                      quadrature=None, return_error=False):
    """Finsler Rayleigh quotient int F*(p, df)^2 dmu / int f^2 dmu.

    Monte-Carlo in ball coordinates about x0: samples are placed along
    random rays with the measure density as weight, so the boundary
    blow-up never enters (f must vanish outside B(x0, support_radius),
    which is spot-checked). Gradients come from grad_f or central
    differences with step 1e-5.
    """
    if support_radius is None or support_radius <= 0:
        raise ValueError("support_radius must be positive")
    q = {"n_samples": 20_000, "seed": 0, "m_dir": 192, "fd_step": 1e-5}
    q.update(quadrature or {})
    n = body.dim
    x0 = np.zeros(n) if x0 is None else np.asarray(x0, float)
    if not body.contains(x0):
        raise ValueError("x0 must be interior")
    rng = np.random.default_rng(q["seed"])
    R = float(support_radius)
    ops = body.ops()

    # spot-check that f vanishes on a shell outside the support ball
    ts = R + 1e-3 + rng.random(64)
    Us = _ray_dirs(body, 64, rng)
    tm, tp = ops.profile_tvals(x0, Us)
    E = np.exp(2.0 * ts)
    tau = (E - 1.0) * tm * tp / (tp + E * tm)
    f_out = _eval_rows(f, x0[None, :] + tau[:, None] * Us)

    m = int(q["n_samples"])
    t = R * rng.random(m)
    U = _ray_dirs(body, m, rng)
    tm, tp = ops.profile_tvals(x0, U)
    E = np.exp(2.0 * t)
    den = tp + E * tm
    tau = (E - 1.0) * tm * tp / den
    inv_f = 2.0 * E * tm * tp * (tm + tp) / (den * den)
    X = x0[None, :] + tau[:, None] * U
    rpm, _ = ops.rpow_mean(np.ascontiguousarray(X), _density_dirs(n))
    w = tau ** (n - 1) * inv_f / rpm

    fv = _eval_rows(f, X)
    if np.max(np.abs(f_out)) > 1e-9 * max(np.max(np.abs(fv)), 1e-300):
        raise ValueError("f must vanish outside the support ball")
    if grad_f is not None:
        G = np.atleast_2d(np.asarray([grad_f(x) for x in X], float))
    else:
        h = float(q["fd_step"])
        G = np.empty((m, n))
        for i in range(n):
            e = np.zeros(n)
            e[i] = h
            G[:, i] = (_eval_rows(f, X + e) - _eval_rows(f, X - e)) / (2 * h)
    dual = _dual_norm_rows(body, X, G, int(q["m_dir"]))
    num_terms = w * dual ** 2
    den_terms = w * fv ** 2
    denom = float(np.sum(den_terms))
    if denom <= 0.0:
        raise ValueError("denominator vanishes: f is zero on the samples")
    val = float(np.sum(num_terms)) / denom
    if not return_error:
        return val
    half = m // 2
    sub = []
    for sl in (slice(0, half), slice(half, m)):
        d_s = float(np.sum(den_terms[sl]))
        sub.append(float(np.sum(num_terms[sl])) / d_s if d_s > 0 else val)
    err = max(abs(val - sub[0]), abs(val - sub[1]))
    return val, err


def _ray_dirs(body, m, rng):
    if body.dim == 2:
        th = 2 * np.pi * rng.random(m) - np.pi
        return np.stack([np.cos(th), np.sin(th)], 1)
    U = rng.standard_normal((m, body.dim))
    return U / np.linalg.norm(U, axis=1, keepdims=True)


_DENSITY_DIRS = {}


def _density_dirs(n, m=256):
    if n not in _DENSITY_DIRS:
        from .measure import direction_table

        _DENSITY_DIRS[n] = direction_table(n, m)
    return _DENSITY_DIRS[n]


DEFAULT_EPS_GRID = (-0.98, -0.95, -0.9, -0.8, -0.5, 0.0, 0.05, 0.1, 0.2, 0.5)
DEFAULT_R_GRID = (4.0, 8.0, 12.0, 16.0, 20.0)


def lambda1_upper_estimate(body, x0=None, eps_grid=None, R_grid=None,
                           t_per_unit=16, m_theta=2048, m_dir=512):
    """Variational upper bound for the bottom of the spectrum.

    Test family f(x) = exp(-(h/2) d(x0,x)) - exp(-(h/2) R) on B(x0, R)
    with h = (n-1) + eps. Radial functions reduce both energy integrals
    to the shell-area profile A(t): the quotient is
    (h^2/4) K / (K - 2 a J + a^2 V) with K = int e^{-h t} A, J = int
    e^{-h t / 2} A, V = int A, a = e^{-h R / 2}, always >= h^2/4. One
    shell sweep serves the whole grid; the minimum is returned with its
    parameters and a step-halving error estimate.
    """
    eps_grid = DEFAULT_EPS_GRID if eps_grid is None else tuple(eps_grid)
    R_grid = DEFAULT_R_GRID if R_grid is None else tuple(R_grid)
    if not eps_grid or not R_grid:
        raise ValueError("grids must be nonempty")
    n = body.dim
    x0 = np.zeros(n) if x0 is None else np.asarray(x0, float)
    r_max = max(R_grid)
    t, A = radial_shells(body, x0, r_max, t_per_unit=t_per_unit,
                         m_theta=m_theta, m_dir=m_dir)

    def family(tv, Av):
        rows = []
        v_c = _cum(tv, Av)
        for eps in eps_grid:
            h = (n - 1) + eps
            if h <= 0:
                raise ValueError("eps must exceed -(n-1)")
            k_c = _cum(tv, np.exp(-h * tv) * Av)
            j_c = _cum(tv, np.exp(-0.5 * h * tv) * Av)
            for R in R_grid:
                kk = np.interp(R, tv, k_c)
                jj = np.interp(R, tv, j_c)
                vv = np.interp(R, tv, v_c)
                a = math.exp(-0.5 * h * R)
                den = kk - 2.0 * a * jj + a * a * vv
                lam = 0.25 * h * h * kk / den
                assert lam >= 0.25 * h * h * (1.0 - 1e-9)
                rows.append((float(eps), float(R), float(lam)))
        return rows

    rows = family(t, A)
    best = min(rows, key=lambda r: r[2])
    keep = np.unique(np.concatenate([np.arange(0, len(t), 2), [len(t) - 1]]))
    coarse = dict(((e, R), v) for e, R, v in family(t[keep], A[keep]))
    qerr = abs(best[2] - coarse[(best[0], best[1])]) / 3.0 + 1e-10
    return RayleighReport(lambda_estimate=best[2], parameters=(best[0], best[1]),
                          quadrature_error=float(qerr), table=tuple(rows))


def _cum(t, y):
    out = np.zeros(len(t))
    out[1:] = np.cumsum(0.5 * np.diff(t) * (y[1:] + y[:-1]))
    return out


# ---------------------------------------------------------------------------
# smoothing operator


def smoothing(net, rho, f):
    """Partition-of-unity interpolation of vertex values.

    Bumps b(x, xi) = max(0, 1 - d(x, xi) / (2 rho))^2 are normalized over
    the net, so the result is exact on constants wherever the 2 rho balls
    cover. Returns a callable accepting one point or a batch; querying a
    point no bump covers raises ValueError.
    """
    f = np.asarray(f, float)
    if len(f) != len(net):
        raise ValueError("need one value per net vertex")
    two_rho = 2.0 * float(rho)
    ops = net.body.ops()

    def apply(X):
        single = np.ndim(X) == 1
        X = np.atleast_2d(np.asarray(X, float))
        indptr, hits = net.query(X, two_rho)
        out = np.empty(len(X))
        if net.mode == "hyp":
            qs, qth = net.chart.to_polar(X)
        for i in range(len(X)):
            hh = hits[indptr[i]:indptr[i + 1]]
            if not len(hh):
                raise ValueError("query point outside the covered domain")
            if net.mode == "hyp":
                ch = (math.cosh(qs[i]) * np.cosh(net.s[hh])
                      - math.sinh(qs[i]) * np.sinh(net.s[hh])
                      * np.cos(qth[i] - net.theta[hh]))
                d = np.arccosh(np.maximum(ch, 1.0))
            else:
                d = ops.dist_point_set(X[i], np.ascontiguousarray(net.points[hh]))
            b = np.maximum(0.0, 1.0 - d / two_rho) ** 2
            s = float(np.sum(b))
            if s <= 0.0:
                raise ValueError("query point outside the covered domain")
            out[i] = float(b @ f[hh]) / s
        return float(out[0]) if single else out

    return apply


# ---------------------------------------------------------------------------
# amenability verdict


_VERDICT_DEFAULTS = {
    "x0": None,
    "radii": (4.0, 6.0, 8.0, 10.0),
    "epsilon": 0.5,
    "seed": 0,
    "eps_grid": None,
    "lambda_R_grid": None,
    "growth_points": 24,
    "net_margin": 1.0,
    "oversample": 12.0,
}

_AMENABLE = {"folner_last": 0.5, "gap_ratio": 0.6, "lambda1": 0.10}
_NON_AMENABLE = {"folner_last": 0.7, "gap_ratio": 0.4, "lambda1": 0.15}


def amenability_verdict(body, config=None):
    """Weigh four indicators and emit a verdict string.

    Indicators: the volume growth classification, the boundary/volume
    ratio at the largest radius, the shrinkage of the walk's spectral gap
    1 - rho_R as the truncation radius grows, and the minimal variational
    upper bound for the bottom of the spectrum. All four must agree for a
    non-"inconclusive" verdict, and the output is evidence, never proof.
    """
    from .nets import build_graph, build_net

    cfg = dict(_VERDICT_DEFAULTS)
    for key, val in (config or {}).items():
        if key not in _VERDICT_DEFAULTS:
            raise ValueError(f"unknown config key: {key}")
        cfg[key] = val
    if body.dim != 2:
        raise ValueError("verdict pipeline is 2D only")
    radii = tuple(float(r) for r in cfg["radii"])
    if len(radii) < 2:
        raise ValueError("need at least two radii")
    x0 = np.zeros(2) if cfg["x0"] is None else np.asarray(cfg["x0"], float)
    r_max = max(radii)

    growth = growth_curve(body, x0, np.linspace(0.5, r_max, int(cfg["growth_points"])))
    folner = {r: float(folner_ratio(body, x0, r)) for r in radii}

    net = build_net(body, x0, r_max + float(cfg["net_margin"]),
                    float(cfg["epsilon"]), seed=int(cfg["seed"]),
                    oversample=float(cfg["oversample"]))
    graph = build_graph(net)
    rho = {}
    for r in radii:
        system = markov_system(graph, dirichlet_by_radius(net, r))
        rho[r] = float(spectral_radius(system).rho)

    lam = lambda1_upper_estimate(body, x0, cfg["eps_grid"],
                                 cfg["lambda_R_grid"] or radii)

    gap_first = 1.0 - rho[radii[0]]
    gap_last = 1.0 - rho[radii[-1]]
    gap_ratio = gap_last / gap_first if gap_first > 0 else 1.0
    ind = {
        "growth": growth.classification,
        "growth_poly_exponent": growth.fit_poly_exponent,
        "growth_exp_rate": growth.fit_exp_rate,
        "growth_radii": tuple(float(r) for r in growth.radii),
        "growth_volumes": tuple(float(v.value) for v in growth.volumes),
        "folner": folner,
        "folner_last": folner[radii[-1]],
        "rho": rho,
        "gap_first": gap_first,
        "gap_last": gap_last,
        "gap_ratio": gap_ratio,
        "lambda1_min": lam.lambda_estimate,
        "lambda1_argmin": lam.parameters,
        "lambda1_table": lam.table,
    }
    verdict = "inconclusive"
    if (growth.classification == "polynomial"
            and ind["folner_last"] <= _AMENABLE["folner_last"]
            and gap_ratio <= _AMENABLE["gap_ratio"]
            and lam.lambda_estimate <= _AMENABLE["lambda1"]):
        verdict = "amenable-evidence"
    elif (growth.classification == "exponential"
            and ind["folner_last"] >= _NON_AMENABLE["folner_last"]
            and gap_ratio >= _NON_AMENABLE["gap_ratio"]
            and lam.lambda_estimate >= _NON_AMENABLE["lambda1"]):
        verdict = "non-amenable-evidence"
    return {
        "verdict": verdict,
        "indicators": ind,
        "config": {k: (tuple(v) if isinstance(v, (list, tuple)) else v)
                   for k, v in cfg.items() if k != "x0"},
        "caveat": "numerical evidence only, not a proof",
    }
