"""Bounded open convex bodies with exact or tolerance-controlled oracles.

Bodies are immutable. Polytopes and ellipsoids have closed-form chords;
superellipses use safeguarded root-finding; arbitrary convex sublevel
bodies fall back to bracketing + bisection on the oracle. All higher
modules consume bodies only through contains/chord (and the batch kernel
adapter returned by ops()).
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels as K

GENERIC = 3  # sublevel-oracle bodies, outside the jitted kernel kinds


@dataclass(frozen=True, eq=False)
class Chord:
    p_minus: np.ndarray
    p_plus: np.ndarray
    tol: float


@dataclass(frozen=True, eq=False)
class ConvexBody:
    kind: int
    M: np.ndarray
    v: np.ndarray
    dim: int
    interior_point: np.ndarray
    bounding_radius: float
    reach: float
    name: str = "body"
    vertices: np.ndarray | None = None
    g: object = None  # sublevel oracle for kind GENERIC, vectorized P -> values
    _ops: list = field(default_factory=list, repr=False, compare=False)

    @property
    def tol_boundary(self):
        return 1e-12 * self.bounding_radius

    def contains(self, x):
        x = np.asarray(x, float)
        if x.shape != (self.dim,):
            raise ValueError(f"dimension mismatch: body is {self.dim}-dimensional")
        if self.kind == K.POLYTOPE:
            return bool(np.all(self.M @ x < self.v))
        if self.kind == K.ELLIPSOID:
            y = x - self.v
            return bool(y @ self.M @ y < 1.0)
        if self.kind == K.SUPERELLIPSE:
            p, q = self.v
            return bool(abs(x[0]) ** p + abs(x[1]) ** q < 1.0)
        return bool(self.g(x[None, :])[0] < 1.0)

    def contains_batch(self, P):
        P = np.asarray(P, float)
        if self.kind == K.POLYTOPE:
            return np.all(P @ self.M.T < self.v[None, :], axis=1)
        if self.kind == K.ELLIPSOID:
            Y = P - self.v[None, :]
            return np.einsum("ij,jk,ik->i", Y, self.M, Y) < 1.0
        if self.kind == K.SUPERELLIPSE:
            p, q = self.v
            return np.abs(P[:, 0]) ** p + np.abs(P[:, 1]) ** q < 1.0
        return np.asarray(self.g(P)) < 1.0

    def chord(self, p, v):
        """Boundary intersections of the line through p with direction v."""
        p = np.asarray(p, float)
        v = np.asarray(v, float)
        nv = np.linalg.norm(v)
        if nv == 0.0:
            raise ValueError("zero direction")
        if not self.contains(p):
            raise ValueError("chord base point not interior")
        u = v / nv
        tm, tp = self.ops().chord_tvals(p[None, :], u[None, :])
        return Chord(p - tm[0] * u, p + tp[0] * u, self.tol_boundary)

    def ops(self):
        """Batch-oracle adapter used by the metric/measure/net modules."""
        if not self._ops:
            self._ops.append(_GenericOps(self) if self.kind == GENERIC else _KernelOps(self))
        return self._ops[0]

    def bounding_box(self):
        if self.kind == K.POLYTOPE:
            return self.vertices.min(0), self.vertices.max(0)
        if self.kind == K.ELLIPSOID:
            half = np.sqrt(np.diag(np.linalg.inv(self.M)))
            return self.v - half, self.v + half
        if self.kind == K.SUPERELLIPSE:
            return np.array([-1.0, -1.0]), np.array([1.0, 1.0])
        c = self.interior_point
        return c - self.bounding_radius, c + self.bounding_radius

    def feature_directions(self, x0):
        """Angles (from x0) of boundary features that pinch metric balls.

        Polygon corners and superellipse axis points produce angular density
        spikes in radial integrals; quadrature grids refine around these.
        Returns None for smooth bodies.
        """
        if self.dim != 2:
            return None
        if self.kind == K.POLYTOPE:
            d = self.vertices - x0[None, :]
            th = np.arctan2(d[:, 1], d[:, 0])
        elif self.kind == K.SUPERELLIPSE:
            pts = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
            d = pts - x0[None, :]
            th = np.arctan2(d[:, 1], d[:, 0])
        else:
            return None
        both = np.concatenate([th, th + np.pi])
        return np.unique(np.mod(both + np.pi, 2 * np.pi) - np.pi)


class _KernelOps:
    """Binds (kind, M, v, reach) so callers see body-free batch signatures."""

    def __init__(self, body):
        self.k = body.kind
        self.M = np.ascontiguousarray(body.M, float)
        self.v = np.ascontiguousarray(body.v, float)
        self.reach = float(body.reach)

    def chord_tvals(self, P, U):
        return K.chord_tvals(self.k, self.M, self.v, P, U, self.reach)

    def dist_rows(self, P, Q):
        return K.dist_rows(self.k, self.M, self.v, P, Q, self.reach)

    def dist_point_set(self, x, P):
        return K.dist_point_set(self.k, self.M, self.v, np.asarray(x, float), P, self.reach)

    def finsler_rows(self, P, V):
        return K.finsler_rows(self.k, self.M, self.v, P, V, self.reach)

    def rpow_mean(self, P, U):
        return K.rpow_mean(self.k, self.M, self.v, P, U, self.reach)

    def profile_tvals(self, x0, U):
        return K.profile_tvals(self.k, self.M, self.v, np.asarray(x0, float), U, self.reach)


class _GenericOps:
    """Bisection-based oracle lane for sublevel bodies (numpy only)."""

    def __init__(self, body):
        self.g = body.g
        self.reach = float(body.reach)
        self.tol = body.tol_boundary

    def chord_tvals(self, P, U):
        P = np.atleast_2d(np.asarray(P, float))
        U = np.atleast_2d(np.asarray(U, float))

        def root(sign):
            lo = np.zeros(len(P))
            hi = np.full(len(P), self.reach)
            while np.max(hi - lo) > self.tol:
                mid = 0.5 * (lo + hi)
                inside = np.asarray(self.g(P + (sign * mid)[:, None] * U)) < 1.0
                lo = np.where(inside, mid, lo)
                hi = np.where(inside, hi, mid)
            return np.maximum(0.5 * (lo + hi), 1e-300)

        return root(-1.0), root(+1.0)

    def dist_rows(self, P, Q):
        P = np.atleast_2d(np.asarray(P, float))
        Q = np.atleast_2d(np.asarray(Q, float))
        D = Q - P
        s = np.linalg.norm(D, axis=1)
        out = np.zeros(len(P))
        live = s > 0.0
        if np.any(live):
            U = D[live] / s[live, None]
            tm, tp = self.chord_tvals(P[live], U)
            ss = s[live]
            out[live] = 0.5 * np.log(((ss + tm) / tm) * (tp / (tp - ss)))
        return out

    def dist_point_set(self, x, P):
        P = np.atleast_2d(P)
        X = np.broadcast_to(np.asarray(x, float), P.shape)
        return self.dist_rows(X, P)

    def finsler_rows(self, P, V):
        V = np.atleast_2d(np.asarray(V, float))
        s = np.linalg.norm(V, axis=1)
        out = np.zeros(len(V))
        live = s > 0.0
        if np.any(live):
            U = V[live] / s[live, None]
            tm, tp = self.chord_tvals(np.atleast_2d(P)[live], U)
            out[live] = 0.5 * s[live] * (1.0 / tm + 1.0 / tp)
        return out

    def rpow_mean(self, P, U):
        P = np.atleast_2d(np.asarray(P, float))
        m, n = P.shape
        acc = np.zeros(m)
        tmin = np.full(m, np.inf)
        for j in range(len(U)):
            Uj = np.broadcast_to(U[j], (m, n))
            tm, tp = self.chord_tvals(P, Uj)
            acc += (2.0 * tm * tp / (tm + tp)) ** n
            np.minimum(tmin, np.minimum(tm, tp), out=tmin)
        return acc / len(U), tmin

    def profile_tvals(self, x0, U):
        U = np.asarray(U, float)
        X = np.broadcast_to(np.asarray(x0, float), U.shape)
        return self.chord_tvals(X, U)


# ---------------------------------------------------------------------------
# constructors


def _body_from_vertices(V, name):
    from scipy.spatial import ConvexHull, QhullError

    V = np.asarray(V, float)
    n = V.shape[1]
    try:
        hull = ConvexHull(V)
    except QhullError as e:
        raise ValueError(f"degenerate polytope (affine dimension < {n})") from e
    A = hull.equations[:, :n].copy()
    b = -hull.equations[:, n].copy()
    # qhull rows are unit-normalized; keep that so facet slack = Euclidean gap
    Vh = V[hull.vertices]
    c = Vh.mean(0)
    if not np.all(A @ c < b):
        raise ValueError("degenerate polytope: centroid not interior")
    rad = float(np.max(np.linalg.norm(Vh, axis=1)))
    return ConvexBody(
        kind=K.POLYTOPE, M=A, v=b, dim=n, interior_point=c,
        bounding_radius=rad, reach=2.0 * rad + 1.0, name=name, vertices=Vh,
    )


def make_polygon(vertices, name="polygon"):
    """Convex polygon (2D) or polytope (nD) from its vertex list."""
    return _body_from_vertices(vertices, name)


def make_regular_polygon(k, circumradius=1.0, name=None):
    if k < 3:
        raise ValueError("need k >= 3 vertices")
    ang = np.deg2rad(90.0 + 360.0 * np.arange(k) / k)
    V = circumradius * np.stack([np.cos(ang), np.sin(ang)], axis=1)
    return _body_from_vertices(V, name or f"regular_{k}gon")


def make_simplex(n):
    """Standard corner simplex {x_i > 0, sum x_i < 1} in R^n."""
    if n < 2:
        raise ValueError("dimension must be >= 2")
    V = np.vstack([np.zeros(n), np.eye(n)])
    return _body_from_vertices(V, f"simplex{n}")


def make_ellipsoid(Q, center=None, name="ellipsoid"):
    Q = np.asarray(Q, float)
    n = Q.shape[0]
    c = np.zeros(n) if center is None else np.asarray(center, float)
    w = np.linalg.eigvalsh(Q)
    if w[0] <= 0:
        raise ValueError("shape matrix must be positive definite")
    rad = float(np.linalg.norm(c) + 1.0 / math.sqrt(w[0]))
    return ConvexBody(
        kind=K.ELLIPSOID, M=Q, v=c, dim=n, interior_point=c.copy(),
        bounding_radius=rad, reach=2.0 * rad + 1.0, name=name,
    )


def make_ball(n, radius=1.0, center=None):
    if radius <= 0:
        raise ValueError("radius must be positive")
    Q = np.eye(n) / radius**2
    name = "disk" if n == 2 else f"ball{n}"
    return make_ellipsoid(Q, center, name=name)


def make_superellipse(p, q):
    """The body {|x|^p + |y|^q < 1}; p = q = 2 is the unit disk."""
    if p < 1 or q < 1:
        raise ValueError("exponents must be >= 1 for convexity")
    return ConvexBody(
        kind=K.SUPERELLIPSE, M=np.zeros((1, 1)), v=np.array([float(p), float(q)]),
        dim=2, interior_point=np.zeros(2), bounding_radius=math.sqrt(2.0),
        reach=2.0 * math.sqrt(2.0) + 1.0, name=f"superellipse({p},{q})",
    )


def make_sublevel(g, interior_point, bounding_radius, name="sublevel"):
    """Body {g < 1} for a convex vectorized oracle g: (m, n) -> (m,)."""
    c = np.asarray(interior_point, float)
    if not np.asarray(g(c[None, :]))[0] < 1.0:
        raise ValueError("interior_point fails the sublevel test")
    return ConvexBody(
        kind=GENERIC, M=np.zeros((1, 1)), v=np.zeros(1), dim=len(c),
        interior_point=c, bounding_radius=float(bounding_radius),
        reach=2.0 * float(bounding_radius) + 1.0, name=name, g=g,
    )


# ---------------------------------------------------------------------------
# projective maps


def projective_transform(body, H):
    """Image of the body under the projective map with homogeneous matrix H.

    Polytopes map by their vertices, ellipsoids by conjugating the
    homogeneous quadric; other bodies compose the oracle with the inverse
    map. Raises when the image would meet the hyperplane at infinity.
    """
    H = np.asarray(H, float)
    n = body.dim
    if H.shape != (n + 1, n + 1):
        raise ValueError(f"projective matrix must be {(n + 1, n + 1)}")
    if abs(np.linalg.det(H)) < 1e-12:
        raise ValueError("projective matrix not invertible")

    def fwd(P):
        Ph = np.concatenate([P, np.ones((len(P), 1))], axis=1) @ H.T
        w = Ph[:, n]
        if np.any(np.abs(w) < 1e-9):
            raise ValueError("image unbounded: hyperplane at infinity crossed")
        return Ph[:, :n] / w[:, None]

    if body.kind == K.POLYTOPE:
        W = np.concatenate([body.vertices, np.ones((len(body.vertices), 1))], 1) @ H.T
        w = W[:, n]
        if np.min(np.abs(w)) < 1e-9 or np.min(w) * np.max(w) < 0:
            raise ValueError("image unbounded: vertex crosses the hyperplane at infinity")
        return _body_from_vertices(W[:, :n] / w[:, None], name=body.name + "*")

    if body.kind == K.ELLIPSOID:
        # homogeneous quadric S with body = {X^T S X < 0}, X = (x, 1)
        Q, c = body.M, body.v
        S = np.zeros((n + 1, n + 1))
        S[:n, :n] = Q
        S[:n, n] = S[n, :n] = -Q @ c
        S[n, n] = c @ Q @ c - 1.0
        Hinv = np.linalg.inv(H)
        S2 = Hinv.T @ S @ Hinv
        A = S2[:n, :n]
        bvec = S2[:n, n]
        gam = S2[n, n]
        w = np.linalg.eigvalsh(A)
        if w[0] * w[-1] <= 0:
            raise ValueError("image unbounded: quadric no longer an ellipsoid")
        if w[0] < 0:  # normalize the sign convention
            A, bvec, gam = -A, -bvec, -gam
        c2 = -np.linalg.solve(A, bvec)
        kappa = c2 @ A @ c2 - gam
        if kappa <= 0:
            raise ValueError("image unbounded: empty or degenerate quadric")
        return make_ellipsoid(A / kappa, c2, name=body.name + "*")

    # oracle bodies: compose with the inverse map
    Hinv = np.linalg.inv(H)

    def back(P):
        Ph = np.concatenate([P, np.ones((len(P), 1))], axis=1) @ Hinv.T
        w = Ph[:, n]
        bad = np.abs(w) < 1e-12
        w = np.where(bad, 1.0, w)
        out = Ph[:, :n] / w[:, None]
        out[bad] = 1e6  # far outside; sublevel test will reject
        return out

    if body.kind == K.SUPERELLIPSE:
        p, q = body.v

        def g2(P):
            Y = back(np.asarray(P, float))
            return np.abs(Y[:, 0]) ** p + np.abs(Y[:, 1]) ** q
    else:
        g0 = body.g

        def g2(P):
            return np.asarray(g0(back(np.asarray(P, float))))

    c2 = fwd(body.interior_point[None, :])[0]
    # bound the image through mapped sample directions from the old bound
    ring = body.interior_point[None, :] + 0.999 * (
        body.bounding_radius * _sphere_table(n, 64)
    )
    try:
        img = fwd(ring)
    except ValueError as e:
        raise ValueError("image unbounded under projective map") from e
    rad = float(np.max(np.linalg.norm(img, axis=1))) + 1.0
    return make_sublevel(g2, c2, rad, name=body.name + "*")


def _sphere_table(n, m):
    if n == 2:
        th = 2 * np.pi * np.arange(m) / m
        return np.stack([np.cos(th), np.sin(th)], 1)
    rng = np.random.default_rng(0)
    U = rng.standard_normal((m, n))
    return U / np.linalg.norm(U, axis=1, keepdims=True)


# ---------------------------------------------------------------------------
# body specification files


_NAMED = {
    "triangle": lambda: make_regular_polygon(3, name="triangle"),
    "hexagon": lambda: make_regular_polygon(6, name="hexagon"),
    "disk": lambda: make_ball(2),
    "superellipse": lambda: make_superellipse(4.0, 1.1),
    "simplex3": lambda: make_simplex(3),
}


def body_from_spec(spec):
    """Body from a name, a spec dict, or a path to a JSON spec file."""
    if isinstance(spec, ConvexBody):
        return spec
    if isinstance(spec, str):
        if spec in _NAMED:
            return _NAMED[spec]()
        with open(spec) as f:
            spec = json.load(f)
    if not isinstance(spec, dict):
        raise ValueError("body spec must be a name, a dict, or a JSON file path")
    d = dict(spec)
    kind = d.pop("kind", None)
    if kind == "polygon":
        body = make_polygon(d.pop("vertices"), name=d.pop("name", "polygon"))
    elif kind == "regular_polygon":
        body = make_regular_polygon(d.pop("k"), d.pop("circumradius", 1.0))
    elif kind == "ellipsoid":
        body = make_ellipsoid(d.pop("shape"), d.pop("center", None))
    elif kind == "ball":
        body = make_ball(d.pop("n", 2), d.pop("radius", 1.0), d.pop("center", None))
    elif kind == "superellipse":
        body = make_superellipse(d.pop("p"), d.pop("q"))
    elif kind == "simplex":
        body = make_simplex(d.pop("n"))
    else:
        raise ValueError(f"unknown body kind {kind!r}")
    if d:
        raise ValueError(f"unknown body spec keys: {sorted(d)}")
    return body
