"""Angular grids for boundary and ball integrals in 2D.

Polygonal bodies concentrate Hilbert-ball mass and sphere length in thin
angular slivers around the directions of their vertices (and antipodes):
the density in angle behaves like 1/|dtheta| down to a cutoff ~ e^{-2t}
at metric radius t. Grids here are graded dyadically toward those feature
directions so that both quadrature and polyline sampling resolve the
slivers; smooth bodies get plain uniform angles.
"""

import math

import numpy as np


def gauss3(a, b):
    """3-point Gauss-Legendre nodes and weights on [a, b]."""
    w = b - a
    mid = 0.5 * (a + b)
    off = 0.5 * w * math.sqrt(3.0 / 5.0)
    nodes = np.array([mid - off, mid, mid + off])
    weights = np.array([5 * w / 18, 8 * w / 18, 5 * w / 18])
    return nodes, weights


def sliver_cutoff(t_max):
    """Angular width below which slivers carry negligible mass at radius
    t_max; dyadic grading stops here."""
    return max(1e-15, 0.02 * math.exp(-2.0 * (t_max + 1.0)))


def graded_cells(features, m_target, phi_min):
    """Cell edges [a_i, b_i) partitioning the circle, graded toward features.

    Each wedge between consecutive feature angles is filled from both ends
    with geometrically growing cells starting at width phi_min, capped so
    the total cell count tracks m_target.
    """
    f = np.sort(np.mod(np.asarray(features, float), 2 * np.pi))
    cap = 2 * np.pi / max(8, m_target // 64)
    cells = []
    k = len(f)
    for i in range(k):
        a = f[i]
        b = f[(i + 1) % k] + (2 * np.pi if i + 1 == k else 0.0)
        half = 0.5 * (b - a)
        if half < 1e-13:
            continue
        for start, sgn in ((a, 1.0), (b, -1.0)):
            edges = [0.0]
            w = phi_min
            while edges[-1] + w < half:
                edges.append(edges[-1] + w)
                w = min(2 * w, cap)
            edges.append(half)
            for j in range(len(edges) - 1):
                ca = start + sgn * edges[j]
                cb = start + sgn * edges[j + 1]
                lo, hi = min(ca, cb), max(ca, cb)
                if hi - lo > 1e-16:
                    cells.append((lo, hi))
    cells.sort()
    return cells


def theta_rule(body, x0, m_theta, t_max):
    """Angular quadrature nodes and weights summing to 2 pi."""
    feats = body.feature_directions(np.asarray(x0, float))
    if feats is None:
        th = -np.pi + 2 * np.pi * (np.arange(m_theta) + 0.5) / m_theta
        return th, np.full(m_theta, 2 * np.pi / m_theta)
    nodes, weights = [], []
    for a, b in graded_cells(feats, m_theta, sliver_cutoff(t_max)):
        x, w = gauss3(a, b)
        nodes.append(x)
        weights.append(w)
    th = np.concatenate(nodes)
    wt = np.concatenate(weights)
    order = np.argsort(th)
    return th[order], wt[order]


def theta_nodes(body, x0, m, t_max):
    """Sorted angles for polyline vertices: uniform for smooth bodies,
    graded toward feature directions otherwise."""
    feats = body.feature_directions(np.asarray(x0, float))
    if feats is None:
        return 2 * np.pi * np.arange(m) / m
    th, _ = theta_rule(body, x0, m, t_max)
    return th
