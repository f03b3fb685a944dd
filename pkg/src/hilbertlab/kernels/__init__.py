"""Kernel dispatch: numba lane when available, numpy lane otherwise."""

from ..backend import BACKEND

if BACKEND == "numba":
    from . import numba_impl as impl
else:
    from . import numpy_impl as impl

POLYTOPE = impl.POLYTOPE
ELLIPSOID = impl.ELLIPSOID
SUPERELLIPSE = impl.SUPERELLIPSE

chord_tvals = impl.chord_tvals
dist_rows = impl.dist_rows
dist_point_set = impl.dist_point_set
finsler_rows = impl.finsler_rows
rpow_mean = impl.rpow_mean
profile_tvals = impl.profile_tvals
csr_matvec = impl.csr_matvec
vdot = impl.vdot
bfs_levels = impl.bfs_levels
pack_annulus_hyp = impl.pack_annulus_hyp
pack_annulus_gen = impl.pack_annulus_gen
query_hyp = impl.query_hyp
query_gen = impl.query_gen
nearest_hyp = impl.nearest_hyp
nearest_gen = impl.nearest_gen
cheeger_exact = impl.cheeger_exact
