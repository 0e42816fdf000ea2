"""P1 finite element assembly on structured meshes.

All integrals are exact for the data handled here: the conductivity is P1 (so
its triangle integral is the vertex mean times the area), sources are constant
per triangle and Neumann data is constant per boundary edge.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .errors import InvalidArgument
from .mesh import check_field

_LOCAL_MASS = (np.ones((3, 3)) + np.eye(3)) / 12.0


@dataclass(frozen=True)
class _Pattern:
    indptr: np.ndarray
    indices: np.ndarray
    scatter: np.ndarray  # local (t, a, b) entry -> csr data slot
    nnz: int


@lru_cache(maxsize=16)
def _pattern(mesh):
    n = mesh.n_nodes
    tri = mesh.triangles
    rows = np.repeat(tri, 3, axis=1).ravel()
    cols = np.tile(tri, (1, 3)).ravel()
    keys, scatter = np.unique(rows * n + cols, return_inverse=True)
    indices = keys % n
    indptr = np.searchsorted(keys // n, np.arange(n + 1))
    return _Pattern(indptr, indices, scatter.ravel(), len(keys))


@lru_cache(maxsize=16)
def _unit_local_stiffness(mesh):
    # |T| grad(phi_a) . grad(phi_b), shape (nt, 9)
    k = np.einsum("tad,tbd->tab", mesh.grads, mesh.grads) * mesh.areas[:, None, None]
    return k.reshape(-1, 9)


def _from_local(mesh, local):
    pat = _pattern(mesh)
    data = np.bincount(pat.scatter, weights=local.ravel(), minlength=pat.nnz)
    n = mesh.n_nodes
    return sp.csr_matrix((data, pat.indices.copy(), pat.indptr.copy()), shape=(n, n))


def triangle_means(mesh, values):
    """Vertex mean of a P1 field on every triangle."""
    return check_field(mesh, values)[mesh.triangles].mean(axis=1)


def assemble_stiffness(mesh, q):
    """Stiffness matrix of ``int q grad(u) . grad(v)`` for a P1 coefficient ``q``."""
    q = np.asarray(q, dtype=float)
    if q.shape != (mesh.n_nodes,):
        raise InvalidArgument(f"coefficient has shape {q.shape}, expected ({mesh.n_nodes},)")
    qbar = triangle_means(mesh, q)
    return _from_local(mesh, _unit_local_stiffness(mesh) * qbar[:, None])


def assemble_mass(mesh):
    """Consistent P1 mass matrix."""
    local = mesh.areas[:, None] * _LOCAL_MASS.ravel()[None, :]
    return _from_local(mesh, local)


class PiecewiseConstantSource:
    """A source term taking finitely many constant values on regions of the square.

    ``regions`` is a sequence of ``(predicate, value)`` pairs where
    ``predicate(x1, x2)`` returns a boolean array.  Regions are expected to
    partition the domain; :meth:`check_partition` verifies this on a mesh.
    """

    def __init__(self, regions):
        self.regions = [(pred, float(value)) for pred, value in regions]

    @classmethod
    def constant(cls, value):
        return cls([(lambda x1, x2: np.ones_like(x1, dtype=bool), value)])

    def __call__(self, x1, x2):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        out = np.zeros(np.broadcast(x1, x2).shape)
        hit = np.zeros(out.shape, dtype=int)
        for pred, value in self.regions:
            m = np.broadcast_to(pred(x1, x2), out.shape)
            out[m] = value
            hit += m
        if np.any(hit != 1):
            raise InvalidArgument("source regions do not partition the sample points")
        return out

    def check_partition(self, mesh):
        c = mesh.nodes[mesh.triangles].mean(axis=1)
        self(c[:, 0], c[:, 1])
        return True

    def scaled(self, factor):
        return PiecewiseConstantSource([(p, factor * v) for p, v in self.regions])


def assemble_load(mesh, f):
    """Load vector ``(f, phi_i)``.

    ``f`` may be a :class:`PiecewiseConstantSource` (centroid rule, exact when
    every triangle lies inside one region) or any callable ``f(x1, x2)``, which
    is integrated with the edge-midpoint rule.
    """
    n = mesh.n_nodes
    if f is None:
        return np.zeros(n)
    p = mesh.nodes[mesh.triangles]
    if isinstance(f, PiecewiseConstantSource):
        c = p.mean(axis=1)
        ft = f(c[:, 0], c[:, 1])
        local = np.repeat((ft * mesh.areas / 3.0)[:, None], 3, axis=1)
    else:
        # midpoints opposite each vertex; phi_a is 0 at its opposite midpoint
        # and 1/2 at the other two
        mids = 0.5 * (p[:, [1, 2, 0]] + p[:, [2, 0, 1]])
        fm = np.asarray(f(mids[..., 0], mids[..., 1]), dtype=float)
        fm = np.broadcast_to(fm, mids.shape[:2])
        local = (fm.sum(axis=1, keepdims=True) - fm) / 6.0 * mesh.areas[:, None]
    b = np.zeros(n)
    np.add.at(b, mesh.triangles.ravel(), local.ravel())
    return b


def assemble_neumann_rhs(mesh, j):
    """Boundary vector ``<j, phi_i>`` for Neumann data constant on each boundary edge."""
    j = np.asarray(j, dtype=float)
    if j.shape[:1] != (len(mesh.boundary_edges),):
        raise InvalidArgument(
            f"expected one current value per boundary edge ({len(mesh.boundary_edges)}), got {j.shape}"
        )
    half = 0.5 * mesh.edge_lengths
    if j.ndim > 1:
        half = half[:, None]
    out = np.zeros((mesh.n_nodes,) + j.shape[1:])
    np.add.at(out, mesh.boundary_edges[:, 0], j * half)
    np.add.at(out, mesh.boundary_edges[:, 1], j * half)
    return out
