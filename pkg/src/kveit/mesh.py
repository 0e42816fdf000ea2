"""Structured triangulations of the square (-1, 1)^2.

Nodes are numbered lexicographically by (x2, x1): node ``i + (n + 1) * j`` sits
at ``(-1 + 2 i / n, -1 + 2 j / n)``.  Every grid cell is cut along the
diagonal from its bottom-left to its top-right corner, which makes the meshes
of levels ``n`` and ``2 n`` nested.

P1 fields are plain ``numpy`` arrays holding one value per node.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument

SIDES = ("bottom", "right", "top", "left")


def _frozen(a):
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Mesh:
    """Uniform triangulation of (-1, 1)^2 with ``level`` segments per axis.

    Attributes
    ----------
    nodes : (M, 2) float array
    triangles : (2 level^2, 3) int array, counterclockwise
    boundary_nodes : (4 level,) int array, counterclockwise from (-1, -1)
    boundary_edges : (4 level, 2) int array; edge ``k`` joins
        ``boundary_nodes[k]`` and ``boundary_nodes[k + 1]``
    edge_sides : (4 level,) int array of indices into ``SIDES``
    """

    level: int
    nodes: np.ndarray
    triangles: np.ndarray
    boundary_nodes: np.ndarray
    boundary_edges: np.ndarray
    edge_sides: np.ndarray
    # derived geometry
    areas: np.ndarray = field(repr=False)
    grads: np.ndarray = field(repr=False)
    edge_lengths: np.ndarray = field(repr=False)
    boundary_weights: np.ndarray = field(repr=False)

    @property
    def h(self):
        """Triangle diameter (length of the hypotenuse)."""
        return np.sqrt(8.0) / self.level

    @property
    def n_nodes(self):
        return len(self.nodes)

    @property
    def n_triangles(self):
        return len(self.triangles)

    @property
    def interior_nodes(self):
        mask = np.ones(self.n_nodes, dtype=bool)
        mask[self.boundary_nodes] = False
        return np.flatnonzero(mask)

    def gradient(self, values):
        """Per-triangle gradient of a P1 field, shape ``(n_triangles, 2)``."""
        values = check_field(self, values)
        return np.einsum("tk,tkd->td", values[self.triangles], self.grads)

    def describe(self):
        return f"{self.n_nodes} nodes, {self.n_triangles} triangles, h={self.h:.4f}"


def build_structured_mesh(level):
    """Build the mesh with ``level`` equal segments per side."""
    if int(level) != level or level < 1:
        raise InvalidArgument(f"mesh level must be a positive integer, got {level!r}")
    n = int(level)
    x = np.linspace(-1.0, 1.0, n + 1)
    X1, X2 = np.meshgrid(x, x)
    nodes = np.column_stack([X1.ravel(), X2.ravel()])

    def idx(i, j):
        return i + (n + 1) * j

    i, j = np.meshgrid(np.arange(n), np.arange(n))
    i, j = i.ravel(), j.ravel()
    bl, br, tr, tl = idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)
    lower = np.column_stack([bl, br, tr])
    upper = np.column_stack([bl, tr, tl])
    # interleave so the two halves of a cell are adjacent
    triangles = np.empty((2 * n * n, 3), dtype=np.int64)
    triangles[0::2] = lower
    triangles[1::2] = upper

    k = np.arange(n)
    bottom = idx(k, 0)
    right = idx(n, k)
    top = idx(n - k, n)
    left = idx(0, n - k)
    boundary_nodes = np.concatenate([bottom, right, top, left])
    boundary_edges = np.column_stack([boundary_nodes, np.roll(boundary_nodes, -1)])
    edge_sides = np.repeat(np.arange(4), n)

    p = nodes[triangles]
    e1 = p[:, 1] - p[:, 0]
    e2 = p[:, 2] - p[:, 0]
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    areas = 0.5 * det
    # gradients of the barycentric coordinates: rows of inv([e1 e2])^T
    g1 = np.column_stack([e2[:, 1], -e2[:, 0]]) / det[:, None]
    g2 = np.column_stack([-e1[:, 1], e1[:, 0]]) / det[:, None]
    grads = np.stack([-g1 - g2, g1, g2], axis=1)

    ev = nodes[boundary_edges[:, 1]] - nodes[boundary_edges[:, 0]]
    edge_lengths = np.hypot(ev[:, 0], ev[:, 1])
    # lumped boundary quadrature: half of each adjacent edge
    boundary_weights = np.zeros(len(nodes))
    np.add.at(boundary_weights, boundary_edges[:, 0], 0.5 * edge_lengths)
    np.add.at(boundary_weights, boundary_edges[:, 1], 0.5 * edge_lengths)

    return Mesh(
        level=n,
        nodes=_frozen(nodes),
        triangles=_frozen(triangles),
        boundary_nodes=_frozen(boundary_nodes),
        boundary_edges=_frozen(boundary_edges),
        edge_sides=_frozen(edge_sides),
        areas=_frozen(areas),
        grads=_frozen(grads),
        edge_lengths=_frozen(edge_lengths),
        boundary_weights=_frozen(boundary_weights),
    )


def check_field(mesh, values):
    values = np.asarray(values, dtype=float)
    if values.shape[:1] != (mesh.n_nodes,):
        raise InvalidArgument(
            f"field has {values.shape[:1]} entries, mesh level {mesh.level} has {mesh.n_nodes} nodes"
        )
    return values


def nodal_interpolant(mesh, func):
    """Nodal values of ``func(x1, x2)`` (the P1 interpolant)."""
    values = np.asarray(func(mesh.nodes[:, 0], mesh.nodes[:, 1]), dtype=float)
    return np.broadcast_to(values, (mesh.n_nodes,)).copy()


def interpolate_nodal(coarse_values, coarse_mesh, fine_mesh):
    """Evaluate a coarse P1 field at the nodes of a nested finer mesh.

    Works in integer grid coordinates so values at shared nodes are copied
    exactly and new edge midpoints get the mean of the two endpoints.
    """
    coarse_values = check_field(coarse_mesh, coarse_values)
    nc, nf = coarse_mesh.level, fine_mesh.level
    if nf % nc:
        raise InvalidArgument(f"level {nf} is not a refinement of level {nc}")
    m = nf // nc
    I, J = np.meshgrid(np.arange(nf + 1), np.arange(nf + 1))
    I, J = I.ravel(), J.ravel()
    ci = np.minimum(I // m, nc - 1)
    cj = np.minimum(J // m, nc - 1)
    s = (I - ci * m) / m
    t = (J - cj * m) / m

    def v(i, j):
        return coarse_values[i + (nc + 1) * j]

    vbl, vbr, vtr, vtl = v(ci, cj), v(ci + 1, cj), v(ci + 1, cj + 1), v(ci, cj + 1)
    lower = (1 - s) * vbl + (s - t) * vbr + t * vtr
    upper = (1 - t) * vbl + s * vtr + (t - s) * vtl
    return np.where(t <= s, lower, upper)


def boundary_trace(mesh, values):
    """Values of a P1 field at ``mesh.boundary_nodes`` (counterclockwise)."""
    return check_field(mesh, values)[mesh.boundary_nodes]


def boundary_mean(mesh, values):
    """Lumped boundary integral of the trace divided by the perimeter."""
    values = check_field(mesh, values)
    return mesh.boundary_weights @ values / mesh.boundary_weights.sum()
