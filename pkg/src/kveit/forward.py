"""Discrete Neumann and Dirichlet solution operators.

For a conductivity ``q`` and a measurement ``(j, g)``:

* the Neumann solution solves ``-div(q grad u) = f`` with flux ``j`` and a
  zero-mean boundary trace,
* the Dirichlet solution solves the same equation with trace ``g``.
"""
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument
from .fem import assemble_load, assemble_neumann_rhs, assemble_stiffness
from .linalg import ConstrainedSystem, solve_dirichlet_system, solve_neumann_system
from .mesh import check_field


@dataclass(frozen=True)
class Measurement:
    """Boundary current ``j`` (one value per boundary edge) and voltage ``g``
    (one value per boundary node), both in counterclockwise mesh order."""

    j: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        j = np.asarray(self.j, dtype=float)
        g = np.asarray(self.g, dtype=float)
        if j.shape != g.shape or j.ndim != 1:
            raise InvalidArgument(f"current and voltage shapes differ: {j.shape} vs {g.shape}")
        object.__setattr__(self, "j", j)
        object.__setattr__(self, "g", g)

    @property
    def level(self):
        return len(self.j) // 4

    def check(self, mesh):
        if len(self.j) != 4 * mesh.level:
            raise InvalidArgument(
                f"measurement has {len(self.j)} boundary entries, mesh level {mesh.level} needs {4 * mesh.level}"
            )
        return self

    def scaled(self, factor):
        return Measurement(factor * self.j, factor * self.g)


@dataclass(frozen=True)
class ForwardPair:
    u_N: np.ndarray
    u_D: np.ndarray

    @property
    def difference(self):
        return self.u_N - self.u_D


def check_conductivity(mesh, q, bounds=None):
    q = check_field(mesh, q)
    lo = 0.0 if bounds is None else bounds[0]
    if np.any(q < lo) or np.any(q <= 0):
        raise InvalidArgument(f"conductivity below lower bound {lo} (min {q.min():.3e})")
    if bounds is not None and np.any(q > bounds[1]):
        raise InvalidArgument(f"conductivity above upper bound {bounds[1]} (max {q.max():.3e})")
    return q


def _stack(measurements, attr):
    return np.column_stack([getattr(m, attr) for m in measurements])


def neumann_solve(mesh, q, measurement, f=None, bounds=None, method="cg", A=None):
    """Neumann solution for one measurement (or a list, giving one column each)."""
    q = check_conductivity(mesh, q, bounds)
    ms = measurement if isinstance(measurement, (list, tuple)) else [measurement]
    for m in ms:
        m.check(mesh)
    if A is None:
        A = assemble_stiffness(mesh, q)
    load = assemble_load(mesh, f)
    rhs = assemble_neumann_rhs(mesh, _stack(ms, "j")) + load[:, None]
    u = solve_neumann_system(ConstrainedSystem(A, mesh.boundary_weights, rhs), method=method)
    return u if isinstance(measurement, (list, tuple)) else u[:, 0]


def dirichlet_solve(mesh, q, measurement, f=None, bounds=None, method="cg", A=None):
    """Dirichlet solution for one measurement (or a list, giving one column each)."""
    q = check_conductivity(mesh, q, bounds)
    ms = measurement if isinstance(measurement, (list, tuple)) else [measurement]
    for m in ms:
        m.check(mesh)
    if A is None:
        A = assemble_stiffness(mesh, q)
    load = np.repeat(assemble_load(mesh, f)[:, None], len(ms), axis=1)
    u = solve_dirichlet_system(A, load, mesh.boundary_nodes, _stack(ms, "g"), method=method)
    return u if isinstance(measurement, (list, tuple)) else u[:, 0]


def solve_pairs(mesh, q, measurements, f=None, bounds=None, method="cg"):
    """Neumann and Dirichlet solutions for every measurement, sharing one stiffness matrix."""
    q = check_conductivity(mesh, q, bounds)
    A = assemble_stiffness(mesh, q)
    UN = neumann_solve(mesh, q, list(measurements), f, method=method, A=A)
    UD = dirichlet_solve(mesh, q, list(measurements), f, method=method, A=A)
    return [ForwardPair(UN[:, i], UD[:, i]) for i in range(len(measurements))]
