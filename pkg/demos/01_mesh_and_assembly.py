# Structured meshes of (-1, 1)^2 and the P1 matrices built on them.
import numpy as np

from kveit.fem import assemble_load, assemble_mass, assemble_neumann_rhs, assemble_stiffness
from kveit.experiments import Phantom, boundary_current
from kveit.mesh import build_structured_mesh, interpolate_nodal

for level in (1, 4, 64):
    print(level, build_structured_mesh(level).describe())

mesh = build_structured_mesh(4)
print(mesh.nodes[:6])
print(mesh.triangles[:4])          # each cell is cut bottom-left to top-right
print(mesh.boundary_nodes)         # counterclockwise from (-1, -1)

# Mass matrix integrates exactly: 1 -> area 4, x1^2 -> 4/3
M = assemble_mass(mesh)
one, x1 = np.ones(mesh.n_nodes), mesh.nodes[:, 0]
print(one @ M @ one, x1 @ M @ x1)

# Stiffness matrices annihilate constants for any conductivity
q = Phantom().interpolate(mesh)
A = assemble_stiffness(mesh, q)
print(np.abs(A @ one).max())

# The reference source and current both have zero mean
print(assemble_load(mesh, Phantom().source).sum(), assemble_neumann_rhs(mesh, boundary_current(mesh)).sum())

# Prolongation to a nested finer mesh reproduces linear fields
fine = build_structured_mesh(8)
print(np.abs(interpolate_nodal(x1, mesh, fine) - fine.nodes[:, 0]).max())
