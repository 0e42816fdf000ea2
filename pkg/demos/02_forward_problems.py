# Neumann and Dirichlet solves for the phantom conductivity.
#
# The Neumann solution is normalised to a zero-mean boundary trace.  Feeding
# its trace back as Dirichlet data gives the same field again.
import numpy as np

from kveit.experiments import Phantom, boundary_current
from kveit.forward import Measurement, dirichlet_solve, neumann_solve
from kveit.mesh import boundary_mean, boundary_trace, build_structured_mesh

phantom = Phantom()
for level in (8, 32, 128):
    mesh = build_structured_mesh(level)
    q = phantom.interpolate(mesh)
    j = boundary_current(mesh)
    u_N = neumann_solve(mesh, q, Measurement(j, np.zeros_like(j)), phantom.source)
    g = boundary_trace(mesh, u_N)
    u_D = dirichlet_solve(mesh, q, Measurement(j, g), phantom.source)
    print(f"level {level:3d}: trace mean {boundary_mean(mesh, u_N):+.1e}, "
          f"g in [{g.min():.3f}, {g.max():.3f}], max |u_N - u_D| {np.abs(u_N - u_D).max():.1e}")

# Sparse LU gives the same answer as CG
u_lu = neumann_solve(mesh, q, Measurement(j, g), phantom.source, method="direct")
print(np.linalg.norm(u_lu - u_N) / np.linalg.norm(u_N))
