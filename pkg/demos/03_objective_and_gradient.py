# Objective values and the adjoint-free gradient.
#
# Data generated on the fine data mesh are not exactly consistent on a coarse
# mesh, so even the interpolated truth leaves some misfit there.  Data
# generated on the same mesh give zero misfit.
import numpy as np

from kveit.experiments import boundary_current
from kveit.forward import Measurement, neumann_solve
from kveit.mesh import boundary_trace

from kveit.experiments import NoiseSpec, Phantom, add_noise, generate_exact_data, restrict_data
from kveit.mesh import build_structured_mesh
from kveit.objective import ObjectiveParams, Problem
from kveit.optimizer import rho_rule

phantom = Phantom()
mesh = build_structured_mesh(8)
exact = restrict_data(generate_exact_data()[0], mesh)
rho = rho_rule(mesh.h)
params = ObjectiveParams(rho, rho)

truth = phantom.interpolate(mesh)
flat = np.full(mesh.n_nodes, 1.5)

clean = Problem(mesh, [exact], phantom.source, params)
for name, q in (("truth", truth), ("flat 1.5", flat)):
    report, _ = clean.evaluate(q)
    print(f"{name:9s} misfit {report.misfit:.3e}  tv {report.tv_smooth:.3f}  total {report.total:.3e}")

j = boundary_current(mesh)
u = neumann_solve(mesh, truth, Measurement(j, 0 * j), phantom.source)
same_mesh = Problem(mesh, [Measurement(j, boundary_trace(mesh, u))], phantom.source, params)
print("same-mesh data, truth misfit", same_mesh.evaluate(truth)[0].misfit)

# Directional derivative against central differences
noisy = add_noise(exact, mesh, 0.05, NoiseSpec(seed=0).rng(8))[0]
prob = Problem(mesh, [noisy], phantom.source, params)
rng = np.random.default_rng(0)
xi = rng.normal(size=mesh.n_nodes)
t = 1e-5
fd = (prob.value(flat + t * xi) - prob.value(flat - t * xi)) / (2 * t)
print(prob.gradient(flat) @ xi, fd)
