# Projected Armijo descent on one mesh, printing the iteration history.
import numpy as np

from kveit.experiments import NoiseSpec, Phantom, add_noise, generate_exact_data, restrict_data
from kveit.fem import assemble_mass
from kveit.mesh import build_structured_mesh
from kveit.objective import ObjectiveParams, Problem
from kveit.optimizer import ArmijoConfig, projected_armijo, rho_rule

phantom = Phantom()
mesh = build_structured_mesh(16)
rho = rho_rule(mesh.h)
data = add_noise(restrict_data(generate_exact_data()[0], mesh), mesh, 0.01, NoiseSpec(seed=1).rng(16))[0]
problem = Problem(mesh, [data], phantom.source, ObjectiveParams(rho, rho))


def show(rec):
    if rec.k % 10 == 0:
        print(f"k={rec.k:4d} objective={rec.objective:.4e} |G|={rec.gradient_L2:.3e} "
              f"tolerance={rec.tolerance:+.3e} beta={rec.beta:.3g}")


result = projected_armijo(problem, np.full(mesh.n_nodes, 1.5), ArmijoConfig(), callback=show)
print("stopped after", result.iterations, "iterations, tolerance", result.tolerance)

M = assemble_mass(mesh)
err = result.q - phantom.interpolate(mesh)
print("L2 error", np.sqrt(err @ M @ err), " q range", result.q.min(), result.q.max())
