"""Conductivity reconstruction from boundary data by Kohn-Vogelius minimization.

P1 finite elements on a structured triangulation of (-1, 1)^2, a smoothed
total-variation penalty, and projected Armijo descent with coarse-to-fine
continuation.
"""
__version__ = "0.1.0"

from .errors import ConfigError, InvalidArgument, SolverFailure
from .mesh import Mesh, build_structured_mesh, interpolate_nodal, nodal_interpolant
from .fem import (PiecewiseConstantSource, assemble_load, assemble_mass, assemble_neumann_rhs,
                  assemble_stiffness)
from .linalg import ConstrainedSystem, pcg, solve_dirichlet_system, solve_neumann_system
from .forward import ForwardPair, Measurement, dirichlet_solve, neumann_solve, solve_pairs
from .objective import ObjectiveParams, Problem, evaluate, kv_gradient, kv_misfit, tv_smooth
from .optimizer import ArmijoConfig, multilevel_reconstruct, projected_armijo
from .experiments import (ErrorReport, NoiseSpec, Phantom, compute_eoc, error_metrics,
                          run_example, run_ladder)
