"""Projected Armijo descent and the coarse-to-fine continuation driver."""
from dataclasses import dataclass, field
import logging

import numpy as np

from .errors import InvalidArgument
from .fem import assemble_mass
from .mesh import build_structured_mesh, interpolate_nodal
from .objective import ObjectiveParams, Problem

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ArmijoConfig:
    """Step control and stopping constants.

    The stopping constants are ``tol1 = tol1_scale sqrt(h)`` and
    ``tol2 = tol2_scale sqrt(h)``.
    With ``reset_beta`` the step control returns to ``beta0`` after every
    accepted step; by default it is only ever halved.
    """

    beta0: float = 0.75
    tau: float = 1e-4
    max_iter: int = 1000
    tol1_scale: float = 1e-3
    tol2_scale: float = 1e-2
    reset_beta: bool = False
    beta_min: float = 1e-16

    def __post_init__(self):
        if not 0 < self.beta0 < 1:
            raise InvalidArgument(f"beta0 must lie in (0, 1), got {self.beta0}")
        if not self.tau > 0:
            raise InvalidArgument(f"tau must be positive, got {self.tau}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 0:
            raise InvalidArgument(f"max_iter must be a non-negative integer, got {self.max_iter}")

    def tolerances(self, h):
        return self.tol1_scale * np.sqrt(h), self.tol2_scale * np.sqrt(h)


@dataclass
class IterationRecord:
    k: int
    objective: float
    misfit: float
    tv: float
    gradient_L2: float
    tolerance: float
    beta: float
    accepted: bool
    trials: int = 0

    FIELDS = ("k", "objective", "misfit", "tv", "gradient_L2", "tolerance", "beta", "accepted")


@dataclass
class ArmijoResult:
    q: np.ndarray
    history: list
    stalled: bool = False

    @property
    def iterations(self):
        return self.history[-1].k

    @property
    def tolerance(self):
        return self.history[-1].tolerance

    @property
    def objective(self):
        return self.history[-1].objective


def project(q, bounds):
    """Clamp nodal values onto ``[lower, upper]``."""
    lo, hi = bounds
    return np.maximum(lo, np.minimum(np.asarray(q, dtype=float), hi))


def gradient_L2_norm(G, M):
    """``sqrt(G^T M G)``, the L2 norm of the P1 function with coefficients ``G``."""
    val = float(G @ (M @ G))
    if val < 0:
        raise ArithmeticError(f"mass matrix quadratic form is negative ({val:.3e})")
    return np.sqrt(val)


def projected_armijo(problem, q0, config=ArmijoConfig(), mass=None, callback=None):
    """Minimize ``problem``'s objective over the box by projected Armijo steps.

    Every iterate ``q_k`` gets one :class:`IterationRecord`, whose tolerance is
    ``||grad(q_k)|| - tol1 - tol2 ||grad(q_0)||``.  The loop stops once that is
    non-positive or ``k`` reaches ``config.max_iter``.  If the step control
    underflows before a step is accepted, the incumbent is returned with
    ``stalled=True``.
    """
    mesh = problem.mesh
    bounds = problem.params.bounds
    q = np.asarray(q0, dtype=float).copy()
    if np.any(q < bounds[0]) or np.any(q > bounds[1]):
        raise InvalidArgument("initial conductivity violates the bounds")
    M = assemble_mass(mesh) if mass is None else mass
    tol1, tol2 = config.tolerances(mesh.h)

    report, pairs = problem.evaluate(q)
    beta = config.beta0
    history = []
    stalled = False
    g0_norm = None
    k = 0
    trials = 0
    while True:
        G = problem.gradient(q, pairs)
        g_norm = gradient_L2_norm(G, M)
        if g0_norm is None:
            g0_norm = g_norm
        tolerance = g_norm - tol1 - tol2 * g0_norm
        rec = IterationRecord(k, report.total, report.misfit, report.tv_smooth, g_norm,
                              tolerance, beta, k > 0, trials)
        history.append(rec)
        if callback is not None:
            callback(rec)
        if tolerance <= 0 or k >= config.max_iter:
            break

        trials = 0
        while True:
            trials += 1
            q_trial = project(q - beta * G, bounds)
            trial_report, trial_pairs = problem.evaluate(q_trial)
            d = q_trial - q
            L = trial_report.total - report.total + config.tau * beta * float(d @ (M @ d))
            if L <= 0:
                break
            beta /= 2
            if beta < config.beta_min:
                stalled = True
                break
        if stalled:
            log.warning("line search stalled at k=%d (beta=%.3e)", k, beta)
            break
        q, report, pairs = q_trial, trial_report, trial_pairs
        k += 1
        if config.reset_beta:
            beta = config.beta0
    return ArmijoResult(q, history, stalled)


def rho_rule(h, scale=0.01):
    return scale * np.sqrt(h)


@dataclass
class LevelResult:
    level: int
    mesh: object
    params: ObjectiveParams
    measurements: list
    q0: np.ndarray
    result: ArmijoResult = field(repr=False)

    @property
    def q(self):
        return self.result.q


def multilevel_reconstruct(levels, data_source, f, q_init=1.5, rho_scale=0.01,
                           eps=None, config=ArmijoConfig(), bounds=(0.05, 10.0),
                           method="cg", weights=None, callback=None):
    """Run projected Armijo on each level, warm-starting from the previous level.

    ``data_source(mesh)`` returns the list of measurements on that mesh.  The
    coarsest level starts from the constant ``q_init``.  On each level
    ``rho = rho_scale sqrt(h)`` and ``eps = rho`` unless ``eps`` is given.
    """
    levels = [int(l) for l in levels]
    if not levels:
        raise InvalidArgument("no levels given")
    for a, b in zip(levels, levels[1:]):
        if b <= a or b % a:
            raise InvalidArgument(f"levels must be increasing refinements, got {a} -> {b}")
    out = []
    prev = None
    for level in levels:
        mesh = build_structured_mesh(level)
        rho = rho_rule(mesh.h, rho_scale)
        params = ObjectiveParams(rho, rho if eps is None else eps, *bounds)
        if prev is None:
            q0 = np.full(mesh.n_nodes, float(q_init))
        else:
            q0 = project(interpolate_nodal(prev.q, prev.mesh, mesh), bounds)
        problem = Problem(mesh, data_source(mesh), f, params, weights, method)
        cb = None if callback is None else (lambda rec, level=level: callback(level, rec))
        result = projected_armijo(problem, q0, config, callback=cb)
        log.info("level %d: %d iterations, tolerance %.4e", level, result.iterations, result.tolerance)
        prev = LevelResult(level, mesh, params, problem.measurements, q0, result)
        out.append(prev)
    return out
