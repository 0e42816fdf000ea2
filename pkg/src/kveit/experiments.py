"""Synthetic reconstruction experiments on the square (-1, 1)^2.

The ground truth conductivity is 3 on an ellipse, 2 on a small disk and 1
elsewhere; the source is 3/2 on the centre square [-1/2, 1/2]^2 and -1/2
outside.  Exact data are generated on a fine mesh (level 128), transferred to
the reconstruction levels and perturbed with uniform noise there.
"""
from dataclasses import dataclass, field, asdict
from functools import lru_cache
from itertools import permutations
import logging

import numpy as np

from .errors import InvalidArgument
from .fem import PiecewiseConstantSource, assemble_mass
from .forward import Measurement, dirichlet_solve, neumann_solve
from .mesh import boundary_trace, build_structured_mesh, nodal_interpolant
from .optimizer import ArmijoConfig, multilevel_reconstruct, rho_rule

log = logging.getLogger(__name__)

RNG_ALGORITHM = "numpy.random.PCG64"
DEFAULT_LEVELS = (4, 8, 16, 32, 64)
DATA_LEVEL = 128
EXAMPLE2_THETAS = (0.005, 0.01, 0.05, 0.1)
EXAMPLE3_SIZES = (1, 6, 16)


def in_ellipse(x1, x2):
    return 9 * (x1 + 0.5) ** 2 + 16 * (x2 - 0.5) ** 2 <= 1


def in_disk(x1, x2):
    return (x1 - 0.5) ** 2 + (x2 + 0.5) ** 2 <= 1 / 16


def in_centre(x1, x2):
    return (np.abs(x1) <= 0.5) & (np.abs(x2) <= 0.5)


def phantom_conductivity(x1, x2):
    x1, x2 = np.broadcast_arrays(np.asarray(x1, float), np.asarray(x2, float))
    q = np.ones(x1.shape)
    q[in_ellipse(x1, x2)] = 3.0
    q[in_disk(x1, x2)] = 2.0
    return q


def phantom_source():
    return PiecewiseConstantSource([
        (in_centre, 1.5),
        (lambda x1, x2: ~in_centre(x1, x2), -0.5),
    ])


@dataclass(frozen=True)
class Phantom:
    conductivity: object = phantom_conductivity
    source: object = field(default_factory=phantom_source)

    def interpolate(self, mesh):
        return nodal_interpolant(mesh, self.conductivity)


def boundary_current(mesh, coeffs=(1, 2, 3, 4)):
    """Piecewise constant current with magnitudes ``(A, B, C, D)``, one value per edge.

    Bottom: ``+A`` for x1 > 0, ``-B`` for x1 <= 0.  Top: ``-A`` for x1 <= 0,
    ``+B`` for x1 > 0.  Left: ``+C`` for x2 <= 0, ``-D`` for x2 > 0.  Right:
    ``+D`` for x2 <= 0, ``-C`` for x2 > 0.  Edges are classified by their
    midpoints, so the level must be even for the values to be exact.
    """
    A, B, C, D = (float(c) for c in coeffs)
    mid = 0.5 * (mesh.nodes[mesh.boundary_edges[:, 0]] + mesh.nodes[mesh.boundary_edges[:, 1]])
    x1, x2 = mid[:, 0], mid[:, 1]
    side = mesh.edge_sides
    return np.select(
        [side == 0, side == 1, side == 2, side == 3],
        [np.where(x1 > 0, A, -B), np.where(x2 > 0, -C, D),
         np.where(x1 > 0, B, -A), np.where(x2 > 0, -D, C)],
    )


def measurement_currents(n):
    """Current coefficient tuples for ``n`` measurements.

    1 gives (1, 2, 3, 4); 6 gives the permutations of (1, 2, 3) with D = 4;
    any other count up to 24 takes the first ``n`` permutations of
    (1, 2, 3, 4) in lexicographic order.
    """
    if n == 1:
        return [(1, 2, 3, 4)]
    if n == 6:
        return [p + (4,) for p in permutations((1, 2, 3))]
    perms = list(permutations((1, 2, 3, 4)))
    if not 1 <= n <= len(perms):
        raise InvalidArgument(f"cannot build {n} measurements from permutations of (1, 2, 3, 4)")
    return perms[:n]


@lru_cache(maxsize=8)
def _exact_data(currents, level, method):
    mesh = build_structured_mesh(level)
    phantom = Phantom()
    q = phantom.interpolate(mesh)
    js = [boundary_current(mesh, c) for c in currents]
    ms = [Measurement(j, np.zeros(len(j))) for j in js]
    U = neumann_solve(mesh, q, ms, phantom.source, method=method)
    return tuple(Measurement(j, boundary_trace(mesh, U[:, i])) for i, j in enumerate(js))


def generate_exact_data(currents=((1, 2, 3, 4),), level=DATA_LEVEL, method="cg"):
    """Exact measurements on the data mesh: currents and the Neumann traces they induce.

    The conductivity is the nodal interpolant of the phantom on that mesh.
    """
    if level % 4:
        raise InvalidArgument(f"data level must be divisible by 4, got {level}")
    currents = tuple(tuple(float(x) for x in c) for c in currents)
    return list(_exact_data(currents, int(level), method))


def restrict_data(fine, mesh):
    """Transfer a measurement to a coarser nested mesh.

    Voltages are read off at the shared boundary nodes; each coarse edge gets
    the mean current of the fine edges it covers.
    """
    lf, lc = fine.level, mesh.level
    if lf % lc:
        raise InvalidArgument(f"level {lc} does not divide data level {lf}")
    m = lf // lc
    return Measurement(fine.j.reshape(4 * lc, m).mean(axis=1), fine.g[::m].copy())


@dataclass(frozen=True)
class NoiseSpec:
    """Uniform boundary noise of amplitude ``theta``.

    In ``"level"`` mode ``theta`` is ignored and ``h sqrt(rho)`` is used on
    each level instead.
    """

    mode: str = "level"
    theta: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("level", "fixed"):
            raise InvalidArgument(f"noise mode must be 'level' or 'fixed', got {self.mode!r}")
        if self.theta < 0:
            raise InvalidArgument("noise amplitude must be non-negative")

    def amplitude(self, h, rho):
        return h * np.sqrt(rho) if self.mode == "level" else self.theta

    def rng(self, level):
        return np.random.default_rng([int(self.seed), int(level)])


def add_noise(measurement, mesh, theta, rng):
    """Return ``(noisy measurement, delta)``.

    One uniform(-1, 1) draw per boundary node is made for the current and one
    for the voltage; edges take the mean of their two endpoint draws.
    ``delta`` is the sum of the boundary L2 norms of both perturbations.
    """
    measurement.check(mesh)
    nb = len(mesh.boundary_nodes)
    r_nodes = rng.uniform(-1.0, 1.0, nb)
    r_g = rng.uniform(-1.0, 1.0, nb)
    r_j = 0.5 * (r_nodes + np.roll(r_nodes, -1))
    dj = theta * r_j
    dg = theta * r_g
    w = mesh.boundary_weights[mesh.boundary_nodes]
    delta = np.sqrt(np.sum(mesh.edge_lengths * dj ** 2)) + np.sqrt(np.sum(w * dg ** 2))
    return Measurement(measurement.j + dj, measurement.g + dg), float(delta)


def l2_norm(M, v):
    return float(np.sqrt(max(v @ (M @ v), 0.0)))


@dataclass
class ErrorReport:
    level: int
    h: float
    rho: float
    delta: float
    iterations: int
    tolerance: float
    L2_q: float
    L2_N: float
    L2_D: float
    EOC_q: float = None
    EOC_N: float = None
    EOC_D: float = None
    theta: float = None
    n_measurements: int = 1
    seed: int = None

    def as_dict(self):
        return asdict(self)


def error_metrics(q, mesh, exact, noisy, phantom=None, method="cg"):
    """Errors of a reconstruction against the phantom on the same mesh.

    ``exact`` and ``noisy`` are equal-length lists of measurements on ``mesh``.
    With several measurements the state errors are averaged.  Returns
    ``(errors, fields)`` where ``fields`` holds the difference fields of the
    first measurement.
    """
    phantom = phantom or Phantom()
    M = assemble_mass(mesh)
    qt = phantom.interpolate(mesh)
    f = phantom.source
    UN = neumann_solve(mesh, q, list(noisy), f, method=method)
    UNt = neumann_solve(mesh, qt, list(exact), f, method=method)
    UD = dirichlet_solve(mesh, q, list(noisy), f, method=method)
    UDt = dirichlet_solve(mesh, qt, list(exact), f, method=method)
    eN = [l2_norm(M, UN[:, i] - UNt[:, i]) for i in range(len(exact))]
    eD = [l2_norm(M, UD[:, i] - UDt[:, i]) for i in range(len(exact))]
    errors = {"L2_q": l2_norm(M, q - qt), "L2_N": float(np.mean(eN)), "L2_D": float(np.mean(eD))}
    fields = {
        "q": q,
        "q_exact": qt,
        "q_error": q - qt,
        "neumann_error": UN[:, 0] - UNt[:, 0],
        "dirichlet_error": UD[:, 0] - UDt[:, 0],
    }
    return errors, fields


def compute_eoc(hs, values):
    """Experimental orders of convergence between consecutive rows, and their mean."""
    hs = np.asarray(hs, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(hs) != len(values) or len(hs) < 2:
        raise InvalidArgument("need at least two (h, error) pairs")
    if np.any(values <= 0) or np.any(hs <= 0):
        raise InvalidArgument("errors and mesh sizes must be positive")
    lv, lh = np.log(values), np.log(hs)
    eoc = (lv[:-1] - lv[1:]) / (lh[:-1] - lh[1:])
    return eoc, float(eoc.mean())


@dataclass
class Run:
    """One noise / measurement configuration run down the level ladder."""

    reports: list
    levels: list = field(repr=False)
    fields: dict = field(repr=False)
    deltas: dict


def run_ladder(levels=DEFAULT_LEVELS, noise=NoiseSpec(), n_measurements=1, currents=None,
               data_level=DATA_LEVEL, rho_scale=0.01, eps=None, config=ArmijoConfig(), q_init=1.5,
               bounds=(0.05, 10.0), method="cg", callback=None):
    """Generate data, reconstruct on every level and evaluate the errors.

    ``currents`` lists the ``(A, B, C, D)`` coefficients of each measurement;
    by default the first ``n_measurements`` of :func:`measurement_currents`.
    """
    phantom = Phantom()
    if currents is None:
        currents = measurement_currents(n_measurements)
    fine = generate_exact_data(currents, data_level, method)
    exact_by_level, noisy_by_level, deltas, thetas = {}, {}, {}, {}

    def data_source(mesh):
        rho = rho_rule(mesh.h, rho_scale)
        theta = noise.amplitude(mesh.h, rho)
        rng = noise.rng(mesh.level)
        exact = [restrict_data(m, mesh) for m in fine]
        noisy, ds = zip(*(add_noise(m, mesh, theta, rng) for m in exact))
        exact_by_level[mesh.level] = exact
        noisy_by_level[mesh.level] = list(noisy)
        deltas[mesh.level] = float(np.mean(ds))
        thetas[mesh.level] = theta
        return list(noisy)

    results = multilevel_reconstruct(levels, data_source, phantom.source, q_init=q_init,
                                     rho_scale=rho_scale, eps=eps, config=config, bounds=bounds,
                                     method=method, callback=callback)
    reports, fields = [], {}
    for lr in results:
        errs, flds = error_metrics(lr.q, lr.mesh, exact_by_level[lr.level],
                                   noisy_by_level[lr.level], phantom, method)
        fields[lr.level] = flds
        reports.append(ErrorReport(
            level=lr.level, h=lr.mesh.h, rho=lr.params.rho, delta=deltas[lr.level],
            iterations=lr.result.iterations, tolerance=lr.result.tolerance,
            theta=thetas[lr.level], n_measurements=len(currents), seed=noise.seed, **errs,
        ))
    if len(reports) > 1:
        for key in ("q", "N", "D"):
            eoc, _ = compute_eoc([r.h for r in reports], [getattr(r, "L2_" + key) for r in reports])
            for r, e in zip(reports[1:], eoc):
                setattr(r, "EOC_" + key, float(e))
    return Run(reports, results, fields, deltas)


@dataclass
class ExampleResult:
    example: int
    rows: list
    runs: dict = field(repr=False)


def run_example(example, seed=0, levels=DEFAULT_LEVELS, thetas=EXAMPLE2_THETAS,
                sizes=EXAMPLE3_SIZES, theta=0.1, **kwargs):
    """Run one of the three experiments.

    1. level-coupled noise down the ladder; one row per level.
    2. fixed noise amplitudes ``thetas``; one row (finest level) per amplitude.
    3. fixed amplitude ``theta`` with ``sizes`` measurements; one row per size.

    Extra keyword arguments go to :func:`run_ladder`.
    """
    if example == 1:
        run = run_ladder(levels, NoiseSpec("level", seed=seed), **kwargs)
        return ExampleResult(1, run.reports, {"ladder": run})
    if example == 2:
        runs = {t: run_ladder(levels, NoiseSpec("fixed", t, seed), **kwargs) for t in thetas}
        return ExampleResult(2, [runs[t].reports[-1] for t in thetas], runs)
    if example == 3:
        runs = {n: run_ladder(levels, NoiseSpec("fixed", theta, seed), n_measurements=n, **kwargs)
                for n in sizes}
        return ExampleResult(3, [runs[n].reports[-1] for n in sizes], runs)
    raise InvalidArgument(f"unknown example {example!r}, expected 1, 2 or 3")
