"""Kohn-Vogelius misfit with smoothed total variation, and its gradient.

For measurements ``(j_i, g_i)``, ``i = 1..I``, the objective is

    (1/I) sum_i int q |grad(N_q j_i - D_q g_i)|^2 + rho int sqrt(|grad q|^2 + eps)

The misfit gradient needs no adjoint solves: differentiating through both
solution operators leaves ``int xi (|grad D_q g|^2 - |grad N_q j|^2)``.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument
from .fem import triangle_means
from .forward import solve_pairs
from .mesh import check_field


@dataclass(frozen=True)
class ObjectiveParams:
    rho: float
    eps: float
    lower: float = 0.05
    upper: float = 10.0

    def __post_init__(self):
        if not self.rho >= 0:
            raise InvalidArgument(f"rho must be non-negative, got {self.rho}")
        if not self.eps > 0:
            raise InvalidArgument(f"eps must be positive, got {self.eps}")
        if not 0 < self.lower < self.upper:
            raise InvalidArgument(f"need 0 < lower < upper, got ({self.lower}, {self.upper})")

    @property
    def bounds(self):
        return (self.lower, self.upper)


@dataclass
class ObjectiveReport:
    misfit: float
    tv_smooth: float
    total: float
    per_measurement: list = field(default_factory=list)


def kv_misfit(mesh, q, pair):
    """``int q |grad(u_N - u_D)|^2`` evaluated triangle by triangle."""
    grad = mesh.gradient(pair.u_N - pair.u_D)
    return float(np.sum(triangle_means(mesh, q) * mesh.areas * np.einsum("td,td->t", grad, grad)))


def tv_smooth(mesh, q, eps):
    """``int sqrt(|grad q|^2 + eps)``; exact for P1 ``q``."""
    if eps < 0:
        raise InvalidArgument("eps must be non-negative")
    grad = mesh.gradient(q)
    return float(np.sum(mesh.areas * np.sqrt(np.einsum("td,td->t", grad, grad) + eps)))


def _weights(n, weights):
    if n == 0:
        raise InvalidArgument("at least one forward pair is required")
    if weights is None:
        return np.full(n, 1.0 / n)
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (n,):
        raise InvalidArgument("one weight per measurement required")
    return weights


def evaluate(mesh, q, pairs, params, weights=None):
    """Objective value for already solved forward pairs."""
    w = _weights(len(pairs), weights)
    each = [kv_misfit(mesh, q, p) for p in pairs]
    misfit = float(np.dot(w, each))
    tv = tv_smooth(mesh, q, params.eps)
    return ObjectiveReport(misfit, tv, misfit + params.rho * tv, each)


def kv_gradient(mesh, q, pairs, params, weights=None):
    """Nodal coefficients of the objective gradient (Euclidean, one per node).

    Entry ``k`` is the derivative of the objective in the direction of the
    hat function of node ``k``.
    """
    q = check_field(mesh, q)
    w = _weights(len(pairs), weights)
    density = np.zeros(mesh.n_triangles)
    for wi, p in zip(w, pairs):
        gD = mesh.gradient(p.u_D)
        gN = mesh.gradient(p.u_N)
        density += wi * (np.einsum("td,td->t", gD, gD) - np.einsum("td,td->t", gN, gN))
    # int_T phi_k = |T| / 3
    local = np.repeat((density * mesh.areas / 3.0)[:, None], 3, axis=1)

    gq = mesh.gradient(q)
    s = np.sqrt(np.einsum("td,td->t", gq, gq) + params.eps)
    flux = gq * (params.rho * mesh.areas / s)[:, None]
    local = local + np.einsum("td,tkd->tk", flux, mesh.grads)

    out = np.zeros(mesh.n_nodes)
    np.add.at(out, mesh.triangles.ravel(), local.ravel())
    return out


@dataclass
class Problem:
    """An instance of the reconstruction problem on one mesh level."""

    mesh: object
    measurements: list
    f: object
    params: ObjectiveParams
    weights: object = None
    method: str = "cg"

    def __post_init__(self):
        self.measurements = list(self.measurements)
        for m in self.measurements:
            m.check(self.mesh)
        _weights(len(self.measurements), self.weights)

    def solve(self, q):
        return solve_pairs(self.mesh, q, self.measurements, self.f, self.params.bounds, self.method)

    def evaluate(self, q, pairs=None):
        """Return ``(report, pairs)``, solving the forward problems if needed."""
        if pairs is None:
            pairs = self.solve(q)
        return evaluate(self.mesh, q, pairs, self.params, self.weights), pairs

    def value(self, q):
        return self.evaluate(q)[0].total

    def gradient(self, q, pairs=None):
        if pairs is None:
            pairs = self.solve(q)
        return kv_gradient(self.mesh, q, pairs, self.params, self.weights)
