"""Linear solvers for the Dirichlet and the pure Neumann systems.

Both systems are handled by Jacobi-preconditioned conjugate gradients, which
also accepts a block of right-hand sides (one column per measurement).
``method="direct"`` switches to a sparse LU factorization, which pays off
when many right-hand sides share one matrix.
"""
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import InvalidArgument, SolverFailure

RTOL = 1e-10


def pcg(A, b, diag=None, rtol=RTOL, maxiter=None):
    """Jacobi-preconditioned CG for a symmetric positive (semi)definite ``A``.

    ``b`` may be 1-D or 2-D; columns are iterated independently but share the
    matrix products.  The initial guess is zero.  Stops once every column has
    ``||b - A x|| <= rtol * ||b||``.
    """
    b = np.asarray(b, dtype=float)
    vector = b.ndim == 1
    B = b[:, None] if vector else b
    n, k = B.shape
    if maxiter is None:
        maxiter = 10 * n
    dinv = 1.0 / (A.diagonal() if diag is None else diag)
    dinv = dinv[:, None]

    # iterate on unit-norm columns so tiny or huge data cannot under/overflow
    bnorm = np.linalg.norm(B, axis=0)
    scale = np.where(bnorm > 0, bnorm, 1.0)
    B = B / scale
    X = np.zeros_like(B)
    R = B.copy()
    target = rtol * np.where(bnorm > 0, 1.0, 0.0)
    Z = dinv * R
    P = Z.copy()
    rz = np.einsum("ij,ij->j", R, Z)
    rnorm = np.linalg.norm(B, axis=0)
    it = 0
    # converged columns are frozen by zeroing their step length
    live = rnorm > target
    while np.any(live) and it < maxiter:
        Q = A @ P
        pq = np.einsum("ij,ij->j", P, Q)
        alpha = np.where(live, rz / np.where(live, pq, 1.0), 0.0)
        X += alpha * P
        R -= alpha * Q
        Z = dinv * R
        rz_new = np.einsum("ij,ij->j", R, Z)
        beta = np.where(live, rz_new / np.where(live, rz, 1.0), 0.0)
        P = Z + beta * P
        rz = np.where(live, rz_new, rz)
        rnorm = np.where(live, np.linalg.norm(R, axis=0), rnorm)
        live = rnorm > target
        it += 1
    # confirm against the true residual; recurrence drift is possible
    true = np.linalg.norm(B - A @ X, axis=0)
    if np.any(true > 10 * target):
        raise SolverFailure("conjugate gradients did not converge", float(np.max(true)), it)
    X *= scale
    return X[:, 0] if vector else X


@dataclass
class ConstrainedSystem:
    """Bordered system ``[[A, c], [c^T, 0]] [u; lam] = [rhs; 0]``.

    ``c`` holds the lumped boundary weights, so ``c . u = 0`` states that the
    boundary trace of ``u`` has zero mean.
    """

    A: object
    c: np.ndarray
    rhs: np.ndarray

    def residual(self, u, lam):
        """Relative residual of the bordered system."""
        top = self.A @ u + np.multiply.outer(self.c, lam)
        r = np.concatenate([np.ravel(top - self.rhs), np.ravel(self.c @ u)])
        return np.linalg.norm(r) / max(np.linalg.norm(self.rhs), 1e-300)


METHODS = ("cg", "direct")


def _check_method(method):
    if method not in METHODS:
        raise InvalidArgument(f"unknown solver method {method!r}, expected one of {METHODS}")


def solve_neumann_system(system, rtol=RTOL, return_multiplier=False, method="cg"):
    """Solve the bordered pure-Neumann system.

    The multiplier is eliminated first: summing the first block row gives
    ``lam = sum(rhs) / sum(c)``.  The remaining singular system ``A u = rhs -
    lam c`` is consistent and is solved by CG from zero; the constant
    component is then fixed by the constraint.
    """
    _check_method(method)
    A, c = system.A, np.asarray(system.c, dtype=float)
    rhs = np.asarray(system.rhs, dtype=float)
    if method == "direct":
        K = sp.bmat([[A, sp.csr_matrix(c[:, None])], [sp.csr_matrix(c[None, :]), None]], format="csc")
        tail = np.zeros((1,) + rhs.shape[1:])
        sol = spla.splu(K).solve(np.concatenate([rhs, tail]))
        u, lam = sol[:-1], sol[-1]
    else:
        lam = rhs.sum(axis=0) / c.sum()
        u = pcg(A, rhs - np.multiply.outer(c, lam), rtol=rtol)
        u = u - (c @ u) / c.sum()
    if return_multiplier:
        return u, lam
    return u


def solve_dirichlet_system(A, rhs, fixed_nodes, fixed_values, rtol=RTOL, method="cg"):
    """Solve ``A u = rhs`` on the free rows with ``u[fixed_nodes] = fixed_values``.

    Known values are lifted to the right-hand side and the interior block is
    solved by CG.  ``rhs`` and ``fixed_values`` may carry a trailing column axis.
    """
    _check_method(method)
    n = A.shape[0]
    fixed_nodes = np.asarray(fixed_nodes)
    fixed_values = np.asarray(fixed_values, dtype=float)
    if fixed_values.shape[0] != len(fixed_nodes):
        raise InvalidArgument("one value per fixed node required")
    rhs = np.asarray(rhs, dtype=float)
    free = np.ones(n, dtype=bool)
    free[fixed_nodes] = False
    free = np.flatnonzero(free)

    A_f = A.tocsr()[free]
    A_ff = A_f[:, free]
    b = rhs[free] - A_f[:, fixed_nodes] @ fixed_values
    u = np.zeros((n,) + np.shape(b)[1:])
    u[fixed_nodes] = fixed_values
    if len(free) == 0:
        return u
    if method == "direct":
        u[free] = spla.splu(A_ff.tocsc()).solve(b)
    else:
        u[free] = pcg(A_ff, b, rtol=rtol)
    return u
