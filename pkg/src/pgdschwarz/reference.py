"""High-fidelity reference solvers used as oracles.

Everything here solves at one fixed parameter value with direct sparse
factorizations: a monolithic solve with Dirichlet elimination, and exact local
subdomain solvers that plug into the interface system in place of surrogate
models (so the overlapping Schwarz oracle shares all of the online plumbing).
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .subdomain import SubdomainProblem

__all__ = ["solve_dirichlet", "FemDonor", "analytic_test1"]


def solve_dirichlet(A: sp.spmatrix, f: np.ndarray, dirichlet_ids,
                    dirichlet_values) -> np.ndarray:
    """Direct solve of A u = f with prescribed values eliminated."""
    n = A.shape[0]
    dirichlet_ids = np.asarray(dirichlet_ids, dtype=np.int64)
    vals = np.asarray(dirichlet_values, dtype=float)
    interior = np.setdiff1d(np.arange(n), dirichlet_ids)
    A = sp.csr_matrix(A)
    rhs = f[interior] - A[np.ix_(interior, dirichlet_ids)] @ vals
    u = np.zeros(n)
    u[dirichlet_ids] = vals
    u[interior] = spla.spsolve(sp.csc_matrix(A[np.ix_(interior, interior)]), rhs)
    return u


class FemDonor:
    """Exact local solver: the oracle counterpart of a surrogate donor.

    Assembles the subdomain problem at one parameter point, factorizes the
    interior block once, and answers trace-driven and source solves exactly
    (hence the interface operator built on these donors is exactly linear).
    """

    def __init__(self, problem: SubdomainProblem, mu: dict[str, float]):
        self.problem = problem
        part = problem.partition
        self.interior = part.interior
        self.iface = problem.interface_dofs
        A = problem.operator_at(mu)
        self._lu = spla.splu(sp.csc_matrix(A[np.ix_(self.interior, self.interior)]))
        self._A_iface = sp.csr_matrix(A[np.ix_(self.interior, self.iface)])
        self.n_nodes = problem.mesh.n_nodes
        gd = problem.dirichlet_values_at(mu)
        f = problem.rhs_at(mu)[self.interior]
        if part.dirichlet.size:
            f = f - A[np.ix_(self.interior, part.dirichlet)] @ gd[part.dirichlet]
        self._source = np.zeros(self.n_nodes)
        self._source[part.dirichlet] = gd[part.dirichlet]
        self._source[self.interior] = self._lu.solve(f)

    @property
    def n_interface(self) -> int:
        return self.iface.size

    def boundary_field(self, lam: np.ndarray) -> np.ndarray:
        out = np.zeros(self.n_nodes)
        out[self.iface] = lam
        out[self.interior] = self._lu.solve(-(self._A_iface @ lam))
        return out

    def source_field(self) -> np.ndarray:
        return self._source


def analytic_test1(mu: float, x, y):
    """Closed-form solution of the synthetic two-subdomain diffusion benchmark."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.sin(2 * np.pi * x) * np.sin(2 * np.pi * y) \
        + 0.5 * mu * x * y * (y - 1.0) * (x - 2.0)
