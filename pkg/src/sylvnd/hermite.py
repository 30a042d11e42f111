"""Hermite-function spectral collocation and the advection-diffusion test problem.

Differentiation matrices follow Weideman & Reddy's ``herdif``: the
interpolant is ``exp(-x^2/2)`` times a polynomial through the Hermite
nodes, and the derivative matrices come from the weighted barycentric
recursion of ``poldif``.  With scale factor ``b`` the nodes are the roots
of ``H_M`` divided by ``b`` and the ``l``-th derivative matrix picks up a
factor ``b**l``.

The PDE is ``u_t = Lap u + 2 x . grad u + (2N+1) u - exp(-x.x)`` on R^N,
whose solution ``u = (1 + e^t) exp(-x.x)`` starts from ``2 exp(-x.x)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, MemoryBudgetExceeded
from .ode import OdeSystem
from .schur import schur
from .tensor import _wrap_owned

__all__ = ["HermiteGrid", "hermite_nodes", "hermite_grid", "poldif",
           "build_advdiff_system", "advdiff_exact", "advdiff_matrix",
           "gaussian_on_grid"]

NEWTON_MAX_ITER = 20


@dataclass(frozen=True)
class HermiteGrid:
    M: int
    b: float
    nodes: np.ndarray
    D1: np.ndarray
    D2: np.ndarray

    def __post_init__(self):
        for a in (self.nodes, self.D1, self.D2):
            a.flags.writeable = False


def _hermite_ratio(x, M):
    """Newton step ``h_M(x) / h_M'(x)`` for the orthonormal polynomials ``h_k``.

    ``h_k = psi_k * exp(x^2/2)`` satisfies the same three-term recurrence as
    the Hermite functions and ``h_M' = sqrt(2M) h_(M-1)``.
    """
    h_prev = np.zeros_like(x)
    h = np.full_like(x, np.pi ** -0.25)
    for k in range(M):
        h_prev, h = h, np.sqrt(2.0 / (k + 1)) * x * h - np.sqrt(k / (k + 1)) * h_prev
    return h / (np.sqrt(2.0 * M) * h_prev)


def hermite_nodes(M):
    """Roots of the Hermite polynomial ``H_M`` in ascending order.

    Eigenvalues of the symmetric tridiagonal Jacobi matrix (zero diagonal,
    off-diagonal ``sqrt(k/2)``), then polished by Newton's method and
    symmetrized about the origin.
    """
    M = int(M)
    if M < 1:
        raise ValueError(f"need at least one node, got M={M}")
    if M == 1:
        return np.zeros(1)
    off = np.sqrt(np.arange(1, M) / 2.0)
    J = np.diag(off, 1) + np.diag(off, -1)
    x = np.sort(np.diag(schur(J).T).real)
    for _ in range(NEWTON_MAX_ITER):
        step = _hermite_ratio(x, M)
        x = x - step
        if np.max(np.abs(step)) <= 4 * np.finfo(float).eps * max(1.0, np.abs(x).max()):
            break
    else:
        raise ConvergenceError(f"Newton polish of the Hermite nodes (M={M}) did not converge")
    x = 0.5 * (x - x[::-1])
    if not np.all(np.diff(x) > 0):
        raise ConvergenceError(f"Hermite nodes for M={M} are not distinct")
    return x


def poldif(x, alpha, B):
    """Differentiation matrices for a weighted polynomial interpolant.

    Parameters
    ----------
    x : (n,) array
        Distinct nodes.
    alpha : (n,) array
        Weight function sampled at the nodes.
    B : (m, n) array
        ``B[l-1, k]`` is the ``l``-th derivative of the weight divided by the
        weight, at ``x[k]``.

    Returns
    -------
    list of (n, n) arrays
        ``D_1, ..., D_m``.
    """
    x = np.asarray(x, dtype=float).ravel()
    n = x.size
    m = B.shape[0]
    DX = x[:, None] - x[None, :]
    np.fill_diagonal(DX, 1.0)
    c = alpha * np.prod(DX, axis=1)
    C = c[:, None] / c[None, :]
    Z = 1.0 / DX
    np.fill_diagonal(Z, 0.0)
    # column k holds 1/(x_k - x_j) for j != k
    X = Z[~np.eye(n, dtype=bool)].reshape(n, n - 1).T
    Y = np.ones((n - 1, n))
    D = np.eye(n)
    out = []
    for l in range(1, m + 1):
        Y = np.cumsum(np.vstack([B[l - 1][None, :], l * Y[:n - 1] * X]), axis=0)
        D = l * Z * (C * np.diag(D)[:, None] - D)
        np.fill_diagonal(D, Y[-1])
        out.append(D)
    return out


def hermite_grid(M, b=1.0):
    """Scaled Hermite nodes with first and second differentiation matrices."""
    M = int(M)
    b = float(b)
    if not b > 0:
        raise ValueError(f"scale factor must be positive, got {b}")
    x = hermite_nodes(M)
    if M == 1:
        D1 = np.zeros((1, 1))
        D2 = np.full((1, 1), -1.0)
    else:
        alpha = np.exp(-x ** 2 / 2)
        beta = np.vstack([-x, x ** 2 - 1])
        D1, D2 = poldif(x, alpha, beta)
    return HermiteGrid(M=M, b=b, nodes=x / b, D1=b * D1, D2=b * b * D2)


def _check_budget(M, N, buffers, max_mem):
    if max_mem is None:
        return
    need = 16 * M ** N * buffers
    if need > max_mem:
        raise MemoryBudgetExceeded(need, max_mem)


def gaussian_on_grid(nodes, N, scale=1.0):
    """``scale * exp(-(x_1^2 + ... + x_N^2))`` sampled on the tensor grid.

    Built as a running outer product of 1-D factors, so no coordinate mesh
    is ever formed.
    """
    g = np.exp(-np.asarray(nodes, dtype=float) ** 2)
    out = scale * g
    for _ in range(N - 1):
        out = np.multiply.outer(out, g)
    return _wrap_owned(np.asarray(out, dtype=np.complex128))


def advdiff_matrix(grid, N):
    """Per-mode coefficient ``D2 + 2 diag(x) D1 + (2N+1)/N I``."""
    return grid.D2 + 2.0 * grid.nodes[:, None] * grid.D1 + ((2 * N + 1) / N) * np.eye(grid.M)


def build_advdiff_system(grid, N, max_mem=None):
    """Discretized advection-diffusion problem as an ``OdeSystem``.

    Every mode gets the same coefficient matrix; the forcing samples
    ``-exp(-x.x)`` and the initial state samples ``2 exp(-x.x)``.
    """
    N = int(N)
    if N < 2:
        raise ValueError(f"need N >= 2 dimensions, got {N}")
    _check_budget(grid.M, N, 3, max_mem)
    A = advdiff_matrix(grid, N)
    B = gaussian_on_grid(grid.nodes, N, -1.0)
    X0 = gaussian_on_grid(grid.nodes, N, 2.0)
    return OdeSystem((A,) * N, B, X0)


def advdiff_exact(grid, N, t):
    """``(1 + e^t) exp(-x.x)`` on the tensor grid."""
    return gaussian_on_grid(grid.nodes, N, 1.0 + np.exp(t))
