"""Brute-force verification path through the flattened Kronecker-sum system.

``vec(sum_j A_j x_j X) = (A_N (+) ... (+) A_1) vec(X)`` with column-major
``vec``.  Materializing the Kronecker sum costs ``(prod n_j)**2`` entries,
so everything here is capped and intended for tests only.
"""
from __future__ import annotations

import warnings
from math import prod

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

from .errors import SingularMatrix
from .tensor import as_tensor, make_tensor

__all__ = ["DEFAULT_CAP", "kron_product", "kron_sum", "dense_solve",
           "oracle_solve", "oracle_apply"]

DEFAULT_CAP = 4096


def _check_cap(order, cap):
    cap = DEFAULT_CAP if cap is None else cap
    if order > cap:
        raise ValueError(f"dense order {order} exceeds the oracle cap {cap}")


def kron_product(C, D, cap=None):
    """Block matrix ``[c_ik * D]``."""
    C = np.atleast_2d(np.asarray(C, dtype=np.complex128))
    D = np.atleast_2d(np.asarray(D, dtype=np.complex128))
    _check_cap(max(C.shape[0] * D.shape[0], C.shape[1] * D.shape[1]), cap)
    return np.kron(C, D)


def kron_sum(As, cap=None):
    """``A_N (+) A_(N-1) (+) ... (+) A_1`` for ``As = [A_1, ..., A_N]``.

    ``A_1`` occupies the rightmost (fastest-varying) Kronecker slot, which is
    what makes the result act on column-major ``vec``.
    """
    As = [np.asarray(A, dtype=np.complex128) for A in As]
    if not As:
        raise ValueError("need at least one matrix")
    for A in As:
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"Kronecker sum needs square matrices, got {A.shape}")
    _check_cap(prod(A.shape[0] for A in As), cap)
    S = As[0]
    for A in As[1:]:
        m, n = A.shape[0], S.shape[0]
        S = np.kron(A, np.eye(n)) + np.kron(np.eye(m), S)
    return S


def dense_solve(A, b):
    """Solve ``A x = b`` by Gaussian elimination with partial pivoting.

    Raises
    ------
    SingularMatrix
        If a pivot falls below ``eps * ||A||_inf``.
    """
    A = np.asarray(A, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or b.shape[0] != A.shape[0]:
        raise ValueError(f"incompatible system shapes {A.shape} and {b.shape}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(A, check_finite=True)
    pivots = np.abs(np.diag(lu))
    threshold = np.finfo(np.float64).eps * np.linalg.norm(A, np.inf)
    if pivots.size and pivots.min() <= threshold:
        k = int(np.argmin(pivots))
        raise SingularMatrix(f"pivot {k} has magnitude {pivots[k]:.3e} "
                             f"<= {threshold:.3e}")
    return lu_solve((lu, piv), b)


def oracle_apply(As, X, cap=None):
    """``sum_j A_j x_j X`` computed through the dense Kronecker sum."""
    X = as_tensor(X)
    return make_tensor(X.dims, kron_sum(As, cap) @ X.data)


def oracle_solve(problem, cap=None):
    """Solve a Sylvester problem by flattening it to one dense system."""
    As, B = problem.coefficients, problem.rhs
    x = dense_solve(kron_sum(As, cap), B.data)
    return make_tensor(B.dims, x)
