"""Complex Schur decomposition and exponentials of triangular matrices.

The factorization is computed from scratch: Householder reduction to upper
Hessenberg form followed by single-shift implicit QR sweeps with Wilkinson
shifts.  No balancing is performed.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError

__all__ = [
    "SchurFactors", "schur", "hessenberg", "triangular_exp", "matrix_exp",
    "expm_pade", "is_numerically_diagonal",
]

UNIT_ROUNDOFF = np.finfo(np.float64).eps / 2
ITERATIONS_PER_EIGENVALUE = 30
# relative eigenvalue separation below which Parlett's recurrence is abandoned
PARLETT_SEPARATION = 1e-8


@dataclass(frozen=True)
class SchurFactors:
    """``A = U @ T @ U.conj().T`` with ``U`` unitary, ``T`` upper triangular."""

    U: np.ndarray
    T: np.ndarray

    def __post_init__(self):
        for m in (self.U, self.T):
            m.flags.writeable = False

    @property
    def order(self):
        return self.T.shape[0]

    @property
    def eigenvalues(self):
        return np.diag(self.T).copy()

    def reconstruct(self):
        return self.U @ self.T @ self.U.conj().T


def _as_square(A):
    A = np.array(A, dtype=np.complex128, copy=True)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def hessenberg(A):
    """Unitary reduction ``A = Q H Q*`` with ``H`` upper Hessenberg.

    Returns ``(H, Q)``.  Columns whose sub-subdiagonal part is already zero
    are skipped, so triangular inputs pass through untouched.
    """
    H = _as_square(A)
    n = H.shape[0]
    Q = np.eye(n, dtype=np.complex128)
    for k in range(n - 2):
        x = H[k + 1:, k]
        if not np.any(x[1:]):
            continue
        xnorm = np.linalg.norm(x)
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v = x.copy()
        v[0] += phase * xnorm
        v /= np.linalg.norm(v)
        H[k + 1:, k:] -= 2.0 * np.outer(v, v.conj() @ H[k + 1:, k:])
        H[:, k + 1:] -= 2.0 * np.outer(H[:, k + 1:] @ v, v.conj())
        Q[:, k + 1:] -= 2.0 * np.outer(Q[:, k + 1:] @ v, v.conj())
        H[k + 2:, k] = 0.0
    return H, Q


def _givens(a, b):
    """(c, s) with ``[[c, s], [-conj(s), c]] @ [a, b] = [r, 0]``, c real."""
    if b == 0:
        return 1.0, 0j
    if a == 0:
        return 0.0, 1 + 0j
    absa = abs(a)
    rho = np.hypot(absa, abs(b))
    return absa / rho, (a / absa) * b.conjugate() / rho


def _wilkinson_shift(a, b, c, d):
    half = (a - d) / 2
    root = cmath.sqrt(half * half + b * c)
    mid = (a + d) / 2
    mu1, mu2 = mid + root, mid - root
    return mu1 if abs(mu1 - d) <= abs(mu2 - d) else mu2


def _qr_iterate(H, Q):
    n = H.shape[0]
    hnorm = np.linalg.norm(H)
    budget = ITERATIONS_PER_EIGENVALUE * n
    total = 0
    its = 0
    hi = n - 1
    while hi > 0:
        lo = hi
        while lo > 0:
            h = abs(H[lo, lo - 1])
            tst = abs(H[lo - 1, lo - 1]) + abs(H[lo, lo])
            if tst == 0.0:
                tst = hnorm
            if h <= UNIT_ROUNDOFF * tst:
                H[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            hi -= 1
            its = 0
            continue
        if total >= budget:
            raise ConvergenceError(
                f"QR iteration did not converge within {budget} sweeps "
                f"({hi + 1} eigenvalues still unresolved)")
        total += 1
        its += 1

        if its == 10:
            mu = 0.75 * abs(H[lo + 1, lo].real) + H[lo, lo]
        elif its == 20:
            mu = 0.75 * abs(H[hi, hi - 1].real) + H[hi, hi]
        else:
            mu = _wilkinson_shift(complex(H[hi - 1, hi - 1]), complex(H[hi - 1, hi]),
                                  complex(H[hi, hi - 1]), complex(H[hi, hi]))

        x = complex(H[lo, lo] - mu)
        y = complex(H[lo + 1, lo])
        for k in range(lo, hi):
            if k > lo:
                x = complex(H[k, k - 1])
                y = complex(H[k + 1, k - 1])
            c, s = _givens(x, y)
            G = np.array([[c, s], [-s.conjugate(), c]])
            Gh = G.conj().T
            col0 = k - 1 if k > lo else k
            H[k:k + 2, col0:] = G @ H[k:k + 2, col0:]
            r1 = min(k + 3, hi + 1)
            H[:r1, k:k + 2] = H[:r1, k:k + 2] @ Gh
            Q[:, k:k + 2] = Q[:, k:k + 2] @ Gh
            if k > lo:
                H[k + 1, k - 1] = 0.0


def schur(A):
    """Complex Schur decomposition of a square matrix.

    Parameters
    ----------
    A : (n, n) array_like
        Finite real or complex matrix.

    Returns
    -------
    SchurFactors
        ``U`` unitary and ``T`` upper triangular with an exactly-zero strict
        lower triangle.  The eigenvalues appear on ``diag(T)`` in no
        particular order.

    Raises
    ------
    ConvergenceError
        If the QR sweeps exceed 30 iterations per eigenvalue.
    """
    H, Q = hessenberg(A)
    if H.shape[0] > 1:
        _qr_iterate(H, Q)
    return SchurFactors(U=Q, T=np.triu(H))


def is_numerically_diagonal(T, rtol=1e-12):
    T = np.asarray(T)
    off = np.linalg.norm(np.triu(T, 1))
    return off <= rtol * (1.0 + np.linalg.norm(T))


# Pade coefficients b_0..b_m and 1-norm thresholds, Higham (2005)
_PADE = {
    3: (1.495585217958292e-2, (120., 60., 12., 1.)),
    5: (2.539398330063230e-1, (30240., 15120., 3360., 420., 30., 1.)),
    7: (9.504178996162932e-1, (17297280., 8648640., 1995840., 277200., 25200.,
                               1512., 56., 1.)),
    9: (2.097847961257068e0, (17643225600., 8821612800., 2075673600., 302702400.,
                              30270240., 2162160., 110880., 3960., 90., 1.)),
    13: (5.371920351148152e0, (64764752532480000., 32382376266240000.,
                               7771770303897600., 1187353796428800.,
                               129060195264000., 10559470521600., 670442572800.,
                               33522128640., 1323241920., 40840800., 960960.,
                               16380., 182., 1.)),
}


def expm_pade(A):
    """Dense ``exp(A)`` by scaling and squaring with a diagonal Pade approximant."""
    A = np.asarray(A, dtype=np.complex128)
    n = A.shape[0]
    ident = np.eye(n, dtype=np.complex128)
    norm1 = np.linalg.norm(A, 1)
    for m in (3, 5, 7, 9):
        if norm1 <= _PADE[m][0]:
            return _pade_eval(A, m, ident)
    theta, _ = _PADE[13]
    s = max(0, int(np.ceil(np.log2(norm1 / theta)))) if norm1 > 0 else 0
    F = _pade_eval(A / 2.0 ** s, 13, ident)
    for _ in range(s):
        F = F @ F
    return F


def _pade_eval(A, m, ident):
    b = _PADE[m][1]
    A2 = A @ A
    if m < 13:
        powers = [ident, A2]
        while len(powers) <= m // 2:
            powers.append(powers[-1] @ A2)
        U = sum(b[2 * k + 1] * powers[k] for k in range(m // 2 + 1))
        V = sum(b[2 * k] * powers[k] for k in range(m // 2 + 1))
        U = A @ U
    else:
        A4 = A2 @ A2
        A6 = A2 @ A4
        U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
                 + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * ident)
        V = (A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
             + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * ident)
    return np.linalg.solve(V - U, V + U)


def _confluent(d):
    n = d.size
    if n < 2:
        return False
    gap = np.abs(d[:, None] - d[None, :])
    gap[np.diag_indices(n)] = np.inf
    return gap.min() < PARLETT_SEPARATION * (1.0 + np.abs(d).max())


def triangular_exp(T, t=1.0):
    """``exp(t*T)`` for upper triangular ``T`` via Parlett's recurrence.

    When two diagonal entries of ``T`` are closer than
    ``1e-8 * (1 + max|T_ii|)`` the divided differences are ill-posed and
    the result is computed by scaling and squaring instead.  The strict
    lower triangle of the result is zero in both cases.
    """
    T = np.triu(np.asarray(T, dtype=np.complex128))
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {T.shape}")
    n = T.shape[0]
    t = float(t)
    d = np.diag(T).copy()
    if t == 0.0:
        return np.eye(n, dtype=np.complex128)
    if _confluent(d):
        F = np.triu(expm_pade(t * T))
        F[np.diag_indices(n)] = np.exp(t * d)
        return F
    F = np.diag(np.exp(t * d))
    for p in range(1, n):
        for i in range(n - p):
            j = i + p
            s = T[i, j] * (F[j, j] - F[i, i])
            if p > 1:
                s += T[i, i + 1:j] @ F[i + 1:j, j] - F[i, i + 1:j] @ T[i + 1:j, j]
            F[i, j] = s / (d[j] - d[i])
    return F


def matrix_exp(A, t=1.0, factors=None):
    """``exp(t*A) = U exp(t*T) U*`` from the Schur factors of ``A``.

    ``factors`` may be supplied to reuse an existing factorization.
    """
    if factors is None:
        factors = schur(A)
    U = factors.U
    return U @ triangular_exp(factors.T, t) @ U.conj().T
