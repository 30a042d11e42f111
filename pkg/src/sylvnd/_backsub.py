"""Single-loop back-substitution kernels for ``sum_j T_j x_j Y = C``.

Both kernels walk the multi-indices with the descending column-major
cursor, so every dependency ``y[..., k, ...]`` with ``k > i_j`` sits at flat
offset ``index + (k - i_j) * stride_j`` and has already been computed.
The result overwrites the input buffer.
"""
from __future__ import annotations

import numpy as np

from .errors import SingularOperator
from .tensor import MultiIndexCursor, multi_index, strides

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

HAVE_NUMBA = numba is not None


def backsub_python(Ts, flat, dims, tol, on_visit=None):
    """Reference kernel.  ``flat`` is a writable 1-D complex array.

    Returns ``(min_abs_den, visits, multiplies)``.
    """
    N = len(dims)
    st = strides(dims)
    rows = [np.asarray(T).tolist() for T in Ts]
    y = flat.tolist()
    cursor = MultiIndexCursor(dims)
    cur = cursor.current
    min_den = np.inf
    visits = 0
    mults = 0
    try:
        while not cursor.exhausted:
            pos0 = cursor.index - 1
            num = y[pos0]
            den = 0j
            for j in range(N):
                i = cur[j] - 1
                row = rows[j][i]
                den += row[i]
                s = st[j]
                pos = pos0
                for k in range(i + 1, dims[j]):
                    pos += s
                    num -= row[k] * y[pos]
                    mults += 1
            a = abs(den)
            if a < min_den:
                min_den = a
            if a <= tol:
                raise SingularOperator(tuple(cur), den, tol)
            y[pos0] = num / den
            visits += 1
            if on_visit is not None:
                on_visit(tuple(cur), cursor.index)
            cursor.advance()
    finally:
        flat[:] = y
    return float(min_den), visits, mults


if HAVE_NUMBA:
    @numba.njit(cache=True, nogil=True)
    def _kernel(Tpad, dims, st, y, tol):  # pragma: no cover - compiled
        N = dims.shape[0]
        cur = dims.copy()
        total = 1
        for j in range(N):
            total *= dims[j]
        min_den = np.inf
        mults = 0
        for index in range(total, 0, -1):
            pos0 = index - 1
            num = y[pos0]
            den = 0j
            for j in range(N):
                i = cur[j] - 1
                den += Tpad[j, i, i]
                s = st[j]
                pos = pos0
                for k in range(i + 1, dims[j]):
                    pos += s
                    num -= Tpad[j, i, k] * y[pos]
                mults += dims[j] - 1 - i
            a = abs(den)
            if a < min_den:
                min_den = a
            if a <= tol:
                return min_den, index, mults, den
            y[pos0] = num / den
            if cur[0] >= 2:
                cur[0] -= 1
            else:
                k = 1
                while k < N and cur[k] == 1:
                    k += 1
                if k < N:
                    cur[k] -= 1
                    for j in range(k):
                        cur[j] = dims[j]
        return min_den, 0, mults, 0j


def backsub_numba(Ts, flat, dims, tol):
    """Compiled kernel with the same traversal; returns ``(min_abs_den, visits, multiplies)``."""
    if not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    N = len(dims)
    nmax = max(dims)
    Tpad = np.zeros((N, nmax, nmax), dtype=np.complex128)
    for j, T in enumerate(Ts):
        Tpad[j, :dims[j], :dims[j]] = T
    dims_a = np.asarray(dims, dtype=np.int64)
    st_a = np.asarray(strides(dims), dtype=np.int64)
    min_den, failed, mults, den = _kernel(Tpad, dims_a, st_a, flat, float(tol))
    if failed:
        raise SingularOperator(multi_index(dims, failed), den, tol)
    return float(min_den), int(flat.size), int(mults)


def warmup():
    """Compile or load the cached numba kernel so timings exclude it."""
    if HAVE_NUMBA:
        backsub_numba([np.eye(1), np.eye(1)], np.ones(1, dtype=np.complex128), (1, 1), 0.0)
