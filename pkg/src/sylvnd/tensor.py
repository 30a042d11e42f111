"""Dense column-major N-dimensional complex tensors.

Multi-indices in the public API are 1-based, following the column-major
convention in which the first index varies fastest.  Internally the data
live in a Fortran-ordered numpy array, so the flat position of entry
``(i1, ..., iN)`` is ``(i1-1) + (i2-1)*n1 + ... + (iN-1)*n1*...*n(N-1)``.
"""
from __future__ import annotations

from math import prod

import numpy as np

__all__ = [
    "NDTensor", "MultiIndexCursor", "make_tensor", "as_tensor", "strides",
    "linear_index", "multi_index", "cursor_start", "cursor_next",
    "iter_multi_indices", "mode_product", "hadamard", "vec",
]


def _check_dims(dims):
    dims = tuple(int(n) for n in dims)
    if len(dims) < 1:
        raise ValueError("a tensor needs at least one dimension")
    for n in dims:
        if n < 1:
            raise ValueError(f"dimensions must be positive, got {dims}")
    return dims


class NDTensor:
    """Immutable dense complex tensor with an explicit dimension vector.

    Parameters
    ----------
    array : array_like
        N-dimensional data.  It is copied into a read-only, Fortran-ordered
        complex128 buffer unless it already is one.
    """

    __slots__ = ("_array",)

    def __init__(self, array):
        arr = np.asarray(array)
        if arr.ndim == 0:
            raise ValueError("a tensor needs at least one dimension")
        _check_dims(arr.shape)
        if (arr.dtype != np.complex128 or not arr.flags.f_contiguous
                or arr.flags.writeable):
            arr = np.array(arr, dtype=np.complex128, order="F", copy=True)
        arr.flags.writeable = False
        self._array = arr

    @property
    def dims(self):
        return self._array.shape

    @property
    def ndim(self):
        return self._array.ndim

    @property
    def size(self):
        return self._array.size

    @property
    def array(self):
        """Read-only N-dimensional view (0-based numpy indexing)."""
        return self._array

    @property
    def data(self):
        """Read-only flat view in column-major order."""
        return self._array.ravel(order="F")

    def entry(self, *multi):
        """Entry at a 1-based multi-index."""
        return self.data[linear_index(self.dims, multi) - 1]

    def copy_array(self):
        """Writable Fortran-ordered copy of the data."""
        return np.array(self._array, order="F", copy=True)

    @property
    def real(self):
        return self._array.real

    def __repr__(self):
        return f"NDTensor(dims={self.dims})"

    def __eq__(self, other):
        if not isinstance(other, NDTensor):
            return NotImplemented
        return self.dims == other.dims and np.array_equal(self._array, other._array)

    __hash__ = None


def _wrap_owned(arr):
    """Wrap a freshly allocated array without copying it again."""
    arr = np.asfortranarray(arr, dtype=np.complex128)
    arr.flags.writeable = False
    t = NDTensor.__new__(NDTensor)
    t._array = arr
    return t


def make_tensor(dims, data):
    """Build a tensor from a flat column-major sequence.

    Examples
    --------
    >>> make_tensor((2, 2), [1, 3, 2, 4]).entry(2, 1)
    (3+0j)
    """
    dims = _check_dims(dims)
    flat = np.asarray(data, dtype=np.complex128).ravel()
    if flat.size != prod(dims):
        raise ValueError(f"data length {flat.size} does not match dims {dims} "
                         f"(expected {prod(dims)})")
    return _wrap_owned(flat.reshape(dims, order="F").copy(order="F"))


def as_tensor(x):
    """Return ``x`` as an NDTensor (no copy if it already is one)."""
    if isinstance(x, NDTensor):
        return x
    return NDTensor(x)


def strides(dims):
    """Column-major stride factors ``[1, n1, n1*n2, ..., n1*...*n(N-1)]``."""
    out = [1]
    for n in dims[:-1]:
        out.append(out[-1] * int(n))
    return out


def linear_index(dims, multi):
    """1-based flat position of a 1-based multi-index.

    >>> linear_index((5, 2, 3), (5, 2, 3))
    30
    """
    dims = _check_dims(dims)
    multi = tuple(int(i) for i in multi)
    if len(multi) != len(dims):
        raise ValueError(f"multi-index {multi} has wrong length for dims {dims}")
    index = 1
    for i, n, s in zip(multi, dims, strides(dims)):
        if not 1 <= i <= n:
            raise IndexError(f"index {i} out of range 1..{n}")
        index += (i - 1) * s
    return index


def multi_index(dims, index):
    """Inverse of :func:`linear_index`."""
    dims = _check_dims(dims)
    index = int(index)
    if not 1 <= index <= prod(dims):
        raise IndexError(f"linear index {index} out of range 1..{prod(dims)}")
    r = index - 1
    out = []
    for n in dims:
        r, i = divmod(r, n)
        out.append(i + 1)
    return tuple(out)


class MultiIndexCursor:
    """Sequential generator of all multi-indices in descending column-major order.

    Starts at ``(n1, ..., nN)`` and counts down: the first index decreases
    fastest; when it reaches 1 the lowest index above 1 is decremented and
    every index below it is reset to its maximum.  ``index`` tracks the
    1-based flat position of ``current`` throughout.
    """

    __slots__ = ("dims", "current", "index", "exhausted")

    def __init__(self, dims):
        self.dims = _check_dims(dims)
        self.current = list(self.dims)
        self.index = prod(self.dims)
        self.exhausted = False

    def advance(self):
        if self.exhausted:
            raise StopIteration("cursor is exhausted")
        cur = self.current
        if cur[0] >= 2:
            cur[0] -= 1
            self.index -= 1
            return self
        k = 1
        N = len(cur)
        while k < N and cur[k] == 1:
            k += 1
        if k == N:
            self.exhausted = True
            return self
        cur[k] -= 1
        for j in range(k):
            cur[j] = self.dims[j]
        self.index -= 1
        return self

    def __iter__(self):
        while not self.exhausted:
            yield tuple(self.current), self.index
            self.advance()

    def __repr__(self):
        state = "exhausted" if self.exhausted else f"{tuple(self.current)}@{self.index}"
        return f"MultiIndexCursor(dims={self.dims}, {state})"


def cursor_start(dims):
    return MultiIndexCursor(dims)


def cursor_next(cursor):
    return cursor.advance()


def iter_multi_indices(dims):
    """Yield ``(multi, index)`` pairs in cursor order."""
    return iter(MultiIndexCursor(dims))


def mode_product(M, j, X):
    """Mode-``j`` product: contract ``M`` with the ``j``-th (1-based) dimension.

    ``R[..., i_j, ...] = sum_k M[i_j, k] * X[..., k, ...]``.
    """
    X = as_tensor(X)
    M = np.asarray(M, dtype=np.complex128)
    N = X.ndim
    if not 1 <= j <= N:
        raise ValueError(f"mode {j} out of range 1..{N}")
    n = X.dims[j - 1]
    if M.shape != (n, n):
        raise ValueError(f"matrix of shape {M.shape} does not match dimension "
                         f"{j} of size {n}")
    return _wrap_owned(_mode_product_array(M, j, X.array))


def _mode_product_array(M, j, arr):
    """Unchecked mode product on a raw ndarray; returns a fresh F-ordered array."""
    dims = arr.shape
    n = dims[j - 1]
    if n == 1:
        return np.asfortranarray(M[0, 0] * arr)
    p = prod(dims[:j - 1])
    q = prod(dims[j:])
    if p == 1:
        # (n, q) Fortran block; transposes keep BLAS on contiguous data
        out = (np.asfortranarray(arr).reshape((n, q), order="F").T @ M.T).T
    else:
        # batch of q column-major (p, n) slabs, seen as C-ordered (n, p) blocks
        slabs = np.asfortranarray(arr).reshape((p, n, q), order="F").transpose(2, 1, 0)
        out = np.matmul(M, slabs).transpose(2, 1, 0)
    return out.reshape(dims, order="F")


def hadamard(X, Y):
    """Entrywise product of two tensors of identical dims."""
    X, Y = as_tensor(X), as_tensor(Y)
    if X.dims != Y.dims:
        raise ValueError(f"dims mismatch: {X.dims} vs {Y.dims}")
    return _wrap_owned(X.array * Y.array)


def vec(X):
    """Flat column-major data of ``X``."""
    return as_tensor(X).data.copy()
