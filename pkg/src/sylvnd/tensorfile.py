"""Binary tensor container.

Layout, all little-endian::

    magic    4 bytes   b"NDT1"
    version  u32       1
    N        u32       number of dimensions
    dims     N x u64
    payload  prod(dims) complex values, each (real f64, imag f64),
             column-major order

Coefficient matrices are stored as N = 2 tensors.
"""
from __future__ import annotations

import struct
from math import prod

import numpy as np

from .errors import TensorFormatError
from .tensor import _wrap_owned, as_tensor

__all__ = ["MAGIC", "VERSION", "write_tensor", "read_tensor", "read_matrix",
           "write_matrix", "to_bytes", "from_bytes"]

MAGIC = b"NDT1"
VERSION = 1
_HEADER = struct.Struct("<4sII")
_PAYLOAD = np.dtype("<c16")


def to_bytes(X):
    X = as_tensor(X)
    header = _HEADER.pack(MAGIC, VERSION, X.ndim)
    dims = struct.pack(f"<{X.ndim}Q", *X.dims)
    return header + dims + X.data.astype(_PAYLOAD, copy=False).tobytes()


def from_bytes(buf):
    buf = memoryview(buf)
    if len(buf) < _HEADER.size:
        raise TensorFormatError("truncated header")
    magic, version, N = _HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise TensorFormatError(f"bad magic {bytes(magic)!r}")
    if version != VERSION:
        raise TensorFormatError(f"unsupported version {version}")
    if N < 1:
        raise TensorFormatError("tensor must have at least one dimension")
    off = _HEADER.size
    if len(buf) < off + 8 * N:
        raise TensorFormatError("truncated dimension vector")
    dims = struct.unpack_from(f"<{N}Q", buf, off)
    if min(dims) < 1:
        raise TensorFormatError(f"non-positive dimension in {dims}")
    off += 8 * N
    count = prod(dims)
    if len(buf) - off != 16 * count:
        raise TensorFormatError(f"payload has {len(buf) - off} bytes, "
                                f"expected {16 * count} for dims {dims}")
    flat = np.frombuffer(buf, dtype=_PAYLOAD, count=count, offset=off)
    return _wrap_owned(flat.astype(np.complex128).reshape(dims, order="F"))


def write_tensor(path, X):
    with open(path, "wb") as fh:
        fh.write(to_bytes(X))


def read_tensor(path):
    with open(path, "rb") as fh:
        return from_bytes(fh.read())


def write_matrix(path, A):
    write_tensor(path, np.asarray(A, dtype=np.complex128))


def read_matrix(path):
    T = read_tensor(path)
    if T.ndim != 2 or T.dims[0] != T.dims[1]:
        raise TensorFormatError(f"{path}: expected a square matrix, got dims {T.dims}")
    return np.array(T.array)
