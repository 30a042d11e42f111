"""N-dimensional Bartels-Stewart solver for ``sum_j A_j x_j X = B``.

Pipeline: complex Schur factorization of every coefficient, the unitary
change of basis ``C = U_N* x_N (... (U_1* x_1 B))``, one sweep of
back-substitution over all multi-indices, and the inverse change of basis.
When every triangular factor is numerically diagonal the sweep collapses
to a Hadamard product with the reciprocal eigenvalue sums.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from math import prod

import numpy as np

from . import _backsub
from .errors import SingularOperator
from .schur import UNIT_ROUNDOFF, SchurFactors, is_numerically_diagonal, schur
from .tensor import NDTensor, _mode_product_array, _wrap_owned, as_tensor

__all__ = [
    "SylvesterProblem", "SolveReport", "DiagonalSpectra", "solve", "solve_normal",
    "forward_transform", "inverse_transform", "back_substitute",
    "diagonal_spectra", "flop_estimate", "schur_flop_estimate",
    "backsub_multiply_count", "sylvester_apply", "default_tolerance",
    "factorize",
]

INT64_MAX = 2 ** 63 - 1
# back-substitution sizes below which the compiled kernel is not worth its startup
NUMBA_MIN_SIZE = 4096


def _as_matrix(A):
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"coefficient must be a square matrix, got shape {A.shape}")
    return A


@dataclass(frozen=True)
class SylvesterProblem:
    """Coefficients ``A_1..A_N`` and right-hand side ``B`` of ``sum_j A_j x_j X = B``."""

    coefficients: tuple
    rhs: NDTensor

    def __post_init__(self):
        coeffs = tuple(_as_matrix(A) for A in self.coefficients)
        rhs = as_tensor(self.rhs)
        if len(coeffs) < 2:
            raise ValueError("a Sylvester problem needs N >= 2 coefficient matrices")
        orders = tuple(A.shape[0] for A in coeffs)
        if orders != rhs.dims:
            raise ValueError(f"coefficient orders {orders} do not match rhs dims {rhs.dims}")
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "rhs", rhs)

    @property
    def dims(self):
        return self.rhs.dims

    @property
    def ndim(self):
        return len(self.coefficients)


@dataclass
class SolveReport:
    min_abs_denominator: float
    used_normal_fast_path: bool
    flop_estimate: int
    schur_flop_estimate: int
    stage_timings: dict = field(default_factory=dict)
    backend: str = ""

    @property
    def total_time(self):
        return sum(self.stage_timings.values())


@dataclass(frozen=True)
class DiagonalSpectra:
    """Per-mode eigenvalues and the tensor of reciprocal eigenvalue sums."""

    eigenvalues: tuple
    Lambda: NDTensor
    min_abs_denominator: float


def flop_estimate(dims):
    """Floating point operations of the method, Schur factorizations excluded.

    ``n_1 ... n_N * (5 * sum(n_j) - N + 1)``.  Raises ``OverflowError`` when
    the count does not fit a signed 64-bit integer.
    """
    dims = [int(n) for n in dims]
    if not dims or min(dims) < 1:
        raise ValueError(f"invalid dims {dims}")
    count = prod(dims) * (5 * sum(dims) - len(dims) + 1)
    if count > INT64_MAX:
        raise OverflowError(f"flop estimate for dims {tuple(dims)} exceeds 64 bits")
    return count


def schur_flop_estimate(dims):
    """Worst-case Schur cost ``25 * sum(n_j**3)``."""
    count = 25 * sum(int(n) ** 3 for n in dims)
    if count > INT64_MAX:
        raise OverflowError(f"Schur flop estimate for dims {tuple(dims)} exceeds 64 bits")
    return count


def backsub_multiply_count(dims):
    """Multiplications spent on the numerators: ``prod(n)/2 * (sum(n) - N)``."""
    return sum(prod(dims) // n * (n * (n - 1) // 2) for n in dims)


def factorize(coefficients):
    return tuple(schur(A) for A in coefficients)


def default_tolerance(Ts):
    return UNIT_ROUNDOFF * sum(np.linalg.norm(T) for T in Ts)


def sylvester_apply(coefficients, X):
    """``sum_j A_j x_j X``."""
    X = as_tensor(X)
    out = np.zeros(X.dims, dtype=np.complex128, order="F")
    for j, A in enumerate(coefficients, start=1):
        out += _mode_product_array(np.asarray(A, dtype=np.complex128), j, X.array)
    return _wrap_owned(out)


def _check_factors(factors, dims):
    orders = tuple(f.order for f in factors)
    if orders != tuple(dims):
        raise ValueError(f"factor orders {orders} do not match tensor dims {tuple(dims)}")


def _transform(mats, arr):
    for j, M in enumerate(mats, start=1):
        arr = _mode_product_array(M, j, arr)
    return arr


def forward_transform(factors, B):
    """``U_N* x_N (... (U_1* x_1 B))``."""
    B = as_tensor(B)
    _check_factors(factors, B.dims)
    return _wrap_owned(_transform([f.U.conj().T for f in factors], B.array))


def inverse_transform(factors, Y):
    """``U_N x_N (... (U_1 x_1 Y))``."""
    Y = as_tensor(Y)
    _check_factors(factors, Y.dims)
    return _wrap_owned(_transform([f.U for f in factors], Y.array))


def _pick_backend(backend, size, instrumented):
    if backend == "auto":
        if _backsub.HAVE_NUMBA and not instrumented and size >= NUMBA_MIN_SIZE:
            return "numba"
        return "python"
    if backend not in ("python", "numba"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and instrumented:
        raise ValueError("instrumentation hooks require the python backend")
    return backend


def _back_substitute_inplace(Ts, arr, tol, backend="auto", on_visit=None, counters=None):
    dims = arr.shape
    flat = arr.reshape(-1, order="F")
    if not np.shares_memory(flat, arr):
        raise ValueError("work buffer must be Fortran-contiguous")
    which = _pick_backend(backend, arr.size, on_visit is not None)
    if which == "numba":
        min_den, visits, mults = _backsub.backsub_numba(Ts, flat, dims, tol)
    else:
        min_den, visits, mults = _backsub.backsub_python(Ts, flat, dims, tol, on_visit)
    if counters is not None:
        counters.update(visits=visits, multiplies=mults, backend=which)
    return min_den


def back_substitute(Ts, C, tol=None, *, backend="auto", on_visit=None, counters=None):
    """Solve ``sum_j T_j x_j Y = C`` for upper triangular ``T_j``.

    Parameters
    ----------
    Ts : sequence of (n_j, n_j) arrays
        Upper triangular coefficients; the strict lower part is ignored.
    C : NDTensor
    tol : float, optional
        Denominators with ``|den| <= tol`` are treated as singular.  Defaults
        to ``unit_roundoff * sum_j ||T_j||_F``.
    backend : {"auto", "python", "numba"}
    on_visit : callable, optional
        Called as ``on_visit(multi_index, linear_index)`` after each entry is
        solved.  Forces the python kernel.
    counters : dict, optional
        Filled with ``visits``, ``multiplies`` and the ``backend`` used.

    Returns
    -------
    Y : NDTensor
    min_abs_den : float
        Smallest ``|sum_j T_j[i_j, i_j]|`` met during the sweep.

    Raises
    ------
    SingularOperator
        At the first multi-index whose denominator is within ``tol`` of zero.
    """
    C = as_tensor(C)
    Ts = [np.triu(_as_matrix(T)) for T in Ts]
    if tuple(T.shape[0] for T in Ts) != C.dims:
        raise ValueError(f"triangular factor orders do not match dims {C.dims}")
    if tol is None:
        tol = default_tolerance(Ts)
    work = C.copy_array()
    min_den = _back_substitute_inplace(Ts, work, tol, backend, on_visit, counters)
    return _wrap_owned(work), min_den


def diagonal_spectra(eigenvalues, tol=0.0):
    """Build ``Lambda[i_1..i_N] = 1 / (lam_1[i_1] + ... + lam_N[i_N])``.

    Raises ``SingularOperator`` naming the first (in sweep order) multi-index
    whose eigenvalue sum has magnitude ``<= tol`` or yields a non-finite entry.
    """
    lams = tuple(np.asarray(l, dtype=np.complex128).ravel() for l in eigenvalues)
    N = len(lams)
    den = np.zeros(tuple(l.size for l in lams), dtype=np.complex128, order="F")
    for j, l in enumerate(lams):
        shape = [1] * N
        shape[j] = l.size
        den += l.reshape(shape)
    absden = np.abs(den)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        Lam = 1.0 / den
    bad = (absden <= tol) | ~np.isfinite(Lam)
    if bad.any():
        flat_bad = np.flatnonzero(bad.ravel(order="F"))
        pos = int(flat_bad[-1])
        multi = np.unravel_index(pos, den.shape, order="F")
        raise SingularOperator(tuple(int(i) + 1 for i in multi),
                               den.ravel(order="F")[pos], tol)
    return DiagonalSpectra(eigenvalues=lams, Lambda=_wrap_owned(Lam),
                           min_abs_denominator=float(absden.min()))


def solve_normal(problem, spectra=None, factors=None, *, tol=None):
    """Solve through ``X = U x (Lambda o (U* x B))``, valid when every ``T_j`` is diagonal."""
    if factors is None:
        factors = factorize(problem.coefficients)
    if spectra is None:
        Ts = [f.T for f in factors]
        spectra = diagonal_spectra([f.eigenvalues for f in factors],
                                   default_tolerance(Ts) if tol is None else tol)
    C = _transform([f.U.conj().T for f in factors], problem.rhs.array)
    C *= spectra.Lambda.array
    return _wrap_owned(_transform([f.U for f in factors], C))


def solve(problem, *, tol=None, fast_path=True, real_output=False, backend="auto",
          factors=None, on_visit=None, counters=None):
    """Solve ``sum_j A_j x_j X = B``.

    Parameters
    ----------
    problem : SylvesterProblem
    tol : float, optional
        Singularity threshold for the eigenvalue-sum denominators.
    fast_path : bool
        Use the Hadamard shortcut when all Schur factors are diagonal.
    real_output : bool
        Return the real part of the solution (for real data).
    backend : {"auto", "python", "numba"}
        Back-substitution kernel.
    factors : sequence of SchurFactors, optional
        Precomputed factorizations of the coefficients.

    Returns
    -------
    X : NDTensor
    report : SolveReport
    """
    timings = {}
    t0 = time.perf_counter()
    if factors is None:
        factors = factorize(problem.coefficients)
    else:
        factors = tuple(factors)
        _check_factors(factors, problem.dims)
    Ts = [f.T for f in factors]
    if tol is None:
        tol = default_tolerance(Ts)
    t1 = time.perf_counter()
    timings["schur"] = t1 - t0

    work = _transform([f.U.conj().T for f in factors], problem.rhs.array)
    t2 = time.perf_counter()
    timings["forward"] = t2 - t1

    use_fast = (fast_path and on_visit is None and counters is None
                and all(is_numerically_diagonal(T) for T in Ts))
    if use_fast:
        spectra = diagonal_spectra([f.eigenvalues for f in factors], tol)
        work *= spectra.Lambda.array
        min_den = spectra.min_abs_denominator
        used = "hadamard"
    else:
        min_den = _back_substitute_inplace(Ts, work, tol, backend, on_visit, counters)
        used = (counters or {}).get("backend") or _pick_backend(backend, work.size, on_visit is not None)
    t3 = time.perf_counter()
    timings["backsub"] = t3 - t2

    work = _transform([f.U for f in factors], work)
    if real_output:
        work = work.real.astype(np.complex128)
    timings["inverse"] = time.perf_counter() - t3

    report = SolveReport(
        min_abs_denominator=min_den,
        used_normal_fast_path=use_fast,
        flop_estimate=flop_estimate(problem.dims),
        schur_flop_estimate=schur_flop_estimate(problem.dims),
        stage_timings=timings,
        backend=used,
    )
    return _wrap_owned(work), report
