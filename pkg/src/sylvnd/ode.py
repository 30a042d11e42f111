"""Exact-in-time solution of ``X' = sum_j A_j x_j X + B``.

At any time ``t`` the solution satisfies the Sylvester equation
``sum_j A_j x_j X(t) = F`` with
``F = exp(tA_N) x_N (... exp(tA_1) x_1 (sum_j A_j x_j X(0) + B)) - B``.
Everything is evaluated in Schur coordinates, where the exponentials are
those of the triangular factors, and the final solve is one back-substitution.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .schur import is_numerically_diagonal, triangular_exp
from .solver import (SolveReport, _as_matrix, _back_substitute_inplace, _check_factors,
                     _pick_backend, _transform, default_tolerance, diagonal_spectra,
                     factorize, flop_estimate, schur_flop_estimate)
from .tensor import NDTensor, _mode_product_array, _wrap_owned, as_tensor

__all__ = ["OdeSystem", "propagate", "rk4_reference", "ode_rhs", "DEFAULT_RK4_DT"]

DEFAULT_RK4_DT = 2.5e-5


@dataclass(frozen=True)
class OdeSystem:
    """Constant-coefficient system ``X' = sum_j A_j x_j X + B``, ``X(0) = X0``."""

    coefficients: tuple
    forcing: NDTensor
    initial: NDTensor

    def __post_init__(self):
        coeffs = tuple(_as_matrix(A) for A in self.coefficients)
        B, X0 = as_tensor(self.forcing), as_tensor(self.initial)
        if len(coeffs) < 2:
            raise ValueError("an ODE tensor system needs N >= 2 coefficient matrices")
        orders = tuple(A.shape[0] for A in coeffs)
        if B.dims != orders or X0.dims != orders:
            raise ValueError(f"coefficient orders {orders}, forcing dims {B.dims} and "
                             f"initial dims {X0.dims} must agree")
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "forcing", B)
        object.__setattr__(self, "initial", X0)

    @property
    def dims(self):
        return self.initial.dims

    def with_initial(self, X0):
        return OdeSystem(self.coefficients, self.forcing, X0)


def _apply(mats, arr):
    out = np.zeros(arr.shape, dtype=np.complex128, order="F")
    for j, M in enumerate(mats, start=1):
        out += _mode_product_array(M, j, arr)
    return out


def ode_rhs(system, X):
    """``sum_j A_j x_j X + B``."""
    X = as_tensor(X)
    return _wrap_owned(_apply(system.coefficients, X.array) + system.forcing.array)


def propagate(system, t, *, factors=None, tol=None, fast_path=True, backend="auto",
              real_output=False):
    """Solution of the system at time ``t``.

    Returns
    -------
    X : NDTensor
    report : SolveReport
        Diagnostics of the underlying triangular solve.

    Raises
    ------
    SingularOperator
        If some sum of eigenvalues (one per coefficient) is numerically zero;
        the reduction then does not determine ``X(t)``.
    """
    t = float(t)
    if not math.isfinite(t):
        raise ValueError(f"time must be finite, got {t}")
    timings = {}
    t0 = time.perf_counter()
    if factors is None:
        factors = factorize(system.coefficients)
    else:
        factors = tuple(factors)
        _check_factors(factors, system.dims)
    Ts = [f.T for f in factors]
    Uh = [f.U.conj().T for f in factors]
    if tol is None:
        tol = default_tolerance(Ts)
    expTs = [triangular_exp(T, t) for T in Ts]
    t1 = time.perf_counter()
    timings["schur"] = t1 - t0

    C = _transform(Uh, system.forcing.array)
    Y0 = _transform(Uh, system.initial.array)
    S = _apply(Ts, Y0)
    del Y0
    S += C
    G = _transform(expTs, S)
    del S
    G -= C
    del C
    t2 = time.perf_counter()
    timings["forward"] = t2 - t1

    use_fast = fast_path and all(is_numerically_diagonal(T) for T in Ts)
    if use_fast:
        spectra = diagonal_spectra([f.eigenvalues for f in factors], tol)
        G *= spectra.Lambda.array
        min_den = spectra.min_abs_denominator
        used = "hadamard"
    else:
        min_den = _back_substitute_inplace(Ts, G, tol, backend)
        used = _pick_backend(backend, G.size, False)
    t3 = time.perf_counter()
    timings["backsub"] = t3 - t2

    X = _transform([f.U for f in factors], G)
    if real_output:
        X = X.real.astype(np.complex128)
    timings["inverse"] = time.perf_counter() - t3
    report = SolveReport(
        min_abs_denominator=min_den,
        used_normal_fast_path=use_fast,
        flop_estimate=flop_estimate(system.dims),
        schur_flop_estimate=schur_flop_estimate(system.dims),
        stage_timings=timings,
        backend=used,
    )
    return _wrap_owned(X), report


def rk4_reference(system, t, dt=DEFAULT_RK4_DT, *, max_steps=10_000_000):
    """Classical fixed-step RK4 integration from 0 to ``t``.

    The last step is shortened so the integration lands exactly on ``t``.

    Raises
    ------
    FloatingPointError
        If the state becomes non-finite.
    """
    t = float(t)
    dt = float(dt)
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if not math.isfinite(t):
        raise ValueError(f"time must be finite, got {t}")
    span = abs(t)
    nsteps = math.ceil(span / dt - 1e-9) if span > 0 else 0
    if nsteps > max_steps:
        raise ValueError(f"{nsteps} RK4 steps exceed the budget of {max_steps}")
    sign = 1.0 if t >= 0 else -1.0
    A = system.coefficients
    B = system.forcing.array

    def f(x):
        out = _apply(A, x)
        out += B
        return out

    last = span - (nsteps - 1) * dt
    x = system.initial.copy_array()
    for step in range(nsteps):
        h = sign * (dt if step < nsteps - 1 else last)
        k1 = f(x)
        k2 = f(x + (h / 2) * k1)
        k3 = f(x + (h / 2) * k2)
        k4 = f(x + h * k3)
        x = x + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.isfinite(x).all():
            raise FloatingPointError(f"RK4 state became non-finite at step {step + 1}")
    return _wrap_owned(x)
