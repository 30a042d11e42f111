"""Seeded random test instances.

Random numbers come from numpy's Philox-4x64 counter-based generator
(``numpy.random.Philox(seed)``) mapped to uniform doubles on [0, 1) by
``Generator.random``.  Every complex matrix or tensor draws its real parts
first, then its imaginary parts, each as one flat column-major block.
Coefficients are drawn in mode order before the tensors.
"""
from __future__ import annotations

import numpy as np

from .ode import OdeSystem
from .solver import SylvesterProblem, sylvester_apply
from .tensor import _wrap_owned

__all__ = ["make_rng", "random_complex", "random_sylvester", "random_ode"]


def make_rng(seed):
    return np.random.Generator(np.random.Philox(int(seed)))


def random_complex(rng, shape):
    shape = tuple(int(n) for n in shape)
    size = int(np.prod(shape))
    re = rng.random(size)
    im = rng.random(size)
    return (re + 1j * im).reshape(shape, order="F")


def random_sylvester(dims, seed):
    """Random coefficients and solution; returns ``(problem, X_true)``."""
    rng = make_rng(seed)
    As = [random_complex(rng, (n, n)) for n in dims]
    X = _wrap_owned(random_complex(rng, dims))
    return SylvesterProblem(As, sylvester_apply(As, X)), X


def random_ode(dims, seed):
    """Random coefficients, forcing and initial state."""
    rng = make_rng(seed)
    As = [random_complex(rng, (n, n)) for n in dims]
    B = _wrap_owned(random_complex(rng, dims))
    X0 = _wrap_owned(random_complex(rng, dims))
    return OdeSystem(As, B, X0)
