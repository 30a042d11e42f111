"""Bartels-Stewart solver for N-dimensional Sylvester tensor equations.

Solves ``sum_j A_j x_j X = B`` where ``A_j x_j`` multiplies along the j-th
dimension of ``X``, propagates ``X' = sum_j A_j x_j X + B`` exactly in time,
and provides Hermite collocation for advection-diffusion problems on R^N.
"""

__version__ = "0.1.0"

from .errors import (ConvergenceError, MemoryBudgetExceeded, SingularMatrix,
                     SingularOperator, SylvNDError, TensorFormatError)
from .tensor import (MultiIndexCursor, NDTensor, as_tensor, cursor_next, cursor_start,
                     hadamard, iter_multi_indices, linear_index, make_tensor,
                     mode_product, multi_index, strides, vec)
from .schur import SchurFactors, matrix_exp, schur, triangular_exp
from .solver import (DiagonalSpectra, SolveReport, SylvesterProblem, back_substitute,
                     diagonal_spectra, flop_estimate, forward_transform,
                     inverse_transform, schur_flop_estimate, solve, solve_normal,
                     sylvester_apply)
from .ode import OdeSystem, propagate, rk4_reference
from .hermite import (HermiteGrid, advdiff_exact, build_advdiff_system, hermite_grid,
                      hermite_nodes)
from .kron import dense_solve, kron_product, kron_sum, oracle_solve
