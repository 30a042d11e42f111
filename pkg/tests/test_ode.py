import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from sylvnd.errors import SingularOperator
from sylvnd.instances import random_ode
from sylvnd.ode import OdeSystem, ode_rhs, propagate, rk4_reference
from sylvnd.solver import sylvester_apply
from sylvnd.tensor import NDTensor, mode_product

from conftest import crandom, ctensor, maxdiff


def stable_system(rng, dims, shift=1.0):
    As = [crandom(rng, n, n) - shift * np.eye(n) for n in dims]
    return OdeSystem(As, ctensor(rng, dims), ctensor(rng, dims))


def exponential_forcing(system, t):
    """exp(tA_N) x_N ... exp(tA_1) x_1 (sum A x X0 + B) - B via scipy's expm."""
    S = ode_rhs(system, system.initial)
    for j, A in enumerate(system.coefficients, start=1):
        S = mode_product(scipy.linalg.expm(t * A), j, S)
    return S.array - system.forcing.array


class TestSystem:
    def test_needs_two_modes(self):
        with pytest.raises(ValueError):
            OdeSystem((np.eye(2),), np.ones(2), np.ones(2))

    def test_dims_mismatch(self):
        with pytest.raises(ValueError):
            OdeSystem((np.eye(2), np.eye(2)), np.ones((2, 2)), np.ones((2, 3)))


class TestPropagate:
    def test_time_zero(self, rng):
        system = stable_system(rng, (2, 3, 4))
        X, _ = propagate(system, 0.0)
        assert maxdiff(X, system.initial) <= 1e-13

    def test_scaled_identities(self, rng):
        c = [0.3, -1.2, 0.5j]
        dims = (2, 3, 2)
        X0 = ctensor(rng, dims)
        system = OdeSystem([ci * np.eye(n) for ci, n in zip(c, dims)],
                           np.zeros(dims), X0)
        t = 0.7
        X, rep = propagate(system, t)
        assert rep.used_normal_fast_path
        expected = np.exp(sum(c) * t) * X0.array
        assert maxdiff(X, expected) <= 1e-13

    def test_sylvester_residual(self, rng):
        system = stable_system(rng, (3, 2, 4))
        t = 0.35
        X, _ = propagate(system, t)
        F = exponential_forcing(system, t)
        res = sylvester_apply(system.coefficients, X).array - F
        assert np.abs(res).max() <= 1e-8 * (1 + np.abs(F).max())

    def test_matches_rk4(self):
        system = random_ode((2, 3, 4), seed=3)
        X, _ = propagate(system, 0.05)
        Y = rk4_reference(system, 0.05, dt=1e-3)
        assert maxdiff(X, Y) <= 1e-10

    def test_negative_time(self, rng):
        system = stable_system(rng, (2, 3))
        X, _ = propagate(system, -0.2)
        Y = rk4_reference(system, -0.2, dt=1e-3)
        assert maxdiff(X, Y) <= 1e-10

    @given(st.floats(-0.5, 0.5), st.floats(-0.5, 0.5), st.integers(0, 2 ** 32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_semigroup(self, s, t, seed):
        system = random_ode((2, 3, 2), seed)
        X_st, _ = propagate(system, s + t)
        X_s, _ = propagate(system, s)
        X_two, _ = propagate(system.with_initial(X_s), t)
        assert maxdiff(X_st, X_two) <= 1e-9

    def test_derivative(self, rng):
        system = stable_system(rng, (2, 3, 3))
        F0 = ode_rhs(system, system.initial).array
        errors = []
        for h in (1e-3, 5e-4, 2.5e-4):
            X, _ = propagate(system, h)
            errors.append(np.abs((X.array - system.initial.array) / h - F0).max())
        ratios = [errors[i] / errors[i + 1] for i in range(2)]
        assert all(1.8 <= r <= 2.2 for r in ratios)

    def test_singular_operator(self, rng):
        dims = (2, 2)
        system = OdeSystem([np.diag([1.0, -1.0]), np.diag([-1.0, 1.0])],
                           ctensor(rng, dims), ctensor(rng, dims))
        with pytest.raises(SingularOperator):
            propagate(system, 0.1)

    def test_non_finite_time(self, rng):
        with pytest.raises(ValueError):
            propagate(stable_system(rng, (2, 2)), np.inf)

    def test_general_and_fast_paths_agree(self, rng):
        dims = (3, 2)
        As = [np.diag(crandom(rng, n)) for n in dims]
        system = OdeSystem(As, ctensor(rng, dims), ctensor(rng, dims))
        Xf, rf = propagate(system, 0.4)
        Xg, rg = propagate(system, 0.4, fast_path=False)
        assert rf.used_normal_fast_path and not rg.used_normal_fast_path
        assert maxdiff(Xf, Xg) <= 1e-13

    @pytest.mark.slow
    def test_seven_dimensions(self):
        system = random_ode((2, 3, 4, 5, 6, 7, 8), seed=11)
        X, _ = propagate(system, 0.1)
        Y = rk4_reference(system, 0.1, dt=2.5e-5)
        assert maxdiff(X, Y) <= 1e-10


class TestRK4:
    def test_constant_rhs(self, rng):
        dims = (2, 3)
        B = ctensor(rng, dims)
        X0 = ctensor(rng, dims)
        system = OdeSystem([np.zeros((2, 2)), np.zeros((3, 3))], B, X0)
        X = rk4_reference(system, 0.37, dt=0.1)
        assert maxdiff(X, X0.array + 0.37 * B.array) <= 1e-15

    def test_scalar_exponential(self, rng):
        X0 = ctensor(rng, (2, 2))
        system = OdeSystem([-0.5 * np.eye(2), 0.2 * np.eye(2)], np.zeros((2, 2)), X0)
        X = rk4_reference(system, 1.0, dt=0.01)
        assert maxdiff(X, np.exp(-0.3) * X0.array) <= 1e-10

    def test_lands_on_final_time(self, rng):
        X0 = ctensor(rng, (2, 2))
        system = OdeSystem([np.zeros((2, 2))] * 2, np.ones((2, 2)), X0)
        X = rk4_reference(system, 0.25, dt=0.1)
        assert maxdiff(X, X0.array + 0.25) <= 1e-15

    def test_zero_time(self, rng):
        system = stable_system(rng, (2, 2))
        assert rk4_reference(system, 0.0) == system.initial

    def test_order(self):
        system = random_ode((2, 3, 4), seed=5)
        t = 0.5
        exact, _ = propagate(system, t)
        errs = [maxdiff(rk4_reference(system, t, dt), exact) for dt in (0.02, 0.01, 0.005)]
        orders = [np.log2(errs[i] / errs[i + 1]) for i in range(2)]
        assert min(orders) >= 3.9

    def test_blow_up_detected(self):
        X0 = NDTensor(np.ones((2, 2)))
        system = OdeSystem([1e6 * np.eye(2)] * 2, np.zeros((2, 2)), X0)
        with np.errstate(over="ignore", invalid="ignore"), pytest.raises(FloatingPointError):
            rk4_reference(system, 100.0, dt=1.0)

    def test_bad_step(self, rng):
        with pytest.raises(ValueError):
            rk4_reference(stable_system(rng, (2, 2)), 1.0, dt=0.0)

    def test_step_budget(self, rng):
        with pytest.raises(ValueError):
            rk4_reference(stable_system(rng, (2, 2)), 1.0, dt=1e-3, max_steps=10)
