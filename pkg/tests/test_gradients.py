"""Analytic gradients vs the central finite-difference oracle, 20 seeds each."""

import numpy as np
import pytest

from fallwatch.gradcheck import (
    LAYER_CHECKS,
    REL_TOL,
    check_fallnet,
    finite_diff_grad,
    relative_error,
    run_gradcheck,
)

SEEDS = range(20)


class TestFiniteDiffOracle:
    def test_quadratic(self):
        grad = finite_diff_grad(lambda t: float(t[0] ** 2), np.array([3.0]))
        assert abs(grad[0] - 6.0) < 1e-6

    def test_constant_function(self):
        grad = finite_diff_grad(lambda t: 7.5, np.ones((2, 3)))
        assert not grad.any()

    def test_multivariate_linear(self):
        coeff = np.array([1.0, -2.0, 0.25])
        grad = finite_diff_grad(lambda t: float(coeff @ t), np.zeros(3))
        assert np.allclose(grad, coeff, atol=1e-8)


@pytest.mark.parametrize("name", sorted(LAYER_CHECKS))
def test_layer_gradients_over_20_seeds(name):
    check = LAYER_CHECKS[name]
    worst = max(check(seed) for seed in SEEDS)
    assert worst <= REL_TOL, f"{name}: max rel err {worst:.3e}"


def test_full_model_gradients_over_20_seeds():
    worst = max(check_fallnet(seed) for seed in SEEDS)
    assert worst <= REL_TOL, f"fallnet e2e: max rel err {worst:.3e}"


def test_report_is_deterministic():
    a = run_gradcheck(0, n_seeds=3)
    b = run_gradcheck(0, n_seeds=3)
    assert a.lines() == b.lines()
    assert a.passed


def test_relative_error_definition():
    assert relative_error(np.array([1.0]), np.array([1.0])) < 1e-12
    assert relative_error(np.array([1.0]), np.array([0.0])) == pytest.approx(1.0)
