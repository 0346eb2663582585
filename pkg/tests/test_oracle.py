import numpy as np
import pytest
from numpy.testing import assert_allclose

from daqp.core import QProblem
from daqp.errors import DimensionMismatch, NoFeasibleCandidate, OracleBudgetExceeded
from daqp.harness.generator import GeneratorConfig, generate_random
from daqp.oracle import brute_force_solve, kkt_residual


def test_residuals_at_optimum(halfspace):
    report = kkt_residual(halfspace, [0.5, 0.5], [1.5])
    assert report.worst() <= 1e-12


def test_stationarity_is_linear(halfspace):
    report = kkt_residual(halfspace, [0.501, 0.5], [1.5])
    assert report.stationarity == pytest.approx(1e-3)


def test_negative_multiplier_is_dual_violation(halfspace):
    assert kkt_residual(halfspace, [0.5, 0.5], [-1.0]).dual == pytest.approx(1.0)


def test_two_sided_signed_multiplier(box_scalar):
    report = kkt_residual(box_scalar, [1.0], [2.0])
    assert report.worst() <= 1e-12
    lower = QProblem(H=[[1.0]], f=[3.0], A=[[1.0]], bu=[1.0], bl=[-1.0])
    assert kkt_residual(lower, [-1.0], [-2.0]).worst() <= 1e-12


def test_residual_dimension_check(halfspace):
    with pytest.raises(DimensionMismatch):
        kkt_residual(halfspace, [0.5], [1.5])


def test_oracle_examples(halfspace, two_constraint):
    sol = brute_force_solve(halfspace)
    assert_allclose(sol.x, [0.5, 0.5])
    assert_allclose(sol.lam, [1.5])

    sol = brute_force_solve(two_constraint)
    assert_allclose(sol.x, [0.3, 0.7])
    assert_allclose(sol.lam, [1.3, 0.4])
    assert sol.active == ((0, 1), (1, 1))


def test_oracle_unconstrained():
    H = np.array([[2.0, 1.0], [1.0, 3.0]])
    f = np.array([1.0, -1.0])
    sol = brute_force_solve(QProblem(H=H, f=f, A=None, bu=None))
    assert_allclose(sol.x, -np.linalg.solve(H, f))
    assert sol.active == ()


def test_oracle_limits(infeasible_scalar):
    with pytest.raises(NoFeasibleCandidate):
        brute_force_solve(infeasible_scalar)
    big = QProblem(H=np.eye(9), f=np.zeros(9), A=None, bu=None)
    with pytest.raises(OracleBudgetExceeded):
        brute_force_solve(big)


def test_oracle_is_accurate_and_deterministic():
    for k in range(20):
        qp = generate_random(GeneratorConfig(n=4, m=7, me=k % 2, kappa=100.0, two_sided=bool(k % 3), seed=k))
        sol = brute_force_solve(qp)
        again = brute_force_solve(qp)
        assert np.array_equal(sol.x, again.x)
        report = kkt_residual(qp, sol.x, sol.lam, sol.nu)
        scale = 1.0 + np.abs(qp.f).max() + np.abs(qp.bu).max()
        assert report.worst() <= 1e-8 * scale
