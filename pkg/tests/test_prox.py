import numpy as np
import pytest
from numpy.testing import assert_allclose

from daqp.core import QProblem
from daqp.errors import NotPositiveDefinite
from daqp.harness.generator import GeneratorConfig, generate_random
from daqp.oracle import kkt_residual
from daqp.prox import prox_solve
from daqp.settings import Settings
from daqp.solver import SolveStatus, solve_qp


def test_scalar_contraction():
    qp = QProblem(H=[[1.0]], f=[-1.0], A=None, bu=None)
    settings = Settings(prox_eps=1.0)
    result = prox_solve(qp, settings)
    assert result.status is SolveStatus.OPTIMAL
    assert abs(result.x[0] - 1.0) < settings.prox_eta
    assert result.outer_iterations <= 30

    history = np.array(result.prox_state.history)[:, 0]
    assert_allclose(history[:3], [0.0, 0.5, 0.75])
    errors = np.abs(history - 1.0)
    assert_allclose(errors[1:6] / errors[:5], 0.5, atol=1e-12)
    assert_allclose(errors[1:] / errors[:-1], 0.5, atol=1e-9)


def test_factor_built_once(two_constraint):
    result = prox_solve(two_constraint)
    assert result.status is SolveStatus.OPTIMAL
    assert result.outer_iterations >= 2
    assert result.factor.order == 2
    state = result.prox_state
    assert state.cholesky_count == 1
    assert state.ldl_rebuilds == 1
    assert not result.factor_rebuilt


def test_factor_reused_on_random_problems():
    for k in range(5):
        qp = generate_random(GeneratorConfig(n=6, m=12, kappa=1e4, seed=40 + k))
        result = prox_solve(qp)
        assert result.status is SolveStatus.OPTIMAL
        assert result.outer_iterations >= 2
        assert result.prox_state.ldl_rebuilds == 1


def test_agrees_with_plain_solve():
    qp = generate_random(GeneratorConfig(n=5, m=8, kappa=10.0, seed=12))
    plain = solve_qp(qp)
    settings = Settings()
    prox = prox_solve(qp, settings)
    assert prox.status is SolveStatus.OPTIMAL
    assert_allclose(prox.x, plain.x, atol=10 * settings.prox_eta)


def test_semidefinite_hessian():
    qp = QProblem(H=[[0.0]], f=[-1.0], A=[[1.0]], bu=[2.0])
    with pytest.raises(NotPositiveDefinite):
        solve_qp(qp)
    result = prox_solve(qp)
    assert result.status is SolveStatus.OPTIMAL
    assert_allclose(result.x, [2.0])


def test_infeasible_is_propagated(infeasible_scalar):
    result = prox_solve(infeasible_scalar)
    assert result.status is SolveStatus.PRIMAL_INFEASIBLE
    assert result.outer_iterations == 1


def test_outer_limit():
    qp = QProblem(H=[[1.0]], f=[-1.0], A=None, bu=None)
    result = prox_solve(qp, Settings(prox_eps=1.0, prox_outer_max=3))
    assert result.status is SolveStatus.ITERATION_LIMIT
    assert result.outer_iterations == 3


def test_stationarity_on_original_problem():
    settings = Settings()
    for k in range(10):
        qp = generate_random(GeneratorConfig(n=6, m=10, kappa=1e6, seed=300 + k))
        result = prox_solve(qp, settings)
        assert result.status is SolveStatus.OPTIMAL
        history = result.prox_state.history
        step = np.linalg.norm(history[-1] - history[-2])
        report = kkt_residual(qp, result.x, result.lam, result.nu)
        scale = 1.0 + np.abs(qp.f).max()
        assert report.stationarity <= settings.prox_eps * step + 1e-8 * scale
        assert report.primal_ineq <= settings.eps_primal
