"""Outer proximal-point iterations around the dual active-set solver.

Each outer pass solves the QP with Hessian H + eps*I and linear term
f - eps*x_k; the fixed point of the map x_k -> x_{k+1} solves the original
problem, so H only needs to be positive semidefinite. H + eps*I is factored
once and every inner solve is warm-started with the previous working set
and LDL^T factor.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from daqp.core import QProblem, transform, update_linear_terms
from daqp.settings import Settings
from daqp.solver import SolveResult, SolveStatus, solve

logger = logging.getLogger(__name__)


@dataclass
class ProxState:
    x: np.ndarray
    outer_k: int = 0
    last_result: Optional[SolveResult] = field(default=None, repr=False)
    history: List[np.ndarray] = field(default_factory=list, repr=False)
    cholesky_count: int = 0
    ldl_rebuilds: int = 0
    inner_iterations: int = 0


def prox_solve(qp: QProblem, settings: Optional[Settings] = None, x0=None) -> SolveResult:
    settings = settings or Settings()
    eps = settings.prox_eps
    ldp = transform(qp, eps)

    x = np.zeros(qp.n) if x0 is None else np.asarray(x0, dtype=float).reshape(qp.n).copy()
    state = ProxState(x=x, cholesky_count=1, history=[x.copy()])
    warm = None
    result = None

    while state.outer_k < settings.prox_outer_max:
        state.outer_k += 1
        ldp = update_linear_terms(ldp, qp.f - eps * state.x, qp.bu, qp.bl)
        x_old = state.x
        result = solve(ldp, settings, warm)
        state.last_result = result
        state.inner_iterations += result.iterations
        state.ldl_rebuilds += int(result.factor_rebuilt)

        if result.status is not SolveStatus.OPTIMAL:
            logger.warning("outer pass %d: inner solve ended with %s", state.outer_k, result.status.value)
            return _wrap(result, state, result.status)

        state.x = result.x
        state.history.append(result.x.copy())
        warm = result.warm_start()
        step = float(np.linalg.norm(state.x - x_old))
        logger.debug("outer pass %d: ||x - x_old|| = %.3e", state.outer_k, step)
        if step < settings.prox_eta:
            violation = qp.primal_violation(state.x)
            if violation <= settings.eps_primal:
                return _wrap(result, state, SolveStatus.OPTIMAL)
            logger.debug("outer pass %d: step converged but primal violation is %.3e", state.outer_k, violation)

    logger.warning("proximal iterations stopped after %d outer passes", state.outer_k)
    return _wrap(result, state, SolveStatus.ITERATION_LIMIT)


def _wrap(result: SolveResult, state: ProxState, status: SolveStatus) -> SolveResult:
    result.status = status
    result.outer_iterations = state.outer_k
    result.iterations = state.inner_iterations
    result.prox_state = state
    return result
