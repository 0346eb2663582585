"""Ground truth for small problems: KKT residuals and active-set enumeration."""
import itertools
import logging
from typing import Iterator, List, NamedTuple, Optional, Tuple

import numpy as np
from pydantic import BaseModel

from daqp.core import QProblem, _as_vector
from daqp.errors import NoFeasibleCandidate, OracleBudgetExceeded

logger = logging.getLogger(__name__)

ORACLE_MAX_N = 8
ORACLE_MAX_M = 14
ORACLE_TOL = 1e-9


class KKTReport(BaseModel):
    stationarity: float
    primal_ineq: float
    dual: float
    complementarity: float
    equality: float

    def worst(self) -> float:
        return max(self.stationarity, self.primal_ineq, self.dual, self.complementarity, self.equality)


class OracleSolution(NamedTuple):
    x: np.ndarray
    lam: np.ndarray
    nu: np.ndarray
    active: Tuple[Tuple[int, int], ...]


def kkt_residual(qp: QProblem, x, lam, nu=None) -> KKTReport:
    """Residuals of the optimality conditions; lam is signed for two-sided rows (< 0 = lower active)."""
    x = _as_vector(x, qp.n, "x")
    lam = _as_vector(lam, qp.m, "lambda")
    nu = _as_vector(nu, qp.me, "nu")

    grad = qp.H @ x + qp.A.T @ lam + qp.G.T @ nu + qp.f
    Ax = qp.A @ x
    upper_slack = qp.bu - Ax
    primal = np.maximum(-upper_slack, 0.0)
    pos = lam > 0
    neg = lam < 0

    if qp.two_sided:
        lower_slack = Ax - qp.bl
        primal = np.maximum(primal, np.maximum(-lower_slack, 0.0))
        dual = np.concatenate([lam[pos & np.isinf(qp.bu)], -lam[neg & np.isinf(qp.bl)]])
        comp = np.concatenate([upper_slack[pos] * lam[pos], lower_slack[neg] * lam[neg]])
    else:
        dual = -lam[neg]
        comp = upper_slack[lam != 0] * lam[lam != 0]

    return KKTReport(
        stationarity=float(np.abs(grad).max(initial=0.0)),
        primal_ineq=float(primal.max(initial=0.0)),
        dual=float(np.max(dual, initial=0.0)),
        complementarity=float(np.abs(comp).max(initial=0.0)),
        equality=float(np.abs(qp.G @ x - qp.h).max(initial=0.0)),
    )


def in_oracle_budget(qp: QProblem) -> bool:
    return qp.n <= ORACLE_MAX_N and qp.m <= ORACLE_MAX_M


def _candidates(qp: QProblem) -> Iterator[Tuple[Tuple[int, int], ...]]:
    """Active sets in lexicographic order: (row, +1 upper / -1 lower) tuples."""
    sides = (1, -1) if qp.two_sided else (1,)
    for size in range(0, min(qp.m, qp.n - qp.me) + 1):
        for rows in itertools.combinations(range(qp.m), size):
            for choice in itertools.product(sides, repeat=size):
                yield tuple(zip(rows, choice))


def _solve_candidate(qp: QProblem, active) -> Optional[Tuple[np.ndarray, np.ndarray, np.ndarray]]:
    n, me = qp.n, qp.me
    rows: List[int] = [i for i, _ in active]
    bounds = np.array([qp.bu[i] if s > 0 else qp.bl[i] for i, s in active])
    C = np.vstack([qp.G, qp.A[rows]])
    c = np.concatenate([qp.h, bounds])
    if not np.all(np.isfinite(c)):
        return None
    k = C.shape[0]
    K = np.block([[qp.H, C.T], [C, np.zeros((k, k))]])
    try:
        sol = np.linalg.solve(K, np.concatenate([-qp.f, c]))
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(sol)):
        return None
    x = sol[:n]
    nu = sol[n : n + me]
    lam = np.zeros(qp.m)
    lam[rows] = sol[n + me :]
    return x, lam, nu


def brute_force_solve(qp: QProblem) -> OracleSolution:
    """Enumerate active sets and return the first candidate satisfying the KKT conditions."""
    if not in_oracle_budget(qp):
        raise OracleBudgetExceeded(f"n={qp.n}, m={qp.m} exceeds ({ORACLE_MAX_N}, {ORACLE_MAX_M})")

    for active in _candidates(qp):
        candidate = _solve_candidate(qp, active)
        if candidate is None:
            continue
        x, lam, nu = candidate
        signs = np.array([s for _, s in active])
        lam_active = lam[[i for i, _ in active]]
        if np.any(signs * lam_active < -ORACLE_TOL * (1.0 + np.abs(lam_active).max(initial=0.0))):
            continue
        Ax = qp.A @ x
        tol = ORACLE_TOL * (1.0 + np.abs(Ax).max(initial=0.0))
        if np.any(Ax - qp.bu > tol):
            continue
        if qp.two_sided and np.any(qp.bl - Ax > tol):
            continue
        logger.debug("oracle accepted active set %s", active)
        return OracleSolution(x, lam, nu, active)

    raise NoFeasibleCandidate("no active set satisfies the optimality conditions")
