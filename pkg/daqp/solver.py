"""Dual active-set method on the transformed problem.

Each iteration either solves M_k M_k^T lam = -d_k for the current working
set, or (when the Gram matrix is singular) moves along a null direction of
it. Stationary iterates are checked for primal feasibility through the
slacks of the constraints outside the working set; the most violated one
is added. Blocking components are removed by a ratio test. A dual-optimal
iterate is returned as Optimal only once the recovered x also satisfies the
primal constraints.
"""
import enum
import logging
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

import numpy as np
from scipy.linalg import LinAlgError, LinAlgWarning
from scipy.linalg import solve as dense_solve

from daqp.core import LDProblem, QProblem, recover_primal, transform
from daqp.errors import (
    DegenerateDirection,
    FactorError,
    NegativePivot,
    WarmStartError,
)
from daqp.factor import LDLFactor, ldl_fresh
from daqp.oracle import kkt_residual
from daqp.settings import Settings

logger = logging.getLogger(__name__)

DEGENERATE_TOL = 1e-12
POLISH_SIGN_TOL = 1e-9


class Side(str, enum.Enum):
    UPPER = "upper"
    LOWER = "lower"
    EQUALITY = "equality"


class SolveStatus(str, enum.Enum):
    OPTIMAL = "Optimal"
    PRIMAL_INFEASIBLE = "PrimalInfeasible"
    ITERATION_LIMIT = "IterationLimit"
    CYCLE_DETECTED = "CycleDetected"
    NUMERICAL_FAILURE = "NumericalFailure"


# ===== WORKING SET =====

@dataclass
class WorkingSet:
    """Inequality indices whose multipliers are free, in factorization order.

    The ``me`` equality rows permanently occupy factor positions 0..me-1, so
    inequality ``order[k]`` sits at factor position ``me + k``.
    """

    m: int
    me: int = 0
    order: List[int] = field(default_factory=list)
    side: Dict[int, Side] = field(default_factory=dict)

    def __contains__(self, i: int) -> bool:
        return i in self.side

    def __len__(self) -> int:
        return len(self.order)

    def add(self, i: int, side: Side) -> int:
        if not 0 <= i < self.m:
            raise ValueError(f"constraint {i} out of range for m={self.m}")
        if i in self.side:
            raise ValueError(f"constraint {i} already in the working set")
        if side not in (Side.UPPER, Side.LOWER):
            raise ValueError(f"inequality members are upper or lower, got {side}")
        self.order.append(i)
        self.side[i] = side
        return self.me + len(self.order) - 1

    def remove(self, i: int) -> int:
        """Drop ``i`` and return the factor position it occupied."""
        k = self.order.index(i)
        del self.order[k]
        del self.side[i]
        return self.me + k

    def position(self, i: int) -> int:
        return self.me + self.order.index(i)

    @property
    def upper(self) -> List[int]:
        return sorted(i for i in self.order if self.side[i] is Side.UPPER)

    @property
    def lower(self) -> List[int]:
        return sorted(i for i in self.order if self.side[i] is Side.LOWER)

    @property
    def complement(self) -> List[int]:
        return [i for i in range(self.m) if i not in self.side]

    @property
    def sides(self) -> List[Side]:
        return [Side.EQUALITY] * self.me + [self.side[i] for i in self.order]

    def signs(self) -> np.ndarray:
        return np.array([1.0 if self.side[i] is Side.UPPER else -1.0 for i in self.order])

    def copy(self) -> "WorkingSet":
        return WorkingSet(self.m, self.me, list(self.order), dict(self.side))


@dataclass
class WarmStart:
    lam: np.ndarray
    working_set: WorkingSet
    factor: Optional[LDLFactor] = None


@dataclass
class Certificate:
    """Dual direction proving primal infeasibility on the final working set."""

    lam: np.ndarray
    nu: np.ndarray

    def verify(self, ldp: LDProblem, working: WorkingSet) -> Dict[str, float]:
        order = working.order
        p_w = self.lam[order]
        rows = _factor_rows(ldp, working)
        p = np.concatenate([self.nu, p_w])
        gram_p = rows @ (rows.T @ p)
        slope = float(_rhs(ldp, working) @ p)
        sign_violation = float(np.maximum(-working.signs() * p_w, 0.0).max(initial=0.0))
        return {
            "null_residual": float(np.abs(gram_p).max(initial=0.0)),
            "slope": slope,
            "sign_violation": sign_violation,
        }


@dataclass
class PrimalSlack:
    """Slacks of the constraints outside the working set.

    ``lower`` is None for one-sided problems; entries are NaN where the
    upper slack is already negative and the lower one was not evaluated.
    """

    indices: np.ndarray
    upper: np.ndarray
    lower: Optional[np.ndarray] = None


@dataclass
class SingularStep:
    p_lam: np.ndarray
    p_nu: np.ndarray
    blocking: List[int]
    slope: float


@dataclass
class SolverState:
    lam: np.ndarray
    nu: np.ndarray
    working: WorkingSet
    factor: LDLFactor
    k: int = 0
    u_norm_sq_last: Optional[float] = None
    lower_bounds: List[float] = field(default_factory=list)
    best: Optional[dict] = None
    refactored: bool = False
    reentered: Set[int] = field(default_factory=set)


@dataclass
class SolveResult:
    x: np.ndarray
    lam: np.ndarray
    nu: np.ndarray
    working_set: WorkingSet
    status: SolveStatus
    iterations: int
    lower_bounds: List[float]
    dual_objective: float
    certificate: Optional[Certificate] = None
    diagnostics: Optional[dict] = None
    factor: Optional[LDLFactor] = field(default=None, repr=False)
    factor_rebuilt: bool = True
    outer_iterations: int = 0
    prox_state: Optional[object] = field(default=None, repr=False)

    @property
    def optimal(self) -> bool:
        return self.status is SolveStatus.OPTIMAL

    def warm_start(self) -> WarmStart:
        factor = None
        if self.factor is not None and not self.factor.is_singular:
            factor = self.factor.copy()
        return WarmStart(self.lam.copy(), self.working_set.copy(), factor)


# ===== DUAL QUANTITIES =====

def _factor_rows(ldp: LDProblem, working: WorkingSet) -> np.ndarray:
    return np.vstack([ldp.N, ldp.M[working.order]])


def _rhs(ldp: LDProblem, working: WorkingSet) -> np.ndarray:
    """Linear term of the reduced dual: e, then d_upper / -d_lower per member side."""
    idx = np.asarray(working.order, dtype=int)
    vals = ldp.d_upper[idx].copy()
    if ldp.two_sided and idx.size:
        low = working.signs() < 0
        vals[low] = -ldp.d_lower[idx[low]]
    return np.concatenate([ldp.e, vals])


def _u(ldp: LDProblem, working: WorkingSet, lam_w: np.ndarray, nu: np.ndarray) -> np.ndarray:
    return ldp.M[working.order].T @ lam_w + ldp.N.T @ nu


def dual_objective(ldp: LDProblem, lam, nu) -> float:
    """1/2 ||M'lam + N'nu||^2 + linear term, with the side of each row read from the sign of lam."""
    lam = np.asarray(lam, dtype=float)
    nu = np.asarray(nu, dtype=float)
    u = ldp.M.T @ lam + ldp.N.T @ nu
    pos = lam > 0
    neg = lam < 0
    linear = ldp.e @ nu + ldp.d_upper[pos] @ lam[pos]
    if ldp.two_sided:
        linear -= ldp.d_lower[neg] @ lam[neg]
    else:
        linear += ldp.d_upper[neg] @ lam[neg]
    return float(0.5 * u @ u + linear)


def compute_lambda_star(state: SolverState, ldp: LDProblem) -> Tuple[np.ndarray, np.ndarray]:
    """Solution of the equality-constrained subproblem: (lam on W, nu)."""
    me = ldp.me
    y = state.factor.solve(-_rhs(ldp, state.working))
    return y[me:], y[:me]


def compute_primal_slack(ldp: LDProblem, working: WorkingSet, u: np.ndarray) -> PrimalSlack:
    idx = np.asarray(working.complement, dtype=int)
    s = ldp.M[idx] @ u
    upper = s + ldp.d_upper[idx]
    lower = None
    if ldp.two_sided:
        lower = np.full(idx.size, np.nan)
        # upper and lower bounds cannot both be violated
        ok = upper >= 0
        lower[ok] = -s[ok] + ldp.d_lower[idx[ok]]
    return PrimalSlack(idx, upper, lower)


def select_violation(
    slack: PrimalSlack, eps_primal: float, rule: str = "most_negative"
) -> Optional[Tuple[int, Side]]:
    """Constraint to add, or None when every slack is >= -eps_primal."""
    if slack.indices.size == 0:
        return None
    blocks = [slack.upper] if slack.lower is None else [slack.upper, slack.lower]
    values = np.concatenate(blocks)
    values = np.where(np.isnan(values), np.inf, values)
    idx = np.tile(slack.indices, len(blocks))
    side_rank = np.repeat(np.arange(len(blocks)), slack.indices.size)
    if values.min() >= -eps_primal:
        return None

    if rule == "first_negative":
        order = np.lexsort((side_rank, idx))
        k = next(k for k in order if values[k] < -eps_primal)
    else:
        k = np.lexsort((side_rank, idx, values))[0]
    return int(idx[k]), (Side.UPPER if side_rank[k] == 0 else Side.LOWER)


def blocking_set(values: np.ndarray, working: WorkingSet) -> List[int]:
    """Members whose value has the wrong sign for their side (upper < 0, lower > 0)."""
    if not working.order:
        return []
    wrong = working.signs() * np.asarray(values) < 0
    return sorted(i for i, bad in zip(working.order, wrong) if bad)


def ratio_test(lam_w: np.ndarray, p_w: np.ndarray, positions: List[int]) -> Tuple[int, float]:
    """Position (among ``positions``, first wins ties) where lam + alpha p first hits zero."""
    ratios = np.array([-lam_w[k] / p_w[k] for k in positions])
    best = int(np.argmin(ratios))
    return positions[best], max(float(ratios[best]), 0.0)


def fix_component(
    state: SolverState, blocking: List[int], p_lam: np.ndarray, p_nu: np.ndarray
) -> Tuple[int, float]:
    """Step to the first blocking zero crossing and drop that constraint."""
    working = state.working
    order = working.order
    where = {i: k for k, i in enumerate(order)}
    lam_w = state.lam[order]
    k, alpha = ratio_test(lam_w, p_lam, [where[i] for i in sorted(blocking)])
    j = order[k]

    lam_w = lam_w + alpha * p_lam
    lam_w[np.logical_and(working.signs() > 0, lam_w < 0)] = 0.0
    lam_w[np.logical_and(working.signs() < 0, lam_w > 0)] = 0.0
    state.lam[order] = lam_w
    state.lam[j] = 0.0
    state.nu = state.nu + alpha * p_nu

    state.factor.remove_row(working.remove(j))
    logger.debug("iteration %d: removed %d (alpha=%.3e)", state.k, j, alpha)
    return j, alpha


def singular_direction(state: SolverState, ldp: LDProblem) -> SingularStep:
    """Null direction of M_k M_k^T with negative slope, and its blocking set.

    An empty blocking set certifies primal infeasibility: the dual objective
    decreases without bound along the direction.
    """
    p = state.factor.null_vector()
    r = _rhs(ldp, state.working)
    slope = float(r @ p)
    scale = max(1.0, float(np.abs(r).max(initial=0.0)) * float(np.abs(p).max()))
    if abs(slope) <= DEGENERATE_TOL * scale:
        raise DegenerateDirection(f"slope {slope:.3e} along the null direction")
    if slope > 0:
        p = -p
        slope = -slope
    me = ldp.me
    p_lam, p_nu = p[me:], p[:me]
    return SingularStep(p_lam, p_nu, blocking_set(p_lam, state.working), slope)


def lower_bound(u: np.ndarray, v: np.ndarray) -> float:
    """1/2 (||u||^2 - ||v||^2) <= J(x*) at a sign-feasible stationary iterate."""
    return 0.5 * (float(u @ u) - float(v @ v))


def check_progress(state: SolverState, u_norm_sq: float, cycle_tol: float) -> bool:
    last = state.u_norm_sq_last
    if last is None:
        return True
    return u_norm_sq > last + cycle_tol * (1.0 + last)


# ===== SOLVER LOOP =====

def _build_factor(ldp: LDProblem, working: WorkingSet, zeta: float) -> LDLFactor:
    rows = _factor_rows(ldp, working)
    return ldl_fresh(rows @ rows.T, zeta)


def _add_constraint(state: SolverState, ldp: LDProblem, j: int, side: Side) -> None:
    row = ldp.M[j]
    rows = _factor_rows(ldp, state.working)
    try:
        state.factor.add_row(rows @ row, row @ row)
    except NegativePivot:
        if state.refactored:
            raise
        logger.warning("negative pivot adding %d; refactorizing working set of size %d",
                       j, len(state.working))
        state.refactored = True
        state.factor = _build_factor(ldp, state.working, state.factor.zeta)
        state.factor.add_row(rows @ row, row @ row)
    state.working.add(j, side)
    logger.debug("iteration %d: added %d (%s)", state.k, j, side.value)


def _initial_state(ldp: LDProblem, settings: Settings, warm: Optional[WarmStart]) -> Tuple[SolverState, bool]:
    zeta = settings.zeta_singular
    lam = np.zeros(ldp.m)
    nu = np.zeros(ldp.me)
    if warm is None:
        working = WorkingSet(ldp.m, ldp.me)
        return SolverState(lam, nu, working, _build_factor(ldp, working, zeta)), True

    warm_lam = np.asarray(warm.lam, dtype=float).reshape(-1)
    if warm_lam.shape[0] != ldp.m:
        raise WarmStartError(f"warm lambda has length {warm_lam.shape[0]}, expected {ldp.m}")
    ws = warm.working_set
    for i in ws.order:
        side = ws.side[i]
        if side is Side.LOWER and not ldp.two_sided:
            raise WarmStartError(f"constraint {i} tagged lower on a one-sided problem")
        if (side is Side.UPPER and warm_lam[i] < 0) or (side is Side.LOWER and warm_lam[i] > 0):
            raise WarmStartError(f"warm lambda[{i}] = {warm_lam[i]:g} has the wrong sign for {side.value}")

    factor = warm.factor
    if factor is not None and factor.order == ldp.me + len(ws) and not factor.is_singular:
        working = ws.copy()
        lam[working.order] = warm_lam[working.order]
        return SolverState(lam, nu, working, factor.copy()), False

    working = WorkingSet(ldp.m, ldp.me)
    factor = _build_factor(ldp, working, zeta)
    for i in ws.order:
        if factor.is_singular:
            logger.warning("equality rows are linearly dependent; dropping warm working set")
            break
        row = ldp.M[i]
        rows = _factor_rows(ldp, working)
        try:
            factor.add_row(rows @ row, row @ row)
        except NegativePivot:
            logger.warning("warm constraint %d dropped: negative pivot", i)
            continue
        if factor.is_singular:
            logger.warning("warm constraint %d dropped: linearly dependent", i)
            factor.remove_row(factor.order - 1)
            continue
        working.add(i, ws.side[i])
        lam[i] = warm_lam[i]
    return SolverState(lam, nu, working, factor), True


def _finish(
    state: SolverState, ldp: LDProblem, status: SolveStatus, rebuilt: bool,
    x: Optional[np.ndarray] = None, **extra,
) -> SolveResult:
    order = state.working.order
    if x is None:
        x = recover_primal(ldp, state.lam[order], state.nu, order)
    logger.info("finished with %s after %d iterations (|W|=%d)", status.value, state.k, len(order))
    return SolveResult(
        x=x,
        lam=state.lam.copy(),
        nu=state.nu.copy(),
        working_set=state.working.copy(),
        status=status,
        iterations=state.k,
        lower_bounds=list(state.lower_bounds),
        dual_objective=dual_objective(ldp, state.lam, state.nu),
        factor=state.factor,
        factor_rebuilt=rebuilt,
        **extra,
    )


def _restore_best(state: SolverState, ldp: LDProblem) -> dict:
    best = state.best
    state.lam = best["lam"]
    state.nu = best["nu"]
    state.working = best["working"]
    diagnostics = {
        "u_norm_sq_best": best["u_norm_sq"],
        "primal_violation": best["primal_violation"],
        "iteration_of_best": best["iteration"],
    }
    if ldp.primal is not None:
        order = state.working.order
        x = recover_primal(ldp, state.lam[order], state.nu, order)
        diagnostics["kkt"] = kkt_residual(ldp.primal, x, state.lam, state.nu).model_dump()
    return diagnostics


# ===== PRIMAL CHECK =====

def _member_bounds(qp: QProblem, working: WorkingSet) -> np.ndarray:
    idx = np.asarray(working.order, dtype=int)
    bounds = qp.bu[idx].copy()
    if qp.two_sided and idx.size:
        low = working.signs() < 0
        bounds[low] = qp.bl[idx[low]]
    return bounds


def polish(qp: QProblem, working: WorkingSet) -> Optional[Tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """(x, lam on W, nu) from the KKT system of ``qp`` with W and the equalities held active.

    Returns None when the system is singular or a multiplier comes out with
    the wrong sign for its side; slightly wrong-signed ones are set to zero.
    """
    order = working.order
    n, me = qp.n, qp.me
    rows = np.vstack([qp.G, qp.A[order]])
    k = rows.shape[0]
    K = np.block([[qp.H, rows.T], [rows, np.zeros((k, k))]])
    rhs = np.concatenate([-qp.f, qp.h, _member_bounds(qp, working)])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        try:
            sol = dense_solve(K, rhs, assume_a="sym")
        except LinAlgError:
            return None
    if not np.all(np.isfinite(sol)):
        return None

    x, nu, lam_w = sol[:n], sol[n : n + me], sol[n + me :].copy()
    if lam_w.size:
        wrong = -working.signs() * lam_w
        if wrong.max() > POLISH_SIGN_TOL * (1.0 + np.abs(lam_w).max()):
            return None
        lam_w[wrong > 0] = 0.0
    return x, lam_w, nu


def _most_violated_outside(qp: QProblem, working: WorkingSet, x: np.ndarray, eps: float):
    Ax = qp.A @ x
    over = Ax - qp.bu
    under = qp.bl - Ax if qp.two_sided else np.full(qp.m, -np.inf)
    worst = np.maximum(over, under)
    worst[list(working.side)] = -np.inf
    if qp.m == 0 or not worst.max() > eps:
        return None
    j = int(np.argmax(worst))
    return j, (Side.UPPER if over[j] >= under[j] else Side.LOWER)


def _confirm_optimal(
    state: SolverState, ldp: LDProblem, settings: Settings, rebuilt: bool
) -> Optional[SolveResult]:
    """Accept a dual-optimal iterate only if the recovered x meets eps_primal on the primal data.

    Falls back to polishing x on the working set, then to adding the most
    violated constraint once (None is returned and the loop continues).
    """
    qp = ldp.primal
    order = state.working.order
    x = recover_primal(ldp, state.lam[order], state.nu, order)
    if qp is None:
        return _finish(state, ldp, SolveStatus.OPTIMAL, rebuilt, x=x)
    eps = settings.eps_primal
    violation = qp.primal_violation(x)
    if violation <= eps:
        return _finish(state, ldp, SolveStatus.OPTIMAL, rebuilt, x=x)

    logger.debug("recovered x violates the constraints by %.3e; polishing on |W|=%d", violation, len(order))
    polished = polish(qp, state.working)
    if polished is not None:
        x_p, lam_w, nu = polished
        violation_p = qp.primal_violation(x_p)
        if violation_p <= eps:
            state.lam[order] = lam_w
            state.nu = nu
            return _finish(state, ldp, SolveStatus.OPTIMAL, rebuilt, x=x_p,
                           diagnostics={"polished": True, "primal_violation_before": violation})
        if violation_p < violation:
            x, violation = x_p, violation_p

    missing = _most_violated_outside(qp, state.working, x, eps)
    if missing is not None and missing[0] not in state.reentered:
        state.reentered.add(missing[0])
        logger.debug("iteration %d: re-entering %d violated on the primal data", state.k, missing[0])
        _add_constraint(state, ldp, *missing)
        return None

    logger.warning("recovered x violates the constraints by %.3e", violation)
    return _finish(state, ldp, SolveStatus.NUMERICAL_FAILURE, rebuilt, x=x,
                   diagnostics={"error": "recovered point violates the constraints",
                                "primal_violation": violation})


def solve(ldp: LDProblem, settings: Optional[Settings] = None, warm: Optional[WarmStart] = None) -> SolveResult:
    """Solve the transformed problem, optionally warm-started from (lambda, W)."""
    settings = settings or Settings()
    try:
        state, rebuilt = _initial_state(ldp, settings, warm)
    except FactorError as exc:
        logger.error("initial factorization failed: %s", exc)
        working = WorkingSet(ldp.m, ldp.me)
        state = SolverState(np.zeros(ldp.m), np.zeros(ldp.me), working, LDLFactor(zeta=settings.zeta_singular))
        return _finish(state, ldp, SolveStatus.NUMERICAL_FAILURE, True, diagnostics={"error": str(exc)})

    me = ldp.me
    while state.k < settings.iter_max:
        state.k += 1
        try:
            if state.factor.is_singular:
                try:
                    step = singular_direction(state, ldp)
                except DegenerateDirection:
                    pos = state.factor.zero_pivot
                    if pos < me:
                        return _finish(state, ldp, SolveStatus.NUMERICAL_FAILURE, rebuilt,
                                       diagnostics={"error": "linearly dependent equality constraints"})
                    i = state.working.order[pos - me]
                    logger.debug("iteration %d: degenerate direction, dropping %d", state.k, i)
                    state.lam[i] = 0.0
                    state.factor.remove_row(state.working.remove(i))
                    continue
                if not step.blocking:
                    lam_cert = np.zeros(ldp.m)
                    lam_cert[state.working.order] = step.p_lam
                    return _finish(state, ldp, SolveStatus.PRIMAL_INFEASIBLE, rebuilt,
                                   certificate=Certificate(lam_cert, step.p_nu.copy()))
                fix_component(state, step.blocking, step.p_lam, step.p_nu)
                continue

            lam_w, nu_star = compute_lambda_star(state, ldp)
            blocking = blocking_set(lam_w, state.working)
            if blocking:
                p_lam = lam_w - state.lam[state.working.order]
                fix_component(state, blocking, p_lam, nu_star - state.nu)
                continue

            u = _u(ldp, state.working, lam_w, nu_star)
            u_norm_sq = float(u @ u)
            if not check_progress(state, u_norm_sq, settings.cycle_tol):
                logger.warning("no progress in ||u||^2 (%.17g after %.17g); stopping",
                               u_norm_sq, state.u_norm_sq_last)
                diagnostics = _restore_best(state, ldp)
                diagnostics["u_norm_sq_rejected"] = u_norm_sq
                result = _finish(state, ldp, SolveStatus.CYCLE_DETECTED, rebuilt, diagnostics=diagnostics)
                # the live factor belongs to the rejected working set
                result.factor = None
                return result

            state.lam[state.working.order] = lam_w
            state.nu = nu_star
            state.u_norm_sq_last = u_norm_sq
            state.lower_bounds.append(lower_bound(u, ldp.v))

            slack = compute_primal_slack(ldp, state.working, u)
            violation = select_violation(slack, settings.eps_primal, settings.violation_rule)
            worst = min(np.nanmin(slack.upper, initial=np.inf),
                        np.inf if slack.lower is None else np.nanmin(slack.lower, initial=np.inf))
            state.best = {
                "lam": state.lam.copy(),
                "nu": state.nu.copy(),
                "working": state.working.copy(),
                "u_norm_sq": u_norm_sq,
                "primal_violation": max(0.0, -float(worst)),
                "iteration": state.k,
            }
            if violation is None:
                result = _confirm_optimal(state, ldp, settings, rebuilt)
                if result is not None:
                    return result
                continue
            _add_constraint(state, ldp, *violation)
        except FactorError as exc:
            logger.error("factorization failed at iteration %d: %s", state.k, exc)
            return _finish(state, ldp, SolveStatus.NUMERICAL_FAILURE, rebuilt,
                           diagnostics={"error": str(exc)})

    return _finish(state, ldp, SolveStatus.ITERATION_LIMIT, rebuilt)


def solve_qp(qp: QProblem, settings: Optional[Settings] = None, warm: Optional[WarmStart] = None) -> SolveResult:
    return solve(transform(qp), settings, warm)
