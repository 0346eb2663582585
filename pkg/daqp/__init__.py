"""Dense dual active-set solver for convex quadratic programs."""
from daqp.core import LDProblem, QProblem, recover_primal, transform, update_linear_terms
from daqp.errors import DAQPError
from daqp.factor import LDLFactor, ldl_fresh
from daqp.prox import prox_solve
from daqp.settings import Settings
from daqp.solver import Side, SolveResult, SolveStatus, WarmStart, WorkingSet, solve, solve_qp

__all__ = [
    "DAQPError",
    "LDLFactor",
    "LDProblem",
    "QProblem",
    "Settings",
    "Side",
    "SolveResult",
    "SolveStatus",
    "WarmStart",
    "WorkingSet",
    "ldl_fresh",
    "prox_solve",
    "recover_primal",
    "solve",
    "solve_qp",
    "transform",
    "update_linear_terms",
]
