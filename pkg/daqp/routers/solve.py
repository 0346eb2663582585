from typing import List, Optional

from fastapi import APIRouter, HTTPException
from pydantic import BaseModel

from daqp.errors import DAQPError
from daqp.prox import prox_solve
from daqp.routers.problems import ProblemIn, finite_or_none, load_problem
from daqp.settings import Settings
from daqp.solver import Side, WarmStart, WorkingSet, solve_qp

router = APIRouter(prefix="/solve", tags=["solve"])


class WorkingMember(BaseModel):
    index: int
    side: Side


class WarmStartIn(BaseModel):
    lam: List[float]
    working_set: List[WorkingMember] = []


class SolveRequest(BaseModel):
    problem: ProblemIn
    settings: Settings = Settings()
    prox: bool = False
    warm: Optional[WarmStartIn] = None


class SolveResponse(BaseModel):
    status: str
    iterations: int
    outer_iterations: int
    x: List[Optional[float]]
    lam: List[float]
    nu: List[float]
    working_set: List[WorkingMember]
    lower_bounds: List[float]
    dual_objective: Optional[float]
    certificate: Optional[dict] = None


@router.post("/", response_model=SolveResponse)
def solve_problem(request: SolveRequest):
    """Solve a QP with the plain or proximal-point method"""
    qp = load_problem(request.problem)
    try:
        if request.prox:
            if request.warm:
                raise HTTPException(status_code=400, detail="Warm start is not supported with prox")
            result = prox_solve(qp, request.settings)
        else:
            warm = None
            if request.warm:
                ws = WorkingSet(qp.m, qp.me)
                for member in request.warm.working_set:
                    ws.add(member.index, member.side)
                warm = WarmStart(request.warm.lam, ws)
            result = solve_qp(qp, request.settings, warm)
    except (DAQPError, ValueError) as exc:
        raise HTTPException(status_code=400, detail=str(exc))

    certificate = None
    if result.certificate is not None:
        certificate = {"lam": result.certificate.lam.tolist(), "nu": result.certificate.nu.tolist()}

    ws = result.working_set
    dual = finite_or_none([result.dual_objective])[0]
    return SolveResponse(
        status=result.status.value,
        iterations=result.iterations,
        outer_iterations=result.outer_iterations,
        x=finite_or_none(result.x),
        lam=result.lam.tolist(),
        nu=result.nu.tolist(),
        working_set=[WorkingMember(index=i, side=ws.side[i]) for i in ws.order],
        lower_bounds=result.lower_bounds,
        dual_objective=dual,
        certificate=certificate,
    )
