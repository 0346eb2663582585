from typing import List, Optional

from fastapi import APIRouter, HTTPException
from pydantic import BaseModel

from daqp.errors import DAQPError
from daqp.oracle import KKTReport, kkt_residual
from daqp.routers.problems import ProblemIn, load_problem

router = APIRouter(prefix="/check", tags=["check"])


class CheckRequest(BaseModel):
    problem: ProblemIn
    x: List[float]
    lam: List[float] = []
    nu: Optional[List[float]] = None


@router.post("/", response_model=KKTReport)
def check_solution(request: CheckRequest):
    """KKT residuals of a candidate primal-dual pair"""
    qp = load_problem(request.problem)
    try:
        return kkt_residual(qp, request.x, request.lam, request.nu)
    except DAQPError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
