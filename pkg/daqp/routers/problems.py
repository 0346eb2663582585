import math
from typing import List, Optional

from fastapi import APIRouter, HTTPException
from pydantic import BaseModel

from daqp.core import QProblem
from daqp.errors import DAQPError
from daqp.harness.fileformat import parse_problem, write_problem
from daqp.harness.generator import GeneratorConfig, generate_random

router = APIRouter(prefix="/problems", tags=["problems"])


def finite_or_none(values) -> List[Optional[float]]:
    """JSON has no inf/nan: non-finite entries travel as null"""
    return [float(v) if math.isfinite(v) else None for v in values]


def _bound(values, missing: float) -> List[float]:
    return [missing if v is None else v for v in values]


class ProblemIn(BaseModel):
    H: List[List[float]]
    f: List[float]
    A: List[List[float]] = []
    bu: List[Optional[float]] = []  # null = +inf
    bl: Optional[List[Optional[float]]] = None  # null entry = -inf
    G: List[List[float]] = []
    h: List[float] = []

    def to_problem(self) -> QProblem:
        return QProblem(
            H=self.H,
            f=self.f,
            A=self.A,
            bu=_bound(self.bu, math.inf),
            bl=None if self.bl is None else _bound(self.bl, -math.inf),
            G=self.G or None,
            h=self.h or None,
        )

    @classmethod
    def from_problem(cls, qp: QProblem) -> "ProblemIn":
        return cls(
            H=qp.H.tolist(),
            f=qp.f.tolist(),
            A=qp.A.tolist(),
            bu=finite_or_none(qp.bu),
            bl=None if qp.bl is None else finite_or_none(qp.bl),
            G=qp.G.tolist(),
            h=qp.h.tolist(),
        )


class ProblemText(BaseModel):
    text: str


class GeneratedProblem(BaseModel):
    problem: ProblemIn
    text: str


def load_problem(problem: ProblemIn) -> QProblem:
    try:
        return problem.to_problem()
    except DAQPError as exc:
        raise HTTPException(status_code=400, detail=str(exc))


@router.post("/generate", response_model=GeneratedProblem)
def generate_problem(cfg: GeneratorConfig):
    """Seeded random problem as JSON and as problem-file text"""
    qp = generate_random(cfg)
    return GeneratedProblem(problem=ProblemIn.from_problem(qp), text=write_problem(qp))


@router.post("/parse", response_model=ProblemIn)
def parse_problem_text(body: ProblemText):
    try:
        qp = parse_problem(body.text)
    except DAQPError as exc:
        raise HTTPException(status_code=400, detail=f"{type(exc).__name__}: {exc}")
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=f"Invalid number: {exc}")
    return ProblemIn.from_problem(qp)
