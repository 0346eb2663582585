import math
from typing import List, Optional

from fastapi import APIRouter, Depends, HTTPException
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel, Field
from sqlalchemy.orm import Session

from daqp.database import get_db
from daqp.errors import DAQPError
from daqp.harness.bench import (
    BENCH_COLUMNS,
    VARIANTS,
    BenchRecord,
    SequenceRecord,
    records_to_csv,
    run_benchmark,
    run_sequence,
    sequence_to_csv,
    worst_case_summary,
)
from daqp.harness.generator import default_seed
from daqp.models import BenchRow, BenchRun, SequenceRow, SequenceRun
from daqp.routers.problems import ProblemIn, load_problem
from daqp.settings import Settings
from daqp.solver import SolveStatus

router = APIRouter(prefix="/bench", tags=["bench"])

METRIC_COLUMNS = [c for c in BENCH_COLUMNS if c not in ("variant", "kappa", "instance", "status", "iterations")]


class BenchCreate(BaseModel):
    kappas: List[float] = [1e2]
    count: int = Field(10, ge=0, le=100)
    n: int = Field(6, ge=1, le=50)
    m: int = Field(10, ge=0, le=200)
    me: int = Field(0, ge=0)
    variants: List[str] = ["plain", "prox"]
    repeat: int = Field(5, ge=1, le=20)
    seed: Optional[int] = None
    two_sided: bool = False
    settings: Settings = Settings()


class BenchRunResponse(BaseModel):
    id: int
    n: int
    m: int
    me: int
    count: int
    repeat: int
    seed: int
    two_sided: bool
    kappas: str
    variants: str
    rows: int
    summary: List[dict] = []


class SequenceCreate(BaseModel):
    problem: ProblemIn
    steps: int = Field(50, ge=1, le=1000)
    perturb_scale: float = Field(0.01, ge=0)
    seed: Optional[int] = None
    settings: Settings = Settings()


def _nullable(value: float) -> Optional[float]:
    return value if math.isfinite(value) else None


def _to_record(row: BenchRow) -> BenchRecord:
    metrics = {c: (math.nan if getattr(row, c) is None else getattr(row, c)) for c in METRIC_COLUMNS}
    return BenchRecord(
        variant=row.variant,
        kappa=row.kappa,
        instance=row.instance,
        status=row.status.value,
        iterations=row.iterations,
        **metrics,
    )


def _summary(records: List[BenchRecord]) -> List[dict]:
    return [
        {k: (_nullable(v) if isinstance(v, float) else v) for k, v in entry.items()}
        for entry in worst_case_summary(records)
    ]


def _run_response(run: BenchRun, summary: List[dict]) -> BenchRunResponse:
    return BenchRunResponse(
        id=run.id,
        n=run.n,
        m=run.m,
        me=run.me,
        count=run.count,
        repeat=run.repeat,
        seed=run.seed,
        two_sided=run.two_sided,
        kappas=run.kappas,
        variants=run.variants,
        rows=len(run.rows),
        summary=summary,
    )


def _get_run(run_id: int, db: Session) -> BenchRun:
    run = db.query(BenchRun).filter(BenchRun.id == run_id).first()
    if not run:
        raise HTTPException(status_code=404, detail="Benchmark run not found")
    return run


# ===== BENCHMARK RUNS =====

@router.post("/", response_model=BenchRunResponse)
def create_bench_run(request: BenchCreate, db: Session = Depends(get_db)):
    """Run a benchmark and store one row per (variant, instance)"""
    bad = [v for v in request.variants if v not in VARIANTS]
    if bad:
        raise HTTPException(status_code=400, detail=f"Invalid variant. Must be one of: {list(VARIANTS)}")
    seed = default_seed() if request.seed is None else request.seed
    try:
        records = run_benchmark(
            kappas=request.kappas,
            count=request.count,
            n=request.n,
            m=request.m,
            me=request.me,
            variants=request.variants,
            repeat=request.repeat,
            seed=seed,
            two_sided=request.two_sided,
            settings=request.settings,
        )
    except (DAQPError, ValueError) as exc:
        raise HTTPException(status_code=400, detail=str(exc))

    run = BenchRun(
        n=request.n,
        m=request.m,
        me=request.me,
        count=request.count,
        repeat=request.repeat,
        seed=seed,
        two_sided=request.two_sided,
        kappas=",".join(f"{k:g}" for k in request.kappas),
        variants=",".join(request.variants),
    )
    for record in records:
        data = record.model_dump()
        for c in METRIC_COLUMNS:
            data[c] = _nullable(data[c])
        data["status"] = SolveStatus(data["status"])
        run.rows.append(BenchRow(**data))
    db.add(run)
    db.commit()
    db.refresh(run)
    return _run_response(run, _summary(records))


@router.get("/", response_model=List[BenchRunResponse])
def list_bench_runs(limit: int = 50, db: Session = Depends(get_db)):
    runs = db.query(BenchRun).order_by(BenchRun.created_at.desc(), BenchRun.id.desc()).limit(limit).all()
    return [_run_response(run, []) for run in runs]


@router.get("/{run_id}", response_model=BenchRunResponse)
def get_bench_run(run_id: int, db: Session = Depends(get_db)):
    run = _get_run(run_id, db)
    return _run_response(run, _summary([_to_record(r) for r in run.rows]))


@router.get("/{run_id}/csv", response_class=PlainTextResponse)
def get_bench_csv(run_id: int, db: Session = Depends(get_db)):
    run = _get_run(run_id, db)
    rows = sorted(run.rows, key=lambda r: r.id)
    return PlainTextResponse(records_to_csv([_to_record(r) for r in rows]), media_type="text/csv")


@router.get("/{run_id}/summary")
def get_bench_summary(run_id: int, db: Session = Depends(get_db)):
    """Worst-case solve time and solution error per (variant, kappa)"""
    run = _get_run(run_id, db)
    return _summary([_to_record(r) for r in run.rows])


# ===== WARM-START SEQUENCES =====

@router.post("/sequence")
def create_sequence_run(request: SequenceCreate, db: Session = Depends(get_db)):
    """Cold and warm iteration counts over a random walk in (f, b)"""
    qp = load_problem(request.problem)
    seed = default_seed() if request.seed is None else request.seed
    try:
        records = run_sequence(qp, request.steps, request.perturb_scale, seed=seed, settings=request.settings)
    except DAQPError as exc:
        raise HTTPException(status_code=400, detail=str(exc))

    run = SequenceRun(steps=request.steps, perturb_scale=request.perturb_scale, seed=seed)
    for record in records:
        run.rows.append(SequenceRow(
            step=record.step,
            cold_status=SolveStatus(record.cold_status),
            cold_iterations=record.cold_iterations,
            warm_status=SolveStatus(record.warm_status),
            warm_iterations=record.warm_iterations,
        ))
    db.add(run)
    db.commit()
    db.refresh(run)
    return _sequence_response(run)


def _sequence_records(run: SequenceRun) -> List[SequenceRecord]:
    return [
        SequenceRecord(
            step=row.step,
            cold_status=row.cold_status.value,
            cold_iterations=row.cold_iterations,
            warm_status=row.warm_status.value,
            warm_iterations=row.warm_iterations,
        )
        for row in sorted(run.rows, key=lambda r: r.step)
    ]


def _sequence_response(run: SequenceRun) -> dict:
    records = _sequence_records(run)
    return {
        "id": run.id,
        "perturb_scale": run.perturb_scale,
        "seed": run.seed,
        "steps": [record.model_dump() for record in records],
        "mean_cold_iterations": sum(r.cold_iterations for r in records) / len(records),
        "mean_warm_iterations": sum(r.warm_iterations for r in records) / len(records),
    }


def _get_sequence_run(run_id: int, db: Session) -> SequenceRun:
    run = db.query(SequenceRun).filter(SequenceRun.id == run_id).first()
    if not run:
        raise HTTPException(status_code=404, detail="Sequence run not found")
    return run


@router.get("/sequence/{run_id}")
def get_sequence_run(run_id: int, db: Session = Depends(get_db)):
    return _sequence_response(_get_sequence_run(run_id, db))


@router.get("/sequence/{run_id}/csv", response_class=PlainTextResponse)
def get_sequence_csv(run_id: int, db: Session = Depends(get_db)):
    run = _get_sequence_run(run_id, db)
    return PlainTextResponse(sequence_to_csv(_sequence_records(run)), media_type="text/csv")
