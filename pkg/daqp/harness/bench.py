"""Benchmark and warm-start sequence runners with CSV output."""
import csv
import io
import logging
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel

from daqp.core import QProblem, transform, update_linear_terms
from daqp.errors import DAQPError
from daqp.harness.generator import GeneratorConfig, default_seed, generate_random, make_rng
from daqp.oracle import brute_force_solve, in_oracle_budget, kkt_residual
from daqp.prox import prox_solve
from daqp.settings import Settings
from daqp.solver import SolveResult, SolveStatus, WorkingSet, solve, solve_qp

logger = logging.getLogger(__name__)

VARIANTS = ("plain", "prox", "stacked")

BENCH_COLUMNS = [
    "variant",
    "kappa",
    "instance",
    "status",
    "iterations",
    "solve_time",
    "x_error",
    "stationarity",
    "primal_ineq",
    "dual",
    "complementarity",
    "equality",
    "lower_bound_gap",
]

SEQUENCE_COLUMNS = ["step", "cold_status", "cold_iterations", "warm_status", "warm_iterations"]

SUMMARY_COLUMNS = ["variant", "kappa", "instances", "optimal", "worst_solve_time", "worst_x_error"]


class BenchRecord(BaseModel):
    variant: str
    kappa: float
    instance: int
    status: str
    iterations: int
    solve_time: float
    x_error: float
    stationarity: float
    primal_ineq: float
    dual: float
    complementarity: float
    equality: float
    lower_bound_gap: float


class SequenceRecord(BaseModel):
    step: int
    cold_status: str
    cold_iterations: int
    warm_status: str
    warm_iterations: int


# ===== SOLVING =====

def _failure(status: SolveStatus, qp: QProblem) -> SolveResult:
    return SolveResult(
        x=np.full(qp.n, np.nan),
        lam=np.zeros(qp.m),
        nu=np.zeros(qp.me),
        working_set=WorkingSet(qp.m, qp.me),
        status=status,
        iterations=0,
        lower_bounds=[],
        dual_objective=float("nan"),
    )


def run_variant(qp: QProblem, variant: str, settings: Settings) -> SolveResult:
    """Solve with one variant; a plain solve on a non-PD Hessian is reported as a numerical failure."""
    try:
        if variant == "plain":
            return solve_qp(qp, settings)
        if variant == "prox":
            return prox_solve(qp, settings)
        if variant == "stacked":
            stacked = qp.stacked()
            result = solve_qp(stacked, settings)
            if qp.two_sided:
                m = qp.m
                result.lam = result.lam[:m] - result.lam[m:]
            return result
    except DAQPError as exc:
        logger.warning("%s variant failed: %s", variant, exc)
        return _failure(SolveStatus.NUMERICAL_FAILURE, qp)
    raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")


def reference_solution(qp: QProblem, settings: Settings) -> Optional[np.ndarray]:
    if in_oracle_budget(qp):
        try:
            return brute_force_solve(qp).x
        except DAQPError as exc:
            logger.warning("oracle failed: %s", exc)
    try:
        result = prox_solve(qp, settings.tightened())
    except DAQPError as exc:
        logger.warning("reference prox solve failed: %s", exc)
        return None
    return result.x if result.optimal else None


def _timed(qp: QProblem, variant: str, settings: Settings, repeat: int):
    times = []
    result = None
    for _ in range(max(repeat, 1)):
        start = time.perf_counter()
        result = run_variant(qp, variant, settings)
        times.append(time.perf_counter() - start)
    return result, statistics.median(times)


def _record(qp, variant, kappa, instance, result, elapsed, x_ref) -> BenchRecord:
    nan = float("nan")
    finite = bool(np.all(np.isfinite(result.x)))
    report = kkt_residual(qp, result.x, result.lam, result.nu) if finite else None
    x_error = float(np.linalg.norm(result.x - x_ref)) if (x_ref is not None and finite) else nan
    gap = qp.objective(result.x) - result.lower_bounds[-1] if (finite and result.lower_bounds) else nan
    return BenchRecord(
        variant=variant,
        kappa=kappa,
        instance=instance,
        status=result.status.value,
        iterations=result.iterations,
        solve_time=elapsed,
        x_error=x_error,
        stationarity=report.stationarity if report else nan,
        primal_ineq=report.primal_ineq if report else nan,
        dual=report.dual if report else nan,
        complementarity=report.complementarity if report else nan,
        equality=report.equality if report else nan,
        lower_bound_gap=gap,
    )


def _bench_instance(cfg: GeneratorConfig, instance: int, variants, settings, repeat) -> List[BenchRecord]:
    qp = generate_random(cfg)
    x_ref = reference_solution(qp, settings)
    records = []
    for variant in variants:
        result, elapsed = _timed(qp, variant, settings, repeat)
        records.append(_record(qp, variant, cfg.kappa, instance, result, elapsed, x_ref))
    return records


def run_benchmark(
    kappas: Sequence[float],
    count: int,
    n: int,
    m: int,
    me: int = 0,
    variants: Iterable[str] = ("plain", "prox"),
    repeat: int = 5,
    seed: Optional[int] = None,
    two_sided: bool = False,
    settings: Optional[Settings] = None,
    workers: int = 1,
) -> List[BenchRecord]:
    """One record per (variant, instance) for every kappa; timing is the median over ``repeat`` runs."""
    settings = settings or Settings()
    variants = list(variants)
    for variant in variants:
        if variant not in VARIANTS:
            raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    base_seed = default_seed() if seed is None else seed

    jobs = []
    for k_index, kappa in enumerate(kappas):
        for instance in range(count):
            cfg = GeneratorConfig(
                n=n, m=m, me=me, kappa=kappa, two_sided=two_sided,
                seed=(base_seed + 1_000_003 * k_index + instance) % 2**64,
            )
            jobs.append((cfg, instance))

    logger.info("benchmark: %d instances x %d variants", len(jobs), len(variants))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(lambda job: _bench_instance(job[0], job[1], variants, settings, repeat), jobs))
    else:
        chunks = [_bench_instance(cfg, instance, variants, settings, repeat) for cfg, instance in jobs]
    return [record for chunk in chunks for record in chunk]


def worst_case_summary(records: Iterable[BenchRecord]) -> List[Dict]:
    groups: Dict[tuple, List[BenchRecord]] = {}
    for record in records:
        groups.setdefault((record.variant, record.kappa), []).append(record)
    summary = []
    for (variant, kappa), rows in sorted(groups.items(), key=lambda item: (item[0][1], item[0][0])):
        errors = [r.x_error for r in rows if not np.isnan(r.x_error)]
        summary.append({
            "variant": variant,
            "kappa": kappa,
            "instances": len(rows),
            "optimal": sum(r.status == SolveStatus.OPTIMAL.value for r in rows),
            "worst_solve_time": max(r.solve_time for r in rows),
            "worst_x_error": max(errors) if errors else float("nan"),
        })
    return summary


# ===== WARM-START SEQUENCES =====

def run_sequence(
    base: QProblem,
    steps: int,
    perturb_scale: float,
    seed: Optional[int] = None,
    settings: Optional[Settings] = None,
) -> List[SequenceRecord]:
    """Random walk in (f, b); each step is solved cold and warm-started from the previous step."""
    settings = settings or Settings()
    rng = make_rng(default_seed() if seed is None else seed)
    ldp0 = transform(base)
    f, bu, bl = base.f.copy(), base.bu.copy(), None if base.bl is None else base.bl.copy()
    f_scale = 1.0 + np.abs(base.f)
    b_scale = 1.0 + np.abs(np.where(np.isfinite(base.bu), base.bu, 0.0))

    records = []
    warm = None
    for step in range(steps):
        if step:
            f = f + perturb_scale * f_scale * rng.standard_normal(base.n)
            shift = perturb_scale * b_scale * rng.standard_normal(base.m)
            bu = bu + shift
            if bl is not None:
                bl = bl + shift
        ldp = update_linear_terms(ldp0, f, bu, bl)
        cold = solve(ldp, settings)
        hot = cold if warm is None else solve(ldp, settings, warm)
        if hot.optimal:
            warm = hot.warm_start()
        records.append(SequenceRecord(
            step=step,
            cold_status=cold.status.value,
            cold_iterations=cold.iterations,
            warm_status=hot.status.value,
            warm_iterations=hot.iterations,
        ))
    return records


# ===== CSV =====

def to_csv(rows: Iterable, columns: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row.model_dump() if isinstance(row, BaseModel) else row)
    return buf.getvalue()


def records_to_csv(records: Iterable[BenchRecord]) -> str:
    return to_csv(records, BENCH_COLUMNS)


def sequence_to_csv(records: Iterable[SequenceRecord]) -> str:
    return to_csv(records, SEQUENCE_COLUMNS)


def summary_to_csv(summary: Iterable[Dict]) -> str:
    return to_csv(summary, SUMMARY_COLUMNS)
