from datetime import datetime

from sqlalchemy import Boolean, Column, DateTime, Float, ForeignKey, Integer, String, Enum as SQLEnum
from sqlalchemy.orm import relationship

from daqp.database import Base
from daqp.solver import SolveStatus


class BenchRun(Base):
    __tablename__ = "bench_runs"

    id = Column(Integer, primary_key=True, index=True)
    n = Column(Integer)
    m = Column(Integer)
    me = Column(Integer, default=0)
    count = Column(Integer)
    repeat = Column(Integer, default=5)
    seed = Column(Integer)
    two_sided = Column(Boolean, default=False)
    kappas = Column(String)  # comma-separated
    variants = Column(String)  # comma-separated
    created_at = Column(DateTime, default=datetime.utcnow)

    rows = relationship("BenchRow", back_populates="run", cascade="all, delete-orphan")


class BenchRow(Base):
    __tablename__ = "bench_rows"

    id = Column(Integer, primary_key=True, index=True)
    run_id = Column(Integer, ForeignKey("bench_runs.id"), index=True)
    variant = Column(String)
    kappa = Column(Float)
    instance = Column(Integer)
    status = Column(SQLEnum(SolveStatus))
    iterations = Column(Integer)
    solve_time = Column(Float)
    # NaN is stored as NULL
    x_error = Column(Float, nullable=True)
    stationarity = Column(Float, nullable=True)
    primal_ineq = Column(Float, nullable=True)
    dual = Column(Float, nullable=True)
    complementarity = Column(Float, nullable=True)
    equality = Column(Float, nullable=True)
    lower_bound_gap = Column(Float, nullable=True)

    run = relationship("BenchRun", back_populates="rows")


class SequenceRun(Base):
    __tablename__ = "sequence_runs"

    id = Column(Integer, primary_key=True, index=True)
    steps = Column(Integer)
    perturb_scale = Column(Float)
    seed = Column(Integer)
    created_at = Column(DateTime, default=datetime.utcnow)

    rows = relationship("SequenceRow", back_populates="run", cascade="all, delete-orphan")


class SequenceRow(Base):
    __tablename__ = "sequence_rows"

    id = Column(Integer, primary_key=True, index=True)
    run_id = Column(Integer, ForeignKey("sequence_runs.id"), index=True)
    step = Column(Integer)
    cold_status = Column(SQLEnum(SolveStatus))
    cold_iterations = Column(Integer)
    warm_status = Column(SQLEnum(SolveStatus))
    warm_iterations = Column(Integer)

    run = relationship("SequenceRun", back_populates="rows")
