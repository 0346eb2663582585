import os

os.environ.setdefault("DAQP_DATABASE_URL", "sqlite://")

import numpy as np
import pytest
from fastapi.testclient import TestClient
from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker
from sqlalchemy.pool import StaticPool

from daqp.core import QProblem
from daqp.database import Base, get_db
from daqp.main import app


@pytest.fixture
def halfspace():
    """Projection of (2, 2) onto x1 + x2 <= 1"""
    return QProblem(H=np.eye(2), f=[-2.0, -2.0], A=[[1.0, 1.0]], bu=[1.0])


@pytest.fixture
def two_constraint():
    return QProblem(H=np.eye(2), f=[-2.0, -2.0], A=[[1.0, 1.0], [1.0, 0.0]], bu=[1.0, 0.3])


@pytest.fixture
def infeasible_scalar():
    """x <= 0 and x >= 1"""
    return QProblem(H=[[1.0]], f=[0.0], A=[[1.0], [-1.0]], bu=[0.0, -1.0])


@pytest.fixture
def box_scalar():
    """-1 <= x <= 1 with the unconstrained optimum at 3"""
    return QProblem(H=[[1.0]], f=[-3.0], A=[[1.0]], bu=[1.0], bl=[-1.0])


@pytest.fixture
def client():
    engine = create_engine(
        "sqlite://", connect_args={"check_same_thread": False}, poolclass=StaticPool
    )
    TestingSession = sessionmaker(autocommit=False, autoflush=False, bind=engine)
    Base.metadata.create_all(bind=engine)

    def override_get_db():
        db = TestingSession()
        try:
            yield db
        finally:
            db.close()

    app.dependency_overrides[get_db] = override_get_db
    with TestClient(app) as c:
        yield c
    app.dependency_overrides.clear()
    Base.metadata.drop_all(bind=engine)
