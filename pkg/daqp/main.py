import logging
from contextlib import asynccontextmanager

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from daqp.database import Base, engine
from daqp.routers import bench, check, problems, solve

logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    # Startup: create benchmark tables
    Base.metadata.create_all(bind=engine)
    logger.info("benchmark store ready at %s", engine.url)
    yield


app = FastAPI(
    title="DAQP API",
    description="Dense dual active-set QP solver - solve, check, generate and benchmark",
    version="1.0.0",
    lifespan=lifespan,
)

# CORS
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# Register routers
app.include_router(solve.router)
app.include_router(check.router)
app.include_router(problems.router)
app.include_router(bench.router)


@app.get("/health")
def health_check():
    return {"status": "healthy"}


@app.get("/")
def root():
    return {
        "name": "DAQP",
        "version": "1.0.0",
        "docs": "/docs"
    }
