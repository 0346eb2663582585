"""Seeded random problems with a prescribed condition number of H.

Randomness comes from numpy's PCG64 bit generator (``numpy.random.Generator``),
whose algorithm and stream are documented and stable for a given seed.
"""
import logging
import os

import numpy as np
from numpy.random import PCG64, Generator
from pydantic import BaseModel, Field

from daqp.core import QProblem

logger = logging.getLogger(__name__)

SEED_ENV = "DAQP_SEED"


def default_seed() -> int:
    return int(os.environ.get(SEED_ENV, "0"))


class GeneratorConfig(BaseModel):
    n: int = Field(..., ge=1)
    m: int = Field(0, ge=0)
    me: int = Field(0, ge=0)
    kappa: float = Field(1.0, ge=1.0)
    seed: int = Field(default_factory=default_seed, ge=0, lt=2**64)
    two_sided: bool = False
    feasible: bool = True


def make_rng(seed: int) -> Generator:
    return Generator(PCG64(seed))


def conditioned_hessian(rng: Generator, n: int, kappa: float) -> np.ndarray:
    """Q diag(lambda) Q' with eigenvalues log-spaced from 1 to kappa."""
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    eig = np.logspace(0.0, np.log10(kappa), n) if n > 1 else np.ones(1)
    H = (Q * eig) @ Q.T
    return 0.5 * (H + H.T)


def generate_random(cfg: GeneratorConfig) -> QProblem:
    rng = make_rng(cfg.seed)
    n, m, me = cfg.n, cfg.m, cfg.me

    H = conditioned_hessian(rng, n, cfg.kappa)
    f = rng.standard_normal(n) * np.sqrt(cfg.kappa)
    A = rng.standard_normal((m, n))
    G = rng.standard_normal((me, n))
    x0 = rng.standard_normal(n)
    Ax0 = A @ x0
    h = G @ x0

    if cfg.two_sided:
        bu = Ax0 + np.abs(rng.standard_normal(m))
        bl = Ax0 - np.abs(rng.standard_normal(m))
    else:
        bu = Ax0 + np.abs(rng.standard_normal(m))
        bl = None

    if not cfg.feasible:
        a = rng.standard_normal(n)
        beta = float(a @ x0 + abs(rng.standard_normal()))
        if cfg.two_sided:
            # a'x <= beta and a'x >= beta + 1, each row satisfiable on its own
            A = np.vstack([A, a, a])
            bu = np.concatenate([bu, [beta, beta + 11.0]])
            bl = np.concatenate([bl, [beta - 10.0, beta + 1.0]])
        else:
            A = np.vstack([A, a, -a])
            bu = np.concatenate([bu, [beta, -beta - 1.0]])

    logger.debug("generated n=%d m=%d me=%d kappa=%g seed=%d", n, A.shape[0], me, cfg.kappa, cfg.seed)
    return QProblem(H=H, f=f, A=A, bu=bu, bl=bl, G=G, h=h)
