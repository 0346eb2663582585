"""Problem containers and the primal-to-dual data transformation.

For H = R^T R the dual data are M = A R^-1, v = R^-T f and d = b + M v
(two-sided: d_upper = b_upper + M v, d_lower = -(b_lower + M v)); equality
rows get N = G R^-1 and e = h + N v.
"""
import logging
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import LinAlgError, cholesky, solve_triangular

from daqp.errors import DimensionMismatch, NotPositiveDefinite, NotSymmetric, TriviallyInfeasible

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-12
PIVOT_TOL = 1e-12


def _as_matrix(value, rows: Optional[int], cols: int, name: str) -> np.ndarray:
    if value is None:
        return np.zeros((0, cols))
    arr = np.asarray(value, dtype=float)
    if arr.size == 0:
        arr = arr.reshape(0, cols)
    if arr.ndim == 1 and cols and arr.shape[0] == cols:
        arr = arr.reshape(1, cols)
    if arr.ndim != 2 or arr.shape[1] != cols or (rows is not None and arr.shape[0] != rows):
        raise DimensionMismatch(f"{name} has shape {arr.shape}, expected ({rows}, {cols})")
    return arr


def _as_vector(value, length: int, name: str) -> np.ndarray:
    if value is None:
        value = np.zeros(length)
    arr = np.asarray(value, dtype=float).reshape(-1)
    if arr.shape[0] != length:
        raise DimensionMismatch(f"{name} has length {arr.shape[0]}, expected {length}")
    return arr


@dataclass(frozen=True, eq=False)
class QProblem:
    """minimize 1/2 x'Hx + f'x  s.t.  A x <= bu  (or bl <= A x <= bu),  G x = h"""

    H: np.ndarray
    f: np.ndarray
    A: np.ndarray
    bu: np.ndarray
    bl: Optional[np.ndarray] = None
    G: Optional[np.ndarray] = None
    h: Optional[np.ndarray] = None

    def __post_init__(self):
        H = np.asarray(self.H, dtype=float)
        if H.ndim == 0:
            H = H.reshape(1, 1)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise DimensionMismatch(f"H has shape {H.shape}, expected square")
        n = H.shape[0]
        scale = max(1.0, float(np.abs(H).max(initial=0.0)))
        if np.abs(H - H.T).max(initial=0.0) > SYMMETRY_TOL * scale:
            raise NotSymmetric("H is not symmetric")

        f = _as_vector(self.f, n, "f")
        A = _as_matrix(self.A, None, n, "A")
        m = A.shape[0]
        bu = _as_vector(self.bu, m, "bu")
        bl = None if self.bl is None else _as_vector(self.bl, m, "bl")
        G = _as_matrix(self.G, None, n, "G")
        h = _as_vector(self.h, G.shape[0], "h")

        if bl is not None and np.any(bl > bu):
            rows = np.flatnonzero(bl > bu).tolist()
            raise TriviallyInfeasible(f"lower bound exceeds upper bound in rows {rows}")

        for name, value in (("H", H), ("f", f), ("A", A), ("bu", bu), ("bl", bl), ("G", G), ("h", h)):
            object.__setattr__(self, name, value)

    @property
    def n(self) -> int:
        return self.H.shape[0]

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def me(self) -> int:
        return self.G.shape[0]

    @property
    def two_sided(self) -> bool:
        return self.bl is not None

    @property
    def b(self) -> np.ndarray:
        return self.bu

    def objective(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ self.H @ x + self.f @ x)

    def primal_violation(self, x) -> float:
        """Largest violation of A x <= bu, A x >= bl and G x = h."""
        x = np.asarray(x, dtype=float)
        Ax = self.A @ x
        worst = np.max(Ax - self.bu, initial=0.0)
        if self.two_sided:
            worst = max(worst, np.max(self.bl - Ax, initial=0.0))
        eq = np.abs(self.G @ x - self.h).max(initial=0.0)
        return float(max(worst, eq))

    def stacked(self) -> "QProblem":
        """One-sided copy with rows (A; -A) and bounds (bu; -bl)."""
        if not self.two_sided:
            return self
        return QProblem(
            H=self.H,
            f=self.f,
            A=np.vstack([self.A, -self.A]),
            bu=np.concatenate([self.bu, -self.bl]),
            G=self.G,
            h=self.h,
        )

    def with_linear_terms(self, f=None, bu=None, bl=None, h=None) -> "QProblem":
        return QProblem(
            H=self.H,
            f=self.f if f is None else f,
            A=self.A,
            bu=self.bu if bu is None else bu,
            bl=self.bl if bl is None else bl,
            G=self.G,
            h=self.h if h is None else h,
        )


@dataclass(frozen=True, eq=False)
class LDProblem:
    """Dual data of a QProblem; immutable and shareable between solves."""

    R: np.ndarray
    Rinv: np.ndarray
    M: np.ndarray
    v: np.ndarray
    d_upper: np.ndarray
    d_lower: Optional[np.ndarray]
    N: np.ndarray
    e: np.ndarray
    h: np.ndarray
    epsilon_used: float = 0.0
    # primal problem actually solved (H + reg I and the current linear terms)
    primal: Optional[QProblem] = None

    @property
    def n(self) -> int:
        return self.Rinv.shape[0]

    @property
    def m(self) -> int:
        return self.M.shape[0]

    @property
    def me(self) -> int:
        return self.N.shape[0]

    @property
    def two_sided(self) -> bool:
        return self.d_lower is not None

    @property
    def d(self) -> np.ndarray:
        return self.d_upper


def cholesky_upper(H, reg: float = 0.0) -> Tuple[np.ndarray, np.ndarray]:
    """Upper Cholesky factor R of H + reg*I and its inverse."""
    H = np.asarray(H, dtype=float)
    if H.ndim == 0:
        H = H.reshape(1, 1)
    n = H.shape[0]
    Hreg = H + reg * np.eye(n)
    scale = max(1.0, float(np.abs(Hreg).max(initial=0.0)))
    try:
        R = cholesky(Hreg, lower=False)
    except LinAlgError as exc:
        raise NotPositiveDefinite(f"H + {reg:g} I is not positive definite") from exc
    pivots = np.diag(R) ** 2
    if n and pivots.min() <= PIVOT_TOL * scale:
        raise NotPositiveDefinite(
            f"H + {reg:g} I has pivot {pivots.min():.3e} below {PIVOT_TOL * scale:.1e}"
        )
    Rinv = solve_triangular(R, np.eye(n), lower=False)
    return R, Rinv


def _linear_terms(Rinv, M, N, f, bu, bl, h):
    v = Rinv.T @ f
    Mv = M @ v
    d_upper = bu + Mv
    d_lower = None if bl is None else -(bl + Mv)
    e = h + N @ v
    return v, d_upper, d_lower, e


def transform(qp: QProblem, reg: float = 0.0) -> LDProblem:
    R, Rinv = cholesky_upper(qp.H, reg)
    M = qp.A @ Rinv
    N = qp.G @ Rinv
    v, d_upper, d_lower, e = _linear_terms(Rinv, M, N, qp.f, qp.bu, qp.bl, qp.h)
    logger.debug("transformed problem n=%d m=%d me=%d reg=%g", qp.n, qp.m, qp.me, reg)
    return LDProblem(
        R=R,
        Rinv=Rinv,
        M=M,
        v=v,
        d_upper=d_upper,
        d_lower=d_lower,
        N=N,
        e=e,
        h=qp.h,
        epsilon_used=float(reg),
        primal=qp if reg == 0.0 else replace(qp, H=qp.H + reg * np.eye(qp.n)),
    )


def update_linear_terms(ldp: LDProblem, f, bu, bl=None, h=None) -> LDProblem:
    """Recompute v, d and e for new f, bounds or h; M, R^-1 and N are reused."""
    f = _as_vector(f, ldp.n, "f")
    bu = _as_vector(bu, ldp.m, "bu")
    if (bl is None) != (ldp.d_lower is None):
        raise DimensionMismatch("bound sidedness differs from the transformed problem")
    if bl is not None:
        bl = _as_vector(bl, ldp.m, "bl")
    h = ldp.h if h is None else _as_vector(h, ldp.me, "h")
    v, d_upper, d_lower, e = _linear_terms(ldp.Rinv, ldp.M, ldp.N, f, bu, bl, h)
    return LDProblem(
        R=ldp.R,
        Rinv=ldp.Rinv,
        M=ldp.M,
        v=v,
        d_upper=d_upper,
        d_lower=d_lower,
        N=ldp.N,
        e=e,
        h=h,
        epsilon_used=ldp.epsilon_used,
        primal=None if ldp.primal is None else ldp.primal.with_linear_terms(f, bu, bl, h),
    )


def recover_primal(ldp: LDProblem, lam_w, nu, indices: Sequence[int]) -> np.ndarray:
    """x = -R^-1 (M_W' lam_W + N' nu + v)."""
    indices = list(indices)
    lam_w = _as_vector(lam_w, len(indices), "lambda")
    nu = _as_vector(nu, ldp.me, "nu")
    u = ldp.M[indices].T @ lam_w + ldp.N.T @ nu
    return -ldp.Rinv @ (u + ldp.v)
