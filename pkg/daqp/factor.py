"""Row-updatable LDL^T factorization of the Gram matrix M_k M_k^T.

The active-set loop adds or removes one row of M_k per iteration, so the
factor is never rebuilt during a solve: appending a row costs one forward
substitution and removing row i costs a positive rank-one update of the
trailing block. A zero pivot marks M_k M_k^T as singular and the factor
then yields a null vector instead of solves.
"""
import logging
from typing import Optional

import numpy as np
from scipy.linalg import solve_triangular

from daqp.errors import (
    DimensionMismatch,
    IndefiniteMatrix,
    IndexOutOfRange,
    NegativePivot,
    NotSingular,
    NotSymmetric,
    SingularBase,
    SingularFactor,
)

logger = logging.getLogger(__name__)

DEFAULT_ZETA = 1e-11
SYMMETRY_TOL = 1e-12
# relative error assumed on every stored pivot, in units of the largest one
ROUNDOFF_GROWTH = 1e-13


class LDLFactor:
    """L diag(D) L^T = M_k M_k^T for the rows currently in the working set.

    L lives in a square buffer whose leading ``order`` x ``order`` block is
    active; the rest of the buffer is kept equal to the identity so that a
    trailing row can be written in place.
    """

    def __init__(self, capacity: int = 8, zeta: float = DEFAULT_ZETA):
        capacity = max(int(capacity), 1)
        self.zeta = zeta
        self.order = 0
        self.zero_pivot: Optional[int] = None
        self.fresh_prefix = 0
        self._L = np.eye(capacity)
        self._D = np.zeros(capacity)
        self._band = np.full(capacity, zeta)
        # forward-substitution cache backing fresh_prefix
        self._fwd = np.zeros(capacity)
        self._fwd_rhs = np.zeros(capacity)

    # ===== VIEWS =====

    @property
    def L(self) -> np.ndarray:
        return self._L[: self.order, : self.order].copy()

    @property
    def D(self) -> np.ndarray:
        return self._D[: self.order].copy()

    @property
    def is_singular(self) -> bool:
        return self.zero_pivot is not None

    @property
    def capacity(self) -> int:
        return self._D.shape[0]

    def reconstruct(self) -> np.ndarray:
        L = self._L[: self.order, : self.order]
        return (L * self._D[: self.order]) @ L.T

    def copy(self) -> "LDLFactor":
        other = LDLFactor(self.capacity, self.zeta)
        other.order = self.order
        other.zero_pivot = self.zero_pivot
        other.fresh_prefix = self.fresh_prefix
        other._L = self._L.copy()
        other._D = self._D.copy()
        other._band = self._band.copy()
        other._fwd = self._fwd.copy()
        other._fwd_rhs = self._fwd_rhs.copy()
        return other

    def __repr__(self) -> str:
        return f"LDLFactor(order={self.order}, zero_pivot={self.zero_pivot})"

    # ===== UPDATES =====

    def add_row(self, cross, self_ip: float) -> None:
        """Append the row whose inner products with the factored rows are ``cross``.

        ``self_ip`` is the squared norm of the new row. A pivot within
        ``pivot_band`` of zero is stored as exactly zero and recorded in
        ``zero_pivot``; only a pivot below the band raises NegativePivot.
        """
        if self.zero_pivot is not None:
            raise SingularBase(
                f"factor has a zero pivot at {self.zero_pivot}; resolve it before adding rows"
            )
        self._append(cross, self_ip, strict=True)

    def remove_row(self, i: int) -> None:
        """Delete factored row ``i`` and restore L, D for the remaining rows."""
        o = self.order
        if not 0 <= i < o:
            raise IndexOutOfRange(f"row {i} not in factor of order {o}")

        l_i = self._L[i + 1 : o, i].copy()
        delta_i = self._D[i]

        L = self._L
        L[i : o - 1, :o] = L[i + 1 : o, :o]
        L[:o, i : o - 1] = L[:o, i + 1 : o]
        L[o - 1, :] = 0.0
        L[:, o - 1] = 0.0
        L[o - 1, o - 1] = 1.0
        self._D[i : o - 1] = self._D[i + 1 : o]
        self._D[o - 1] = 0.0
        self._band[i : o - 1] = self._band[i + 1 : o]
        self._band[o - 1] = self.zeta
        self.order = o - 1
        self.fresh_prefix = min(self.fresh_prefix, i)

        if l_i.size and delta_i > 0.0:
            self._rank_one_update(i, l_i, delta_i)
        self._refresh_zero_pivot()

    def _append(self, cross, self_ip: float, strict: bool) -> None:
        k = self.order
        cross = np.asarray(cross, dtype=float).reshape(-1)
        if cross.shape[0] != k:
            raise DimensionMismatch(f"cross products have length {cross.shape[0]}, expected {k}")
        self_ip = float(self_ip)

        if k:
            D = self._D[:k]
            y = solve_triangular(self._L[:k, :k], cross, lower=True, unit_diagonal=True)
            if strict:
                l = y / D
            else:
                # rows behind a zero pivot carry no weight in the product
                l = np.divide(y, D, out=np.zeros(k), where=D > 0.0)
            delta = self_ip - y @ l
        else:
            l = np.zeros(0)
            delta = self_ip

        tol = self.pivot_band(l, self_ip)
        if delta < -tol:
            raise NegativePivot(f"pivot {delta:.3e} at row {k} is below -{tol:.1e}")

        if k == self.capacity:
            self._grow()
        self._L[k, :k] = l
        self._L[k, k] = 1.0
        self._band[k] = tol
        if delta <= tol:
            self._D[k] = 0.0
            if self.zero_pivot is None:
                self.zero_pivot = k
        else:
            self._D[k] = delta
        self.order = k + 1

    def pivot_band(self, l: np.ndarray, self_ip: float) -> float:
        """Half-width of the band around zero in which a new pivot counts as zero.

        The pivot is self_ip - sum(l_i^2 D_i); an absolute error of
        ROUNDOFF_GROWTH * max(D) carried by every stored D_i reaches it
        amplified by ||l||^2, which is large behind a tiny earlier pivot.
        """
        band = self.zeta * max(1.0, abs(float(self_ip)))
        k = l.shape[0]
        if k:
            d_max = float(self._D[:k].max())
            band = max(band, ROUNDOFF_GROWTH * d_max * float(l @ l))
        return band

    def _rank_one_update(self, start: int, w: np.ndarray, alpha: float) -> None:
        """L2 D2 L2^T + alpha w w^T on the block starting at ``start`` (Gill et al., C1)."""
        L, D = self._L, self._D
        o = self.order
        for j in range(start, o):
            if alpha == 0.0:
                break
            p = w[j - start]
            d_old = D[j]
            d_new = d_old + alpha * p * p
            if d_new <= self._band[j]:
                D[j] = 0.0
                continue
            beta = p * alpha / d_new
            alpha = d_old * alpha / d_new
            D[j] = d_new
            tail = w[j + 1 - start :]
            tail -= p * L[j + 1 : o, j]
            L[j + 1 : o, j] += beta * tail

    def _refresh_zero_pivot(self) -> None:
        o = self.order
        small = np.flatnonzero(self._D[:o] <= self._band[:o])
        self.zero_pivot = int(small[0]) if small.size else None

    def _grow(self) -> None:
        cap = self.capacity
        new_cap = 2 * cap
        L = np.eye(new_cap)
        L[:cap, :cap] = self._L
        self._L = L
        self._D = np.concatenate([self._D, np.zeros(cap)])
        self._band = np.concatenate([self._band, np.full(cap, self.zeta)])
        self._fwd = np.concatenate([self._fwd, np.zeros(cap)])
        self._fwd_rhs = np.concatenate([self._fwd_rhs, np.zeros(cap)])

    # ===== SOLVES =====

    def solve(self, rhs, reuse: bool = True) -> np.ndarray:
        """Solve L diag(D) L^T y = rhs.

        Leading forward-substitution components whose L rows and right-hand
        side entries are unchanged since the previous solve are taken from
        the cache; every component is computed by the same expression either
        way, so the result does not depend on ``reuse``.
        """
        if self.zero_pivot is not None:
            raise SingularFactor(f"zero pivot at {self.zero_pivot}")
        o = self.order
        rhs = np.asarray(rhs, dtype=float).reshape(-1)
        if rhs.shape[0] != o:
            raise DimensionMismatch(f"rhs has length {rhs.shape[0]}, expected {o}")

        start = 0
        if reuse and self.fresh_prefix:
            start = min(self.fresh_prefix, o)
            same = self._fwd_rhs[:start] == rhs[:start]
            if not same.all():
                start = int(np.argmin(same))

        L, y = self._L, self._fwd
        for j in range(start, o):
            y[j] = rhs[j] - L[j, :j] @ y[:j]
        self._fwd_rhs[:o] = rhs
        self.fresh_prefix = o

        z = y[:o] / self._D[:o]
        return solve_triangular(L[:o, :o], z, lower=True, trans="T", unit_diagonal=True)

    def null_vector(self) -> np.ndarray:
        """p with M_k M_k^T p = 0, unit component at the zero pivot and zeros after it."""
        if self.zero_pivot is None:
            raise NotSingular("factor has no zero pivot")
        i = self.zero_pivot
        p = np.zeros(self.order)
        if i:
            p[:i] = solve_triangular(
                self._L[:i, :i], -self._L[i, :i], lower=True, trans="T", unit_diagonal=True
            )
        p[i] = 1.0
        return p


def ldl_fresh(S, zeta: float = DEFAULT_ZETA) -> LDLFactor:
    """Dense LDL^T factorization of a symmetric positive-semidefinite matrix."""
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {S.shape}")
    scale = max(1.0, float(np.abs(S).max(initial=0.0)))
    if np.abs(S - S.T).max(initial=0.0) > SYMMETRY_TOL * scale:
        raise NotSymmetric("matrix is not symmetric")

    n = S.shape[0]
    factor = LDLFactor(capacity=n, zeta=zeta)
    for j in range(n):
        try:
            factor._append(S[:j, j], S[j, j], strict=False)
        except NegativePivot as exc:
            raise IndefiniteMatrix(str(exc)) from exc
    if factor.zero_pivot is not None:
        logger.debug("fresh factorization of order %d is singular at %d", n, factor.zero_pivot)
    return factor
