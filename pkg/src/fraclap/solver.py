"""Pivot-free sparse LU of shifted Laplacian transposes.

Gaussian elimination without pivoting is legitimate here because the
intended operands S = L^T (strongly connected graph) and S - xi*I with
xi < 0 are irreducible M-matrices, for which elimination is stable with no
pivoting. The LDU factorization of the singular case (xi = 0) is exposed
through the left-null-vector solve; the diagonal factor is folded into U,
so the singular case surfaces as U[n-1, n-1] == 0.
"""

from collections import deque
from dataclasses import dataclass

import numpy as np

from fraclap._backend import kernels
from fraclap.errors import GraphStructureError, PivotBreakdownError, SingularSolveError
from fraclap.sparse import SparseMatrix, from_coo, transpose


@dataclass
class Permutation:
    """perm maps new position -> original index; inverse is its inverse.

    The reordered matrix is B[i, j] = A[perm[i], perm[j]].
    """

    perm: np.ndarray
    inverse: np.ndarray

    @classmethod
    def from_order(cls, order):
        order = np.asarray(order, dtype=np.int64)
        inverse = np.empty_like(order)
        inverse[order] = np.arange(len(order), dtype=np.int64)
        return cls(order, inverse)

    @classmethod
    def identity(cls, n):
        idx = np.arange(n, dtype=np.int64)
        return cls(idx, idx.copy())


@dataclass
class LUFactors:
    """Unit-lower L and upper U (diagonal first per row) of P^T (S - xi I) P."""

    Lfac: SparseMatrix
    Ufac: SparseMatrix
    perm: Permutation
    shift: float
    singular: bool = False

    @property
    def n(self):
        return self.Lfac.n_rows


def rcm_ordering(S):
    """Reverse Cuthill-McKee ordering of the symmetrized pattern S + S^T.

    Each connected component is started from its (lowest degree, lowest
    index) node; neighbors are visited in ascending (degree, index) order.
    """
    n = S.n_rows
    St = transpose(S)
    # symmetrized pattern, duplicate neighbors merged
    rows = np.concatenate(
        [
            np.repeat(np.arange(n, dtype=np.int64), np.diff(S.row_ptr)),
            St.col_idx,
        ]
    )
    cols = np.concatenate(
        [
            S.col_idx,
            np.repeat(np.arange(n, dtype=np.int64), np.diff(St.row_ptr)),
        ]
    )
    keep = rows != cols
    pattern = from_coo(n, n, rows[keep], cols[keep], np.ones(keep.sum()), drop_zeros=False)
    degree = np.diff(pattern.row_ptr)

    visited = np.zeros(n, dtype=bool)
    order = np.empty(n, dtype=np.int64)
    pos = 0
    by_degree = np.lexsort((np.arange(n), degree))
    for start in by_degree:
        if visited[start]:
            continue
        visited[start] = True
        queue = deque([start])
        while queue:
            v = queue.popleft()
            order[pos] = v
            pos += 1
            nbrs, _ = pattern.row(v)
            nbrs = [w for w in nbrs if not visited[w]]
            nbrs.sort(key=lambda w: (degree[w], w))
            for w in nbrs:
                visited[w] = True
                queue.append(w)
    return Permutation.from_order(order[::-1].copy())


def _permuted_shifted_csr(S, perm, xi):
    """CSR arrays of B = P^T (S - xi I) P with a guaranteed diagonal slot."""
    n = S.n_rows
    p = perm.perm
    inv = perm.inverse
    rows = np.repeat(inv, np.diff(S.row_ptr))
    cols = inv[S.col_idx]
    rows = np.concatenate([rows, np.arange(n, dtype=np.int64)])
    cols = np.concatenate([cols, np.arange(n, dtype=np.int64)])
    vals = np.concatenate([S.values, np.full(n, -float(xi))])
    B = from_coo(n, n, rows, cols, vals, drop_zeros=False)
    return B


def lu_factorize(S, xi, ordering="rcm"):
    """LU of P^T (S - xi I) P by row-merge elimination without pivoting.

    ordering: "rcm" (default) or "natural". A near-zero pivot raises
    PivotBreakdownError except at the last step with xi == 0, where the
    factorization is marked singular with an exact zero last pivot.
    """
    if S.n_rows != S.n_cols:
        raise ValueError(f"matrix must be square, got {S.shape}")
    n = S.n_rows
    if ordering == "rcm":
        perm = rcm_ordering(S)
    elif ordering == "natural":
        perm = Permutation.identity(n)
    else:
        raise ValueError(f"unknown ordering {ordering!r}")
    B = _permuted_shifted_csr(S, perm, xi)
    allow_singular = xi == 0.0
    (l_ptr, l_idx, l_val, u_ptr, u_idx, u_val, singular) = kernels.lu_row_merge(
        n, B.row_ptr, B.col_idx, B.values, allow_singular
    )
    Lfac = SparseMatrix(n, n, l_ptr, l_idx, l_val)
    Ufac = SparseMatrix(n, n, u_ptr, u_idx, u_val)
    return LUFactors(Lfac, Ufac, perm, float(xi), singular)


def solve(fac, b):
    """x with (S - xi I) x = b using precomputed factors."""
    if fac.singular:
        raise SingularSolveError("factors are singular; no general solve")
    y = np.array(b, dtype=np.float64)[fac.perm.perm]
    kernels.solve_lower_unit(fac.Lfac.row_ptr, fac.Lfac.col_idx, fac.Lfac.values, y)
    kernels.solve_upper(fac.Ufac.row_ptr, fac.Ufac.col_idx, fac.Ufac.values, y)
    x = np.empty_like(y)
    x[fac.perm.perm] = y
    return x


def null_left_vector(sys, ordering="rcm"):
    """Left null vector z of L: L^T z = 0, z > 0, sum(z) = 1.

    Computed from the singular LDU of P^T L^T P by fixing the last unknown
    to 1 and back-substituting the upper-triangular factor. Requires a
    strongly connected graph; elimination breakdown before the last step
    signals that the requirement fails.
    """
    n = sys.n
    if n == 1:
        return np.ones(1)
    try:
        fac = lu_factorize(sys.Lt, 0.0, ordering=ordering)
    except PivotBreakdownError as exc:
        raise GraphStructureError(
            f"graph is not strongly connected (elimination broke down at step {exc.step})"
        ) from exc
    U = fac.Ufac
    zhat = np.zeros(n)
    zhat[n - 1] = 1.0
    for i in range(n - 2, -1, -1):
        s, e = U.row_ptr[i], U.row_ptr[i + 1]
        acc = 0.0
        if e > s + 1:
            acc = np.dot(U.values[s + 1 : e], zhat[U.col_idx[s + 1 : e]])
        zhat[i] = -acc / U.values[s]
    z = np.empty(n)
    z[fac.perm.perm] = zhat
    total = z.sum()
    if total <= 0:
        raise GraphStructureError("null vector failed positivity; graph not strongly connected")
    return z / total


def ensure_nullvec(sys, ordering="rcm"):
    """Compute and cache z on the system if absent."""
    if sys.z is None:
        sys.z = null_left_vector(sys, ordering=ordering)
    return sys.z


def reconstruction_error(fac, S):
    """inf-norm of P^T (S - xi I) P - Lfac Ufac, for tests (dense, small n)."""
    B = _permuted_shifted_csr(S, fac.perm, fac.shift).to_dense()
    LU = fac.Lfac.to_dense() @ fac.Ufac.to_dense()
    return float(np.max(np.abs(B - LU)))
